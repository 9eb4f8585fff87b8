//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and maps the outcome to a process exit code.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::baselines::{similarity_matrix, similarity_matrix_tsv, BaselineMethod, EmbeddingProvider, SimilarityProvider};
use crate::colexifier::{infer_network, infer_undirected_network, ColexParams, Wordlist};
use crate::combine::combine;
use crate::embedding::{config_digest, file_digest, EmbeddingSet};
use crate::error::{Error, Result};
use crate::eval::{
    eval_binary, eval_lsim, filter_association_pairs, load_concept_pairs, load_rated_pairs,
    pair_concepts, BinaryConfig, ConceptPair, EvalReport, FeatureTransform, Task,
};
use crate::graph::{ColexGraph, ColexType, ConceptId, DenseMatrix};
use crate::node2vec::{node2vec, SkipGramConfig, WalkConfig};
use crate::prone::{prone, ProneConfig};
use crate::tsv::format_significant;
use crate::viz::{export_scatter, load_concept_list, tsne_project, TsneConfig};

#[derive(Parser, Debug)]
#[command(name = "colexvec", version, about = "Concept embeddings from colexification networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Infer a colexification network from a wordlist
    Colexify(ColexifyArgs),
    /// Train node embeddings on a network
    Embed(EmbedArgs),
    /// Concatenate embeddings and reduce them with PCA
    Combine(CombineArgs),
    /// Score concept pairs with a topology baseline
    Baseline(BaselineArgs),
    /// Spearman correlation against rated concept pairs
    EvalLsim(LsimArgs),
    /// Classify semantic-shift pairs against sampled negatives
    EvalShift(BinaryArgs),
    /// Classify association links against sampled negatives
    EvalLinks(BinaryArgs),
    /// Project an embedding to 2-D with t-SNE
    Viz(VizArgs),
    /// Run a declared sequence of steps from a JSON configuration
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug)]
struct ColexifyArgs {
    #[arg(long)]
    wordlist: PathBuf,
    #[arg(long = "type", value_parser = parse_colex_type)]
    kind: ColexType,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    min_form_len: Option<usize>,
    #[arg(long)]
    min_overlap_len: Option<usize>,
    /// Merge both directions of affix edges, counting the union of families
    #[arg(long)]
    undirected: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EmbedMethod {
    Node2vec,
    Prone,
}

#[derive(Args, Debug)]
struct EmbedArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum)]
    method: EmbedMethod,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    dim: Option<usize>,
    // node2vec
    #[arg(long)]
    walks_per_node: Option<usize>,
    #[arg(long)]
    walk_length: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    validation_split: Option<f64>,
    /// Write per-epoch losses as JSON (node2vec only)
    #[arg(long)]
    history: Option<PathBuf>,
    // prone
    #[arg(long)]
    step: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    exponent: Option<f64>,
    #[arg(long)]
    shift: Option<f64>,
}

#[derive(Args, Debug)]
struct CombineArgs {
    /// Comma-separated embedding files
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Defaults to the dimension of the first input
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_parser = parse_baseline)]
    method: BaselineMethod,
    /// Pairs to score; without it the full concept-by-concept matrix is written
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LsimArgs {
    /// Embedding file, or `<baseline>:<graph>` such as `shortest-path:full.tsv`
    #[arg(long)]
    sim: String,
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args, Debug)]
struct BinaryArgs {
    /// Embedding file, or `<baseline>:<graph>` such as `ppmi:affix.tsv`
    #[arg(long)]
    sim: String,
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    runs: usize,
    /// Minimum association weight (links only)
    #[arg(long, default_value_t = 5)]
    min_weight: u64,
    /// Concepts for negative sampling, one per line; defaults to the concepts of the pairs
    #[arg(long)]
    pool: Option<PathBuf>,
    /// Graphs whose nodes bound the concept space for links (comma-separated)
    #[arg(long, value_delimiter = ',')]
    space: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = TransformArg::Rank)]
    transform: TransformArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TransformArg {
    Rank,
    Raw,
}

#[derive(Args, Debug)]
struct VizArgs {
    #[arg(long)]
    embedding: PathBuf,
    /// Concepts to plot, one per line; all concepts when omitted
    #[arg(long)]
    concepts: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 15.0)]
    perplexity: f64,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[arg(long)]
    config: PathBuf,
    /// Defaults to `report.json` next to the configuration
    #[arg(long)]
    report: Option<PathBuf>,
}

fn parse_colex_type(s: &str) -> std::result::Result<ColexType, String> {
    s.parse::<ColexType>().map_err(|e| e.to_string())
}

fn parse_baseline(s: &str) -> std::result::Result<BaselineMethod, String> {
    s.parse::<BaselineMethod>().map_err(|e| e.to_string())
}

/// Parses `argv` (without the program name) and runs the subcommand.
/// Returns 0 on success, 1 on usage or validation errors, 2 on I/O errors.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = std::iter::once(std::ffi::OsString::from("colexvec")).chain(argv.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("COLEXVEC_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Argument(format!("COLEXVEC_THREADS={value:?} is not a positive integer")))?;
    if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
        log::debug!("thread pool already configured");
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Colexify(a) => cmd_colexify(a),
        Command::Embed(a) => cmd_embed(a),
        Command::Combine(a) => cmd_combine(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::EvalLsim(a) => cmd_eval_lsim(a),
        Command::EvalShift(a) => cmd_eval_binary(a, Task::Shift),
        Command::EvalLinks(a) => cmd_eval_binary(a, Task::Links),
        Command::Viz(a) => cmd_viz(a),
        Command::Pipeline(a) => cmd_pipeline(a),
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    write(path, serde_json::to_string_pretty(value).expect("json serializes") + "\n")
}

fn colexify(w: &Wordlist, kind: ColexType, params: &ColexParams, undirected: bool) -> Result<ColexGraph> {
    if undirected {
        infer_undirected_network(w, kind, params)
    } else {
        infer_network(w, kind, params)
    }
}

fn cmd_colexify(a: ColexifyArgs) -> Result<()> {
    let w = Wordlist::load(&a.wordlist)?;
    let defaults = ColexParams::default();
    let params = ColexParams {
        min_form_len: a.min_form_len.unwrap_or(defaults.min_form_len),
        min_overlap_len: a.min_overlap_len.unwrap_or(defaults.min_overlap_len),
        ..defaults
    };
    let g = colexify(&w, a.kind, &params, a.undirected)?;
    log::info!("{} network: {} nodes, {} edges", a.kind, g.nodes().len(), g.edges().len());
    g.save(&a.out)
}

/// Graph ready for embedding: directed input is merged to undirected.
fn load_undirected(path: &Path) -> Result<ColexGraph> {
    let g = ColexGraph::load(path)?;
    if g.is_directed() {
        log::info!("{}: merging directed edges", path.display());
        Ok(g.to_undirected())
    } else {
        Ok(g)
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EmbedSettings {
    walks: WalkConfig,
    skipgram: SkipGramConfig,
    prone: ProneConfig,
}

impl EmbedSettings {
    fn with_seed(mut self, seed: u64) -> Self {
        self.walks.seed = seed;
        self.skipgram.seed = seed;
        self.prone.seed = seed;
        self
    }

    fn with_dim(mut self, dim: Option<usize>) -> Self {
        if let Some(d) = dim {
            self.skipgram.dim = d;
            self.prone.dim = d;
        }
        self
    }
}

struct Trained {
    embedding: EmbeddingSet,
    history: Option<Value>,
}

fn train(g: &ColexGraph, method: EmbedMethod, s: &EmbedSettings) -> Result<Trained> {
    match method {
        EmbedMethod::Node2vec => {
            let out = node2vec(g, &s.walks, &s.skipgram)?;
            if !out.uncovered.is_empty() {
                log::info!("{} isolated nodes without vectors", out.uncovered.len());
            }
            Ok(Trained {
                embedding: out.embedding,
                history: Some(serde_json::to_value(&out.history).expect("history serializes")),
            })
        }
        EmbedMethod::Prone => {
            let out = prone(g, &s.prone)?;
            if !out.uncovered.is_empty() {
                log::info!("{} isolated nodes without vectors", out.uncovered.len());
            }
            Ok(Trained { embedding: out.embedding, history: None })
        }
    }
}

fn cmd_embed(a: EmbedArgs) -> Result<()> {
    let g = load_undirected(&a.graph)?;
    let mut s = EmbedSettings::default().with_seed(a.seed).with_dim(a.dim);
    macro_rules! set {
        ($($arg:ident => $($target:ident).+),* $(,)?) => {
            $(if let Some(v) = a.$arg { s.$($target).+ = v; })*
        };
    }
    set!(
        walks_per_node => walks.walks_per_node,
        walk_length => walks.walk_length,
        p => walks.p,
        q => walks.q,
        window => skipgram.window,
        epochs => skipgram.epochs,
        learning_rate => skipgram.learning_rate,
        batch_size => skipgram.batch_size,
        validation_split => skipgram.validation_split,
        step => prone.step,
        mu => prone.mu,
        theta => prone.theta,
        exponent => prone.exponent,
        shift => prone.shift,
    );
    let trained = train(&g, a.method, &s)?;
    trained.embedding.save(&a.out)?;
    if let (Some(path), Some(history)) = (&a.history, &trained.history) {
        write_json(path, history)?;
    }
    Ok(())
}

fn cmd_combine(a: CombineArgs) -> Result<()> {
    let sets = a.inputs.iter().map(|p| EmbeddingSet::load(p)).collect::<Result<Vec<_>>>()?;
    let dim = match a.dim {
        Some(d) => d,
        None => sets.first().map(EmbeddingSet::dim).ok_or_else(|| Error::Argument("no inputs".into()))?,
    };
    combine(&sets, dim)?.save(&a.out)
}

/// Pairs from either a rated-pair file or a concept-pair file.
fn load_any_pairs(path: &Path) -> Result<Vec<(ConceptId, ConceptId)>> {
    match load_concept_pairs(path) {
        Ok(pairs) => Ok(pairs.into_iter().map(|p| (p.a, p.b)).collect()),
        Err(Error::Parse { line: 1, .. }) => {
            Ok(load_rated_pairs(path)?.into_iter().map(|p| (p.a, p.b)).collect())
        }
        Err(e) => Err(e),
    }
}

fn cmd_baseline(a: BaselineArgs) -> Result<()> {
    let g = ColexGraph::load(&a.graph)?;
    let provider = a.method.provider(&g)?;
    let text = match &a.pairs {
        None => similarity_matrix_tsv(&similarity_matrix(provider.as_ref(), &provider.concepts())?),
        Some(path) => {
            let mut out = String::from("CONCEPT_A\tCONCEPT_B\tSCORE\n");
            for (x, y) in load_any_pairs(path)? {
                let score = if provider.covers(&x) && provider.covers(&y) {
                    format_significant(provider.score(&x, &y)?, 10)
                } else {
                    "NA".to_string()
                };
                out.push_str(&format!("{x}\t{y}\t{score}\n"));
            }
            out
        }
    };
    write(&a.out, text)
}

/// A similarity provider built from a `--sim` argument, with the files it
/// was read from.
struct Sim {
    provider: Box<dyn SimilarityProvider>,
    label: String,
    inputs: Vec<PathBuf>,
}

fn embedding_label(e: &EmbeddingSet) -> String {
    let types: Vec<&str> = e.provenance.colex_types.iter().map(|t| t.as_str()).collect();
    if types.is_empty() {
        e.provenance.method.clone()
    } else {
        format!("{} {}", e.provenance.method, types.join("/"))
    }
}

fn open_sim(target: &str) -> Result<Sim> {
    if let Some((method, graph)) = target.split_once(':') {
        if let Ok(method) = method.parse::<BaselineMethod>() {
            let path = PathBuf::from(graph);
            let g = ColexGraph::load(&path)?;
            let provider = method.provider(&g)?;
            let label = format!("{} {}", provider.source(), g.colex_type());
            return Ok(Sim { provider, label, inputs: vec![path] });
        }
    }
    let path = PathBuf::from(target);
    let e = EmbeddingSet::load(&path)?;
    Ok(Sim { label: embedding_label(&e), provider: Box::new(EmbeddingProvider::new(e)), inputs: vec![path] })
}

fn input_digests(paths: &[&Path]) -> Result<BTreeMap<String, String>> {
    paths
        .iter()
        .map(|p| Ok((p.display().to_string(), file_digest(p)?)))
        .collect()
}

fn command_report(command: &str, seed: Option<u64>, config: Value, inputs: &[&Path], result: Value) -> Result<Value> {
    Ok(json!({
        "command": command,
        "seed": seed,
        "config": config,
        "config_digest": config_digest(&config),
        "inputs": input_digests(inputs)?,
        "result": result,
    }))
}

fn cmd_eval_lsim(a: LsimArgs) -> Result<()> {
    let sim = open_sim(&a.sim)?;
    let pairs = load_rated_pairs(&a.pairs)?;
    let mut report = eval_lsim(sim.provider.as_ref(), &pairs)?;
    report.provider = sim.label.clone();
    print!("{}", report.to_table());
    let mut inputs: Vec<&Path> = sim.inputs.iter().map(PathBuf::as_path).collect();
    inputs.push(&a.pairs);
    let config = json!({ "sim": a.sim, "pairs": a.pairs });
    let out = command_report("eval-lsim", None, config, &inputs, serde_json::to_value(&report).expect("serializes"))?;
    write_json(&a.report, &out)
}

fn graph_nodes(paths: &[PathBuf]) -> Result<BTreeSet<ConceptId>> {
    let mut nodes = BTreeSet::new();
    for p in paths {
        nodes.extend(ColexGraph::load(p)?.nodes().iter().cloned());
    }
    Ok(nodes)
}

fn cmd_eval_binary(a: BinaryArgs, task: Task) -> Result<()> {
    let sim = open_sim(&a.sim)?;
    let mut positives = load_concept_pairs(&a.pairs)?;
    if task == Task::Links {
        let space = if a.space.is_empty() {
            sim.provider.concepts().into_iter().collect()
        } else {
            graph_nodes(&a.space)?
        };
        positives = filter_association_pairs(&positives, a.min_weight, &space)?;
        log::info!("{} association pairs after filtering", positives.len());
    }
    let pool = match &a.pool {
        Some(p) => load_concept_list(p)?,
        None => pair_concepts(&positives),
    };
    let transform = match a.transform {
        TransformArg::Rank => FeatureTransform::Rank,
        TransformArg::Raw => FeatureTransform::Raw,
    };
    let cfg = BinaryConfig { runs: a.runs, seed: a.seed, transform };
    let mut outcome = eval_binary(sim.provider.as_ref(), task, &positives, &pool, &cfg)?;
    outcome.report.provider = sim.label.clone();
    print!("{}", outcome.report.to_table());

    let mut inputs: Vec<&Path> = sim.inputs.iter().map(PathBuf::as_path).collect();
    inputs.push(&a.pairs);
    inputs.extend(a.pool.iter().map(PathBuf::as_path));
    inputs.extend(a.space.iter().map(PathBuf::as_path));
    let config = json!({
        "sim": a.sim,
        "pairs": a.pairs,
        "runs": a.runs,
        "min_weight": (task == Task::Links).then_some(a.min_weight),
        "pool": a.pool,
        "space": a.space,
        "transform": transform,
    });
    let mut result = serde_json::to_value(&outcome.report).expect("serializes");
    result["accuracies"] = json!(outcome.accuracies);
    let name = if task == Task::Shift { "eval-shift" } else { "eval-links" };
    let out = command_report(name, Some(a.seed), config, &inputs, result)?;
    write_json(&a.report, &out)
}

fn cmd_viz(a: VizArgs) -> Result<()> {
    let e = EmbeddingSet::load(&a.embedding)?;
    let wanted = match &a.concepts {
        Some(p) => load_concept_list(p)?,
        None => e.concepts().cloned().collect(),
    };
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for c in wanted {
        match e.get(&c) {
            Some(v) => {
                labels.push(c);
                rows.push(v.to_vec());
            }
            None => log::warn!("{c} has no vector, skipped"),
        }
    }
    let m = DenseMatrix::from_rows(&rows)?.with_labels(labels.clone())?;
    let cfg = TsneConfig { perplexity: a.perplexity, iterations: a.iterations, seed: a.seed, ..Default::default() };
    let out = tsne_project(&m, &cfg)?;
    export_scatter(&out.coords, &labels, &a.out)?;
    Ok(())
}

/// One evaluation column: embeddings or a baseline over one or more
/// colexification types, scored on up to three tasks.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// `node2vec`, `prone`, or a baseline name such as `shortest-path`.
    pub method: String,
    pub colex_types: Vec<ColexType>,
    /// Networks are inferred from this wordlist unless given in `graphs`.
    #[serde(default)]
    pub wordlist: Option<PathBuf>,
    #[serde(default)]
    pub graphs: BTreeMap<ColexType, PathBuf>,
    #[serde(default)]
    pub colexifier: ColexParams,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub embedding: Value,
    #[serde(default)]
    pub lsim: Option<PathBuf>,
    #[serde(default)]
    pub shift: Option<PathBuf>,
    #[serde(default)]
    pub links: Option<PathBuf>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_min_weight")]
    pub min_weight: u64,
    /// Directory for intermediate networks and embeddings.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_runs() -> usize {
    50
}

fn default_min_weight() -> u64 {
    5
}

fn cmd_pipeline(a: PipelineArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config).map_err(|e| Error::io(&a.config, e))?;
    let raw: Value =
        serde_json::from_str(&text).map_err(|e| Error::parse(&a.config, e.line(), e.to_string()))?;
    let cfg: PipelineConfig = serde_json::from_value(raw.clone())
        .map_err(|e| Error::Validation(format!("{}: {e}", a.config.display())))?;
    let base = a.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let report = run_pipeline(&cfg, &base)?;
    let report = json!({
        "config": raw,
        "config_digest": config_digest(&raw),
        "seed": cfg.seed,
        "inputs": report.inputs,
        "column": report.column,
        "table": report.table,
    });
    for task in ["lsim", "shift", "links"] {
        let Some(r) = report["table"].get(task) else { continue };
        println!(
            "{task:<6}{:>10}  ± {:<10} coverage {}",
            r["metric"].as_f64().map_or("-".into(), |m| format_significant(m, 4)),
            r["spread"].as_f64().map_or("-".into(), |s| format_significant(s, 4)),
            r["coverage"]
        );
    }
    let out = a.report.unwrap_or_else(|| base.join("report.json"));
    write_json(&out, &report)
}

/// Consolidated outcome of a pipeline run.
pub struct PipelineOutcome {
    pub column: String,
    pub table: BTreeMap<String, EvalReport>,
    /// Input files (as written in the configuration) and their SHA-256.
    pub inputs: BTreeMap<String, String>,
}

/// Executes a pipeline configuration; relative paths resolve against `base`.
pub fn run_pipeline(cfg: &PipelineConfig, base: &Path) -> Result<PipelineOutcome> {
    if cfg.colex_types.is_empty() {
        return Err(Error::Validation("colex_types is empty".into()));
    }
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    let mut inputs = BTreeMap::new();
    let mut record = |shown: &Path, full: &Path| -> Result<()> {
        inputs.insert(shown.display().to_string(), file_digest(full)?);
        Ok(())
    };
    let out_dir = cfg.out_dir.as_deref().map(resolve);
    if let Some(dir) = &out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }

    let wordlist = match &cfg.wordlist {
        Some(p) if cfg.colex_types.iter().any(|t| !cfg.graphs.contains_key(t)) => {
            record(p, &resolve(p))?;
            Some(Wordlist::load(&resolve(p))?)
        }
        _ => None,
    };
    let mut graphs = Vec::new();
    for &kind in &cfg.colex_types {
        let g = match (cfg.graphs.get(&kind), &wordlist) {
            (Some(p), _) => {
                record(p, &resolve(p))?;
                ColexGraph::load(&resolve(p))?
            }
            (None, Some(w)) => {
                let g = infer_undirected_network(w, kind, &cfg.colexifier)?;
                if let Some(dir) = &out_dir {
                    g.save(&dir.join(format!("{kind}.tsv")))?;
                }
                g
            }
            (None, None) => {
                return Err(Error::Validation(format!("no graph or wordlist for the {kind} network")));
            }
        };
        graphs.push(if g.is_directed() { g.to_undirected() } else { g });
    }
    let types: Vec<&str> = cfg.colex_types.iter().map(|t| t.as_str()).collect();
    let column = format!("{} {}", cfg.method, types.join("/"));

    let provider: Box<dyn SimilarityProvider> = if let Ok(baseline) = cfg.method.parse::<BaselineMethod>() {
        if graphs.len() != 1 {
            return Err(Error::Validation(format!("baseline {} takes exactly one network", cfg.method)));
        }
        baseline.provider(&graphs[0])?
    } else {
        let method = match cfg.method.as_str() {
            "node2vec" => EmbedMethod::Node2vec,
            "prone" => EmbedMethod::Prone,
            other => return Err(Error::Validation(format!("unknown method {other:?}"))),
        };
        let settings: EmbedSettings = if cfg.embedding.is_null() {
            EmbedSettings::default()
        } else {
            serde_json::from_value(cfg.embedding.clone())
                .map_err(|e| Error::Validation(format!("embedding settings: {e}")))?
        };
        let settings = settings.with_seed(cfg.seed).with_dim(cfg.dim);
        let mut sets = Vec::new();
        for (g, kind) in graphs.iter().zip(&cfg.colex_types) {
            let e = train(g, method, &settings)?.embedding;
            if let Some(dir) = &out_dir {
                e.save(&dir.join(format!("{}-{kind}.txt", cfg.method)))?;
            }
            sets.push(e);
        }
        let embedding = if sets.len() == 1 {
            sets.pop().expect("one set")
        } else {
            let e = combine(&sets, sets[0].dim())?;
            if let Some(dir) = &out_dir {
                e.save(&dir.join(format!("{}-{}.txt", cfg.method, types.join("-"))))?;
            }
            e
        };
        Box::new(EmbeddingProvider::new(embedding))
    };

    // negatives and the link concept space come from the networks, so every
    // method evaluated on the same networks sees the same samples
    let space: BTreeSet<ConceptId> = graphs.iter().flat_map(|g| g.nodes().iter().cloned()).collect();
    let pool: Vec<ConceptId> = space.iter().cloned().collect();
    let binary = BinaryConfig { runs: cfg.runs, seed: cfg.seed, transform: FeatureTransform::Rank };

    let mut table = BTreeMap::new();
    if let Some(p) = &cfg.lsim {
        record(p, &resolve(p))?;
        let mut r = eval_lsim(provider.as_ref(), &load_rated_pairs(&resolve(p))?)?;
        r.provider = column.clone();
        table.insert("lsim".to_string(), r);
    }
    if let Some(p) = &cfg.shift {
        record(p, &resolve(p))?;
        let positives: Vec<ConceptPair> = load_concept_pairs(&resolve(p))?;
        let mut r = eval_binary(provider.as_ref(), Task::Shift, &positives, &pool, &binary)?.report;
        r.provider = column.clone();
        table.insert("shift".to_string(), r);
    }
    if let Some(p) = &cfg.links {
        record(p, &resolve(p))?;
        let edges = load_concept_pairs(&resolve(p))?;
        let positives = filter_association_pairs(&edges, cfg.min_weight, &space)?;
        let mut r = eval_binary(provider.as_ref(), Task::Links, &positives, &pool, &binary)?.report;
        r.provider = column.clone();
        table.insert("links".to_string(), r);
    }
    Ok(PipelineOutcome { column, table, inputs })
}
