//! Evaluation protocols: rank correlation against similarity ratings, and
//! binary classification of concept pairs against sampled negatives.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::SimilarityProvider;
use crate::error::{Error, Result};
use crate::graph::ConceptId;
use crate::numerics::{average_ranks, fit_logistic_1d, spearman_rho, LogisticConfig};
use crate::tsv::{format_significant, parse_f64, read_tsv};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatedPair {
    pub a: ConceptId,
    pub b: ConceptId,
    pub rating: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConceptPair {
    pub a: ConceptId,
    pub b: ConceptId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<u64>,
}

impl ConceptPair {
    pub fn new(a: impl Into<ConceptId>, b: impl Into<ConceptId>) -> Self {
        ConceptPair { a: a.into(), b: b.into(), weight: None }
    }

    /// Order-independent key.
    pub fn unordered(&self) -> (ConceptId, ConceptId) {
        unordered(&self.a, &self.b)
    }
}

fn unordered(a: &ConceptId, b: &ConceptId) -> (ConceptId, ConceptId) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// `CONCEPT_A\tCONCEPT_B\tRATING`
pub fn load_rated_pairs(path: &Path) -> Result<Vec<RatedPair>> {
    let rows = read_tsv(path, &["CONCEPT_A", "CONCEPT_B", "RATING"], &[])?;
    rows.iter()
        .map(|row| {
            if row.fields.len() != 3 {
                return Err(Error::parse(path, row.line, format!("expected 3 fields, found {}", row.fields.len())));
            }
            let (a, b) = pair_fields(path, row.line, &row.fields)?;
            let rating = parse_f64(path, row.line, &row.fields[2], "rating")?;
            Ok(RatedPair { a, b, rating })
        })
        .collect()
}

/// `CONCEPT_A\tCONCEPT_B[\tWEIGHT]`
pub fn load_concept_pairs(path: &Path) -> Result<Vec<ConceptPair>> {
    let rows = read_tsv(path, &["CONCEPT_A", "CONCEPT_B"], &["WEIGHT"])?;
    rows.iter()
        .map(|row| {
            if !(2..=3).contains(&row.fields.len()) {
                return Err(Error::parse(path, row.line, format!("expected 2 or 3 fields, found {}", row.fields.len())));
            }
            let (a, b) = pair_fields(path, row.line, &row.fields)?;
            let weight = match row.fields.get(2).map(|w| w.trim()) {
                None | Some("") => None,
                Some(w) => Some(
                    w.parse::<u64>()
                        .map_err(|_| Error::parse(path, row.line, format!("weight {w:?} is not a non-negative integer")))?,
                ),
            };
            Ok(ConceptPair { a, b, weight })
        })
        .collect()
}

fn pair_fields(path: &Path, line: usize, fields: &[String]) -> Result<(ConceptId, ConceptId)> {
    let a = ConceptId::new(fields[0].trim()).map_err(|_| Error::parse(path, line, "empty CONCEPT_A"))?;
    let b = ConceptId::new(fields[1].trim()).map_err(|_| Error::parse(path, line, "empty CONCEPT_B"))?;
    if a == b {
        return Err(Error::parse(path, line, format!("pair of {a} with itself")));
    }
    Ok((a, b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Lsim,
    Shift,
    Links,
}

impl Task {
    pub fn metric_name(self) -> &'static str {
        match self {
            Task::Lsim => "spearman_rho",
            Task::Shift | Task::Links => "mean_accuracy",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub provider: String,
    /// Spearman ρ or mean accuracy.
    pub metric: f64,
    /// Standard deviation over runs, present only with several runs.
    pub spread: Option<f64>,
    /// `evaluated / total`
    pub coverage: f64,
    pub evaluated: usize,
    pub total: usize,
    pub runs: usize,
    pub seed: Option<u64>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let rows = [
            ("task", format!("{:?}", self.task).to_lowercase()),
            ("provider", self.provider.clone()),
            (self.task.metric_name(), format_significant(self.metric, 4)),
            ("spread", self.spread.map_or("-".into(), |s| format_significant(s, 4))),
            ("coverage", format!("{}/{} ({:.3})", self.evaluated, self.total, self.coverage)),
            ("runs", self.runs.to_string()),
            ("seed", self.seed.map_or("-".into(), |s| s.to_string())),
        ];
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<14}{v}");
        }
        out
    }
}

/// Spearman correlation between ratings and provider scores over the pairs
/// whose concepts the provider covers. Distances are used as they are, so
/// distance providers correlate negatively.
pub fn eval_lsim(sim: &dyn SimilarityProvider, pairs: &[RatedPair]) -> Result<EvalReport> {
    if pairs.is_empty() {
        return Err(Error::Argument("no rated pairs".into()));
    }
    let mut ratings = Vec::new();
    let mut scores = Vec::new();
    for p in pairs {
        if sim.covers(&p.a) && sim.covers(&p.b) {
            ratings.push(p.rating);
            scores.push(sim.score(&p.a, &p.b)?);
        }
    }
    if ratings.len() < 3 {
        return Err(Error::InsufficientData { evaluable: ratings.len(), required: 3 });
    }
    let rho = spearman_rho(&ratings, &scores)?;
    Ok(EvalReport {
        task: Task::Lsim,
        provider: sim.source().to_string(),
        metric: rho,
        spread: None,
        coverage: ratings.len() as f64 / pairs.len() as f64,
        evaluated: ratings.len(),
        total: pairs.len(),
        runs: 1,
        seed: None,
    })
}

const MAX_REDRAWS: usize = 1000;

/// One negative per positive: a uniformly chosen side is replaced by a
/// uniform draw from `pool`, redrawn while the result is a self-pair or a
/// positive (in either order).
pub fn draw_negatives(positives: &[ConceptPair], pool: &[ConceptId], seed: u64) -> Result<Vec<ConceptPair>> {
    if pool.len() < 2 {
        return Err(Error::Argument("negative-sampling pool needs at least two concepts".into()));
    }
    let known: HashSet<(ConceptId, ConceptId)> = positives.iter().map(ConceptPair::unordered).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(positives.len());
    for p in positives {
        let mut drawn = None;
        for _ in 0..MAX_REDRAWS {
            let other = &pool[rng.random_range(0..pool.len())];
            let (a, b) = if rng.random_bool(0.5) { (other, &p.b) } else { (&p.a, other) };
            if a != b && !known.contains(&unordered(a, b)) {
                drawn = Some(ConceptPair::new(a.clone(), b.clone()));
                break;
            }
        }
        match drawn {
            Some(n) => out.push(n),
            None => {
                return Err(Error::Sampling(format!(
                    "no valid negative for ({}, {}) after {MAX_REDRAWS} draws",
                    p.a, p.b
                )))
            }
        }
    }
    Ok(out)
}

/// How scores become the classifier's feature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureTransform {
    /// Standardized average ranks; accuracy then depends only on the order
    /// of the scores.
    #[default]
    Rank,
    /// Scores as they are.
    Raw,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryConfig {
    pub runs: usize,
    pub seed: u64,
    pub transform: FeatureTransform,
}

impl Default for BinaryConfig {
    fn default() -> Self {
        BinaryConfig { runs: 50, seed: 0, transform: FeatureTransform::Rank }
    }
}

/// Per-run accuracies behind a binary report.
#[derive(Clone, Debug)]
pub struct BinaryOutcome {
    pub report: EvalReport,
    pub accuracies: Vec<f64>,
}

/// Positives against freshly drawn negatives, `runs` times with seeds
/// `seed + r`. Each run fits a one-feature logistic regression on the
/// similarity scores and records its in-sample accuracy. Pairs touching
/// concepts the provider does not cover are left out of every run.
pub fn eval_binary(
    sim: &dyn SimilarityProvider,
    task: Task,
    positives: &[ConceptPair],
    pool: &[ConceptId],
    cfg: &BinaryConfig,
) -> Result<BinaryOutcome> {
    if positives.is_empty() {
        return Err(Error::Argument("no positive pairs".into()));
    }
    if cfg.runs == 0 {
        return Err(Error::Argument("runs must be at least 1".into()));
    }
    let covered = |p: &ConceptPair| sim.covers(&p.a) && sim.covers(&p.b);
    let evaluated = positives.iter().filter(|p| covered(p)).count();
    if evaluated == 0 {
        return Err(Error::InsufficientData { evaluable: 0, required: 1 });
    }

    let accuracies = (0..cfg.runs)
        .into_par_iter()
        .map(|r| {
            let negatives = draw_negatives(positives, pool, cfg.seed.wrapping_add(r as u64))?;
            let mut features = Vec::new();
            let mut labels = Vec::new();
            for (pairs, label) in [(positives, true), (negatives.as_slice(), false)] {
                for p in pairs.iter().filter(|p| covered(p)) {
                    let s = sim.score(&p.a, &p.b)?;
                    features.push(if sim.higher_is_more_similar() { s } else { -s });
                    labels.push(label);
                }
            }
            if cfg.transform == FeatureTransform::Rank {
                features = standardized_ranks(&features);
            }
            let fit = fit_logistic_1d(&features, &labels, &LogisticConfig::default())?;
            Ok(fit.model.accuracy(&features, &labels))
        })
        .collect::<Result<Vec<f64>>>()?;

    let n = accuracies.len() as f64;
    let mean = accuracies.iter().sum::<f64>() / n;
    let spread = (accuracies.len() > 1)
        .then(|| (accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    Ok(BinaryOutcome {
        report: EvalReport {
            task,
            provider: sim.source().to_string(),
            metric: mean,
            spread,
            coverage: evaluated as f64 / positives.len() as f64,
            evaluated,
            total: positives.len(),
            runs: cfg.runs,
            seed: Some(cfg.seed),
        },
        accuracies,
    })
}

fn standardized_ranks(xs: &[f64]) -> Vec<f64> {
    let ranks = average_ranks(xs);
    let n = ranks.len() as f64;
    let mean = ranks.iter().sum::<f64>() / n;
    let sd = (ranks.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd == 0.0 {
        return vec![0.0; ranks.len()];
    }
    ranks.iter().map(|r| (r - mean) / sd).collect()
}

/// Keeps edges of weight at least `min_weight` whose endpoints both lie in
/// `space`, merging pairs that repeat in either order (the heavier weight
/// wins, first position is kept).
pub fn filter_association_pairs(
    edges: &[ConceptPair],
    min_weight: u64,
    space: &BTreeSet<ConceptId>,
) -> Result<Vec<ConceptPair>> {
    let mut out: Vec<ConceptPair> = Vec::new();
    let mut position: HashMap<(ConceptId, ConceptId), usize> = HashMap::new();
    for e in edges {
        let w = e
            .weight
            .ok_or_else(|| Error::Validation(format!("association edge ({}, {}) has no weight", e.a, e.b)))?;
        if w < min_weight || !space.contains(&e.a) || !space.contains(&e.b) {
            continue;
        }
        match position.get(&e.unordered()) {
            Some(&i) => {
                let kept = &mut out[i];
                kept.weight = kept.weight.max(Some(w));
            }
            None => {
                position.insert(e.unordered(), out.len());
                out.push(e.clone());
            }
        }
    }
    Ok(out)
}

/// Distinct concepts mentioned by the pairs, sorted.
pub fn pair_concepts(pairs: &[ConceptPair]) -> Vec<ConceptId> {
    pairs
        .iter()
        .flat_map(|p| [p.a.clone(), p.b.clone()])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::SimilaritySource;
    use std::collections::BTreeMap;

    /// Scores from a lookup table; unknown pairs score `default`.
    struct Table {
        scores: BTreeMap<(ConceptId, ConceptId), f64>,
        concepts: BTreeSet<ConceptId>,
        default: f64,
        distance: bool,
    }

    impl SimilarityProvider for Table {
        fn source(&self) -> SimilaritySource {
            SimilaritySource::Embedding
        }
        fn higher_is_more_similar(&self) -> bool {
            !self.distance
        }
        fn covers(&self, c: &ConceptId) -> bool {
            self.concepts.contains(c)
        }
        fn concepts(&self) -> Vec<ConceptId> {
            self.concepts.iter().cloned().collect()
        }
        fn score(&self, a: &ConceptId, b: &ConceptId) -> Result<f64> {
            if !self.covers(a) || !self.covers(b) {
                return Err(Error::Lookup(format!("{a}/{b}")));
            }
            Ok(*self.scores.get(&unordered(a, b)).unwrap_or(&self.default))
        }
    }

    fn ids(n: usize) -> Vec<ConceptId> {
        (0..n).map(|i| ConceptId::new(format!("C{i:03}")).unwrap()).collect()
    }

    fn rated(scores: &[(f64, f64)]) -> (Table, Vec<RatedPair>) {
        let cs = ids(scores.len() + 1);
        let mut table = BTreeMap::new();
        let mut pairs = Vec::new();
        for (i, &(rating, score)) in scores.iter().enumerate() {
            table.insert(unordered(&cs[i], &cs[i + 1]), score);
            pairs.push(RatedPair { a: cs[i].clone(), b: cs[i + 1].clone(), rating });
        }
        let t = Table { scores: table, concepts: cs.into_iter().collect(), default: 0.0, distance: false };
        (t, pairs)
    }

    #[test]
    fn lsim_perfect_and_coverage() {
        let (t, mut pairs) = rated(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0), (4.0, 4.0)]);
        let r = eval_lsim(&t, &pairs).unwrap();
        assert!((r.metric - 1.0).abs() < 1e-12);
        assert_eq!((r.evaluated, r.total), (4, 4));
        pairs.push(RatedPair { a: "X".into(), b: "Y".into(), rating: 2.0 });
        let r = eval_lsim(&t, &pairs).unwrap();
        assert_eq!((r.evaluated, r.total), (4, 5));
        assert!((r.coverage - 0.8).abs() < 1e-12);
        assert!(r.spread.is_none());
    }

    #[test]
    fn lsim_without_coverage_fails() {
        let (t, _) = rated(&[(1.0, 1.0)]);
        let pairs = vec![RatedPair { a: "X".into(), b: "Y".into(), rating: 2.0 }];
        assert!(matches!(eval_lsim(&t, &pairs), Err(Error::InsufficientData { evaluable: 0, .. })));
    }

    #[test]
    fn negatives_follow_contract() {
        let positives = vec![ConceptPair::new("TREE", "FOREST")];
        let pool: Vec<ConceptId> = ["TREE", "FOREST", "BARK"].iter().map(|&c| c.into()).collect();
        for seed in 0..50 {
            let neg = draw_negatives(&positives, &pool, seed).unwrap();
            assert_eq!(neg.len(), 1);
            let n = &neg[0];
            let hits = [&n.a, &n.b].iter().filter(|c| ["TREE", "FOREST"].contains(&c.as_str())).count();
            assert_eq!(hits, 1);
            assert_eq!(draw_negatives(&positives, &pool, seed).unwrap(), neg);
        }
        let tiny: Vec<ConceptId> = ["TREE", "FOREST"].iter().map(|&c| c.into()).collect();
        assert!(matches!(draw_negatives(&positives, &tiny, 1), Err(Error::Sampling(_))));
    }

    fn separable(n: usize) -> (Table, Vec<ConceptPair>, Vec<ConceptId>) {
        let cs = ids(2 * n);
        let mut scores = BTreeMap::new();
        let mut positives = Vec::new();
        for i in 0..n {
            scores.insert(unordered(&cs[2 * i], &cs[2 * i + 1]), 1.0);
            positives.push(ConceptPair::new(cs[2 * i].clone(), cs[2 * i + 1].clone()));
        }
        let t = Table { scores, concepts: cs.iter().cloned().collect(), default: 0.0, distance: false };
        (t, positives, cs)
    }

    #[test]
    fn separable_scores_classify_perfectly() {
        let (t, positives, pool) = separable(40);
        for transform in [FeatureTransform::Rank, FeatureTransform::Raw] {
            let cfg = BinaryConfig { runs: 5, seed: 3, transform };
            let out = eval_binary(&t, Task::Shift, &positives, &pool, &cfg).unwrap();
            assert_eq!(out.report.metric, 1.0);
            assert_eq!(out.report.spread, Some(0.0));
        }
    }

    #[test]
    fn distance_providers_are_negated() {
        let (mut t, positives, pool) = separable(30);
        t.distance = true;
        for v in t.scores.values_mut() {
            *v = 0.0;
        }
        t.default = 5.0;
        let out = eval_binary(&t, Task::Links, &positives, &pool, &BinaryConfig { runs: 3, ..Default::default() }).unwrap();
        assert_eq!(out.report.metric, 1.0);
    }

    #[test]
    fn association_filter() {
        let space: BTreeSet<ConceptId> = ["A", "B", "C"].iter().map(|&c| c.into()).collect();
        let mk = |a: &str, b: &str, w: u64| ConceptPair { a: a.into(), b: b.into(), weight: Some(w) };
        let edges = vec![mk("A", "B", 4), mk("A", "C", 5), mk("A", "Z", 9), mk("C", "A", 7), mk("B", "C", 6)];
        let kept = filter_association_pairs(&edges, 5, &space).unwrap();
        assert_eq!(kept, vec![mk("A", "C", 7), mk("B", "C", 6)]);
        assert!(filter_association_pairs(&[ConceptPair::new("A", "B")], 5, &space).is_err());
    }

    #[test]
    fn loaders() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.tsv");
        std::fs::write(&p, "CONCEPT_A\tCONCEPT_B\tRATING\nTREE\tBARK\t3.5\n").unwrap();
        assert_eq!(load_rated_pairs(&p).unwrap()[0].rating, 3.5);
        std::fs::write(&p, "CONCEPT_A\tCONCEPT_B\nTREE\tBARK\nSEA\tSEA\n").unwrap();
        assert!(matches!(load_concept_pairs(&p), Err(Error::Parse { line: 3, .. })));
        std::fs::write(&p, "CONCEPT_A\tCONCEPT_B\tWEIGHT\nTREE\tBARK\t12\n").unwrap();
        assert_eq!(load_concept_pairs(&p).unwrap()[0].weight, Some(12));
    }

    #[test]
    fn report_formats() {
        let r = EvalReport {
            task: Task::Shift,
            provider: "PPMI".into(),
            metric: 0.8123,
            spread: Some(0.01),
            coverage: 0.5,
            evaluated: 1,
            total: 2,
            runs: 50,
            seed: Some(7),
        };
        let back: EvalReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_table().contains("mean_accuracy 0.8123"));
    }
}
