//! Similarity scores read directly off the graph topology.
//!
//! Four baselines are provided: shortest-path length over inverted weights
//! (a distance), cosine between adjacency rows, positive pointwise mutual
//! information, and cosine between truncated random-walk visit profiles.
//! All of them, and embedding cosine, sit behind [`SimilarityProvider`].

use std::fmt;
use std::sync::Arc;

use petgraph::graph::NodeIndex;
use petgraph::Graph;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::graph::{Adjacency, ColexGraph, ConceptId, DenseMatrix, WeightSemantics};
use crate::numerics::cosine_similarity;
use crate::tsv::format_significant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilaritySource {
    ShortestPath,
    CosineAdjacency,
    Ppmi,
    RandomWalk,
    Embedding,
}

impl fmt::Display for SimilaritySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimilaritySource::ShortestPath => "shortest path",
            SimilaritySource::CosineAdjacency => "cosine similarity",
            SimilaritySource::Ppmi => "PPMI",
            SimilaritySource::RandomWalk => "random walks",
            SimilaritySource::Embedding => "embedding",
        })
    }
}

/// Anything that scores concept pairs.
pub trait SimilarityProvider: Send + Sync {
    fn source(&self) -> SimilaritySource;

    /// `false` for distances, where smaller means more similar.
    fn higher_is_more_similar(&self) -> bool {
        true
    }

    fn covers(&self, c: &ConceptId) -> bool;

    /// Covered concepts in sorted order.
    fn concepts(&self) -> Vec<ConceptId>;

    /// Fails with [`Error::Lookup`] when either concept is not covered.
    fn score(&self, a: &ConceptId, b: &ConceptId) -> Result<f64>;
}

impl<P: SimilarityProvider + ?Sized> SimilarityProvider for Arc<P> {
    fn source(&self) -> SimilaritySource {
        (**self).source()
    }
    fn higher_is_more_similar(&self) -> bool {
        (**self).higher_is_more_similar()
    }
    fn covers(&self, c: &ConceptId) -> bool {
        (**self).covers(c)
    }
    fn concepts(&self) -> Vec<ConceptId> {
        (**self).concepts()
    }
    fn score(&self, a: &ConceptId, b: &ConceptId) -> Result<f64> {
        (**self).score(a, b)
    }
}

fn require_family_counts(g: &ColexGraph, what: &str) -> Result<()> {
    if g.weight_semantics() != WeightSemantics::FamilyCount {
        return Err(Error::Argument(format!("{what} needs family-count weights")));
    }
    Ok(())
}

/// Single-source Dijkstra over the graph's weights read as lengths.
fn dijkstra_from(graph: &Graph<(), f64>, source: usize) -> Vec<Option<f64>> {
    let dist = petgraph::algo::dijkstra(graph, NodeIndex::new(source), None, |e| *e.weight());
    let mut out = vec![None; graph.node_count()];
    for (node, d) in dist {
        out[node.index()] = Some(d);
    }
    out
}

fn to_petgraph(adj: &Adjacency) -> Graph<(), f64> {
    let mut graph: Graph<(), f64> = Graph::with_capacity(adj.len(), 0);
    for _ in 0..adj.len() {
        graph.add_node(());
    }
    for (i, row) in adj.out.iter().enumerate() {
        for &(j, w) in row {
            graph.add_edge(NodeIndex::new(i), NodeIndex::new(j), w);
        }
    }
    graph
}

/// Shortest-path length between two concepts; `None` when disconnected.
/// The graph must carry inverse-distance weights.
pub fn shortest_path_distance(g: &ColexGraph, a: &ConceptId, b: &ConceptId) -> Result<Option<f64>> {
    if g.weight_semantics() != WeightSemantics::InverseDistance {
        return Err(Error::Argument(
            "shortest paths need inverse-distance weights; invert the graph first".into(),
        ));
    }
    let adj = g.adjacency();
    let (i, j) = (adj.index_of(a)?, adj.index_of(b)?);
    if i == j {
        return Ok(Some(0.0));
    }
    Ok(dijkstra_from(&to_petgraph(&adj), i)[j])
}

/// All-pairs shortest paths. Disconnected pairs score twice the largest
/// finite distance in the graph (1.0 if the graph has no finite path).
pub struct ShortestPathProvider {
    adj: Adjacency,
    distances: Vec<Vec<Option<f64>>>,
    disconnected: f64,
}

impl ShortestPathProvider {
    /// Family-count graphs are inverted first.
    pub fn new(g: &ColexGraph) -> Self {
        let g = match g.weight_semantics() {
            WeightSemantics::FamilyCount => g.invert_weights(),
            WeightSemantics::InverseDistance => g.clone(),
        };
        let adj = g.adjacency();
        let graph = to_petgraph(&adj);
        let distances: Vec<Vec<Option<f64>>> =
            (0..adj.len()).into_par_iter().map(|s| dijkstra_from(&graph, s)).collect();
        let max = distances
            .iter()
            .flatten()
            .flatten()
            .copied()
            .fold(0.0, f64::max);
        let disconnected = if max > 0.0 { 2.0 * max } else { 1.0 };
        ShortestPathProvider {
            adj,
            distances,
            disconnected,
        }
    }

    /// Raw distance, `None` when no path exists.
    pub fn distance(&self, a: &ConceptId, b: &ConceptId) -> Result<Option<f64>> {
        let (i, j) = (self.adj.index_of(a)?, self.adj.index_of(b)?);
        Ok(self.distances[i][j])
    }

    pub fn disconnected_value(&self) -> f64 {
        self.disconnected
    }
}

impl SimilarityProvider for ShortestPathProvider {
    fn source(&self) -> SimilaritySource {
        SimilaritySource::ShortestPath
    }
    fn higher_is_more_similar(&self) -> bool {
        false
    }
    fn covers(&self, c: &ConceptId) -> bool {
        self.adj.index.contains_key(c)
    }
    fn concepts(&self) -> Vec<ConceptId> {
        self.adj.nodes.clone()
    }
    fn score(&self, a: &ConceptId, b: &ConceptId) -> Result<f64> {
        Ok(self.distance(a, b)?.unwrap_or(self.disconnected))
    }
}

fn sparse_cosine(u: &[(usize, f64)], v: &[(usize, f64)]) -> f64 {
    let nu: f64 = u.iter().map(|(_, x)| x * x).sum();
    let nv: f64 = v.iter().map(|(_, x)| x * x).sum();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    while i < u.len() && j < v.len() {
        match u[i].0.cmp(&v[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += u[i].1 * v[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    (dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0)
}

/// Cosine between adjacency rows; isolated nodes score 0.
pub struct CosineAdjacencyProvider {
    adj: Adjacency,
}

impl CosineAdjacencyProvider {
    pub fn new(g: &ColexGraph) -> Self {
        CosineAdjacencyProvider { adj: g.adjacency() }
    }
}

impl SimilarityProvider for CosineAdjacencyProvider {
    fn source(&self) -> SimilaritySource {
        SimilaritySource::CosineAdjacency
    }
    fn covers(&self, c: &ConceptId) -> bool {
        self.adj.index.contains_key(c)
    }
    fn concepts(&self) -> Vec<ConceptId> {
        self.adj.nodes.clone()
    }
    fn score(&self, a: &ConceptId, b: &ConceptId) -> Result<f64> {
        let (i, j) = (self.adj.index_of(a)?, self.adj.index_of(b)?);
        Ok(sparse_cosine(&self.adj.out[i], &self.adj.out[j]))
    }
}

pub fn cosine_adjacency_similarity(g: &ColexGraph, a: &ConceptId, b: &ConceptId) -> Result<f64> {
    CosineAdjacencyProvider::new(g).score(a, b)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PpmiMode {
    /// The PPMI value of the pair itself.
    #[default]
    Pairwise,
    /// Cosine between the two concepts' PPMI rows.
    RowCosine,
}

/// Positive pointwise mutual information over the adjacency matrix, with
/// `p(i, j) = A_ij / W` and `p(i) = rowsum_i / W`.
pub struct PpmiProvider {
    adj: Adjacency,
    rows: Vec<Vec<(usize, f64)>>,
    mode: PpmiMode,
}

impl PpmiProvider {
    pub fn new(g: &ColexGraph, mode: PpmiMode) -> Result<Self> {
        require_family_counts(g, "PPMI")?;
        let adj = g.adjacency();
        let row_sums: Vec<f64> = (0..adj.len()).map(|i| adj.weighted_degree(i)).collect();
        let total: f64 = row_sums.iter().sum();
        let rows = adj
            .out
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .filter_map(|&(j, w)| {
                        let pmi = (w * total / (row_sums[i] * row_sums[j])).ln();
                        (pmi > 0.0).then_some((j, pmi))
                    })
                    .collect()
            })
            .collect();
        Ok(PpmiProvider { adj, rows, mode })
    }
}

impl SimilarityProvider for PpmiProvider {
    fn source(&self) -> SimilaritySource {
        SimilaritySource::Ppmi
    }
    fn covers(&self, c: &ConceptId) -> bool {
        self.adj.index.contains_key(c)
    }
    fn concepts(&self) -> Vec<ConceptId> {
        self.adj.nodes.clone()
    }
    fn score(&self, a: &ConceptId, b: &ConceptId) -> Result<f64> {
        let (i, j) = (self.adj.index_of(a)?, self.adj.index_of(b)?);
        Ok(match self.mode {
            PpmiMode::Pairwise => self.rows[i]
                .binary_search_by_key(&j, |&(k, _)| k)
                .map(|pos| self.rows[i][pos].1)
                .unwrap_or(0.0),
            PpmiMode::RowCosine => sparse_cosine(&self.rows[i], &self.rows[j]),
        })
    }
}

pub fn ppmi_similarity(g: &ColexGraph, a: &ConceptId, b: &ConceptId) -> Result<f64> {
    PpmiProvider::new(g, PpmiMode::Pairwise)?.score(a, b)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomWalkParams {
    pub alpha: f64,
    pub max_steps: usize,
}

impl Default for RandomWalkParams {
    fn default() -> Self {
        RandomWalkParams {
            alpha: 0.5,
            max_steps: 5,
        }
    }
}

/// Cosine between decayed visit profiles `Σ_{k=1..K} αᵏ · (row v of Pᵏ)`,
/// with `P` the row-normalized adjacency.
pub struct RandomWalkProvider {
    adj: Adjacency,
    profiles: Vec<Vec<f64>>,
}

impl RandomWalkProvider {
    pub fn new(g: &ColexGraph, params: RandomWalkParams) -> Result<Self> {
        require_family_counts(g, "random-walk similarity")?;
        if !(params.alpha > 0.0 && params.alpha < 1.0) || params.max_steps == 0 {
            return Err(Error::Argument(format!(
                "random walk needs alpha in (0, 1) and at least one step, got {params:?}"
            )));
        }
        let adj = g.adjacency();
        let transitions = row_normalized(&adj);
        let profiles = (0..adj.len())
            .into_par_iter()
            .map(|v| visit_profile(&transitions, v, params))
            .collect();
        Ok(RandomWalkProvider { adj, profiles })
    }

    pub fn profile(&self, c: &ConceptId) -> Result<&[f64]> {
        Ok(&self.profiles[self.adj.index_of(c)?])
    }

    /// Node order of [`profile`](Self::profile) entries.
    pub fn order(&self) -> &[ConceptId] {
        &self.adj.nodes
    }
}

fn row_normalized(adj: &Adjacency) -> Vec<Vec<(usize, f64)>> {
    adj.out
        .iter()
        .map(|row| {
            let total: f64 = row.iter().map(|&(_, w)| w).sum();
            row.iter().map(|&(j, w)| (j, w / total)).collect()
        })
        .collect()
}

fn visit_profile(transitions: &[Vec<(usize, f64)>], start: usize, params: RandomWalkParams) -> Vec<f64> {
    let n = transitions.len();
    let mut state = vec![0.0; n];
    state[start] = 1.0;
    let mut profile = vec![0.0; n];
    let mut decay = 1.0;
    for _ in 0..params.max_steps {
        let mut next = vec![0.0; n];
        for (i, &mass) in state.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for &(j, p) in &transitions[i] {
                next[j] += mass * p;
            }
        }
        decay *= params.alpha;
        for (acc, x) in profile.iter_mut().zip(&next) {
            *acc += decay * x;
        }
        state = next;
    }
    profile
}

impl SimilarityProvider for RandomWalkProvider {
    fn source(&self) -> SimilaritySource {
        SimilaritySource::RandomWalk
    }
    fn covers(&self, c: &ConceptId) -> bool {
        self.adj.index.contains_key(c)
    }
    fn concepts(&self) -> Vec<ConceptId> {
        self.adj.nodes.clone()
    }
    fn score(&self, a: &ConceptId, b: &ConceptId) -> Result<f64> {
        Ok(cosine_similarity(self.profile(a)?, self.profile(b)?))
    }
}

pub fn random_walk_similarity(
    g: &ColexGraph,
    a: &ConceptId,
    b: &ConceptId,
    params: RandomWalkParams,
) -> Result<f64> {
    RandomWalkProvider::new(g, params)?.score(a, b)
}

/// Cosine similarity of embedding vectors.
pub struct EmbeddingProvider {
    embedding: EmbeddingSet,
}

impl EmbeddingProvider {
    pub fn new(embedding: EmbeddingSet) -> Self {
        EmbeddingProvider { embedding }
    }

    pub fn embedding(&self) -> &EmbeddingSet {
        &self.embedding
    }
}

impl SimilarityProvider for EmbeddingProvider {
    fn source(&self) -> SimilaritySource {
        SimilaritySource::Embedding
    }
    fn covers(&self, c: &ConceptId) -> bool {
        self.embedding.contains(c)
    }
    fn concepts(&self) -> Vec<ConceptId> {
        self.embedding.concepts().cloned().collect()
    }
    fn score(&self, a: &ConceptId, b: &ConceptId) -> Result<f64> {
        let u = self.embedding.get(a).ok_or_else(|| Error::Lookup(a.to_string()))?;
        let v = self.embedding.get(b).ok_or_else(|| Error::Lookup(b.to_string()))?;
        Ok(cosine_similarity(u, v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineMethod {
    ShortestPath,
    Cosine,
    Ppmi,
    RandomWalk,
}

impl BaselineMethod {
    pub const ALL: [BaselineMethod; 4] = [
        BaselineMethod::ShortestPath,
        BaselineMethod::Cosine,
        BaselineMethod::Ppmi,
        BaselineMethod::RandomWalk,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BaselineMethod::ShortestPath => "shortest-path",
            BaselineMethod::Cosine => "cosine",
            BaselineMethod::Ppmi => "ppmi",
            BaselineMethod::RandomWalk => "random-walk",
        }
    }

    /// Builds the provider with default parameters.
    pub fn provider(self, g: &ColexGraph) -> Result<Box<dyn SimilarityProvider>> {
        Ok(match self {
            BaselineMethod::ShortestPath => Box::new(ShortestPathProvider::new(g)),
            BaselineMethod::Cosine => Box::new(CosineAdjacencyProvider::new(g)),
            BaselineMethod::Ppmi => Box::new(PpmiProvider::new(g, PpmiMode::Pairwise)?),
            BaselineMethod::RandomWalk => {
                Box::new(RandomWalkProvider::new(g, RandomWalkParams::default())?)
            }
        })
    }
}

impl std::str::FromStr for BaselineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaselineMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown baseline {s:?}")))
    }
}

/// Full pairwise score matrix over `concepts`, rows computed in parallel.
pub fn similarity_matrix(provider: &dyn SimilarityProvider, concepts: &[ConceptId]) -> Result<DenseMatrix> {
    let rows: Vec<Vec<f64>> = concepts
        .par_iter()
        .map(|a| concepts.iter().map(|b| provider.score(a, b)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    DenseMatrix::from_rows(&rows)?.with_labels(concepts.to_vec())
}

/// TSV with a header row and a label column of concept ids.
pub fn similarity_matrix_tsv(m: &DenseMatrix) -> String {
    let labels = m.row_labels.as_deref().unwrap_or(&[]);
    let mut out = String::from("CONCEPT");
    for c in labels {
        out.push('\t');
        out.push_str(c.as_str());
    }
    out.push('\n');
    for (i, c) in labels.iter().enumerate() {
        out.push_str(c.as_str());
        for v in m.row(i) {
            out.push('\t');
            out.push_str(&format_significant(*v, 8));
        }
        out.push('\n');
    }
    out
}
