//! Colexification graph model: concept nodes joined by family-weighted edges.
//!
//! Graphs are stored as an edge-list TSV (`SOURCE\tTARGET\tWEIGHT`) plus a
//! sidecar JSON file holding the colexification type, directedness and the
//! meaning of the weights.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tsv::{format_exact, parse_f64, read_tsv};

/// Concept-set label such as `TREE`. Compared by exact string equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptId(String);

impl ConceptId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.trim().is_empty() {
            return Err(Error::Validation("empty concept identifier".into()));
        }
        Ok(ConceptId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ConceptId {
    /// Panics on an empty label; use [`ConceptId::new`] for untrusted input.
    fn from(s: &str) -> Self {
        ConceptId::new(s).expect("non-empty concept id")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColexType {
    Full,
    Affix,
    Overlap,
}

impl ColexType {
    pub const ALL: [ColexType; 3] = [ColexType::Full, ColexType::Affix, ColexType::Overlap];

    pub fn as_str(self) -> &'static str {
        match self {
            ColexType::Full => "full",
            ColexType::Affix => "affix",
            ColexType::Overlap => "overlap",
        }
    }
}

impl fmt::Display for ColexType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ColexType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(ColexType::Full),
            "affix" => Ok(ColexType::Affix),
            "overlap" => Ok(ColexType::Overlap),
            other => Err(Error::Argument(format!("unknown colexification type {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSemantics {
    /// Number of language families attesting the edge.
    FamilyCount,
    /// Reciprocal of a family count, usable as a path length.
    InverseDistance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub source: ConceptId,
    pub target: ConceptId,
    pub weight: f64,
}

impl Edge {
    pub fn new(source: impl Into<ConceptId>, target: impl Into<ConceptId>, weight: f64) -> Self {
        Edge {
            source: source.into(),
            target: target.into(),
            weight,
        }
    }
}

/// Contents of the sidecar JSON file written next to an edge list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub colex_type: ColexType,
    pub directed: bool,
    pub weight_semantics: WeightSemantics,
}

impl Default for GraphMeta {
    fn default() -> Self {
        GraphMeta {
            colex_type: ColexType::Full,
            directed: false,
            weight_semantics: WeightSemantics::FamilyCount,
        }
    }
}

/// A validated colexification network. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct ColexGraph {
    nodes: BTreeSet<ConceptId>,
    edges: Vec<Edge>,
    meta: GraphMeta,
}

impl ColexGraph {
    /// Builds a graph from explicit nodes and edges. Edge endpoints are added
    /// to the node set; `nodes` may contribute isolated concepts.
    pub fn new(
        nodes: impl IntoIterator<Item = ConceptId>,
        edges: Vec<Edge>,
        meta: GraphMeta,
    ) -> Result<Self> {
        let mut node_set: BTreeSet<ConceptId> = nodes.into_iter().collect();
        let mut seen: BTreeSet<(ConceptId, ConceptId)> = BTreeSet::new();
        for e in &edges {
            if e.source == e.target {
                return Err(Error::Validation(format!("self-loop on {}", e.source)));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::Validation(format!(
                    "non-positive weight {} on {} -> {}",
                    e.weight, e.source, e.target
                )));
            }
            if meta.weight_semantics == WeightSemantics::FamilyCount && e.weight.fract() != 0.0 {
                return Err(Error::Validation(format!(
                    "family-count weight {} on {} -> {} is not an integer",
                    e.weight, e.source, e.target
                )));
            }
            let key = edge_key(&e.source, &e.target, meta.directed);
            if !seen.insert(key) {
                return Err(Error::Validation(format!(
                    "duplicate edge {} -> {}",
                    e.source, e.target
                )));
            }
            node_set.insert(e.source.clone());
            node_set.insert(e.target.clone());
        }
        Ok(ColexGraph {
            nodes: node_set,
            edges,
            meta,
        })
    }

    pub fn nodes(&self) -> &BTreeSet<ConceptId> {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn meta(&self) -> GraphMeta {
        self.meta
    }

    pub fn colex_type(&self) -> ColexType {
        self.meta.colex_type
    }

    pub fn is_directed(&self) -> bool {
        self.meta.directed
    }

    pub fn weight_semantics(&self) -> WeightSemantics {
        self.meta.weight_semantics
    }

    pub fn contains(&self, c: &ConceptId) -> bool {
        self.nodes.contains(c)
    }

    /// Merges antiparallel edges into one undirected edge carrying the larger
    /// of the two weights. Undirected input is returned unchanged.
    pub fn to_undirected(&self) -> ColexGraph {
        if !self.meta.directed {
            return self.clone();
        }
        let mut merged: BTreeMap<(ConceptId, ConceptId), f64> = BTreeMap::new();
        let mut order = Vec::new();
        for e in &self.edges {
            let key = edge_key(&e.source, &e.target, false);
            match merged.get_mut(&key) {
                Some(w) => *w = w.max(e.weight),
                None => {
                    merged.insert(key.clone(), e.weight);
                    order.push((key, e.source.clone()));
                }
            }
        }
        // first occurrence keeps its orientation
        let edges = order
            .into_iter()
            .map(|((a, b), first)| {
                let w = merged[&(a.clone(), b.clone())];
                if first == a {
                    Edge { source: a, target: b, weight: w }
                } else {
                    Edge { source: b, target: a, weight: w }
                }
            })
            .collect();
        ColexGraph {
            nodes: self.nodes.clone(),
            edges,
            meta: GraphMeta {
                directed: false,
                ..self.meta
            },
        }
    }

    /// Replaces every weight `w` by `1/w` and flips the weight semantics.
    pub fn invert_weights(&self) -> ColexGraph {
        let semantics = match self.meta.weight_semantics {
            WeightSemantics::FamilyCount => WeightSemantics::InverseDistance,
            WeightSemantics::InverseDistance => WeightSemantics::FamilyCount,
        };
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let mut w = 1.0 / e.weight;
                if semantics == WeightSemantics::FamilyCount {
                    // 1/(1/n) can land one ulp away from n
                    let r = w.round();
                    if (w - r).abs() <= 1e-9 * r.abs().max(1.0) {
                        w = r;
                    }
                }
                Edge {
                    source: e.source.clone(),
                    target: e.target.clone(),
                    weight: w,
                }
            })
            .collect();
        ColexGraph {
            nodes: self.nodes.clone(),
            edges,
            meta: GraphMeta {
                weight_semantics: semantics,
                ..self.meta
            },
        }
    }

    /// Dense adjacency matrix in the given node order. Undirected edges fill
    /// both `(i, j)` and `(j, i)`.
    pub fn adjacency_matrix(&self, order: &[ConceptId]) -> Result<DenseMatrix> {
        let index = self.check_order(order)?;
        let n = order.len();
        let mut values = vec![0.0; n * n];
        for e in &self.edges {
            let (i, j) = (index[&e.source], index[&e.target]);
            values[i * n + j] = e.weight;
            if !self.meta.directed {
                values[j * n + i] = e.weight;
            }
        }
        let mut m = DenseMatrix::new(n, n, values)?;
        m.row_labels = Some(order.to_vec());
        Ok(m)
    }

    fn check_order<'a>(&self, order: &'a [ConceptId]) -> Result<HashMap<&'a ConceptId, usize>> {
        let mut index = HashMap::with_capacity(order.len());
        for (i, c) in order.iter().enumerate() {
            if !self.nodes.contains(c) {
                return Err(Error::Argument(format!("order names unknown node {c}")));
            }
            if index.insert(c, i).is_some() {
                return Err(Error::Argument(format!("order repeats node {c}")));
            }
        }
        if index.len() != self.nodes.len() {
            return Err(Error::Argument(format!(
                "order has {} nodes, graph has {}",
                index.len(),
                self.nodes.len()
            )));
        }
        Ok(index)
    }

    /// Sparse outgoing adjacency over the sorted node list.
    pub fn adjacency(&self) -> Adjacency {
        let nodes: Vec<ConceptId> = self.nodes.iter().cloned().collect();
        let index: HashMap<ConceptId, usize> =
            nodes.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes.len()];
        for e in &self.edges {
            let (i, j) = (index[&e.source], index[&e.target]);
            out[i].push((j, e.weight));
            if !self.meta.directed {
                out[j].push((i, e.weight));
            }
        }
        for row in &mut out {
            row.sort_by_key(|&(j, _)| j);
        }
        Adjacency { nodes, index, out }
    }

    /// Writes the edge list to `path` and the metadata to [`sidecar_path`].
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = String::from("SOURCE\tTARGET\tWEIGHT\n");
        for e in &self.edges {
            text.push_str(&format!("{}\t{}\t{}\n", e.source, e.target, format_exact(e.weight)));
        }
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
        let meta_path = sidecar_path(path);
        let json = serde_json::to_string_pretty(&self.meta).expect("metadata serializes");
        fs::write(&meta_path, json + "\n").map_err(|e| Error::io(&meta_path, e))?;
        Ok(())
    }

    /// Reads an edge list and its sidecar metadata. A missing sidecar falls
    /// back to an undirected full-colexification graph of family counts.
    pub fn load(path: &Path) -> Result<Self> {
        let meta_path = sidecar_path(path);
        let meta = if meta_path.exists() {
            let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::parse(&meta_path, e.line(), e.to_string()))?
        } else {
            log::warn!(
                "{} has no metadata sidecar; assuming undirected family-count graph",
                path.display()
            );
            GraphMeta::default()
        };
        Self::load_with_meta(path, meta)
    }

    pub fn load_with_meta(path: &Path, meta: GraphMeta) -> Result<Self> {
        let rows = read_tsv(path, &["SOURCE", "TARGET", "WEIGHT"], &[])?;
        let mut edges = Vec::with_capacity(rows.len());
        let mut seen = BTreeSet::new();
        for row in rows {
            if row.fields.len() != 3 {
                return Err(Error::parse(
                    path,
                    row.line,
                    format!("expected 3 columns, found {}", row.fields.len()),
                ));
            }
            let source = ConceptId::new(row.fields[0].trim())
                .map_err(|_| Error::parse(path, row.line, "empty SOURCE"))?;
            let target = ConceptId::new(row.fields[1].trim())
                .map_err(|_| Error::parse(path, row.line, "empty TARGET"))?;
            if source == target {
                return Err(Error::parse(path, row.line, format!("self-loop on {source}")));
            }
            let weight = parse_f64(path, row.line, &row.fields[2], "weight")?;
            if weight <= 0.0 {
                return Err(Error::parse(path, row.line, format!("non-positive weight {weight}")));
            }
            if !seen.insert(edge_key(&source, &target, meta.directed)) {
                return Err(Error::Validation(format!(
                    "{}:{}: duplicate edge {source} -> {target}",
                    path.display(),
                    row.line
                )));
            }
            edges.push(Edge { source, target, weight });
        }
        ColexGraph::new(std::iter::empty(), edges, meta)
    }
}

/// `<path>.meta.json`
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn edge_key(a: &ConceptId, b: &ConceptId, directed: bool) -> (ConceptId, ConceptId) {
    if directed || a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// Index-based outgoing adjacency lists, nodes in sorted order.
#[derive(Clone, Debug)]
pub struct Adjacency {
    pub nodes: Vec<ConceptId>,
    pub index: HashMap<ConceptId, usize>,
    pub out: Vec<Vec<(usize, f64)>>,
}

impl Adjacency {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, c: &ConceptId) -> Result<usize> {
        self.index
            .get(c)
            .copied()
            .ok_or_else(|| Error::Lookup(c.to_string()))
    }

    pub fn weighted_degree(&self, i: usize) -> f64 {
        self.out[i].iter().map(|&(_, w)| w).sum()
    }

    pub fn is_isolated(&self, i: usize) -> bool {
        self.out[i].is_empty()
    }
}

/// Row-major dense matrix with optional concept labels on the rows.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    pub row_labels: Option<Vec<ConceptId>>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Argument(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("matrix has non-finite entries".into()));
        }
        Ok(DenseMatrix {
            rows,
            cols,
            values,
            row_labels: None,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            values: vec![0.0; rows * cols],
            row_labels: None,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Argument("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn with_labels(mut self, labels: Vec<ConceptId>) -> Result<Self> {
        if labels.len() != self.rows {
            return Err(Error::Argument(format!(
                "{} labels for {} rows",
                labels.len(),
                self.rows
            )));
        }
        self.row_labels = Some(labels);
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.values)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        let mut values = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            values.extend(m.row(i).iter().copied());
        }
        DenseMatrix {
            rows: m.nrows(),
            cols: m.ncols(),
            values,
            row_labels: None,
        }
    }
}
