//! ProNE: factorize a shifted log-transition matrix, then smooth the factors
//! with a Chebyshev expansion of a band-pass spectral filter.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::embedding::{config_digest, EmbeddingSet, Provenance};
use crate::error::{Error, Result};
use crate::graph::{Adjacency, ColexGraph, ConceptId, DenseMatrix, WeightSemantics};
use crate::numerics::{randomized_tsvd, CsrMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProneConfig {
    pub dim: usize,
    /// Chebyshev order.
    pub step: usize,
    /// Filter center.
    pub mu: f64,
    /// Filter bandwidth.
    pub theta: f64,
    /// Power applied to degrees in the negative-sampling distribution.
    pub exponent: f64,
    /// Negative-sampling shift λ.
    pub shift: f64,
    pub seed: u64,
}

impl Default for ProneConfig {
    fn default() -> Self {
        ProneConfig {
            dim: 128,
            step: 10,
            mu: 0.2,
            theta: 0.5,
            exponent: 0.75,
            shift: 1.0,
            seed: 0,
        }
    }
}

impl ProneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.step == 0 {
            return Err(Error::Argument("dim and step must be at least 1".into()));
        }
        if !(self.exponent > 0.0 && self.exponent <= 1.0) {
            return Err(Error::Argument(format!("exponent {} not in (0, 1]", self.exponent)));
        }
        if !(self.theta > 0.0) {
            return Err(Error::Argument("theta must be positive".into()));
        }
        if !(self.shift >= 1.0) {
            return Err(Error::Argument("shift must be at least 1".into()));
        }
        if !self.mu.is_finite() {
            return Err(Error::Argument("mu must be finite".into()));
        }
        Ok(())
    }
}

/// Sparse matrix whose rows and columns follow `nodes`.
#[derive(Clone, Debug)]
pub struct NodeMatrix {
    pub nodes: Vec<ConceptId>,
    pub matrix: CsrMatrix,
}

fn check_graph(g: &ColexGraph) -> Result<()> {
    if g.is_directed() {
        return Err(Error::Argument("ProNE needs an undirected graph".into()));
    }
    if g.weight_semantics() != WeightSemantics::FamilyCount {
        return Err(Error::Argument("ProNE needs family-count weights".into()));
    }
    Ok(())
}

/// `M_ij = ln P_ij − ln(λ q_j)` on the adjacency pattern, with `P` the
/// row-normalized adjacency and `q_j ∝ deg(j)^exponent`. Isolated nodes get
/// empty rows.
pub fn build_shifted_matrix(g: &ColexGraph, cfg: &ProneConfig) -> Result<NodeMatrix> {
    check_graph(g)?;
    cfg.validate()?;
    let adj = g.adjacency();
    let degrees: Vec<f64> = (0..adj.len()).map(|i| adj.weighted_degree(i)).collect();
    let total: f64 = degrees.iter().map(|d| d.powf(cfg.exponent)).sum();
    let mut triplets = Vec::new();
    for (i, row) in adj.out.iter().enumerate() {
        for &(j, w) in row {
            let p = w / degrees[i];
            let q = degrees[j].powf(cfg.exponent) / total;
            triplets.push((i, j, p.ln() - (cfg.shift * q).ln()));
        }
    }
    Ok(NodeMatrix {
        matrix: CsrMatrix::from_triplets(adj.len(), adj.len(), &triplets)?,
        nodes: adj.nodes,
    })
}

/// Base embedding `U_d · diag(√S_d)`, rows labeled by the matrix nodes.
pub fn factorize(m: &NodeMatrix, cfg: &ProneConfig) -> Result<DenseMatrix> {
    let svd = randomized_tsvd(&m.matrix, cfg.dim, cfg.seed)?;
    let mut base = svd.u;
    for (k, s) in svd.s.iter().enumerate() {
        base.column_mut(k).scale_mut(s.sqrt());
    }
    DenseMatrix::from_nalgebra(&base).with_labels(m.nodes.clone())
}

/// Modified Bessel function of the first kind, 30-term power series.
pub fn bessel_i(k: usize, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = half.powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>();
    let mut sum = term;
    for m in 1..30 {
        term *= half * half / (m as f64 * (m + k) as f64);
        sum += term;
    }
    sum
}

/// Row-normalized `A + I` over the given node order.
fn normalized_self_loop_adjacency(adj: &Adjacency, order: &[usize]) -> Result<CsrMatrix> {
    let position: BTreeMap<usize, usize> = order.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let mut triplets = Vec::new();
    for (p, &i) in order.iter().enumerate() {
        let row: Vec<(usize, f64)> = adj.out[i]
            .iter()
            .filter_map(|&(j, w)| position.get(&j).map(|&q| (q, w)))
            .chain(std::iter::once((p, 1.0)))
            .collect();
        let total: f64 = row.iter().map(|&(_, w)| w).sum();
        triplets.extend(row.into_iter().map(|(q, w)| (p, q, w / total)));
    }
    CsrMatrix::from_triplets(order.len(), order.len(), &triplets)
}

/// Band-pass filtering of the base embedding. Rows of `base` must carry
/// concept labels that are nodes of `g`; isolated nodes are dropped from
/// the result.
pub fn spectral_propagate(g: &ColexGraph, base: &DenseMatrix, cfg: &ProneConfig) -> Result<EmbeddingSet> {
    check_graph(g)?;
    cfg.validate()?;
    let labels = base
        .row_labels
        .as_ref()
        .ok_or_else(|| Error::Argument("base embedding rows carry no concept labels".into()))?;
    let adj = g.adjacency();
    let order: Vec<usize> = labels
        .iter()
        .map(|c| adj.index_of(c).map_err(|_| Error::Argument(format!("{c} is not a node of the graph"))))
        .collect::<Result<_>>()?;

    let x0 = base.to_nalgebra();
    let filtered = if cfg.step == 1 {
        x0
    } else {
        let da = normalized_self_loop_adjacency(&adj, &order)?;
        // M = (I − D̂Â) − μI
        let apply_m = |x: &DMatrix<f64>| x * (1.0 - cfg.mu) - da.mul_dense(x);
        let mut prev = x0.clone();
        let mut cur = apply_m(&apply_m(&x0)) * 0.5 - &x0;
        let mut conv = &x0 * bessel_i(0, cfg.theta) - &cur * (2.0 * bessel_i(1, cfg.theta));
        for k in 2..cfg.step {
            let next = apply_m(&apply_m(&cur)) - &cur * 2.0 - &prev;
            let c = 2.0 * bessel_i(k, cfg.theta);
            if k % 2 == 0 {
                conv += &next * c;
            } else {
                conv -= &next * c;
            }
            prev = cur;
            cur = next;
        }
        da.mul_dense(&(x0 - conv))
    };

    let mut vectors = BTreeMap::new();
    for (p, &i) in order.iter().enumerate() {
        if adj.is_isolated(i) {
            continue;
        }
        let row = filtered.row(p);
        let norm = row.norm();
        let v: Vec<f64> = if norm > 0.0 {
            row.iter().map(|x| x / norm).collect()
        } else {
            row.iter().copied().collect()
        };
        vectors.insert(labels[p].clone(), v);
    }
    let provenance = Provenance {
        method: "prone".into(),
        colex_types: vec![g.colex_type()],
        config_digest: config_digest(cfg),
        seed: Some(cfg.seed),
        notes: Vec::new(),
    };
    EmbeddingSet::new(base.cols(), vectors, provenance)
}

#[derive(Clone, Debug)]
pub struct ProneOutput {
    pub embedding: EmbeddingSet,
    /// Nodes without edges, which receive no vector.
    pub uncovered: Vec<ConceptId>,
}

/// Shifted matrix, factorization and propagation in one call.
pub fn prone(g: &ColexGraph, cfg: &ProneConfig) -> Result<ProneOutput> {
    let m = build_shifted_matrix(g, cfg)?;
    let base = factorize(&m, cfg)?;
    let embedding = spectral_propagate(g, &base, cfg)?;
    let uncovered = m.nodes.iter().filter(|c| !embedding.contains(c)).cloned().collect();
    Ok(ProneOutput { embedding, uncovered })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, GraphMeta};

    fn path() -> ColexGraph {
        ColexGraph::new([], vec![Edge::new("A", "B", 2.0), Edge::new("B", "C", 1.0)], GraphMeta::default()).unwrap()
    }

    #[test]
    fn shifted_matrix_hand_values() {
        let m = build_shifted_matrix(&path(), &ProneConfig::default()).unwrap();
        let q_b = 3f64.powf(0.75) / (2f64.powf(0.75) + 3f64.powf(0.75) + 1.0);
        assert!((q_b - 0.4595).abs() < 1e-4);
        let ab = m.matrix.get(0, 1).unwrap();
        assert!((ab - 0.7777).abs() < 1e-4, "{ab}");
        assert!((ab + q_b.ln()).abs() < 1e-12);
        assert_eq!(m.matrix.get(0, 2), None);
        assert_eq!(m.matrix.get(0, 0), None);
        assert_eq!(m.matrix.nnz(), 4);
    }

    #[test]
    fn regular_graph_gives_constant_entries() {
        let edges = (0..5)
            .map(|i| Edge::new(format!("N{i}").as_str(), format!("N{}", (i + 1) % 5).as_str(), 1.0))
            .collect();
        let g = ColexGraph::new([], edges, GraphMeta::default()).unwrap();
        let m = build_shifted_matrix(&g, &ProneConfig { exponent: 1.0, ..Default::default() }).unwrap();
        let values: Vec<f64> = (0..5).flat_map(|i| m.matrix.row(i).map(|(_, v)| v).collect::<Vec<_>>()).collect();
        assert_eq!(values.len(), 10);
        for v in &values {
            assert!((v - (0.5f64 / 0.2).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn bessel_values() {
        // reference values from scipy.special.iv
        assert!((bessel_i(0, 0.5) - 1.063483370741324).abs() < 1e-12);
        assert!((bessel_i(1, 0.5) - 0.2578943053908963).abs() < 1e-12);
        assert!((bessel_i(2, 0.5) - 0.031906149177738256).abs() < 1e-12);
        for theta in [0.1, 0.5, 1.0, 2.0] {
            for k in 0..12 {
                assert!(bessel_i(k, theta) > 0.0);
                assert!(bessel_i(k + 1, theta) < bessel_i(k, theta));
            }
        }
    }

    #[test]
    fn step_one_normalizes_base() {
        let g = path();
        let base = DenseMatrix::from_rows(&[vec![3.0, 4.0], vec![1.0, 0.0], vec![0.0, -2.0]])
            .unwrap()
            .with_labels(vec!["A".into(), "B".into(), "C".into()])
            .unwrap();
        let e = spectral_propagate(&g, &base, &ProneConfig { step: 1, ..Default::default() }).unwrap();
        assert_eq!(e.get(&"A".into()).unwrap(), &[0.6, 0.8]);
        assert_eq!(e.get(&"C".into()).unwrap(), &[0.0, -1.0]);
    }

    #[test]
    fn unlabeled_base_rejected() {
        let base = DenseMatrix::zeros(3, 2);
        assert!(matches!(
            spectral_propagate(&path(), &base, &ProneConfig::default()),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn unit_rows_and_isolated_nodes_uncovered() {
        let mut edges = Vec::new();
        for i in 0..12 {
            edges.push(Edge::new(format!("N{i}").as_str(), format!("N{}", (i + 1) % 12).as_str(), 1.0 + (i % 3) as f64));
            edges.push(Edge::new(format!("N{i}").as_str(), format!("N{}", (i + 5) % 12).as_str(), 1.0));
        }
        let g = ColexGraph::new(["LONE".into()], edges, GraphMeta::default()).unwrap();
        let out = prone(&g, &ProneConfig { dim: 4, seed: 3, ..Default::default() }).unwrap();
        assert_eq!(out.uncovered, vec![ConceptId::from("LONE")]);
        assert_eq!(out.embedding.len(), 12);
        for v in out.embedding.vectors().values() {
            let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-9);
        }
        let again = prone(&g, &ProneConfig { dim: 4, seed: 3, ..Default::default() }).unwrap();
        assert_eq!(out.embedding, again.embedding);
    }
}
