//! Independent reference implementations and fixtures shared by the
//! integration tests. Everything here is deliberately naive.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use colexvec::colexifier::{ColexParams, Wordlist, WordlistEntry};
use colexvec::graph::{ColexGraph, ColexType, ConceptId, Edge, GraphMeta};

// ---------------------------------------------------------------- wordlists

const CONCEPTS: [&str; 6] = ["ARM", "BARK", "HAND", "SKIN", "TREE", "WOOD"];
const LANGUAGES: [(&str, &str); 5] = [
    ("L1", "F1"),
    ("L2", "F1"),
    ("L3", "F2"),
    ("L4", "F3"),
    ("L5", "F2"),
];

/// Small wordlist over a tiny alphabet so that matches of every kind occur.
pub fn random_wordlist(rng: &mut ChaCha8Rng) -> Wordlist {
    let n = rng.random_range(1..=20);
    let languages = rng.random_range(1..=LANGUAGES.len());
    let entries = (0..n).map(|_| {
        let (language, family) = LANGUAGES[rng.random_range(0..languages)];
        let len = rng.random_range(1..=6);
        WordlistEntry {
            language: language.into(),
            family: family.into(),
            concept: CONCEPTS[rng.random_range(0..CONCEPTS.len())].into(),
            form: (0..len).map(|_| ["a", "b", "c"][rng.random_range(0..3)].to_string()).collect(),
        }
    });
    Wordlist::new(entries.collect::<Vec<_>>()).unwrap()
}

pub fn random_params(rng: &mut ChaCha8Rng) -> ColexParams {
    ColexParams {
        min_form_len: rng.random_range(1..=3),
        min_overlap_len: rng.random_range(1..=4),
        require_proper: true,
    }
}

fn longest_block_brute(a: &[String], b: &[String]) -> usize {
    let mut best = 0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            let mut k = 0;
            while i + k < a.len() && j + k < b.len() && a[i + k] == b[j + k] {
                k += 1;
            }
            best = best.max(k);
        }
    }
    best
}

/// Type of one form pair, plus the (derived, stem) orientation for affixes
/// given as `true` when `a` is the derived form.
fn form_relation(a: &[String], b: &[String], p: &ColexParams) -> Option<(ColexType, bool)> {
    if a == b {
        return Some((ColexType::Full, false));
    }
    let (short, long) = if a.len() < b.len() { (a, b) } else { (b, a) };
    if short.len() >= p.min_form_len
        && long.len() > short.len()
        && (long.starts_with(short) || long.ends_with(short))
    {
        return Some((ColexType::Affix, a.len() > b.len()));
    }
    if longest_block_brute(a, b) >= p.min_overlap_len {
        return Some((ColexType::Overlap, false));
    }
    None
}

/// Family-union enumerator over every pair of entries within a language.
/// Returns the weighted adjacency over the sorted concept list.
pub fn oracle_network(w: &Wordlist, kind: ColexType, p: &ColexParams) -> (Vec<ConceptId>, Vec<Vec<f64>>) {
    let mut families: BTreeMap<(ConceptId, ConceptId), BTreeSet<String>> = BTreeMap::new();
    let entries = w.entries();
    for x in entries {
        for y in entries {
            if x.language != y.language || x.concept == y.concept {
                continue;
            }
            let Some((t, x_derived)) = form_relation(&x.form, &y.form, p) else {
                continue;
            };
            if t != kind {
                continue;
            }
            // ordered keys; affix keeps only derived -> stem
            if kind == ColexType::Affix && !x_derived {
                continue;
            }
            families
                .entry((x.concept.clone(), y.concept.clone()))
                .or_default()
                .insert(x.family.clone());
        }
    }
    let nodes: Vec<ConceptId> = w.concepts().into_iter().collect();
    let pos: BTreeMap<&ConceptId, usize> = nodes.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut m = vec![vec![0.0; nodes.len()]; nodes.len()];
    for ((s, t), f) in &families {
        m[pos[s]][pos[t]] = f.len() as f64;
    }
    (nodes, m)
}

// ------------------------------------------------------------------ graphs

pub fn path_graph() -> ColexGraph {
    ColexGraph::new([], vec![Edge::new("A", "B", 2.0), Edge::new("B", "C", 1.0)], GraphMeta::default()).unwrap()
}

/// Undirected family-count graph on `n` nodes named N0.. with random integer
/// weights; some nodes may stay isolated.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> ColexGraph {
    let names: Vec<ConceptId> = (0..n).map(|i| ConceptId::from(format!("N{i}").as_str())).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                edges.push(Edge::new(names[i].clone(), names[j].clone(), rng.random_range(1..=5) as f64));
            }
        }
    }
    ColexGraph::new(names, edges, GraphMeta::default()).unwrap()
}

pub fn dense_adjacency(g: &ColexGraph) -> (Vec<ConceptId>, DMatrix<f64>) {
    let order: Vec<ConceptId> = g.nodes().iter().cloned().collect();
    let m = g.adjacency_matrix(&order).unwrap().to_nalgebra();
    (order, m)
}

/// Minimum length over all simple paths, by exhaustive search. Edge lengths
/// are inverse family counts.
pub fn all_paths_minimum(adj: &DMatrix<f64>, s: usize, t: usize) -> Option<f64> {
    fn walk(adj: &DMatrix<f64>, at: usize, t: usize, seen: &mut Vec<bool>, len: f64, best: &mut Option<f64>) {
        if at == t {
            *best = Some(best.map_or(len, |b: f64| b.min(len)));
            return;
        }
        for next in 0..adj.ncols() {
            if adj[(at, next)] > 0.0 && !seen[next] {
                seen[next] = true;
                walk(adj, next, t, seen, len + 1.0 / adj[(at, next)], best);
                seen[next] = false;
            }
        }
    }
    let mut seen = vec![false; adj.nrows()];
    seen[s] = true;
    let mut best = None;
    walk(adj, s, t, &mut seen, 0.0, &mut best);
    best
}

pub fn dense_ppmi(adj: &DMatrix<f64>) -> DMatrix<f64> {
    let total = adj.sum();
    let rows: Vec<f64> = (0..adj.nrows()).map(|i| adj.row(i).sum()).collect();
    DMatrix::from_fn(adj.nrows(), adj.ncols(), |i, j| {
        if adj[(i, j)] == 0.0 {
            return 0.0;
        }
        let joint = adj[(i, j)] / total;
        (joint / ((rows[i] / total) * (rows[j] / total))).ln().max(0.0)
    })
}

/// Rows are `Σ_{k=1..K} αᵏ Pᵏ`, built from explicit matrix powers.
pub fn dense_walk_profiles(adj: &DMatrix<f64>, alpha: f64, steps: usize) -> DMatrix<f64> {
    let n = adj.nrows();
    let p = DMatrix::from_fn(n, n, |i, j| {
        let r = adj.row(i).sum();
        if r == 0.0 {
            0.0
        } else {
            adj[(i, j)] / r
        }
    });
    let mut power = DMatrix::identity(n, n);
    let mut out = DMatrix::zeros(n, n);
    for k in 1..=steps {
        power = &power * &p;
        out += &power * alpha.powi(k as i32);
    }
    out
}

pub fn dense_cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        dot / (nu * nv)
    }
}

// --------------------------------------------------------------- numerics

/// Singular values by one-sided Jacobi rotations, sorted descending.
pub fn jacobi_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut a = m.clone();
    let cols = a.ncols();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..cols {
            for j in i + 1..cols {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dot(&a.column(j));
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..a.nrows() {
                    let (x, y) = (a[(r, i)], a[(r, j)]);
                    a[(r, i)] = c * x - s * y;
                    a[(r, j)] = s * x + c * y;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut s: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// `I_k(x) = (1/π) ∫₀^π e^{x cos t} cos(kt) dt`, composite Simpson.
pub fn bessel_quadrature(k: usize, x: f64) -> f64 {
    let n = 4000;
    let h = std::f64::consts::PI / n as f64;
    let f = |t: f64| (x * t.cos()).exp() * (k as f64 * t).cos();
    let mut sum = f(0.0) + f(std::f64::consts::PI);
    for i in 1..n {
        sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0 / std::f64::consts::PI
}

/// Dense ProNE propagation: the Chebyshev filter is assembled as an explicit
/// n × n matrix before it touches the embedding. Rows follow `adj` order;
/// isolated rows are returned but should be ignored.
pub fn dense_propagation(adj: &DMatrix<f64>, x0: &DMatrix<f64>, step: usize, mu: f64, theta: f64) -> DMatrix<f64> {
    let n = adj.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let with_loops = adj + &id;
    let mut da = with_loops.clone();
    for i in 0..n {
        let r = with_loops.row(i).sum();
        da.row_mut(i).scale_mut(1.0 / r);
    }
    let out = if step == 1 {
        x0.clone()
    } else {
        let lap = &id - &da;
        let m = &lap - &id * mu;
        let m2 = &m * &m;
        let mut t_prev = id.clone();
        let mut t_cur = &m2 * 0.5 - &id;
        let mut filter = &id * bessel_quadrature(0, theta) - &t_cur * (2.0 * bessel_quadrature(1, theta));
        for k in 2..step {
            let t_next = &m2 * &t_cur - &t_cur * 2.0 - &t_prev;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            filter += &t_next * (sign * 2.0 * bessel_quadrature(k, theta));
            t_prev = t_cur;
            t_cur = t_next;
        }
        &da * (x0 - filter * x0)
    };
    let mut normed = out.clone();
    for i in 0..n {
        let norm = out.row(i).norm();
        if norm > 0.0 {
            normed.row_mut(i).scale_mut(1.0 / norm);
        }
    }
    normed
}

pub fn random_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// 44 points in 10 dimensions: four clusters of eleven around well-separated
/// centers.
pub fn tsne_fixture() -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let centers: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..10).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect();
    DMatrix::from_fn(44, 10, |i, j| centers[i / 11][j] + rng.random_range(-1.0..1.0))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
