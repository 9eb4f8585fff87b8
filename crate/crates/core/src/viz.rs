//! Exact t-SNE to two dimensions and scatter export (TSV + SVG).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ConceptId, DenseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    /// Iterations with exaggeration and the low momentum.
    pub exaggeration_iterations: usize,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 15.0,
            iterations: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TsneOutput {
    /// n × 2, row labels carried over from the input.
    pub coords: DenseMatrix,
    /// KL(P‖Q) after every iteration, against the unexaggerated P.
    pub kl_history: Vec<f64>,
    /// Achieved perplexity of each conditional row.
    pub perplexities: Vec<f64>,
}

const BISECTION_STEPS: usize = 200;
const ENTROPY_TOLERANCE: f64 = 1e-5;

fn squared_distances(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    DMatrix::from_fn(n, n, |i, j| (x.row(i) - x.row(j)).norm_squared())
}

/// Row `i` of the conditional affinities for precision `beta`, and its
/// Shannon entropy in nats.
fn conditional_row(d: &DMatrix<f64>, i: usize, beta: f64) -> (Vec<f64>, f64) {
    let n = d.nrows();
    // shift by the nearest distance for numerical range
    let dmin = (0..n).filter(|&j| j != i).map(|j| d[(i, j)]).fold(f64::INFINITY, f64::min);
    let mut row: Vec<f64> = (0..n)
        .map(|j| if j == i { 0.0 } else { (-(d[(i, j)] - dmin) * beta).exp() })
        .collect();
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= total);
    let entropy = -row.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>();
    (row, entropy)
}

/// Conditional affinities `p_{j|i}` calibrated per row to the target
/// perplexity, and the perplexity each row reached.
pub fn conditional_probabilities(x: &DMatrix<f64>, perplexity: f64) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let n = x.nrows();
    if n < 3 {
        return Err(Error::Argument(format!("t-SNE needs at least 3 points, got {n}")));
    }
    if !(perplexity >= 1.0 && perplexity < n as f64) {
        return Err(Error::Argument(format!("perplexity {perplexity} must lie in [1, {n})")));
    }
    let d = squared_distances(x);
    let target = perplexity.ln();
    let mut p = DMatrix::zeros(n, n);
    let mut achieved = Vec::with_capacity(n);
    for i in 0..n {
        let (mut lo, mut hi) = (0.0, f64::INFINITY);
        let mut beta = 1.0;
        let (mut row, mut h) = conditional_row(&d, i, beta);
        for _ in 0..BISECTION_STEPS {
            if (h - target).abs() < ENTROPY_TOLERANCE {
                break;
            }
            if h > target {
                lo = beta;
                beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
            (row, h) = conditional_row(&d, i, beta);
        }
        for (j, v) in row.into_iter().enumerate() {
            p[(i, j)] = v;
        }
        achieved.push(h.exp());
    }
    Ok((p, achieved))
}

/// `(P + Pᵀ) / 2n` from the conditional affinities.
pub fn joint_probabilities(conditional: &DMatrix<f64>) -> DMatrix<f64> {
    let n = conditional.nrows() as f64;
    (conditional + conditional.transpose()) / (2.0 * n)
}

fn kl_divergence(p: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let n = y.nrows();
    let mut num = DMatrix::zeros(n, n);
    let mut z = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = 1.0 / (1.0 + (y.row(i) - y.row(j)).norm_squared());
                num[(i, j)] = v;
                z += v;
            }
        }
    }
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pij = p[(i, j)];
            if i != j && pij > 0.0 {
                kl += pij * (pij / (num[(i, j)] / z).max(1e-300)).ln();
            }
        }
    }
    kl
}

/// Exact t-SNE. Gradient descent with per-coordinate gains, momentum 0.5
/// then 0.8, and early exaggeration; initial coordinates are N(0, 1e-4²).
///
/// After exaggeration a step that would raise the KL divergence is
/// rejected: the point stays put, velocity and gains reset, and the step
/// length halves until a step is accepted. The recorded KL is therefore
/// non-increasing from then on.
pub fn tsne_project(vectors: &DenseMatrix, cfg: &TsneConfig) -> Result<TsneOutput> {
    let x = vectors.to_nalgebra();
    let n = x.nrows();
    let (cond, perplexities) = conditional_probabilities(&x, cfg.perplexity)?;
    let p = joint_probabilities(&cond).map(|v| v.max(1e-12));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y = DMatrix::from_fn(n, 2, |_, _| normal.sample(&mut rng));
    let mut velocity = DMatrix::<f64>::zeros(n, 2);
    let mut gains = DMatrix::<f64>::from_element(n, 2, 1.0);
    let mut kl_history: Vec<f64> = Vec::with_capacity(cfg.iterations);
    let mut step_scale = 1.0;

    for iter in 0..cfg.iterations {
        let early = iter < cfg.exaggeration_iterations;
        let exaggeration = if early { cfg.early_exaggeration } else { 1.0 };
        let momentum = if early { 0.5 } else { 0.8 };

        let mut num = DMatrix::zeros(n, n);
        let mut z = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 1.0 / (1.0 + (y.row(i) - y.row(j)).norm_squared());
                num[(i, j)] = v;
                num[(j, i)] = v;
                z += 2.0 * v;
            }
        }
        let mut grad = DMatrix::<f64>::zeros(n, 2);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let coeff = 4.0 * (exaggeration * p[(i, j)] - num[(i, j)] / z) * num[(i, j)];
                for k in 0..2 {
                    grad[(i, k)] += coeff * (y[(i, k)] - y[(j, k)]);
                }
            }
        }
        for idx in 0..n * 2 {
            let same_sign = (grad[idx] > 0.0) == (velocity[idx] > 0.0);
            gains[idx] = if same_sign { (gains[idx] * 0.8).max(0.01) } else { gains[idx] + 0.2 };
            velocity[idx] = momentum * velocity[idx] - cfg.learning_rate * step_scale * gains[idx] * grad[idx];
        }
        let mut next = &y + &velocity;
        for k in 0..2 {
            let mean = next.column(k).mean();
            next.column_mut(k).add_scalar_mut(-mean);
        }
        let kl = kl_divergence(&p, &next);
        match kl_history.last() {
            // also catches a NaN
            Some(&last) if !early && !(kl <= last) => {
                velocity.fill(0.0);
                gains.fill(1.0);
                step_scale *= 0.5;
                kl_history.push(last);
            }
            _ => {
                step_scale = 1.0;
                y = next;
                kl_history.push(kl);
            }
        }
    }

    let mut coords = DenseMatrix::from_nalgebra(&y);
    if let Some(labels) = &vectors.row_labels {
        coords = coords.with_labels(labels.clone())?;
    }
    Ok(TsneOutput { coords, kl_history, perplexities })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const SVG_SIZE: f64 = 800.0;

/// Writes `<out>.tsv` (`CONCEPT\tX\tY`, six decimals) and a labeled scatter
/// `<out>.svg` whose viewport fits the data with a 5% margin. Returns both
/// paths.
pub fn export_scatter(coords: &DenseMatrix, labels: &[ConceptId], out: &Path) -> Result<(PathBuf, PathBuf)> {
    if coords.cols() != 2 {
        return Err(Error::Validation(format!("expected 2 columns, found {}", coords.cols())));
    }
    if labels.len() != coords.rows() {
        return Err(Error::Validation(format!("{} labels for {} points", labels.len(), coords.rows())));
    }
    if labels.iter().any(|l| l.as_str().trim().is_empty()) {
        return Err(Error::Validation("empty label".into()));
    }

    let mut tsv = String::from("CONCEPT\tX\tY\n");
    for (i, label) in labels.iter().enumerate() {
        let _ = writeln!(tsv, "{label}\t{:.6}\t{:.6}", coords.get(i, 0), coords.get(i, 1));
    }

    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..coords.rows() {
        xmin = xmin.min(coords.get(i, 0));
        xmax = xmax.max(coords.get(i, 0));
        ymin = ymin.min(coords.get(i, 1));
        ymax = ymax.max(coords.get(i, 1));
    }
    if coords.rows() == 0 {
        (xmin, xmax, ymin, ymax) = (0.0, 1.0, 0.0, 1.0);
    }
    let span = (xmax - xmin).max(ymax - ymin).max(1e-12);
    let margin = 0.05 * span;
    let (vx, vy, vw) = (xmin - margin, ymin - margin, span + 2.0 * margin);
    let r = vw / 200.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" viewBox="{vx:.6} {vy:.6} {vw:.6} {vw:.6}">"#
    );
    let _ = writeln!(svg, r#"<rect x="{vx:.6}" y="{vy:.6}" width="{vw:.6}" height="{vw:.6}" fill="white"/>"#);
    for (i, label) in labels.iter().enumerate() {
        // SVG y grows downwards
        let (x, y) = (coords.get(i, 0), ymax + ymin - coords.get(i, 1));
        let _ = writeln!(svg, r#"<circle cx="{x:.6}" cy="{y:.6}" r="{r:.6}" fill="steelblue"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.6}" y="{y:.6}" font-size="{:.6}" font-family="sans-serif">{}</text>"#,
            x + 1.5 * r,
            4.0 * r,
            xml_escape(label.as_str())
        );
    }
    svg.push_str("</svg>\n");

    let tsv_path = with_suffix(out, ".tsv");
    let svg_path = with_suffix(out, ".svg");
    fs::write(&tsv_path, tsv).map_err(|e| Error::io(&tsv_path, e))?;
    fs::write(&svg_path, svg).map_err(|e| Error::io(&svg_path, e))?;
    Ok((tsv_path, svg_path))
}

/// One concept per line; blank lines are skipped.
pub fn load_concept_list(path: &Path) -> Result<Vec<ConceptId>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| ConceptId::new(l).expect("non-empty line"))
        .collect())
}
