use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::DenseMatrix;

#[derive(Clone, Debug)]
pub struct PcaOutput {
    /// n × d projections onto the leading principal components.
    pub projected: DenseMatrix,
    /// Variance of each output column (divisor n − 1, or n when n = 1).
    pub explained_variance: Vec<f64>,
    /// Number of requested components beyond the numerical rank of the
    /// centered input; these columns carry zero variance.
    pub null_components: usize,
}

/// Projects the column-centered input onto its top `d` principal axes,
/// computed from the SVD of the centered matrix. Each axis is signed so its
/// largest-magnitude loading is positive. Row labels are carried over.
pub fn pca_reduce(m: &DenseMatrix, d: usize) -> Result<PcaOutput> {
    let (n, cols) = (m.rows(), m.cols());
    if d == 0 {
        return Err(Error::Argument("target dimension must be positive".into()));
    }
    if d > cols {
        return Err(Error::Argument(format!(
            "target dimension {d} exceeds input dimension {cols}"
        )));
    }
    if n == 0 {
        return Err(Error::Argument("PCA of an empty matrix".into()));
    }

    let mut x = m.to_nalgebra();
    for j in 0..cols {
        let mean = x.column(j).mean();
        x.column_mut(j).add_scalar_mut(-mean);
    }

    let svd = x.clone().svd(false, true);
    let v_t = svd.v_t.expect("right vectors requested");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));

    let top = sv.iter().copied().fold(0.0, f64::max);
    let tol = top * (n.max(cols) as f64) * f64::EPSILON;
    let rank = sv.iter().filter(|&&s| s > tol).count();

    let mut axes = DMatrix::zeros(cols, d);
    for (k, &idx) in order.iter().take(d).enumerate() {
        let mut axis = v_t.row(idx).transpose();
        let pivot = axis.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            axis.neg_mut();
        }
        axes.set_column(k, &axis);
    }
    // columns past min(n, cols) stay zero

    let mut proj = &x * &axes;
    for k in rank.min(d)..d {
        proj.column_mut(k).fill(0.0);
    }
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    let explained_variance = (0..d)
        .map(|k| proj.column(k).iter().map(|v| v * v).sum::<f64>() / denom)
        .collect();

    let mut projected = DenseMatrix::from_nalgebra(&proj);
    projected.row_labels = m.row_labels.clone();
    Ok(PcaOutput {
        projected,
        explained_variance,
        null_components: d.saturating_sub(rank),
    })
}
