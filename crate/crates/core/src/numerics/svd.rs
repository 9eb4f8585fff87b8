//! Randomized truncated SVD: Gaussian range finder with subspace iteration,
//! followed by an exact SVD of the small projected matrix.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RsvdParams {
    pub oversamples: usize,
    pub power_iterations: usize,
}

impl Default for RsvdParams {
    fn default() -> Self {
        RsvdParams {
            oversamples: 10,
            power_iterations: 7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TruncatedSvd {
    /// n × d, orthonormal columns.
    pub u: DMatrix<f64>,
    /// Non-increasing, non-negative.
    pub s: Vec<f64>,
    /// ncols × d, orthonormal columns.
    pub v: DMatrix<f64>,
}

impl TruncatedSvd {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (k, s) in self.s.iter().enumerate() {
            us.column_mut(k).scale_mut(*s);
        }
        us * self.v.transpose()
    }
}

pub fn randomized_tsvd(m: &CsrMatrix, rank: usize, seed: u64) -> Result<TruncatedSvd> {
    randomized_tsvd_with(m, rank, seed, RsvdParams::default())
}

pub fn randomized_tsvd_with(
    m: &CsrMatrix,
    rank: usize,
    seed: u64,
    params: RsvdParams,
) -> Result<TruncatedSvd> {
    let (nrows, ncols) = (m.nrows(), m.ncols());
    if rank == 0 {
        return Err(Error::Argument("rank must be positive".into()));
    }
    if rank > nrows.min(ncols) {
        return Err(Error::Argument(format!(
            "rank {rank} exceeds matrix dimensions {nrows}x{ncols}"
        )));
    }
    let samples = (rank + params.oversamples).min(nrows.min(ncols));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // column-major fill order keeps the draw sequence independent of layout
    let omega = DMatrix::from_fn(ncols, samples, |_, _| StandardNormal.sample(&mut rng));
    let mut q = orthonormalize(m.mul_dense(&omega));
    for _ in 0..params.power_iterations {
        let z = orthonormalize(m.transpose_mul_dense(&q));
        q = orthonormalize(m.mul_dense(&z));
    }

    // B = Qᵀ M, computed as (Mᵀ Q)ᵀ
    let b = m.transpose_mul_dense(&q).transpose();
    let svd = b.svd(true, true);
    let u_small = svd.u.expect("left vectors requested");
    let v_t = svd.v_t.expect("right vectors requested");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    order.truncate(rank);

    let u_full = &q * &u_small;
    let mut u = DMatrix::zeros(nrows, rank);
    let mut v = DMatrix::zeros(ncols, rank);
    let mut s = Vec::with_capacity(rank);
    for (k, &idx) in order.iter().enumerate() {
        let mut uc = u_full.column(idx).clone_owned();
        let mut vc = v_t.row(idx).transpose();
        // sign convention: largest-magnitude entry of each left vector positive
        let pivot = uc.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            uc.neg_mut();
            vc.neg_mut();
        }
        u.set_column(k, &uc);
        v.set_column(k, &vc);
        s.push(svd.singular_values[idx].max(0.0));
    }
    Ok(TruncatedSvd { u, s, v })
}

fn orthonormalize(y: DMatrix<f64>) -> DMatrix<f64> {
    y.qr().q()
}
