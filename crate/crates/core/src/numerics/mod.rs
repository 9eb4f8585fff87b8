//! Numerical kernels shared by the embedding and evaluation code.

mod cosine;
pub mod logistic;
mod pca;
mod spearman;
pub mod sparse;
mod svd;

pub use cosine::{cosine_similarity, cosine_similarity_checked, CosineOutcome};
pub use logistic::{fit_logistic_1d, LogisticConfig, LogisticFit, LogisticModel};
pub use pca::{pca_reduce, PcaOutput};
pub use spearman::{average_ranks, pearson, spearman_rho};
pub use sparse::CsrMatrix;
pub use svd::{randomized_tsvd, randomized_tsvd_with, RsvdParams, TruncatedSvd};
