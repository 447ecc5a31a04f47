//! Numerical kernels: truncated SVD and K-means.

mod kmeans;
mod svd;

pub use kmeans::{kmeans, KmeansConfig, KmeansResult};
pub use svd::{spectral_norm, top_k_svd, TruncatedSvd};

pub(crate) use svd::jacobi_eigh;
