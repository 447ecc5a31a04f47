//! Latent class analysis for weighted response matrices.
//!
//! An N×J response matrix whose entries may be binary, counts, signed, or
//! continuous is modeled through a planted profile structure: each subject
//! belongs to one of K latent profiles, and the expected response of
//! subject `i` on item `j` depends only on `i`'s profile. The crate covers
//! the full benchmark loop around that model:
//!
//! - [`model`] — assignments, item parameters and their scaling split,
//!   population matrices, distribution domains, and the consistency-
//!   condition check.
//! - [`generators`] — seeded sampling of planted instances from seven
//!   response distributions (Bernoulli, Binomial, Poisson, Normal,
//!   Exponential, Uniform, and signed ±1).
//! - [`spectral`] — deterministic top-K truncated SVD and Lloyd's K-means.
//! - [`estimators`] — the spectral estimator (SVD + K-means on the left
//!   singular rows) and the raw-row K-means baseline, plus residual-norm
//!   model-order selection.
//! - [`metrics`] — clustering error, Hamming error, NMI, ARI, and relative
//!   item-parameter errors, all minimized over profile relabelings.
//! - [`harness`] — canned Monte-Carlo scenarios, the replicate engine,
//!   report emission, and CSV ingestion with per-profile covariate
//!   summaries.
//!
//! Conventions: profile labels are 0-based in every API and 1-based in
//! emitted artifacts (reports, CSV files, error messages). All randomness
//! flows through [`generators::RngHandle`] (ChaCha8), so any result is
//! reproducible from its master seed; wall-clock timings are the only
//! non-deterministic report fields.

pub mod error;
pub mod estimators;
pub mod generators;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod spectral;

pub use error::{Error, Result};
