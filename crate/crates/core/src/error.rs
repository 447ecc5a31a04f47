//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by model construction, data generation, estimation, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A latent profile ended up with no subjects. Profile numbers are
    /// reported 1-based, matching emitted reports.
    #[error("latent profile {class} is empty; every profile needs at least one subject")]
    EmptyClass { class: usize },

    /// A class label lies outside `0..k`.
    #[error("label {label} at position {index} is outside 0..{k}")]
    LabelOutOfRange {
        index: usize,
        label: usize,
        k: usize,
    },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    /// The item parameter matrix is identically zero, so no scaling split exists.
    #[error("item parameter matrix is identically zero")]
    AllZero,

    /// The reference item parameter matrix has zero norm.
    #[error("reference item parameter matrix has zero norm")]
    ZeroTheta,

    #[error("scaling parameter {rho} is outside the legal range (0, {hi}] for {kind}")]
    RhoOutOfRange {
        rho: f64,
        hi: f64,
        kind: &'static str,
    },

    /// A population mean falls outside the sampling distribution's domain.
    /// Indices are 0-based.
    #[error("population entry ({row}, {col}) = {value} is outside the legal domain for {kind}")]
    DomainViolation {
        row: usize,
        col: usize,
        value: f64,
        kind: &'static str,
    },

    #[error("resampling budget exhausted after {attempts} attempts: {context}")]
    RetriesExhausted { attempts: usize, context: String },

    /// Matrix input contains NaN or infinity. Indices are 0-based.
    #[error("input contains a non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("iteration cap {cap} reached without convergence: {context}")]
    ConvergenceFailure { cap: usize, context: String },

    #[error("degenerate input: {context}")]
    DegenerateInput { context: String },

    /// An estimated class came back empty, so the class-size matrix is
    /// singular. K-means empty-cluster repair makes this unreachable in
    /// practice; the guard stays for safety.
    #[error("estimated profile {class} is empty; class-size matrix is singular")]
    SingularClassMatrix { class: usize },

    #[error("invalid configuration: {context}")]
    InvalidConfig { context: String },

    #[error("schema error: {context}")]
    SchemaError { context: String },

    #[error("no rows left after filtering ({dropped} dropped)")]
    EmptyAfterFilter { dropped: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// True for failures of the numerical machinery itself, as opposed to
    /// bad inputs or I/O. The CLI maps these to a distinct exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::ConvergenceFailure { .. }
                | Error::RetriesExhausted { .. }
                | Error::SingularClassMatrix { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
