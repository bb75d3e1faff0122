use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid matrix shape: {0}")]
    Shape(String),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid Bloch vector: norm {0}")]
    InvalidBloch(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid probability data: {0}")]
    InvalidProbabilities(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("inconsistent equality constraint {row} ({label}): mismatch {mismatch:.3e}")]
    Infeasible {
        row: usize,
        label: String,
        mismatch: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("solver finished with status {status}: {message}")]
    Solver { status: String, message: String },

    #[error("effective strategy violates {0}")]
    Strategy(String),
}

pub type Result<T> = std::result::Result<T, Error>;
