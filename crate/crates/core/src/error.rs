//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced by matrix primitives, function evaluation and the
/// boundary/ball analyses.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("not positive definite: min eigenvalue {min_eig:.6e} (tolerance {tol:.6e})")]
    NotPositiveDefinite { min_eig: f64, tol: f64 },

    #[error("ill-conditioned: cond estimate {cond:.6e} exceeds limit {limit:.6e}")]
    IllConditioned { cond: f64, limit: f64 },

    #[error("singular factor: smallest singular value {sv_min:.6e}")]
    Singular { sv_min: f64 },

    #[error("outside function domain: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
