use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge{}: estimate {estimate:e}, error estimate {error_estimate:e}",
        slice.map(|s| format!(" on slice {s}")).unwrap_or_default())]
    Convergence {
        estimate: f64,
        error_estimate: f64,
        slice: Option<usize>,
    },

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("bin grid mismatch: {0}")]
    GridMismatch(String),

    #[error("n' is required for d = 3; run `hopdist calibrate` first or pass --n-prime")]
    MissingNPrime,

    #[error("invalid input file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[cfg(feature = "cli")]
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
