//! Error type shared across the library.

use thiserror::Error;

/// Library error.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a mathematical precondition (sign, range, degeneracy).
    #[error("domain error: {0}")]
    Domain(String),

    /// A data file failed to parse; `row` is 1-based and counts the header.
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    /// Not enough observations to run an estimator.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
