//! Crate-wide error type and result alias.

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A required file or resource is missing.
    #[error("not found: {0}")]
    NotFound(String),

    /// Input files disagree with each other or violate the on-disk format.
    #[error("schema error: {0}")]
    Schema(String),

    /// A caller-supplied value violates an operation's contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A non-finite value surfaced where the math requires finite numbers.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Training hit a degenerate state (e.g. a zero-norm channel) and aborted.
    #[error("degenerate loss at step {step}: {detail}")]
    DegenerateLoss { step: usize, detail: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }
}
