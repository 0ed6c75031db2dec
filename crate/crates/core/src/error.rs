use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("linear system is infeasible")]
    Infeasible,

    #[error("linear program is unbounded in the requested direction")]
    Unbounded,

    #[error("exact tie: {0}")]
    Tie(String),

    #[error("incoherent model: {0}")]
    Coherence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("row {row}: {message}")]
    Data { row: usize, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(message: impl Into<String>) -> Error {
    Error::InvalidInput(message.into())
}
