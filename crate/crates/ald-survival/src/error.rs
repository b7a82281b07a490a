use thiserror::Error;

/// Errors surfaced by distribution constructors, training, metrics, and data handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("csv error at row {row}: {msg}")]
    Csv { row: usize, msg: String },

    #[error("training diverged: {0}")]
    NonFinite(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("serialization error: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
