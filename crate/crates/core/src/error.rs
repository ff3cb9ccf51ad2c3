use thiserror::Error;

/// Errors produced anywhere in the optimization toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("value {value} is outside the domain of dimension {dim}")]
    OutOfDomain { dim: usize, value: f64 },

    #[error("one-hot encoding unsupported: dimension {0} is continuous")]
    EncodingUnsupported(usize),

    #[error("invalid dimension {0} for this operation")]
    InvalidDimension(usize),

    #[error("numerical failure: Cholesky failed even with jitter {jitter:e}")]
    Cholesky { jitter: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("surrogate has not been fitted")]
    NotFitted,

    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("space too large for exhaustive enumeration: {0} points")]
    SpaceTooLarge(u128),

    #[error("folding backend error: {message}\n--- captured output ---\n{output}")]
    Backend { message: String, output: String },

    #[error("evaluation budget violated: expected {expected} objective calls, saw {got}")]
    BudgetViolation { expected: usize, got: usize },

    #[error("trace error: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
