use thiserror::Error;

/// Errors raised by the channel model, codebook handling and search routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("phase bit must be 0 or 1, got {0}")]
    InvalidBit(u8),
    #[error("reflection magnitude must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("dimension mismatch: expected {expected} controllable elements, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("codebook text, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("channel contains a non-finite entry")]
    NonFinite,
    #[error("exhaustive search over 4^{elements} configurations exceeds the limit of {limit}")]
    EnumerationLimit { elements: usize, limit: u64 },
    #[error("frame simulation needs {requested} samples, budget is {budget}")]
    BudgetExceeded { requested: u64, budget: u64 },
    #[error("invalid frame configuration: {0}")]
    InvalidFrameConfig(String),
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
