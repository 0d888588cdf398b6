use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the numeric and selection routines.
///
/// File-format failures live in [`crate::io::IoError`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector has zero Euclidean norm{}", .row.map(|r| format!(" (row {r})")).unwrap_or_default())]
    ZeroNormVector { row: Option<usize> },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for {n} tokens")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("duplicate index {0} in selection")]
    DuplicateIndex(usize),

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("input has no tokens")]
    EmptyInput,

    #[error("instance with {n} tokens exceeds the exact-solver cap of {cap}")]
    InstanceTooLarge { n: usize, cap: usize },

    #[error("budget {budget} exceeds token count {n}")]
    BudgetExceedsN { budget: usize, n: usize },

    #[error("grid {width}x{height} does not cover {n} tokens")]
    GridMismatch { width: usize, height: usize, n: usize },

    #[error("target ratio {target} is below the minimum achievable ratio {min_ratio}")]
    TargetUnachievable { target: f64, min_ratio: f64 },

    #[error("degenerate model: full-length layer cost is {0}")]
    DegenerateModel(f64),

    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
