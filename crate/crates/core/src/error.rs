use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Error, Debug)]
pub enum Error {
    /// A distribution or copula parameter lies outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Tensor or matrix shapes do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A tensor element index lies outside `1..=n`.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// A numerical routine met a degenerate input (singular matrix,
    /// zero variance, vanishing regression spread, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An iterative scheme did not reach its stopping rule.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// An exhaustive search was requested above its documented cap.
    #[error("search space too large: {0}")]
    SearchCap(String),

    /// No admissible solution exists for the request.
    #[error("no admissible solution: {0}")]
    NoSolution(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
