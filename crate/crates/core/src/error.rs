use thiserror::Error;

/// Errors produced by the numerical library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unknown catalog function `{0}`")]
    UnknownFunction(String),

    #[error("invalid parameter for `{function}`: {message}")]
    InvalidParam { function: String, message: String },

    #[error("grid [{lo}, {hi}] lies outside the function domain [{a}, {b}]")]
    OutsideDomain { lo: f64, hi: f64, a: f64, b: f64 },

    #[error("fractional order must be positive and finite, got {0}")]
    InvalidOrder(f64),

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("index order violation: {lo} > {hi}")]
    IndexOrder { lo: usize, hi: usize },

    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("empty variation window around x0 = {0}")]
    EmptyWindow(f64),

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
