use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("node index {index} out of range for a network of {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("uncontrollable at horizon {horizon}: smallest Gramian eigenvalue {lambda_min:e}, condition number {condition:e}")]
    Uncontrollable {
        horizon: usize,
        lambda_min: f64,
        condition: f64,
    },

    #[error(
        "search space of {size} schedules exceeds the budget of {budget}; use the greedy solver"
    )]
    BudgetExceeded { size: f64, budget: u64 },

    #[error(
        "degenerate baseline: optimal time-invariant value is {0:e}, relative advantage undefined"
    )]
    DegenerateBaseline(f64),

    #[error("spectral radius is zero (nilpotent matrix); spectral normalization is undefined, use an unnormalized matrix or add self-loops")]
    NilpotentMatrix,

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
