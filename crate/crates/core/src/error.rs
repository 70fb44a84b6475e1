use thiserror::Error;

/// Errors raised by the mapping library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid genetic map: {0}")]
    InvalidMap(String),

    #[error("genetic distance must be finite and non-negative, got {0}")]
    InvalidDistance(f64),

    #[error("position is not part of this map: {0}")]
    ForeignPosition(String),

    #[error("position is not on the lattice: {0}")]
    OffLattice(String),

    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("internal consistency violated: {0}")]
    Inconsistent(String),

    #[error("exhaustive scan needs {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("thresholds need full-search permutations; candidate-shortcut runs only yield p-values")]
    ThresholdUnavailable,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
