use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("instance too large: n = {n} exceeds {max}")]
    TooLarge { n: usize, max: usize },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;
