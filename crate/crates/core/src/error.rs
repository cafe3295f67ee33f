use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid permutation for base {base}: {reason}")]
    InvalidPermutation { base: usize, reason: String },

    #[error("invalid genotype: {0}")]
    InvalidGenotype(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("exact evaluation needs about {estimated} grid cells, budget is {budget}")]
    BudgetExceeded { estimated: u128, budget: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed generating vector: field `{field}`: {message}")]
    Vector { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
