use thiserror::Error;

/// Errors raised by the moment analysis pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} variables, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degree {needed} exceeds the available truncation degree {available}")]
    DegreeExceeded { needed: usize, available: usize },

    #[error("degree {degree} exceeds the configured budget {budget}")]
    BudgetExceeded { degree: usize, budget: usize },

    #[error("L(a^{power}) = {value} is negative; the sequence is not a moment sequence")]
    NegativePower { power: usize, value: String },

    #[error("the functional is not positive: {0}")]
    NotPositive(String),

    #[error("growth condition fails for {what}: the root sequence diverges")]
    GrowthDiverging { what: String },

    #[error("Hankel rank does not stabilize up to degree {max_degree}")]
    RankUnstable { max_degree: usize },

    #[error("ill-conditioned recovery: {0}")]
    IllConditioned(String),

    #[error("matrix is not symmetric at ({row}, {col})")]
    NonSymmetric { row: usize, col: usize },

    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { expected, found }
    }
}
