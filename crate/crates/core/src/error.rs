use thiserror::Error;

/// Errors produced by panel handling, estimation, and portfolio construction.
#[derive(Debug, Error)]
pub enum Error {
    #[error("column {column} is not monotone: missing cell at row {row} precedes an observed cell")]
    NonMonotonePattern { column: String, row: usize },

    #[error("column {column} has no observed cells")]
    EmptyColumn { column: String },

    #[error("non-finite value at row {row}, column {column}")]
    NonFiniteValue { row: usize, column: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line} has {found} cells, expected {expected}")]
    InconsistentRowWidth {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("design matrix is rank deficient ({rows} rows, {cols} predictors, numerical rank {rank})")]
    RankDeficient {
        rows: usize,
        cols: usize,
        rank: usize,
    },

    #[error("column {column} has {observed} observations, need at least 2")]
    DegenerateColumn { column: String, observed: usize },

    #[error("covariance matrix is not positive definite")]
    NonPdCovariance,

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient eligible assets: {0}")]
    InsufficientAssets(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
