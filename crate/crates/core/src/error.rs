use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cutpoints must be strictly increasing (delta[{index}] = {value} <= delta[{prev}] = {prev_value})")]
    NonIncreasingCutpoints {
        prev: usize,
        prev_value: f64,
        index: usize,
        value: f64,
    },

    #[error("category {0} has no observations; merge it with a neighbour or drop it")]
    EmptyCategory(usize),

    #[error("objective is not finite at the starting point ({0})")]
    NonFiniteObjective(f64),

    #[error("estimating-equation Jacobian is singular (condition number {0:.3e}); use more data or a smaller model")]
    SingularJacobian(f64),

    #[error("coefficient {0} has zero standard error")]
    ZeroStdError(usize),

    #[error("{path}: row {row}, column '{column}': {message}")]
    Data {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("{failed} of {total} replications failed to fit (limit 5%): {first}")]
    TooManyFailures { failed: usize, total: usize, first: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
