use thiserror::Error;

use crate::ad::AdError;

#[derive(Debug, Error)]
pub enum ScoError {
    #[error(transparent)]
    Eval(#[from] AdError),
    #[error("invalid problem: {0}")]
    Problem(String),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("invalid selection request: {0}")]
    Selection(String),
    #[error("criterion {criterion} needs {needs}")]
    Criterion {
        criterion: &'static str,
        needs: &'static str,
    },
    #[error("exhaustive search over {count} supports exceeds the limit of {limit}")]
    TooManySupports { count: u128, limit: u128 },
    #[error("true support must be non-empty")]
    EmptyTruth,
    #[error("dataset error: {0}")]
    Data(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = ScoError> = std::result::Result<T, E>;
