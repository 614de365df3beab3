use thiserror::Error;

use crate::model::FairnessNotion;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {what} has {found} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid cost matrix: {0}")]
    InvalidCostMatrix(String),

    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),

    #[error("{notion} violation is undefined: no attribute pair has a non-empty conditioning event")]
    UndefinedViolation { notion: FairnessNotion },

    #[error("degenerate labels: all samples share the same label, no label-distinct pairs exist")]
    DegenerateLabels,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("size guard exceeded: n = {n} is larger than the limit {limit} for {what}")]
    SizeGuard {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by the caller's configuration rather than by the data.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_) | Error::SizeGuard { .. } | Error::Unsupported(_)
        )
    }
}
