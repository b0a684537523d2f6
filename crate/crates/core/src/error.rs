use thiserror::Error;

use crate::lattice::GridShape;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected} coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: GridShape, right: GridShape },

    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("index {index} out of range for grid of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty frequency set")]
    EmptySet,

    /// The spectrum of the signal has mass outside the declared frequency set.
    #[error("spectrum not contained in the declared set; {} offending frequencies, first {:?}", offending.len(), &offending[..offending.len().min(8)])]
    SupportViolation { offending: Vec<usize> },

    #[error("unrecoverable problem: {0}")]
    Unrecoverable(String),

    #[error("inconsistent data: {0}")]
    Data(String),

    #[error("enumeration budget exceeded: {needed} candidates, budget {budget}")]
    BudgetExceeded { needed: f64, budget: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
