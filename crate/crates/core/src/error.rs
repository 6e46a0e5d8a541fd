use thiserror::Error;

use crate::model::SystemKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("factor index {index} out of range for a {factors}-factor shape")]
    Index { index: usize, factors: usize },

    #[error("matrix is not Hermitian (relative defect {defect:.3e} exceeds {tolerance:.1e})")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("outside the representable domain: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("wrong system kind: expected {expected}, got {actual}")]
    WrongKind { expected: SystemKind, actual: SystemKind },
}

pub type Result<T> = std::result::Result<T, Error>;
