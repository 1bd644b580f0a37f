use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid label: {0}")]
    InvalidLabel(String),

    #[error("basis mismatch: {0}")]
    Basis(String),

    #[error("label set is not closed under m -> -m: {0}")]
    IncompleteSpace(String),

    #[error("state is not normalized: |ψ|² = {norm_sq} (defect {defect:.3e})")]
    Normalization { norm_sq: f64, defect: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("size out of range: {0}")]
    Size(String),

    #[error("monotone violation: {0}")]
    MonotoneViolation(String),

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("invalid angle: {0}")]
    InvalidAngle(String),
}

pub type Result<T> = std::result::Result<T, Error>;
