use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChowError {
    #[error("ambient mismatch: {0}")]
    AmbientMismatch(String),
    #[error("unsupported datum: {0}")]
    UnsupportedDatum(String),
    #[error("invalid datum: {0}")]
    InvalidDatum(String),
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("invalid center: {0}")]
    InvalidCenter(String),
    #[error("degenerate multiplier: the exceptional self-intersection scalar must be nonzero")]
    DegenerateMultiplier,
    #[error("correspondence is not in B: {0}")]
    NotInB(String),
    #[error("inconsistent tau pair: {0}")]
    InconsistentTau(String),
    #[error("construction violation: {0}")]
    ConstructionViolation(String),
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
}

pub type Result<T, E = ChowError> = std::result::Result<T, E>;
