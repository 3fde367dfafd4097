//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A qudit dimension below 2 was requested.
    #[error("qudit dimension must be at least 2, got {0}")]
    InvalidDim(usize),

    /// A basis label lies outside [0, D).
    #[error("basis label {value} out of range for dimension {dim}")]
    DitOutOfRange { value: usize, dim: usize },

    /// Operands carry incompatible subsystem dimensions.
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    /// A subsystem index does not exist in the composite system.
    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },

    /// Post-selection on an outcome of (numerically) zero probability.
    #[error("impossible outcome: probability {0:.3e} is numerically zero")]
    ImpossibleOutcome(f64),

    /// The post-selected branch of the nonlinear map has vanishing weight.
    #[error("vanishing success probability {0:.3e}")]
    VanishingSuccessProbability(f64),

    /// A dense construction would exceed the configured size guard.
    #[error("capacity guard: {0}")]
    CapacityExceeded(String),

    /// A value failed a structural validity check (norm, hermiticity, ...).
    #[error("invalid value: {0}")]
    InvalidValue(String),

    /// A parameter failed validation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
