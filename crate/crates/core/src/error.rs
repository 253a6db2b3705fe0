use std::io;

use thiserror::Error;

/// Errors surfaced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke a documented precondition (shape, range, symmetry).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A matrix that must be positive definite was not.
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    /// Training produced a non-finite loss.
    #[error("training fault at step {step}: loss = {loss}")]
    TrainingFault { step: u64, loss: f64 },

    /// Network or checkpoint shapes do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An exhaustive search would exceed its enumeration budget.
    #[error("instance too large: {count} joint assignments exceeds the bound {bound}")]
    TooLarge { count: u128, bound: u128 },

    /// Configuration file problems, one entry per offending line or key.
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short stable tag used by the CLI's machine-readable error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Contract(_) => "contract",
            Error::NotPositiveDefinite { .. } => "numerical",
            Error::TrainingFault { .. } => "training_fault",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::TooLarge { .. } => "too_large",
            Error::Config(_) => "config",
            Error::Checkpoint(_) => "checkpoint",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
