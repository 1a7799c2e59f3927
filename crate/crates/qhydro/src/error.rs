//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by field construction, transforms, solvers and the batch driver.
#[derive(Debug, Error)]
pub enum Error {
    /// A field value was NaN or infinite.
    #[error("non-finite value at grid index {index} in {context}")]
    NonFinite { context: &'static str, index: usize },

    /// A density carried negative mass where positivity is required.
    #[error("negative density {value:.3e} at grid index {index}")]
    NegativeDensity { index: usize, value: f64 },

    /// A density integrated to zero (or below), so it cannot be normalized.
    #[error("degenerate density: integral {integral:.3e} is not positive")]
    DegenerateDensity { integral: f64 },

    /// The density dips below the node floor strictly inside its support.
    #[error("node detected: density {value:.3e} at grid index {index} is below the floor {floor:.3e} inside the bulk")]
    NodeDetected { index: usize, value: f64, floor: f64 },

    /// The phase winds a nonzero number of times around the periodic domain.
    #[error("nonzero phase winding ({winding} cycles) over the periodic domain")]
    WindingDetected { winding: i64 },

    /// The phase anchor moved by more than pi*hbar between consecutive snapshots.
    #[error("phase unwrapping inconsistent between snapshots {first} and {second}: anchor moved by {jump:.3e}")]
    WindingInconsistent { first: usize, second: usize, jump: f64 },

    /// Two fields were combined across different grids.
    #[error("grid mismatch: {left} vs {right} points")]
    GridMismatch { left: usize, right: usize },

    /// Invalid grid construction parameters.
    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    /// Invalid physical constant.
    #[error("invalid constants: {reason}")]
    InvalidConstants { reason: String },

    /// Fisher information vanished, so the Fisher length is unbounded.
    #[error("Fisher information is zero: Fisher length unbounded (uniform density)")]
    UnboundedFisherLength,

    /// An operation received an unsupported argument.
    #[error("unsupported argument: {reason}")]
    Unsupported { reason: String },

    /// A node formed while time stepping the hydrodynamic system.
    #[error("node formed during hydrodynamic step {step} (t = {time:.6}): shorten the horizon or use the spectral solver")]
    NodeDuringStep { step: usize, time: f64 },

    /// A snapshot series was empty, non-uniform, or otherwise unusable.
    #[error("invalid snapshot series: {reason}")]
    InvalidSeries { reason: String },

    /// Configuration file rejected.
    #[error("config error: {message}")]
    Config { message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(message: impl Into<String>) -> Self {
        Error::Config { message: message.into() }
    }

    /// Process exit code per the batch contract: 2 for config errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
