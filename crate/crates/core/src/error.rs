//! Error type shared by the solver library.

use thiserror::Error;

/// Errors raised by grid construction, the banded solvers, and the propagator.
#[derive(Debug, Error)]
pub enum TdseError {
    /// Spatial extent is empty or reversed.
    #[error("invalid grid extent: x_min = {x_min} must be strictly below x_max = {x_max}")]
    InvalidExtent { x_min: f64, x_max: f64 },

    /// Too few grid intervals for the widest stencil.
    #[error(
        "grid too small: {intervals} intervals, need at least {min} for the five-point stencil"
    )]
    GridTooSmall { intervals: usize, min: usize },

    /// A parameter violated its domain (non-positive width, time step, ...).
    #[error("invalid parameter {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    /// A sequence does not have the length required by its consumer.
    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// A banded system is below the minimum dimension for its bandwidth.
    #[error("system too small: dimension {dim}, need at least {min}")]
    SystemTooSmall { dim: usize, min: usize },

    /// Elimination hit a pivot indistinguishable from zero.
    #[error("singular system: |pivot| < {threshold:e} at row {row}")]
    SingularSystem { row: usize, threshold: f64 },

    /// A potential sample is NaN or infinite.
    #[error("potential is not finite at grid point {index}")]
    NonFinitePotential { index: usize },

    /// The sampled wave packet has zero norm on this grid.
    #[error("wave packet vanishes on the grid; cannot normalize")]
    VanishingPacket,

    /// Residual check failed during propagation (diagnostics enabled).
    #[error("residual {residual:e} exceeds tolerance {tolerance:e} at step {step}")]
    ResidualExceeded {
        step: usize,
        residual: f64,
        tolerance: f64,
    },

    /// Norm drift check failed during propagation (full diagnostics).
    #[error("norm drifted by {drift:e} at step {step}")]
    NormDrift { step: usize, drift: f64 },

    /// An observer callback aborted the run.
    #[error("observer failed at step {step}")]
    Observer {
        step: usize,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, TdseError>;
