//! Error type shared by all engines.

use alloc::string::String;
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Matrix or operator dimensions do not line up.
    #[error("shape error: {0}")]
    Shape(String),
    /// An index (qubit label, subsystem, basis state) is out of range.
    #[error("index error: {0}")]
    Index(String),
    /// A requested object would exceed a hard size guard.
    #[error("size error: {0}")]
    Size(String),
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A state or operation refers to an excitation sector the basis lacks.
    #[error("sector error: {0}")]
    Sector(String),
    /// The single-excitation weight of a state is numerically zero.
    #[error("empty single-excitation sector")]
    EmptySector,
    /// The adaptive integrator could not meet its tolerance.
    #[error("stiffness error: {0}")]
    Stiffness(String),
    /// Trace drifted past the integration guard.
    #[error("integration error: trace drift {drift:e} exceeds 1e-7")]
    TraceDrift { drift: f64 },
    /// A quantity that must be real carries too large an imaginary part.
    #[error("consistency error: {0}")]
    Consistency(String),
    /// A stochastic update left the state unusable (step size too large).
    #[error("instability error: {0}")]
    Instability(String),
    /// A coherence ratio implies an infinite dephasing rate.
    #[error("infinite-rate error: measured coherence is zero")]
    InfiniteRate,
    /// Generic numerical failure (quadrature, underflow, non-convergence).
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Fringe fitting failed (degenerate grid or span).
    #[error("fit error: {0}")]
    Fit(String),
    /// The derivative-free optimizer encountered an invalid cost.
    #[error("optimizer error: {0}")]
    Optimizer(String),
    /// Trajectory records cannot be combined (mismatched grids).
    #[error("alignment error: {0}")]
    Alignment(String),
}
