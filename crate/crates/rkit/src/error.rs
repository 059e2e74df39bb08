//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by grid construction, rearrangement kernels, energy
/// evaluation, constrained minimization, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("invalid parameter {what} = {value}")]
    InvalidParameter { what: &'static str, value: f64 },

    #[error("axis {axis} has {len} cells; at least 2 are required")]
    DegenerateAxis { axis: usize, len: usize },

    #[error("levels must be strictly increasing and positive")]
    LevelsNotIncreasing,

    #[error("phi(0) = {value}, but phi must vanish at 0")]
    NonZeroPhiAtZero { value: f64 },

    #[error("negative values in {what} (min = {min}); take moduli first")]
    NegativeValues { what: &'static str, min: f64 },

    #[error("grid mismatch: {reason}")]
    GridMismatch { reason: String },

    #[error("unsupported grid: {reason}")]
    UnsupportedGrid { reason: String },

    #[error("level {level} collides with a sampled value; perturb the level")]
    AmbiguousLevel { level: f64 },

    #[error("value {value} outside tabulated range (max {max})")]
    RangeExceeded { value: f64, max: f64 },

    #[error("exponent {exponent} at or above subcritical ceiling {ceiling}")]
    Supercritical { exponent: f64, ceiling: f64 },

    #[error("invalid nonlinearity spec: {reason}")]
    InvalidSpec { reason: String },

    #[error("degenerate mass constraint (alpha = 0)")]
    DegenerateConstraint,

    #[error("flow diverged at iteration {iterations} (last stable energy {last_energy})")]
    Diverged { iterations: usize, last_energy: f64 },

    #[error("invalid flow configuration: {reason}")]
    Config { reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error in {what}: {reason}")]
    Parse { what: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
