use std::io;

use thiserror::Error;

use crate::solver::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("structural mismatch: {0}")]
    Structural(String),

    #[error("field is not real: imaginary residue {residue:e} exceeds {limit:e}")]
    RealityViolation { residue: f64, limit: f64 },

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("symbol is singular at mode {mode:?}")]
    Singular { mode: Vec<f64> },

    #[error("arity mismatch: {0}")]
    Arity(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unsupported scheme: {0}")]
    UnsupportedScheme(String),

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("band {0} has no modes")]
    EmptyBand(String),

    #[error("symbol is not invertible on band {band}: {reason}")]
    NotInvertibleOnBand { band: String, reason: String },

    #[error("corrupted partition: {0}")]
    Consistency(String),

    #[error("contraction bound {rho} >= 1 on band {band}; refusing to iterate")]
    Refused { band: String, rho: f64 },

    #[error("iteration diverged after {} steps", report.iterations)]
    Diverged { report: Box<SolveReport> },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
