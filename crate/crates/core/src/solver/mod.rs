//! Richardson iteration with band preconditioners, the iterative Leray
//! projector, and the exact modewise oracles both are checked against.
//!
//! Everything runs on spectra: a field is transformed once on the way in and
//! once on the way out. Because the bands are disjoint mode sets, band
//! restriction followed by a band operator is just a modewise product.

mod helmholtz;
mod report;
mod richardson;

pub use helmholtz::{exact_leray, helmholtz_decompose};
pub use report::{estimate_rate, BandRate, SolveReport};
pub use richardson::{exact_solve, richardson_solve};

use crate::error::{Error, Result};

/// Consecutive residual increases tolerated before declaring divergence.
pub const DIVERGENCE_WINDOW: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub max_iter: usize,
    /// Relative residual at which the iteration stops.
    pub tol: f64,
    /// Sobolev order `t` of the residual norm; 0 is L².
    pub norm: f64,
    /// Keep every residual; otherwise only the last one is reported.
    pub record_history: bool,
    /// Refuse to iterate when a band's bound is ≥ 1.
    pub strict: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-10,
            norm: 0.0,
            record_history: true,
            strict: true,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidArgument(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
        }
        if !self.norm.is_finite() {
            return Err(Error::InvalidArgument("norm order must be finite".into()));
        }
        Ok(())
    }
}

/// Residual bookkeeping shared by both iterations.
pub(crate) struct Tracker {
    history: Vec<f64>,
    record: bool,
    last: f64,
    growth: usize,
}

pub(crate) enum Step {
    Continue,
    Converged,
    Diverged,
}

impl Tracker {
    pub(crate) fn new(record: bool) -> Self {
        Self {
            history: vec![1.0],
            record,
            last: 1.0,
            growth: 0,
        }
    }

    pub(crate) fn push(&mut self, rel: f64, tol: f64) -> Step {
        if self.record {
            self.history.push(rel);
        } else {
            self.history = vec![rel];
        }
        if !rel.is_finite() {
            return Step::Diverged;
        }
        self.growth = if rel > self.last { self.growth + 1 } else { 0 };
        self.last = rel;
        if rel <= tol {
            Step::Converged
        } else if self.growth >= DIVERGENCE_WINDOW {
            Step::Diverged
        } else {
            Step::Continue
        }
    }

    pub(crate) fn into_history(self) -> Vec<f64> {
        self.history
    }
}
