use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandRate {
    pub band: String,
    pub rho: f64,
}

/// Outcome of an iterative solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// Geometric-mean residual ratio over the last `max(5, n/2)` steps;
    /// `None` with fewer than three recorded residuals.
    pub fitted_rate: Option<f64>,
    /// Largest per-band contraction bound.
    pub theoretical_rate: f64,
    /// Relative residuals, starting with 1 for the initial residual.
    #[serde(rename = "residuals")]
    pub residual_history: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_band_rates: Option<Vec<BandRate>>,
    /// Spectral divergence of the accumulated divergence-free part after
    /// each iteration, relative to the input norm (Leray iteration only).
    #[serde(default, rename = "divergence", skip_serializing_if = "Option::is_none")]
    pub divergence_history: Option<Vec<f64>>,
}

impl SolveReport {
    pub(crate) fn finish(
        iterations: usize,
        converged: bool,
        theoretical_rate: f64,
        history: Vec<f64>,
        per_band_rates: Option<Vec<BandRate>>,
        divergence_history: Option<Vec<f64>>,
    ) -> Self {
        let window = 5.max(history.len().saturating_sub(1) / 2);
        let fitted_rate = estimate_rate(&history, window).ok();
        Self {
            iterations,
            converged,
            fitted_rate,
            theoretical_rate,
            residual_history: history,
            per_band_rates,
            divergence_history,
        }
    }

    /// Successive ratios `r_n / r_{n−1}`.
    pub fn ratios(&self) -> Vec<f64> {
        self.residual_history
            .windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
            .collect()
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios().into_iter().fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    /// Writes `iter,residual,ratio`; the first row has an empty ratio.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let fmt = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["iter", "residual", "ratio"]).map_err(fmt)?;
        let ratios = self.ratios();
        for (i, r) in self.residual_history.iter().enumerate() {
            let ratio = if i == 0 { String::new() } else { ratios[i - 1].to_string() };
            w.write_record([i.to_string(), r.to_string(), ratio])
                .map_err(fmt)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Geometric mean of the successive ratios over the last `window` steps of
/// `history` (capped at the available steps).
pub fn estimate_rate(history: &[f64], window: usize) -> Result<f64> {
    if history.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 residuals, got {}",
            history.len()
        )));
    }
    if let Some(bad) = history.iter().find(|h| !h.is_finite() || **h < 0.0) {
        return Err(Error::InvalidArgument(format!("residual {bad} is not a finite norm")));
    }
    let w = window.clamp(1, history.len() - 1);
    let first = history[history.len() - 1 - w];
    let last = history[history.len() - 1];
    if first == 0.0 {
        return Ok(0.0);
    }
    Ok((last / first).powf(1.0 / w as f64))
}
