use std::sync::Arc;

use num_complex::Complex64;

use super::{rate_kantorovich, RateBound, RateFormula};
use crate::bands::{BaseScheme, ExtremaMode, FrequencyBand, Partition};
use crate::error::{Error, Result};
use crate::symbols::{CMat, SymbolExpr};

/// Band approximations `M_ω` of the Leray projector and `L_ω` of its
/// gradient complement, for per-axis band scales `ω`.
///
/// With `w_i = ω_i²/ξ_i`:
/// `L_ω = ξ wᵀ / |ω|²` and `M_ω = (Id − w ξᵀ/|ω|²)(Id − L_ω)`.
/// `ξᵀ M_ω = 0`, so `M_ω` always lands in divergence-free fields, and
/// `L_ω` always returns a vector parallel to `ξ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LerayBandOperators {
    omega: Vec<f64>,
    omega_sq: f64,
}

impl LerayBandOperators {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() || omega.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "band scales must be positive, got {omega:?}"
            )));
        }
        let omega_sq = omega.iter().map(|w| w * w).sum();
        Ok(Self { omega, omega_sq })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    fn weights(&self, xi: &[f64]) -> Vec<f64> {
        self.omega.iter().zip(xi).map(|(w, x)| w * w / x).collect()
    }

    /// `L_ω(ξ)` as a real matrix.
    pub fn lw(&self, xi: &[f64]) -> CMat {
        let w = self.weights(xi);
        let d = self.omega.len();
        CMat::from_fn(d, d, |r, c| Complex64::new(xi[r] * w[c] / self.omega_sq, 0.0))
    }

    /// `M_ω(ξ)` as a real matrix.
    pub fn mw(&self, xi: &[f64]) -> CMat {
        let w = self.weights(xi);
        let d = self.omega.len();
        let q = CMat::from_fn(d, d, |r, c| Complex64::new(w[r] * xi[c] / self.omega_sq, 0.0));
        let id = CMat::identity(d);
        id.sub(&q).mul(&id.sub(&self.lw(xi)))
    }

    /// `(M_ω v, L_ω v)` without forming matrices.
    pub fn apply(&self, xi: &[f64], v: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let w = self.weights(xi);
        let s: Complex64 = w.iter().zip(v).map(|(wi, vi)| vi * *wi).sum::<Complex64>() / self.omega_sq;
        let lw: Vec<Complex64> = xi.iter().map(|x| s * *x).collect();
        let t: Vec<Complex64> = v.iter().zip(&lw).map(|(a, b)| a - b).collect();
        let r: Complex64 = xi.iter().zip(&t).map(|(x, ti)| ti * *x).sum::<Complex64>() / self.omega_sq;
        let mw = t.iter().zip(&w).map(|(ti, wi)| ti - r * *wi).collect();
        (mw, lw)
    }

    /// The one nonzero eigenvalue of `Id − M_ω − L_ω`:
    /// `1 − (Σ ξ_k²)(Σ ω_k⁴ / (|ω|⁴ ξ_k²))`.
    pub fn residual_eigenvalue(&self, xi: &[f64]) -> f64 {
        let s1: f64 = xi.iter().map(|x| x * x).sum();
        let s2: f64 = self
            .omega
            .iter()
            .zip(xi)
            .map(|(w, x)| w.powi(4) / (self.omega_sq * self.omega_sq * x * x))
            .sum();
        1.0 - s1 * s2
    }

    /// `L_ω` in the constructible algebra: `Σ_{a,b} (ω_b²/|ω|²) δ_ab (iξ_a)(iξ_b)^{-1}`.
    pub fn lw_symbol(&self) -> SymbolExpr {
        let d = self.omega.len();
        let mut terms = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let c = self.omega[b].powi(2) / self.omega_sq;
                terms.push(
                    c * (SymbolExpr::delta(a, b, d) * SymbolExpr::Xi(a) * SymbolExpr::XiInv(b)),
                );
            }
        }
        terms.into_iter().reduce(|x, y| x + y).expect("dimension >= 1")
    }

    /// `M_ω` in the constructible algebra.
    pub fn mw_symbol(&self) -> SymbolExpr {
        let d = self.omega.len();
        let mut q_terms = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let c = self.omega[a].powi(2) / self.omega_sq;
                q_terms.push(
                    c * (SymbolExpr::delta(a, b, d) * SymbolExpr::Xi(b) * SymbolExpr::XiInv(a)),
                );
            }
        }
        let q = q_terms.into_iter().reduce(|x, y| x + y).expect("dimension >= 1");
        (SymbolExpr::Identity - q) * (SymbolExpr::Identity - self.lw_symbol())
    }
}

/// `M_ω` and `L_ω` for a tensorial (or tensorial packet) band, with `ω_i`
/// the lower edge of the band's interval on axis `i` (`2^{j_i}` for an
/// unrefined band).
pub fn leray_band_operators(band: &FrequencyBand) -> Result<LerayBandOperators> {
    if band.box_lo().iter().any(|&l| l <= 0.0) {
        return Err(Error::UnsupportedScheme(format!(
            "band {} touches a coordinate plane; Leray band operators need tensorial bands",
            band.id()
        )));
    }
    LerayBandOperators::new(band.box_lo().to_vec())
}

/// Per-band Leray operators over a tensorial partition.
#[derive(Clone, Debug)]
pub struct LerayPreconditioner {
    partition: Arc<Partition>,
    ops: Vec<LerayBandOperators>,
    rates: Vec<RateBound>,
}

impl LerayPreconditioner {
    pub fn new(partition: &Arc<Partition>, mode: ExtremaMode) -> Result<Self> {
        if partition.scheme().base() != BaseScheme::Tensorial {
            return Err(Error::UnsupportedScheme(
                "the iterative Leray projector needs a tensorial partition".into(),
            ));
        }
        let grid = partition.grid();
        let mut ops = Vec::with_capacity(partition.bands().len());
        let mut rates = Vec::with_capacity(partition.bands().len());
        for band in partition.bands() {
            let op = leray_band_operators(band)?;
            let ext = band.extrema(grid, mode)?;
            // ζ_k = ξ_k / ω_k ranges over [a_k, b_k].
            let a = ext
                .per_axis
                .iter()
                .zip(op.omega())
                .map(|((lo, _), w)| lo / w)
                .fold(f64::INFINITY, f64::min);
            let b = ext
                .per_axis
                .iter()
                .zip(op.omega())
                .map(|((_, hi), w)| hi / w)
                .fold(0.0, f64::max);
            rates.push(RateBound {
                band: band.id().clone(),
                a,
                b,
                rho: rate_kantorovich(a, b),
                formula: RateFormula::Kantorovich,
            });
            ops.push(op);
        }
        Ok(Self {
            partition: Arc::clone(partition),
            ops,
            rates,
        })
    }

    pub fn partition(&self) -> &Arc<Partition> {
        &self.partition
    }

    pub fn operators(&self) -> &[LerayBandOperators] {
        &self.ops
    }

    pub fn rates(&self) -> &[RateBound] {
        &self.rates
    }

    /// Largest `|λ|` of `Id − M_ω − L_ω` over the band's grid modes.
    pub fn sampled_contraction(&self, band_index: usize) -> f64 {
        let grid = self.partition.grid();
        let band = &self.partition.bands()[band_index];
        let op = &self.ops[band_index];
        band.modes()
            .iter()
            .map(|&flat| {
                let f = grid.frequency(flat);
                op.residual_eigenvalue(f.components()).abs()
            })
            .fold(0.0, f64::max)
    }
}
