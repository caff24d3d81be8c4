use std::sync::Arc;

use num_complex::Complex64;

use super::richardson::weighted_norm;
use super::{BandRate, SolveConfig, SolveReport, Step, Tracker};
use crate::bands::{ExtremaMode, Partition};
use crate::error::{Error, Result};
use crate::precond::LerayPreconditioner;
use crate::spectral::{
    forward_transform, inverse_transform_scaled, sobolev_weights, Frequency, GridSpec,
    RealField, SpectralField,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn check_vector_field(u: &RealField) -> Result<()> {
    let d = u.grid().dim();
    if !(2..=3).contains(&d) {
        return Err(Error::InvalidArgument(format!(
            "Helmholtz decomposition needs a 2D or 3D grid, got {d}D"
        )));
    }
    if u.components() != d {
        return Err(Error::Arity(format!(
            "expected a {d}-component vector field, got {} component(s)",
            u.components()
        )));
    }
    Ok(())
}

/// Exact split of `v` at one mode: `(P v, v − P v)` with the Nyquist-zeroed
/// `ξ`. Modes where that `ξ` vanishes go entirely to the first part.
fn exact_split(f: &Frequency, v: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let d = v.len();
    let xi: Vec<f64> = (0..d).map(|i| f.odd(i)).collect();
    let n2 = f.odd_norm_sq();
    if n2 == 0.0 {
        return (v.to_vec(), vec![ZERO; d]);
    }
    let s: Complex64 = xi.iter().zip(v).map(|(x, z)| z * *x).sum::<Complex64>() / n2;
    let curl: Vec<Complex64> = xi.iter().map(|x| s * *x).collect();
    let div = v.iter().zip(&curl).map(|(a, b)| a - b).collect();
    (div, curl)
}

fn gather(s: &[Complex64], n: usize, d: usize, flat: usize) -> Vec<Complex64> {
    (0..d).map(|c| s[c * n + flat]).collect()
}

/// L² norm of `Σ_i iξ_i û_i` over all modes.
fn divergence_norm(grid: &GridSpec, s: &[Complex64], d: usize) -> f64 {
    let n = grid.len();
    let mut acc = 0.0;
    for flat in 0..n {
        let f = grid.frequency(flat);
        let div: Complex64 = (0..d).map(|i| s[i * n + flat] * f.odd(i)).sum();
        acc += div.norm_sqr();
    }
    acc.sqrt()
}

/// Iterative Leray projection `v_0 = u`, `v_{n+1} = v_n − M_ω v_n − L_ω v_n`
/// per band, accumulating `u_div = Σ M_ω v_n` and `u_curl = Σ L_ω v_n`. DC
/// modes are split exactly in the first step, the mean going to `u_div`.
///
/// Returns `(u_div, u_curl, report)`; residuals are `‖v_n‖ / ‖u‖`.
pub fn helmholtz_decompose(
    u: &RealField,
    p: &Arc<Partition>,
    cfg: &SolveConfig,
) -> Result<(RealField, RealField, SolveReport)> {
    cfg.validate()?;
    check_vector_field(u)?;
    let grid = u.grid();
    if grid != p.grid() {
        return Err(Error::Structural(format!(
            "field grid {} does not match partition grid {}",
            grid.describe(),
            p.grid().describe()
        )));
    }
    let pc = LerayPreconditioner::new(p, ExtremaMode::Exact)?;
    let worst = pc
        .rates()
        .iter()
        .fold(None, |acc: Option<&crate::precond::RateBound>, r| match acc {
            Some(w) if w.rho >= r.rho => Some(w),
            _ => Some(r),
        });
    let theoretical = worst.map_or(0.0, |r| r.rho);
    if cfg.strict && !(theoretical < 1.0) {
        let w = worst.expect("a rate >= 1 comes from some band");
        return Err(Error::Refused {
            band: w.band.to_string(),
            rho: w.rho,
        });
    }
    let per_band = Some(
        pc.rates()
            .iter()
            .map(|r| BandRate {
                band: r.band.to_string(),
                rho: r.rho,
            })
            .collect(),
    );

    let d = grid.dim();
    let n = grid.len();
    let spectrum = forward_transform(u);
    let scale = spectrum.max_modulus();
    let mut v = spectrum.modes().to_vec();
    let mut div = vec![ZERO; d * n];
    let mut curl = vec![ZERO; d * n];
    let weights = (cfg.norm != 0.0).then(|| sobolev_weights(grid, cfg.norm));
    let reference = weighted_norm(&v, weights.as_deref());
    let u_norm = u.l2_norm();

    // Band modes with their frequencies, band by band.
    let band_modes: Vec<Vec<(usize, Vec<f64>)>> = p
        .bands()
        .iter()
        .map(|b| {
            b.modes()
                .iter()
                .map(|&flat| (flat, grid.frequency(flat).components().to_vec()))
                .collect()
        })
        .collect();

    let mut tracker = Tracker::new(cfg.record_history);
    let mut divergence = Vec::new();
    let mut iterations = 0;
    let mut converged = reference == 0.0;
    while !converged && iterations < cfg.max_iter {
        iterations += 1;
        if iterations == 1 {
            for &flat in p.dc_modes() {
                let x = gather(&v, n, d, flat);
                let (a, b) = exact_split(&grid.frequency(flat), &x);
                for c in 0..d {
                    div[c * n + flat] += a[c];
                    curl[c * n + flat] += b[c];
                    v[c * n + flat] = ZERO;
                }
            }
        }
        for (op, modes) in pc.operators().iter().zip(&band_modes) {
            for (flat, xi) in modes {
                let x = gather(&v, n, d, *flat);
                let (mw, lw) = op.apply(xi, &x);
                for c in 0..d {
                    let i = c * n + flat;
                    div[i] += mw[c];
                    curl[i] += lw[c];
                    v[i] -= mw[c] + lw[c];
                }
            }
        }
        divergence.push(if u_norm > 0.0 {
            divergence_norm(grid, &div, d) / u_norm
        } else {
            0.0
        });
        match tracker.push(weighted_norm(&v, weights.as_deref()) / reference, cfg.tol) {
            Step::Continue => {}
            Step::Converged => converged = true,
            Step::Diverged => {
                let report = SolveReport::finish(
                    iterations,
                    false,
                    theoretical,
                    tracker.into_history(),
                    per_band,
                    Some(divergence),
                );
                return Err(Error::Diverged {
                    report: Box::new(report),
                });
            }
        }
    }
    let report = SolveReport::finish(
        iterations,
        converged,
        theoretical,
        tracker.into_history(),
        per_band,
        Some(divergence),
    );
    let u_div = inverse_transform_scaled(&SpectralField::new(grid.clone(), d, div)?, scale)?;
    let u_curl = inverse_transform_scaled(&SpectralField::new(grid.clone(), d, curl)?, scale)?;
    Ok((u_div, u_curl, report))
}

/// Modewise Leray projection `(P u, u − P u)` with `P = Id − ξξᵀ/|ξ|²`;
/// modes with no non-Nyquist frequency (the mean among them) belong to the
/// divergence-free part.
pub fn exact_leray(u: &RealField) -> Result<(RealField, RealField)> {
    check_vector_field(u)?;
    let grid = u.grid();
    let d = grid.dim();
    let n = grid.len();
    let s = forward_transform(u);
    let mut div = SpectralField::zeros(grid.clone(), d);
    let mut curl = SpectralField::zeros(grid.clone(), d);
    for flat in 0..n {
        let x = gather(s.modes(), n, d, flat);
        let (a, b) = exact_split(&grid.frequency(flat), &x);
        for c in 0..d {
            div.set(c, flat, a[c]);
            curl.set(c, flat, b[c]);
        }
    }
    let scale = s.max_modulus();
    Ok((
        inverse_transform_scaled(&div, scale)?,
        inverse_transform_scaled(&curl, scale)?,
    ))
}
