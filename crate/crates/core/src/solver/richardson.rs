use num_complex::Complex64;
use rayon::prelude::*;

use super::{SolveConfig, SolveReport, Step, Tracker, BandRate};
use crate::error::{Error, Result};
use crate::precond::{BandEntry, BandPreconditioner};
use crate::spectral::{
    forward_transform, inverse_transform, sobolev_weights, RealField, SpectralField,
};
use crate::symbols::{eval_symbol, CMat, SingularModePolicy, SymbolExpr};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Per-mode `E(k)†` and `A(k)E(k)†`.
enum Table {
    Scalar {
        pinv: Vec<Complex64>,
        apinv: Vec<Complex64>,
    },
    Matrix {
        pinv: Vec<CMat>,
        apinv: Vec<CMat>,
    },
}

fn owners(pc: &BandPreconditioner) -> Vec<Option<usize>> {
    let p = pc.partition();
    let mut owner = vec![None; p.grid().len()];
    for (i, band) in p.bands().iter().enumerate() {
        for &flat in band.modes() {
            owner[flat] = Some(i);
        }
    }
    owner
}

fn build_table(a: &SymbolExpr, pc: &BandPreconditioner, m: usize) -> Result<Table> {
    let grid = pc.partition().grid();
    let dim = grid.dim();
    let owner = owners(pc);
    let band_pinv: Vec<Option<CMat>> = pc
        .entries()
        .iter()
        .map(|e| match e {
            BandEntry::Constant(c) => Some(c.pseudo_inverse()),
            BandEntry::Symbol(_) => None,
        })
        .collect();
    let scalar = a.shape(dim)?.is_scalar()
        && pc.entries().iter().all(|e| match e {
            BandEntry::Constant(c) => c.is_scalar(),
            BandEntry::Symbol(s) => s.shape(dim).map(|sh| sh.is_scalar()).unwrap_or(false),
        });
    let per_mode: Vec<(CMat, CMat)> = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let f = grid.frequency(flat);
            let av = eval_symbol(a, &f, SingularModePolicy::Zero)?.expect("zero policy evaluates");
            let pinv = match owner[flat] {
                Some(b) => match (&band_pinv[b], &pc.entries()[b]) {
                    (Some(p), _) => Some(p.clone()),
                    (None, entry) => entry
                        .eval(&f, SingularModePolicy::Skip)?
                        .map(|e| e.pseudo_inverse()),
                },
                None => eval_symbol(a, &f, pc.dc_policy())?.map(|e| e.pseudo_inverse()),
            };
            Ok(match pinv {
                Some(p) => {
                    let ap = av.mul(&p);
                    (p, ap)
                }
                // Skipped modes are never updated.
                None => (CMat::zeros(1, 1), CMat::zeros(1, 1)),
            })
        })
        .collect::<Result<_>>()?;
    Ok(if scalar {
        let (pinv, apinv) = per_mode.into_iter().map(|(p, ap)| (p.get(0, 0), ap.get(0, 0))).unzip();
        Table::Scalar { pinv, apinv }
    } else {
        let (pinv, apinv) = per_mode
            .into_iter()
            .map(|(p, ap)| (p.expand(m), ap.expand(m)))
            .unzip();
        Table::Matrix { pinv, apinv }
    })
}

fn check_operator(a: &SymbolExpr, dim: usize, m: usize) -> Result<()> {
    let shape = a.shape(dim)?;
    if shape.is_scalar() || (shape.is_square() && shape.rows == m) {
        Ok(())
    } else {
        Err(Error::Arity(format!(
            "iteration needs a scalar or {m}x{m} operator, got {}x{}",
            shape.rows, shape.cols
        )))
    }
}

pub(crate) fn weighted_norm(modes: &[Complex64], weights: Option<&[f64]>) -> f64 {
    let n = weights.map_or(1, |w| w.len());
    match weights {
        None => modes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        Some(w) => modes
            .iter()
            .enumerate()
            .map(|(i, z)| w[i % n] * z.norm_sqr())
            .sum::<f64>()
            .sqrt(),
    }
}

/// Solves `A u = v` by `u_{n+1} = u_n + D† r_n`, `r_{n+1} = r_n − A D† r_n`
/// with `D` the band preconditioner, starting from `u_0 = 0`, `r_0 = v`.
///
/// DC modes use `A(k)†` itself and are solved in the first step. The part of
/// `v` outside the range of `A` at DC modes cannot be reached by any `u` and
/// is removed from the residual up front, so the iteration converges to the
/// pseudo-inverse solution of [`exact_solve`]. Residuals are relative to the
/// norm of the reachable right-hand side.
pub fn richardson_solve(
    a: &SymbolExpr,
    pc: &BandPreconditioner,
    v: &RealField,
    cfg: &SolveConfig,
) -> Result<(RealField, SolveReport)> {
    cfg.validate()?;
    let grid = v.grid();
    if grid != pc.partition().grid() {
        return Err(Error::Structural(format!(
            "field grid {} does not match preconditioner grid {}",
            grid.describe(),
            pc.partition().grid().describe()
        )));
    }
    let m = v.components();
    check_operator(a, grid.dim(), m)?;
    let theoretical = pc.theoretical_rate();
    if cfg.strict && !(theoretical < 1.0) {
        let worst = pc.worst_band().expect("a rate >= 1 comes from some band");
        return Err(Error::Refused {
            band: worst.band.to_string(),
            rho: worst.rho,
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

    let table = build_table(a, pc, m)?;
    let n = grid.len();
    let mut r = forward_transform(v).modes().to_vec();
    // Drop the unreachable part at DC modes.
    for &flat in pc.partition().dc_modes() {
        match &table {
            Table::Scalar { apinv, .. } => {
                for c in 0..m {
                    r[c * n + flat] *= apinv[flat];
                }
            }
            Table::Matrix { apinv, .. } => {
                let x: Vec<Complex64> = (0..m).map(|c| r[c * n + flat]).collect();
                for (c, y) in apinv[flat].apply_broadcast(&x).into_iter().enumerate() {
                    r[c * n + flat] = y;
                }
            }
        }
    }
    let weights = (cfg.norm != 0.0).then(|| sobolev_weights(grid, cfg.norm));
    let norm = |modes: &[Complex64]| weighted_norm(modes, weights.as_deref());
    let reference = norm(&r);
    let mut u = vec![ZERO; m * n];
    let mut tracker = Tracker::new(cfg.record_history);
    let mut iterations = 0;
    let mut converged = reference == 0.0;

    while !converged && iterations < cfg.max_iter {
        iterations += 1;
        match &table {
            Table::Scalar { pinv, apinv } => {
                r.par_chunks_mut(n)
                    .zip(u.par_chunks_mut(n))
                    .for_each(|(rc, uc)| {
                        for flat in 0..n {
                            let z = rc[flat];
                            uc[flat] += pinv[flat] * z;
                            rc[flat] = z - apinv[flat] * z;
                        }
                    });
            }
            Table::Matrix { pinv, apinv } => {
                let mut x = vec![ZERO; m];
                for flat in 0..n {
                    for (c, slot) in x.iter_mut().enumerate() {
                        *slot = r[c * n + flat];
                    }
                    let du = pinv[flat].apply_broadcast(&x);
                    let dr = apinv[flat].apply_broadcast(&x);
                    for c in 0..m {
                        u[c * n + flat] += du[c];
                        r[c * n + flat] -= dr[c];
                    }
                }
            }
        }
        match tracker.push(norm(&r) / reference, cfg.tol) {
            Step::Continue => {}
            Step::Converged => converged = true,
            Step::Diverged => {
                let report = SolveReport::finish(
                    iterations,
                    false,
                    theoretical,
                    tracker.into_history(),
                    per_band,
                    None,
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
        None,
    );
    let u = inverse_transform(&SpectralField::new(grid.clone(), m, u)?)?;
    Ok((u, report))
}

/// Modewise pseudo-inverse solution `û(k) = A(k)† v̂(k)`; singular modes
/// evaluate `A` to zero and leave `û(k) = 0`.
pub fn exact_solve(a: &SymbolExpr, v: &RealField) -> Result<RealField> {
    let grid = v.grid();
    let shape = a.shape(grid.dim())?;
    let m = v.components();
    let out_m = if shape.is_scalar() {
        m
    } else if shape.rows == m {
        shape.cols
    } else {
        return Err(Error::Arity(format!(
            "operator yields {} component(s), right-hand side has {m}",
            shape.rows
        )));
    };
    let s = forward_transform(v);
    let n = grid.len();
    let cols: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|flat| {
            let f = grid.frequency(flat);
            let pinv = eval_symbol(a, &f, SingularModePolicy::Zero)?
                .expect("zero policy evaluates")
                .pseudo_inverse();
            let x: Vec<Complex64> = (0..m).map(|c| s.get(c, flat)).collect();
            Ok(pinv.apply_broadcast(&x))
        })
        .collect::<Result<_>>()?;
    let mut out = SpectralField::zeros(grid.clone(), out_m);
    for (flat, y) in cols.into_iter().enumerate() {
        for (c, z) in y.into_iter().enumerate() {
            out.set(c, flat, z);
        }
    }
    inverse_transform(&out)
}
