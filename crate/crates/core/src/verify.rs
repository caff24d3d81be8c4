//! Self-checks run by `shannop verify`.
//!
//! Each suite returns one [`Check`] per property. Informational lines report
//! measured quantities that are not pass/fail.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::bands::{
    analyze, apply_lemarie_derivative, build_mra_partition, build_tensorial_partition,
    refine_packet, synthesize, Partition,
};
use crate::error::{Error, Result};
use crate::generate::{corner_mode_field, random_field};
use crate::precond::{
    implicit_laplacian_precond, rate_implicit_laplacian, rate_kantorovich, rate_table,
};
use crate::solver::{
    exact_leray, exact_solve, helmholtz_decompose, richardson_solve, SolveConfig, SolveReport,
};
use crate::spectral::{forward_transform, GridSpec};
use crate::swf1;
use crate::symbols::SymbolExpr;
use crate::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Reconstruction,
    Oracle,
    Rates,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reconstruction" => Ok(Suite::Reconstruction),
            "oracle" => Ok(Suite::Oracle),
            "rates" => Ok(Suite::Rates),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidArgument(format!(
                "unknown suite '{other}' (reconstruction|oracle|rates|all)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Pass,
    Fail,
    Info,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            outcome: if passed { Outcome::Pass } else { Outcome::Fail },
            detail,
        }
    }

    fn info(name: &str, detail: String) -> Self {
        Self {
            name: name.into(),
            outcome: Outcome::Info,
            detail,
        }
    }

    fn error(name: &str, e: Error) -> Self {
        Self::new(name, false, format!("error: {e}"))
    }

    pub fn failed(&self) -> bool {
        self.outcome == Outcome::Fail
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Info => "INFO",
        };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

pub fn run_suite(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Reconstruction => reconstruction(),
        Suite::Oracle => oracle(),
        Suite::Rates => rates(),
        Suite::All => {
            let mut out = reconstruction();
            out.extend(oracle());
            out.extend(rates());
            out
        }
    }
}

fn guard(name: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| Check::error(name, e))
}

fn partitions(grid: &GridSpec) -> Result<Vec<(String, Arc<Partition>)>> {
    let t = build_tensorial_partition(grid);
    Ok(vec![
        ("mra".into(), Arc::new(build_mra_partition(grid)?)),
        ("packet1".into(), Arc::new(refine_packet(&t, 1)?)),
        ("packet2".into(), Arc::new(refine_packet(&t, 2)?)),
        ("tensorial".into(), Arc::new(t)),
    ])
}

fn reconstruction() -> Vec<Check> {
    let mut out = Vec::new();
    for (dim, n) in [(2, 128), (3, 64)] {
        let grid = GridSpec::cube(dim, n).expect("default grids are valid");
        let field = random_field(&grid, 1, 11);
        let s = forward_transform(&field);
        match partitions(&grid) {
            Ok(parts) => {
                for (label, p) in parts {
                    let name = format!("reconstruction {label} {}", grid.describe());
                    out.push(guard(&name, || {
                        let b = analyze(&s, &p)?;
                        let err = synthesize(&b)?.distance(&s)? / s.l2_norm();
                        let energy: f64 = b.band_energies().iter().sum::<f64>() + b.dc_energy();
                        let split = (energy - s.l2_norm().powi(2)).abs() / s.l2_norm().powi(2);
                        Ok(Check::new(
                            &name,
                            err <= 1e-12 && split <= 1e-12,
                            format!("relative error {err:.2e}, energy defect {split:.2e}"),
                        ))
                    }));
                }
            }
            Err(e) => out.push(Check::error("reconstruction partitions", e)),
        }
    }
    out
}

fn oracle() -> Vec<Check> {
    let mut out = Vec::new();
    let grid = GridSpec::cube(2, 64).expect("valid grid");
    let p = Arc::new(build_tensorial_partition(&grid));
    let cfg = SolveConfig::default();

    out.push(guard("oracle richardson vs exact solve", || {
        let alpha = 100.0;
        let a = SymbolExpr::ImplicitLaplacian(alpha);
        let pc = implicit_laplacian_precond(alpha, &p)?;
        let v = random_field(&grid, 1, 21);
        let (u, rep) = richardson_solve(&a, &pc, &v, &cfg)?;
        let exact = exact_solve(&a, &v)?;
        let err = u.distance(&exact)? / exact.l2_norm();
        Ok(Check::new(
            "oracle richardson vs exact solve",
            rep.converged && err <= 10.0 * cfg.tol,
            format!("{} iterations, relative error {err:.2e}", rep.iterations),
        ))
    }));

    out.push(guard("oracle helmholtz vs exact leray", || {
        let u = random_field(&grid, 2, 22);
        let (d, c, rep) = helmholtz_decompose(&u, &p, &cfg)?;
        let (ed, _) = exact_leray(&u)?;
        let err = d.distance(&ed)? / u.l2_norm();
        let sum = d.add(&c)?.distance(&u)? / u.l2_norm();
        Ok(Check::new(
            "oracle helmholtz vs exact leray",
            rep.converged && err <= 10.0 * cfg.tol && sum <= 1e-9,
            format!("relative error {err:.2e}, sum defect {sum:.2e}"),
        ))
    }));

    out.push(guard("oracle lemarie derivative", || {
        let v = random_field(&grid, 1, 23);
        let s = forward_transform(&v);
        let mut worst = 0.0f64;
        for axis in 0..2 {
            let got = synthesize(&apply_lemarie_derivative(&analyze(&s, &p)?, axis)?)?;
            let mut expected = s.clone();
            for flat in 0..grid.len() {
                let k = grid.frequency(flat).odd(axis);
                expected.set(0, flat, s.get(0, flat) * Complex64::new(0.0, k));
            }
            worst = worst.max(got.distance(&expected)? / expected.l2_norm());
        }
        Ok(Check::new(
            "oracle lemarie derivative",
            worst <= 1e-12,
            format!("relative error {worst:.2e}"),
        ))
    }));

    out.push(guard("oracle swf1 round trip", || {
        let v = random_field(&grid, 2, 24);
        let mut buf = Vec::new();
        swf1::write_field(&v, &mut buf)?;
        let back = swf1::read_field(buf.as_slice())?;
        let exact = back
            .values()
            .iter()
            .zip(v.values())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        Ok(Check::new(
            "oracle swf1 round trip",
            exact && back.grid() == v.grid(),
            format!("{} bytes", buf.len()),
        ))
    }));

    out.push(guard("oracle report parses", || {
        let rep = SolveReport::from_json(
            &richardson_solve(
                &SymbolExpr::ImplicitLaplacian(1.0),
                &implicit_laplacian_precond(1.0, &p)?,
                &random_field(&grid, 1, 25),
                &cfg,
            )?
            .1
            .to_json(),
        )?;
        let mut csv_bytes = Vec::new();
        rep.write_csv(&mut csv_bytes)?;
        let rows = csv::Reader::from_reader(csv_bytes.as_slice()).records().count();
        Ok(Check::new(
            "oracle report parses",
            rows == rep.residual_history.len(),
            format!("{rows} csv rows"),
        ))
    }));
    out
}

fn max_ratio_over(
    name: &str,
    limit: f64,
    runs: impl Iterator<Item = Result<SolveReport>>,
) -> Result<Check> {
    let mut worst = 0.0f64;
    let mut all_converged = true;
    for rep in runs {
        let rep = rep?;
        all_converged &= rep.converged;
        worst = worst.max(rep.max_ratio());
    }
    Ok(Check::new(
        name,
        all_converged && worst <= limit,
        format!("max ratio {worst:.4} (limit {limit:.4})"),
    ))
}

fn rates() -> Vec<Check> {
    let mut out = Vec::new();
    let cfg = SolveConfig::default();
    let alpha = 1e6;
    let grid = GridSpec::cube(2, 128).expect("valid grid");
    let a = SymbolExpr::ImplicitLaplacian(alpha);
    let t = build_tensorial_partition(&grid);

    out.push(Check::new(
        "rates closed forms",
        (rate_kantorovich(1.0, 2.0) - 9.0 / 16.0).abs() < 1e-15
            && (rate_kantorovich(1.0, 1.5) - 25.0 / 144.0).abs() < 1e-15
            && (rate_implicit_laplacian(1e12, 1.0, 2.0) - 0.6).abs() < 1e-9,
        "9/16, 25/144, 3/5".into(),
    ));

    let ilap = |name: &str, p: Partition, limit: f64| {
        let p = Arc::new(p);
        guard(name, || {
            let pc = implicit_laplacian_precond(alpha, &p)?;
            max_ratio_over(
                name,
                limit,
                (0..3).map(|seed| {
                    richardson_solve(&a, &pc, &random_field(&grid, 1, 100 + seed), &cfg)
                        .map(|(_, r)| r)
                }),
            )
        })
    };
    out.push(ilap("rates ilap tensorial", t.clone(), 0.6 + 0.02));
    match refine_packet(&t, 1) {
        Ok(p1) => out.push(ilap("rates ilap packet1", p1, 5.0 / 13.0 + 0.02)),
        Err(e) => out.push(Check::error("rates ilap packet1", e)),
    }

    out.push(guard("rates ilap corner mode", || {
        let p = Arc::new(t.clone());
        let pc = implicit_laplacian_precond(alpha, &p)?;
        let (_, rep) = richardson_solve(&a, &pc, &corner_mode_field(&grid, 1)?, &cfg)?;
        let fitted = rep.fitted_rate.unwrap_or(0.0);
        Ok(Check::new(
            "rates ilap corner mode",
            fitted >= 0.5,
            format!("fitted rate {fitted:.4}"),
        ))
    }));

    out.push(guard("rates ilap mra", || {
        let p = Arc::new(build_mra_partition(&grid)?);
        let pc = implicit_laplacian_precond(alpha, &p)?;
        let (_, rep) = richardson_solve(&a, &pc, &random_field(&grid, 1, 100), &cfg)?;
        let rows = rate_table(&a, &p)?;
        let worst = rows.iter().map(|r| r.rho_theoretical).fold(0.0, f64::max);
        Ok(Check::info(
            "rates ilap mra",
            format!(
                "max ratio {:.4}, worst band bound {worst:.4}, d/(d+2) = 0.5",
                rep.max_ratio()
            ),
        ))
    }));

    let leray = |name: &str, g: GridSpec, depth: u32, limit: f64| {
        guard(name, || {
            let p = Arc::new(refine_packet(&build_tensorial_partition(&g), depth)?);
            max_ratio_over(
                name,
                limit,
                (0..2).map(|seed| {
                    helmholtz_decompose(&random_field(&g, g.dim(), 200 + seed), &p, &cfg)
                        .map(|(_, _, r)| r)
                }),
            )
        })
    };
    let g3 = GridSpec::cube(3, 64).expect("valid grid");
    out.push(leray("rates leray 2d", grid.clone(), 0, 9.0 / 16.0 + 0.02));
    out.push(leray("rates leray 2d packet1", grid.clone(), 1, 25.0 / 144.0 + 0.02));
    out.push(leray("rates leray 3d", g3.clone(), 0, 9.0 / 16.0 + 0.02));
    out.push(leray("rates leray 3d packet1", g3, 1, 25.0 / 144.0 + 0.02));

    out.push(guard("rates leray table", || {
        let p = Arc::new(build_tensorial_partition(&grid));
        let rows = rate_table(&SymbolExpr::LerayP, &p)?;
        let ok = rows
            .iter()
            .all(|r| (r.rho_theoretical - 0.5625).abs() < 1e-15 && r.rho_sampled <= 0.5625);
        Ok(Check::new(
            "rates leray table",
            ok,
            format!("{} bands at 9/16", rows.len()),
        ))
    }));
    out
}
