//! Per-band approximations of constant-coefficient operators and their
//! contraction rates.
//!
//! A preconditioner holds one entry per band of a partition: a constant
//! matrix applied to every mode of the band, or a symbol with band constants
//! baked in. DC modes are always solved exactly by the solvers.

mod leray;

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

pub use leray::{leray_band_operators, LerayBandOperators, LerayPreconditioner};

use crate::bands::{BandId, ExtremaMode, FrequencyBand, Partition};
use crate::error::{Error, Result};
use crate::spectral::Frequency;
use crate::symbols::{eval_symbol, CMat, SingularModePolicy, SymbolExpr};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateFormula {
    ImplicitLaplacian,
    Kantorovich,
    SampledSup,
}

impl RateFormula {
    pub fn tag(&self) -> &'static str {
        match self {
            RateFormula::ImplicitLaplacian => "implicit-laplacian",
            RateFormula::Kantorovich => "kantorovich",
            RateFormula::SampledSup => "sampled-sup",
        }
    }
}

/// Contraction bound of one band, with the extrema it was computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct RateBound {
    pub band: BandId,
    pub a: f64,
    pub b: f64,
    pub rho: f64,
    pub formula: RateFormula,
}

/// `α(b²−a²) / (2 + α(b²+a²))`: contraction of `(1+α|ξ|²)/(1+αω²)` over
/// `a ≤ |ξ| ≤ b` with `ω² = (a²+b²)/2`.
pub fn rate_implicit_laplacian(alpha: f64, a: f64, b: f64) -> f64 {
    let (a2, b2) = (a * a, b * b);
    alpha * (b2 - a2) / (2.0 + alpha * (b2 + a2))
}

/// `¼(a/b + b/a)² − 1`.
pub fn rate_kantorovich(a: f64, b: f64) -> f64 {
    let s = a / b + b / a;
    0.25 * s * s - 1.0
}

/// `sup ‖Id − M μ†‖₂` over the given symbol values `M` for one constant `μ`.
pub fn contraction_sup<'a>(values: impl IntoIterator<Item = &'a CMat>, mu: &CMat) -> f64 {
    let pinv = mu.pseudo_inverse();
    values
        .into_iter()
        .map(|m| residual_norm(&m.mul(&pinv)))
        .fold(0.0, f64::max)
}

fn residual_norm(product: &CMat) -> f64 {
    if product.is_scalar() {
        return (Complex64::new(1.0, 0.0) - product.get(0, 0)).norm();
    }
    CMat::identity(product.rows()).sub(product).spectral_norm()
}

#[derive(Clone, Debug, PartialEq)]
pub enum BandEntry {
    /// Constant matrix applied to every mode of the band.
    Constant(CMat),
    /// Symbol evaluated mode by mode inside the band.
    Symbol(SymbolExpr),
}

impl BandEntry {
    pub fn eval(&self, f: &Frequency, policy: SingularModePolicy) -> Result<Option<CMat>> {
        match self {
            BandEntry::Constant(m) => Ok(Some(m.clone())),
            BandEntry::Symbol(e) => eval_symbol(e, f, policy),
        }
    }
}

/// `D = Σ_j M_{ω_j} P_j` over a partition, approximating `target`.
#[derive(Clone, Debug)]
pub struct BandPreconditioner {
    partition: Arc<Partition>,
    target: SymbolExpr,
    entries: Vec<BandEntry>,
    dc_policy: SingularModePolicy,
    rates: Vec<RateBound>,
}

impl BandPreconditioner {
    /// Builds a preconditioner from explicit entries. Rates are the sampled
    /// sup of `‖Id − A(k) E(k)†‖` over each band, with `a`, `b` the band's
    /// `|k|` extrema.
    pub fn new(partition: &Arc<Partition>, target: SymbolExpr, entries: Vec<BandEntry>) -> Result<Self> {
        if entries.len() != partition.bands().len() {
            return Err(Error::Structural(format!(
                "{} entries for {} bands",
                entries.len(),
                partition.bands().len()
            )));
        }
        target.shape(partition.grid().dim())?;
        let mut pc = Self {
            partition: Arc::clone(partition),
            target,
            entries,
            dc_policy: SingularModePolicy::Zero,
            rates: Vec::new(),
        };
        let grid = partition.grid();
        let mut rates = Vec::with_capacity(pc.entries.len());
        for (i, band) in partition.bands().iter().enumerate() {
            let (a, b) = match band.extrema(grid, ExtremaMode::Exact) {
                Ok(e) => (e.a, e.b),
                Err(_) => (0.0, 0.0),
            };
            rates.push(RateBound {
                band: band.id().clone(),
                a,
                b,
                rho: sampled_contraction(&pc.target, &pc, i)?,
                formula: RateFormula::SampledSup,
            });
        }
        pc.rates = rates;
        Ok(pc)
    }

    /// The identity on every band, approximating the identity symbol.
    pub fn identity(partition: &Arc<Partition>) -> Self {
        let n = partition.bands().len();
        Self::new(
            partition,
            SymbolExpr::Identity,
            vec![BandEntry::Constant(CMat::identity(1)); n],
        )
        .expect("identity entries always fit")
    }

    pub fn with_dc_policy(mut self, policy: SingularModePolicy) -> Self {
        self.dc_policy = policy;
        self
    }

    pub fn partition(&self) -> &Arc<Partition> {
        &self.partition
    }

    pub fn target(&self) -> &SymbolExpr {
        &self.target
    }

    pub fn entries(&self) -> &[BandEntry] {
        &self.entries
    }

    pub fn dc_policy(&self) -> SingularModePolicy {
        self.dc_policy
    }

    pub fn rates(&self) -> &[RateBound] {
        &self.rates
    }

    /// The band with the largest bound, if any.
    pub fn worst_band(&self) -> Option<&RateBound> {
        self.rates
            .iter()
            .fold(None, |acc: Option<&RateBound>, r| match acc {
                Some(w) if w.rho >= r.rho => Some(w),
                _ => Some(r),
            })
    }

    /// `max_j ρ_j`, or 0 for a partition without bands.
    pub fn theoretical_rate(&self) -> f64 {
        self.worst_band().map_or(0.0, |r| r.rho)
    }
}

/// `max_k ‖Id − A(k)·E(k)†‖₂` over the modes of band `band_index`.
pub fn sampled_contraction(
    sym: &SymbolExpr,
    pc: &BandPreconditioner,
    band_index: usize,
) -> Result<f64> {
    let grid = pc.partition.grid();
    let band = &pc.partition.bands()[band_index];
    let entry = &pc.entries[band_index];
    let fixed = match entry {
        BandEntry::Constant(m) => Some(m.pseudo_inverse()),
        BandEntry::Symbol(_) => None,
    };
    let mut worst = 0.0f64;
    for &flat in band.modes() {
        let f = grid.frequency(flat);
        let a = eval_symbol(sym, &f, SingularModePolicy::Zero)?.expect("zero policy always evaluates");
        let pinv = match &fixed {
            Some(p) => p.clone(),
            None => entry
                .eval(&f, SingularModePolicy::Zero)?
                .expect("zero policy always evaluates")
                .pseudo_inverse(),
        };
        worst = worst.max(residual_norm(&a.mul(&pinv)));
    }
    Ok(worst)
}

fn corner_points(band: &FrequencyBand) -> Vec<Frequency> {
    let d = band.box_lo().len();
    (0..1usize << d)
        .map(|mask| {
            let xi: Vec<f64> = (0..d)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        band.box_hi()[i]
                    } else {
                        band.box_lo()[i]
                    }
                })
                .collect();
            Frequency::new(&xi)
        })
        .collect()
}

fn scalar_values(
    sym: &SymbolExpr,
    band: &FrequencyBand,
    p: &Partition,
    mode: ExtremaMode,
) -> Result<Vec<Complex64>> {
    let points = match mode {
        ExtremaMode::Exact => {
            if band.is_empty() {
                return Err(Error::EmptyBand(band.id().to_string()));
            }
            band.modes().iter().map(|&k| p.grid().frequency(k)).collect()
        }
        ExtremaMode::Continuous => corner_points(band),
    };
    points
        .iter()
        .map(|f| match eval_symbol(sym, f, SingularModePolicy::Error) {
            Ok(v) => Ok(v.expect("error policy always evaluates").get(0, 0)),
            Err(Error::Singular { mode }) => Err(Error::NotInvertibleOnBand {
                band: band.id().to_string(),
                reason: format!("singular at {mode:?}"),
            }),
            Err(e) => Err(e),
        })
        .collect()
}

/// Optimal constant per band for a real scalar symbol that keeps one sign on
/// every band: `ω_j = ½(m_j + M_j)` with `m_j`, `M_j` the smallest and
/// largest `|p|`, the minimiser of `sup |1 − p/ω|`, which is then
/// `(M_j − m_j)/(M_j + m_j)`. `Continuous` evaluates the box corners, which
/// is exact for symbols monotone in each `|ξ_i|`.
pub fn scalar_optimal(
    sym: &SymbolExpr,
    p: &Arc<Partition>,
    mode: ExtremaMode,
) -> Result<BandPreconditioner> {
    let dim = p.grid().dim();
    if !sym.shape(dim)?.is_scalar() {
        return Err(Error::Arity("scalar_optimal needs a 1x1 symbol".into()));
    }
    let mut entries = Vec::with_capacity(p.bands().len());
    let mut rates = Vec::with_capacity(p.bands().len());
    for band in p.bands() {
        let values = scalar_values(sym, band, p, mode)?;
        let refuse = |reason: &str| Error::NotInvertibleOnBand {
            band: band.id().to_string(),
            reason: reason.into(),
        };
        let mut sign = 0.0;
        let (mut m, mut big) = (f64::INFINITY, 0.0f64);
        for z in &values {
            if z.im.abs() > 1e-12 * z.norm().max(1.0) {
                return Err(refuse("symbol is not real"));
            }
            if z.re == 0.0 {
                return Err(refuse("symbol vanishes"));
            }
            let s = z.re.signum();
            if sign != 0.0 && s != sign {
                return Err(refuse("symbol changes sign"));
            }
            sign = s;
            m = m.min(z.re.abs());
            big = big.max(z.re.abs());
        }
        let omega = sign * 0.5 * (m + big);
        entries.push(BandEntry::Constant(CMat::scalar(Complex64::new(omega, 0.0))));
        rates.push(RateBound {
            band: band.id().clone(),
            a: m,
            b: big,
            rho: (big - m) / (big + m),
            formula: RateFormula::SampledSup,
        });
    }
    Ok(BandPreconditioner {
        partition: Arc::clone(p),
        target: sym.clone(),
        entries,
        dc_policy: SingularModePolicy::Zero,
        rates,
    })
}

/// `(1 + αω_j²)·Id` per band with `ω_j² = (a_j² + b_j²)/2` from mode-exact
/// band extrema.
pub fn implicit_laplacian_precond(alpha: f64, p: &Arc<Partition>) -> Result<BandPreconditioner> {
    implicit_laplacian_precond_with(alpha, p, ExtremaMode::Exact)
}

pub fn implicit_laplacian_precond_with(
    alpha: f64,
    p: &Arc<Partition>,
    mode: ExtremaMode,
) -> Result<BandPreconditioner> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    let mut entries = Vec::with_capacity(p.bands().len());
    let mut rates = Vec::with_capacity(p.bands().len());
    for band in p.bands() {
        let e = band.extrema(p.grid(), mode)?;
        let omega_sq = 0.5 * (e.a * e.a + e.b * e.b);
        entries.push(BandEntry::Constant(CMat::scalar(Complex64::new(
            1.0 + alpha * omega_sq,
            0.0,
        ))));
        rates.push(RateBound {
            band: band.id().clone(),
            a: e.a,
            b: e.b,
            rho: rate_implicit_laplacian(alpha, e.a, e.b),
            formula: RateFormula::ImplicitLaplacian,
        });
    }
    Ok(BandPreconditioner {
        partition: Arc::clone(p),
        target: SymbolExpr::ImplicitLaplacian(alpha),
        entries,
        dc_policy: SingularModePolicy::Zero,
        rates,
    })
}

/// One row of the rate table.
///
/// `a`, `b` are the continuous-box extrema the theoretical bound uses:
/// `|ξ|` for the implicit Laplacian, `|ξ_i|/ω_i` for Leray, and `|p|` for
/// other scalar symbols. `rho_sampled` is the contraction the default
/// (mode-exact) preconditioner achieves on the band's grid modes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRow {
    pub band_id: String,
    pub a: f64,
    pub b: f64,
    pub rho_theoretical: f64,
    pub rho_sampled: f64,
    pub formula: String,
}

/// Rate table for the implicit Laplacian, the Leray projector, or any real
/// scalar symbol of constant sign on every band.
pub fn rate_table(op: &SymbolExpr, p: &Arc<Partition>) -> Result<Vec<RateRow>> {
    let dim = p.grid().dim();
    match op {
        SymbolExpr::LerayP => {
            let theory = LerayPreconditioner::new(p, ExtremaMode::Continuous)?;
            Ok(theory
                .rates()
                .iter()
                .enumerate()
                .map(|(i, r)| row(r, theory.sampled_contraction(i)))
                .collect())
        }
        SymbolExpr::ImplicitLaplacian(alpha) => {
            let theory = implicit_laplacian_precond_with(*alpha, p, ExtremaMode::Continuous)?;
            let exact = implicit_laplacian_precond(*alpha, p)?;
            sampled_rows(op, &theory, &exact)
        }
        _ if op.shape(dim)?.is_scalar() => {
            let theory = scalar_optimal(op, p, ExtremaMode::Continuous)?;
            let exact = scalar_optimal(op, p, ExtremaMode::Exact)?;
            sampled_rows(op, &theory, &exact)
        }
        _ => Err(Error::Arity(
            "rate tables cover the Leray projector and scalar symbols".into(),
        )),
    }
}

fn sampled_rows(
    op: &SymbolExpr,
    theory: &BandPreconditioner,
    exact: &BandPreconditioner,
) -> Result<Vec<RateRow>> {
    theory
        .rates()
        .iter()
        .enumerate()
        .map(|(i, r)| Ok(row(r, sampled_contraction(op, exact, i)?)))
        .collect()
}

fn row(r: &RateBound, sampled: f64) -> RateRow {
    RateRow {
        band_id: r.band.to_string(),
        a: r.a,
        b: r.b,
        rho_theoretical: r.rho,
        rho_sampled: sampled,
        formula: r.formula.tag().to_string(),
    }
}

/// Writes `band_id,a,b,rho_theoretical,rho_sampled,formula`.
pub fn write_rate_table<W: Write>(rows: &[RateRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::{build_mra_partition, build_tensorial_partition, refine_packet};
    use crate::spectral::GridSpec;

    fn tensorial(sizes: &[usize]) -> Arc<Partition> {
        Arc::new(build_tensorial_partition(&GridSpec::new(sizes).unwrap()))
    }

    #[test]
    fn closed_form_rates() {
        assert!((rate_kantorovich(1.0, 2.0) - 9.0 / 16.0).abs() < 1e-15);
        assert!((rate_kantorovich(1.0, 1.5) - 25.0 / 144.0).abs() < 1e-15);
        assert_eq!(rate_kantorovich(3.0, 3.0), 0.0);
        assert!((rate_implicit_laplacian(1e12, 1.0, 2.0) - 0.6).abs() < 1e-9);
        assert!((rate_implicit_laplacian(1e12, 2.0, 3.0) - 5.0 / 13.0).abs() < 1e-9);
        assert_eq!(rate_implicit_laplacian(0.0, 1.0, 2.0), 0.0);
    }

    #[test]
    fn ilap_entries_use_mean_square_extrema() {
        let p = tensorial(&[4, 4]);
        let pc = implicit_laplacian_precond_with(1.0, &p, ExtremaMode::Continuous).unwrap();
        // [1,2)² box: a² = 2, b² = 8, ω² = 5
        match &pc.entries()[0] {
            BandEntry::Constant(m) => assert!((m.get(0, 0).re - 6.0).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
        let zero = implicit_laplacian_precond(0.0, &tensorial(&[16, 16])).unwrap();
        assert!(zero
            .entries()
            .iter()
            .all(|e| *e == BandEntry::Constant(CMat::scalar(Complex64::new(1.0, 0.0)))));
        assert_eq!(zero.theoretical_rate(), 0.0);
    }

    #[test]
    fn scalar_optimal_on_a_one_dimensional_band() {
        let p = tensorial(&[16]);
        let pc = scalar_optimal(&SymbolExpr::NegLaplacian, &p, ExtremaMode::Exact).unwrap();
        let idx = p.bands().iter().position(|b| b.box_lo() == [4.0]).unwrap();
        match &pc.entries()[idx] {
            BandEntry::Constant(m) => assert_eq!(m.get(0, 0).re, 32.5),
            other => panic!("{other:?}"),
        }
        assert!((pc.rates()[idx].rho - 33.0 / 65.0).abs() < 1e-15);
        let s = sampled_contraction(&SymbolExpr::NegLaplacian, &pc, idx).unwrap();
        assert!((s - 33.0 / 65.0).abs() < 1e-15);
        let c = scalar_optimal(&SymbolExpr::scalar(2.5), &p, ExtremaMode::Exact).unwrap();
        for e in c.entries() {
            assert_eq!(*e, BandEntry::Constant(CMat::scalar(Complex64::new(2.5, 0.0))));
        }
    }

    #[test]
    fn scalar_optimal_matches_implicit_laplacian_choice() {
        // Band T(1,1) of 8x8 has corners |ξ|² = 2 and 8, so ω² = 5.
        let p = tensorial(&[8, 8]);
        let alpha = 3.0;
        let pc = scalar_optimal(&SymbolExpr::ImplicitLaplacian(alpha), &p, ExtremaMode::Continuous)
            .unwrap();
        let idx = p.bands().iter().position(|b| b.box_lo() == [1.0, 1.0]).unwrap();
        match &pc.entries()[idx] {
            BandEntry::Constant(m) => assert!((m.get(0, 0).re - (1.0 + 5.0 * alpha)).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scalar_optimal_refuses_sign_changes_and_complex_symbols() {
        let p = tensorial(&[16, 16]);
        let shifted = SymbolExpr::NegLaplacian - SymbolExpr::scalar(20.0);
        assert!(matches!(
            scalar_optimal(&shifted, &p, ExtremaMode::Exact),
            Err(Error::NotInvertibleOnBand { .. })
        ));
        assert!(matches!(
            scalar_optimal(&SymbolExpr::Xi(0), &p, ExtremaMode::Exact),
            Err(Error::NotInvertibleOnBand { .. })
        ));
        assert!(matches!(
            scalar_optimal(&SymbolExpr::LerayP, &p, ExtremaMode::Exact),
            Err(Error::Arity(_))
        ));
    }

    #[test]
    fn sampled_contraction_of_identity_is_zero() {
        let p = tensorial(&[16, 16]);
        let pc = BandPreconditioner::identity(&p);
        for i in 0..p.bands().len() {
            assert_eq!(sampled_contraction(&SymbolExpr::Identity, &pc, i).unwrap(), 0.0);
        }
    }

    #[test]
    fn ilap_sampled_contraction_below_limit() {
        let p = tensorial(&[64]);
        let alpha = 1e12;
        let cont = implicit_laplacian_precond_with(alpha, &p, ExtremaMode::Continuous).unwrap();
        let exact = implicit_laplacian_precond(alpha, &p).unwrap();
        let sym = SymbolExpr::ImplicitLaplacian(alpha);
        for i in 0..p.bands().len() {
            let c = sampled_contraction(&sym, &cont, i).unwrap();
            let e = sampled_contraction(&sym, &exact, i).unwrap();
            assert!(c <= 0.6 + 1e-9);
            assert!(e < c, "band {i}: {e} !< {c}");
            assert!((e - exact.rates()[i].rho).abs() < 1e-9);
        }
    }

    #[test]
    fn leray_table_rows() {
        let p = tensorial(&[32, 32]);
        let rows = rate_table(&SymbolExpr::LerayP, &p).unwrap();
        for r in &rows {
            assert!((r.rho_theoretical - 0.5625).abs() < 1e-15);
            assert!(r.rho_sampled <= r.rho_theoretical + 1e-12);
        }
        // Upper halves [3a/2, 2a) use ω = 3a/2, so only lower halves reach 25/144.
        let p1 = Arc::new(refine_packet(&p, 1).unwrap());
        let rows1 = rate_table(&SymbolExpr::LerayP, &p1).unwrap();
        let worst = rows1.iter().map(|r| r.rho_theoretical).fold(0.0, f64::max);
        assert!((worst - 25.0 / 144.0).abs() < 1e-15);
        assert!(rows1.iter().all(|r| r.rho_sampled <= r.rho_theoretical + 1e-12));
        let corner = rows.iter().find(|r| r.band_id == "T(0,0)").unwrap();
        assert!((corner.rho_sampled - 0.0).abs() < 1e-15);
    }

    #[test]
    fn identity_table_is_all_zero() {
        let p = Arc::new(build_mra_partition(&GridSpec::new(&[16, 16]).unwrap()).unwrap());
        for r in rate_table(&SymbolExpr::Identity, &p).unwrap() {
            assert_eq!((r.rho_theoretical, r.rho_sampled), (0.0, 0.0));
        }
        let mut buf = Vec::new();
        write_rate_table(&rate_table(&SymbolExpr::Identity, &p).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("band_id,a,b,rho_theoretical,rho_sampled,formula\n"));
    }

    #[test]
    fn leray_corner_band_sup_is_nine_sixteenths() {
        // ω = (1,1) band with |k_i| ∈ {1, 2}: worst corner ξ = (1,2)
        let op = LerayBandOperators::new(vec![1.0, 1.0]).unwrap();
        let mut worst = 0.0f64;
        for k1 in [1.0, 2.0, -1.0, -2.0] {
            for k2 in [1.0, 2.0, -1.0, -2.0] {
                worst = worst.max(op.residual_eigenvalue(&[k1, k2]).abs());
            }
        }
        assert!((worst - 9.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn contraction_sup_of_exact_constant_is_zero() {
        let v = [CMat::identity(2)];
        assert_eq!(contraction_sup(v.iter(), &CMat::identity(2)), 0.0);
    }
}
