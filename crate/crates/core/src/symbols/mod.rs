//! Constant-coefficient operator symbols `ξ ↦ M(ξ)`.
//!
//! Every generator satisfies the reality condition `M(-ξ) = conj(M(ξ))` and
//! the algebra (sums, products, real scalings) preserves it, so any
//! expression built here maps real fields to real fields.

mod matrix;
mod parse;

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use matrix::CMat;
pub use parse::{parse_symbol, parse_symbol_with};

use crate::error::{Error, Result};
use crate::spectral::Frequency;

/// What to do at modes where an `XiInv` factor or the Leray denominator
/// vanishes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SingularModePolicy {
    /// Evaluate to the zero matrix.
    #[default]
    Zero,
    /// Leave the mode untouched by the operator.
    Skip,
    /// Fail with [`Error::Singular`].
    Error,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SymbolExpr {
    /// The scalar 1.
    Identity,
    /// Real constant matrix, row-major.
    Const {
        rows: usize,
        cols: usize,
        values: Vec<f64>,
    },
    /// `i·ξ_axis` (scalar).
    Xi(usize),
    /// `(i·ξ_axis)^{-1}` (scalar), singular where `ξ_axis = 0`.
    XiInv(usize),
    /// `n×n` matrix unit with a one at `(i, j)`.
    Delta { i: usize, j: usize, n: usize },
    Sum(Box<SymbolExpr>, Box<SymbolExpr>),
    Product(Box<SymbolExpr>, Box<SymbolExpr>),
    Scale(f64, Box<SymbolExpr>),
    /// `1 + α|ξ|²` (scalar).
    ImplicitLaplacian(f64),
    /// `|ξ|²` (scalar).
    NegLaplacian,
    /// Column `[iξ_1 … iξ_d]ᵀ`.
    Gradient,
    /// Row `[iξ_1 … iξ_d]`.
    Divergence,
    /// `Id − ξξᵀ/|ξ|²`, singular at `ξ = 0`.
    LerayP,
}

/// Matrix shape of a symbol; 1×1 symbols broadcast as scalars.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
}

impl Shape {
    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

const SCALAR: Shape = Shape { rows: 1, cols: 1 };

impl SymbolExpr {
    pub fn constant(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), rows * cols, "constant matrix size mismatch");
        SymbolExpr::Const { rows, cols, values }
    }

    pub fn scalar(c: f64) -> Self {
        SymbolExpr::Scale(c, Box::new(SymbolExpr::Identity))
    }

    pub fn delta(i: usize, j: usize, n: usize) -> Self {
        SymbolExpr::Delta { i, j, n }
    }

    pub fn scaled(self, c: f64) -> Self {
        SymbolExpr::Scale(c, Box::new(self))
    }

    pub fn shape(&self, dim: usize) -> Result<Shape> {
        use SymbolExpr::*;
        let check_axis = |axis: usize| {
            if axis < dim {
                Ok(SCALAR)
            } else {
                Err(Error::AxisOutOfRange { axis, dim })
            }
        };
        match self {
            Identity | ImplicitLaplacian(_) | NegLaplacian => Ok(SCALAR),
            Xi(axis) | XiInv(axis) => check_axis(*axis),
            Const { rows, cols, .. } => Ok(Shape {
                rows: *rows,
                cols: *cols,
            }),
            Delta { i, j, n } => {
                if *i >= *n || *j >= *n {
                    return Err(Error::Arity(format!("delta({i},{j}) outside {n}x{n}")));
                }
                Ok(Shape { rows: *n, cols: *n })
            }
            Gradient => Ok(Shape { rows: dim, cols: 1 }),
            Divergence => Ok(Shape { rows: 1, cols: dim }),
            LerayP => Ok(Shape {
                rows: dim,
                cols: dim,
            }),
            Scale(_, e) => e.shape(dim),
            Sum(a, b) => {
                let (sa, sb) = (a.shape(dim)?, b.shape(dim)?);
                match (sa.is_scalar(), sb.is_scalar()) {
                    (true, _) if sb.is_square() => Ok(sb),
                    (_, true) if sa.is_square() => Ok(sa),
                    _ if sa == sb => Ok(sa),
                    _ => Err(Error::Arity(format!(
                        "cannot add {}x{} and {}x{}",
                        sa.rows, sa.cols, sb.rows, sb.cols
                    ))),
                }
            }
            Product(a, b) => {
                let (sa, sb) = (a.shape(dim)?, b.shape(dim)?);
                if sa.is_scalar() {
                    Ok(sb)
                } else if sb.is_scalar() {
                    Ok(sa)
                } else if sa.cols == sb.rows {
                    Ok(Shape {
                        rows: sa.rows,
                        cols: sb.cols,
                    })
                } else {
                    Err(Error::Arity(format!(
                        "cannot multiply {}x{} by {}x{}",
                        sa.rows, sa.cols, sb.rows, sb.cols
                    )))
                }
            }
        }
    }

    fn eval_inner(&self, f: &Frequency, singular: &mut bool) -> CMat {
        use SymbolExpr::*;
        let d = f.dim();
        let i = Complex64::new(0.0, 1.0);
        match self {
            Identity => CMat::scalar(Complex64::new(1.0, 0.0)),
            Const { rows, cols, values } => CMat::from_real(*rows, *cols, values),
            Xi(axis) => CMat::scalar(i * f.odd(*axis)),
            XiInv(axis) => {
                let x = f.odd(*axis);
                if x == 0.0 {
                    *singular = true;
                    CMat::scalar(Complex64::new(0.0, 0.0))
                } else {
                    CMat::scalar(Complex64::new(0.0, -1.0 / x))
                }
            }
            Delta { i: r, j: c, n } => {
                let mut m = CMat::zeros(*n, *n);
                m.set(*r, *c, Complex64::new(1.0, 0.0));
                m
            }
            Sum(a, b) => a.eval_inner(f, singular).add(&b.eval_inner(f, singular)),
            Product(a, b) => a.eval_inner(f, singular).mul(&b.eval_inner(f, singular)),
            Scale(c, e) => e.eval_inner(f, singular).scale(Complex64::new(*c, 0.0)),
            ImplicitLaplacian(alpha) => CMat::scalar(Complex64::new(1.0 + alpha * f.norm_sq(), 0.0)),
            NegLaplacian => CMat::scalar(Complex64::new(f.norm_sq(), 0.0)),
            Gradient => CMat::from_fn(d, 1, |r, _| i * f.odd(r)),
            Divergence => CMat::from_fn(1, d, |_, c| i * f.odd(c)),
            LerayP => {
                let n2 = f.odd_norm_sq();
                if n2 == 0.0 {
                    *singular = true;
                    return CMat::zeros(d, d);
                }
                CMat::from_fn(d, d, |r, c| {
                    let delta = if r == c { 1.0 } else { 0.0 };
                    Complex64::new(delta - f.odd(r) * f.odd(c) / n2, 0.0)
                })
            }
        }
    }
}

impl Add for SymbolExpr {
    type Output = SymbolExpr;
    fn add(self, rhs: SymbolExpr) -> SymbolExpr {
        SymbolExpr::Sum(Box::new(self), Box::new(rhs))
    }
}

impl Sub for SymbolExpr {
    type Output = SymbolExpr;
    fn sub(self, rhs: SymbolExpr) -> SymbolExpr {
        SymbolExpr::Sum(Box::new(self), Box::new(rhs.scaled(-1.0)))
    }
}

impl Mul for SymbolExpr {
    type Output = SymbolExpr;
    fn mul(self, rhs: SymbolExpr) -> SymbolExpr {
        SymbolExpr::Product(Box::new(self), Box::new(rhs))
    }
}

impl Mul<SymbolExpr> for f64 {
    type Output = SymbolExpr;
    fn mul(self, rhs: SymbolExpr) -> SymbolExpr {
        rhs.scaled(self)
    }
}

/// Evaluates `e` at `f`. Returns `Ok(None)` only for [`SingularModePolicy::Skip`]
/// at a singular mode.
pub fn eval_symbol(
    e: &SymbolExpr,
    f: &Frequency,
    policy: SingularModePolicy,
) -> Result<Option<CMat>> {
    let shape = e.shape(f.dim())?;
    let mut singular = false;
    let value = e.eval_inner(f, &mut singular);
    if !singular {
        return Ok(Some(value));
    }
    match policy {
        SingularModePolicy::Zero => Ok(Some(CMat::zeros(shape.rows, shape.cols))),
        SingularModePolicy::Skip => Ok(None),
        SingularModePolicy::Error => Err(Error::Singular {
            mode: f.components().to_vec(),
        }),
    }
}

/// Moore–Penrose pseudo-inverse of a symbol value.
pub fn pseudo_inverse(m: &CMat) -> CMat {
    m.pseudo_inverse()
}

/// Checks `e(-k) = conj(e(k))` at `samples` pseudo-random integer modes.
pub fn reality_check(e: &SymbolExpr, dim: usize, samples: usize) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..samples {
        let k: Vec<f64> = (0..dim).map(|_| rng.random_range(-16i64..=16) as f64).collect();
        let f = Frequency::new(&k);
        let (Ok(Some(a)), Ok(Some(b))) = (
            eval_symbol(e, &f, SingularModePolicy::Zero),
            eval_symbol(e, &f.reflect(), SingularModePolicy::Zero),
        ) else {
            return false;
        };
        let scale = a.max_abs().max(1.0);
        if b.max_abs_diff(&a.conj()) > 1e-12 * scale {
            return false;
        }
    }
    true
}

/// Structural test for membership in the real algebra generated by the
/// matrix units, `iξ_i·Id` and `(iξ_i)^{-1}·Id`.
///
/// `NegLaplacian` is `-Σ (iξ_i)²` and counts as constructible. The built-in
/// Leray projector and implicit Laplacian are reported constructible only for
/// `dim <= 2`.
pub fn is_constructible(e: &SymbolExpr, dim: usize) -> Result<bool> {
    let shape = e.shape(dim)?;
    if !shape.is_square() {
        return Err(Error::Arity(format!(
            "constructibility needs a square symbol, got {}x{}",
            shape.rows, shape.cols
        )));
    }
    Ok(constructible(e, dim))
}

fn constructible(e: &SymbolExpr, dim: usize) -> bool {
    use SymbolExpr::*;
    match e {
        Identity | Const { .. } | Xi(_) | XiInv(_) | Delta { .. } | NegLaplacian => true,
        Sum(a, b) | Product(a, b) => constructible(a, dim) && constructible(b, dim),
        Scale(_, a) => constructible(a, dim),
        ImplicitLaplacian(_) | LerayP => dim <= 2,
        Gradient | Divergence => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(e: &SymbolExpr, k: &[f64]) -> CMat {
        eval_symbol(e, &Frequency::new(k), SingularModePolicy::Error)
            .unwrap()
            .unwrap()
    }

    #[test]
    fn implicit_laplacian_value() {
        let m = eval(&SymbolExpr::ImplicitLaplacian(1.0), &[1.0, 1.0]);
        assert_eq!(m, CMat::scalar(Complex64::new(3.0, 0.0)));
    }

    #[test]
    fn leray_on_axis_direction() {
        let m = eval(&SymbolExpr::LerayP, &[1.0, 0.0]);
        assert!(m.max_abs_diff(&CMat::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0])) < 1e-15);
    }

    #[test]
    fn xi_vanishes_on_zero_axis() {
        let m = eval(&SymbolExpr::Xi(0), &[0.0, 3.0]);
        assert_eq!(m.max_abs(), 0.0);
    }

    #[test]
    fn singular_policies() {
        let e = SymbolExpr::XiInv(1);
        let f = Frequency::new(&[2.0, 0.0]);
        assert_eq!(
            eval_symbol(&e, &f, SingularModePolicy::Zero).unwrap().unwrap().max_abs(),
            0.0
        );
        assert!(eval_symbol(&e, &f, SingularModePolicy::Skip).unwrap().is_none());
        assert!(matches!(
            eval_symbol(&e, &f, SingularModePolicy::Error),
            Err(Error::Singular { .. })
        ));
        let f = Frequency::new(&[0.0, 0.0, 0.0]);
        assert!(eval_symbol(&SymbolExpr::LerayP, &f, SingularModePolicy::Skip)
            .unwrap()
            .is_none());
    }

    #[test]
    fn xi_times_inverse_is_identity() {
        let e = SymbolExpr::Xi(0) * SymbolExpr::XiInv(0);
        for k in [-5.0, -1.0, 2.0, 7.0] {
            let m = eval(&e, &[k, 3.0]);
            assert!((m.get(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn divergence_of_gradient_is_minus_laplacian() {
        let e = SymbolExpr::Divergence * SymbolExpr::Gradient + SymbolExpr::NegLaplacian;
        let m = eval(&e, &[3.0, -2.0, 5.0]);
        assert!(m.max_abs() < 1e-12);
    }

    #[test]
    fn arity_errors() {
        let bad = SymbolExpr::Gradient * SymbolExpr::Gradient;
        assert!(matches!(bad.shape(2), Err(Error::Arity(_))));
        assert!(matches!(
            SymbolExpr::Xi(2).shape(2),
            Err(Error::AxisOutOfRange { axis: 2, dim: 2 })
        ));
        assert!(matches!(
            is_constructible(&SymbolExpr::Gradient, 2),
            Err(Error::Arity(_))
        ));
    }

    #[test]
    fn reality_of_generators() {
        for e in [
            SymbolExpr::LerayP,
            SymbolExpr::Xi(0),
            SymbolExpr::XiInv(1),
            SymbolExpr::constant(2, 2, vec![1.0, -2.0, 0.5, 3.0]),
            SymbolExpr::Gradient * SymbolExpr::Divergence,
        ] {
            assert!(reality_check(&e, 2, 200), "{e:?}");
        }
    }

    #[test]
    fn constructibility() {
        let xx = SymbolExpr::Xi(0) * SymbolExpr::XiInv(0);
        assert!(is_constructible(&xx, 3).unwrap());
        assert!(!is_constructible(&SymbolExpr::LerayP, 3).unwrap());
        assert!(is_constructible(&SymbolExpr::LerayP, 2).unwrap());
        assert!(!is_constructible(&SymbolExpr::ImplicitLaplacian(1.0), 3).unwrap());
        for d in 1..=3 {
            assert!(is_constructible(&SymbolExpr::NegLaplacian, d).unwrap());
        }
        // |ξ|² = −Σ (iξ_i)²
        let expanded = (0..3)
            .map(|a| SymbolExpr::Xi(a) * SymbolExpr::Xi(a))
            .reduce(|a, b| a + b)
            .unwrap()
            .scaled(-1.0);
        let diff = expanded - SymbolExpr::NegLaplacian;
        assert!(eval(&diff, &[1.0, -4.0, 6.0]).max_abs() < 1e-12);
    }

    #[test]
    fn nyquist_zeroes_odd_generators() {
        let grid = crate::spectral::GridSpec::new(&[8, 8]).unwrap();
        let flat = grid.index_of(&[-4, 3]);
        let f = grid.frequency(flat);
        let m = eval_symbol(&SymbolExpr::Xi(0), &f, SingularModePolicy::Error)
            .unwrap()
            .unwrap();
        assert_eq!(m.max_abs(), 0.0);
        let m = eval_symbol(&SymbolExpr::NegLaplacian, &f, SingularModePolicy::Error)
            .unwrap()
            .unwrap();
        assert_eq!(m.get(0, 0).re, 25.0);
    }
}
