//! Periodic grids on `[0, 2π)^d`, unitary discrete Fourier transforms and
//! modewise operators.
//!
//! Modes are stored in FFT order: along an axis of `n` points, index `i`
//! carries wavenumber `i` for `i < n/2` and `i - n` otherwise, so the retained
//! range is `[-n/2, n/2)` and the Nyquist wavenumber is `-n/2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::symbols::{self, SingularModePolicy, SymbolExpr};

pub const MAX_DIM: usize = 3;

/// Relative modulus above which a spectrum is rejected as non-Hermitian.
pub const REALITY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridSpec {
    sizes: Vec<usize>,
    strides: Vec<usize>,
}

impl GridSpec {
    pub fn new(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() || sizes.len() > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1..={MAX_DIM}, got {}",
                sizes.len()
            )));
        }
        for &n in sizes {
            if n < 4 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "axis size {n} is not a power of two >= 4"
                )));
            }
        }
        let mut strides = vec![1; sizes.len()];
        for axis in (0..sizes.len().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * sizes[axis + 1];
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            strides,
        })
    }

    /// Isotropic grid with `n` points along each of `dim` axes.
    pub fn cube(dim: usize, n: usize) -> Result<Self> {
        Self::new(&vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// `log2` of each axis size.
    pub fn levels(&self) -> Vec<u32> {
        self.sizes.iter().map(|n| n.trailing_zeros()).collect()
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_isotropic(&self) -> bool {
        self.sizes.windows(2).all(|w| w[0] == w[1])
    }

    pub fn nyquist(&self, axis: usize) -> i64 {
        -(self.sizes[axis] as i64 / 2)
    }

    fn wavenumber_at(n: usize, idx: usize) -> i64 {
        if idx < n / 2 {
            idx as i64
        } else {
            idx as i64 - n as i64
        }
    }

    /// Integer wavevector of the mode stored at `flat`.
    pub fn wavevector(&self, flat: usize) -> [i64; MAX_DIM] {
        let mut k = [0i64; MAX_DIM];
        for (axis, (&n, &stride)) in self.sizes.iter().zip(&self.strides).enumerate() {
            k[axis] = Self::wavenumber_at(n, (flat / stride) % n);
        }
        k
    }

    /// Flat index of wavevector `k` (taken modulo the grid).
    pub fn index_of(&self, k: &[i64]) -> usize {
        debug_assert_eq!(k.len(), self.dim());
        k.iter()
            .zip(self.sizes.iter().zip(&self.strides))
            .map(|(&ki, (&n, &stride))| (ki.rem_euclid(n as i64) as usize) * stride)
            .sum()
    }

    /// Flat index of the mode `-k` for the mode stored at `flat`.
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let mut out = 0;
        for (&n, &stride) in self.sizes.iter().zip(&self.strides) {
            let idx = (flat / stride) % n;
            out += ((n - idx) % n) * stride;
        }
        out
    }

    pub fn frequency(&self, flat: usize) -> Frequency {
        let k = self.wavevector(flat);
        let mut f = Frequency {
            xi: [0.0; MAX_DIM],
            nyquist: [false; MAX_DIM],
            dim: self.dim(),
        };
        for axis in 0..self.dim() {
            f.xi[axis] = k[axis] as f64;
            f.nyquist[axis] = k[axis] == self.nyquist(axis);
        }
        f
    }

    /// Physical coordinate of the sample stored at `flat`.
    pub fn point(&self, flat: usize) -> [f64; MAX_DIM] {
        let mut x = [0.0; MAX_DIM];
        for (axis, (&n, &stride)) in self.sizes.iter().zip(&self.strides).enumerate() {
            x[axis] = 2.0 * PI * ((flat / stride) % n) as f64 / n as f64;
        }
        x
    }

    pub fn describe(&self) -> String {
        self.sizes
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join("x")
    }
}

/// A frequency point ξ at which symbols are evaluated.
///
/// Grid modes carry a Nyquist mask: along a Nyquist axis the mode is its own
/// conjugate, so generators odd in `ξ_i` evaluate as if `ξ_i = 0` there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frequency {
    xi: [f64; MAX_DIM],
    nyquist: [bool; MAX_DIM],
    dim: usize,
}

impl Frequency {
    /// Continuous frequency with no Nyquist axes.
    pub fn new(xi: &[f64]) -> Self {
        assert!(
            !xi.is_empty() && xi.len() <= MAX_DIM,
            "frequency dimension must be 1..={MAX_DIM}"
        );
        let mut f = Frequency {
            xi: [0.0; MAX_DIM],
            nyquist: [false; MAX_DIM],
            dim: xi.len(),
        };
        f.xi[..xi.len()].copy_from_slice(xi);
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.xi[..self.dim]
    }

    pub fn xi(&self, axis: usize) -> f64 {
        self.xi[axis]
    }

    pub fn is_nyquist(&self, axis: usize) -> bool {
        self.nyquist[axis]
    }

    /// Component seen by odd generators (zero on a Nyquist axis).
    pub fn odd(&self, axis: usize) -> f64 {
        if self.nyquist[axis] {
            0.0
        } else {
            self.xi[axis]
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.components().iter().map(|x| x * x).sum()
    }

    pub fn odd_norm_sq(&self) -> f64 {
        (0..self.dim).map(|a| self.odd(a).powi(2)).sum()
    }

    /// The reflected frequency `-ξ`; Nyquist axes are self-conjugate.
    pub fn reflect(&self) -> Self {
        let mut out = *self;
        for axis in 0..self.dim {
            if !self.nyquist[axis] {
                out.xi[axis] = -self.xi[axis];
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    components: usize,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: GridSpec, components: usize, values: Vec<f64>) -> Result<Self> {
        if components == 0 {
            return Err(Error::Structural("a field needs at least one component".into()));
        }
        if values.len() != components * grid.len() {
            return Err(Error::Structural(format!(
                "expected {} samples for {} component(s) on {}, got {}",
                components * grid.len(),
                components,
                grid.describe(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            grid,
            components,
            values,
        })
    }

    pub fn zeros(grid: GridSpec, components: usize) -> Self {
        let values = vec![0.0; components * grid.len()];
        Self {
            grid,
            components,
            values,
        }
    }

    /// Samples `f(component, x)` at every grid point.
    pub fn from_fn(
        grid: GridSpec,
        components: usize,
        f: impl Fn(usize, &[f64]) -> f64,
    ) -> Result<Self> {
        let n = grid.len();
        let dim = grid.dim();
        let mut values = Vec::with_capacity(components * n);
        for c in 0..components {
            for flat in 0..n {
                let x = grid.point(flat);
                values.push(f(c, &x[..dim]));
            }
        }
        Self::new(grid, components, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `‖self - other‖₂`.
    pub fn distance(&self, other: &RealField) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    /// `self + other`.
    pub fn add(&self, other: &RealField) -> Result<RealField> {
        self.check_same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self {
            grid: self.grid.clone(),
            components: self.components,
            values,
        })
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &RealField, b: f64) -> Result<RealField> {
        self.check_same_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            components: self.components,
            values,
        })
    }

    pub fn dot(&self, other: &RealField) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum())
    }

    fn check_same_shape(&self, other: &RealField) -> Result<()> {
        if self.grid != other.grid || self.components != other.components {
            return Err(Error::Structural(format!(
                "field shapes differ: {}x{} vs {}x{}",
                self.components,
                self.grid.describe(),
                other.components,
                other.grid.describe()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    components: usize,
    modes: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, components: usize, modes: Vec<Complex64>) -> Result<Self> {
        if components == 0 || modes.len() != components * grid.len() {
            return Err(Error::Structural(format!(
                "expected {} modes for {} component(s) on {}, got {}",
                components * grid.len(),
                components,
                grid.describe(),
                modes.len()
            )));
        }
        Ok(Self {
            grid,
            components,
            modes,
        })
    }

    pub fn zeros(grid: GridSpec, components: usize) -> Self {
        let modes = vec![Complex64::new(0.0, 0.0); components * grid.len()];
        Self {
            grid,
            components,
            modes,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn modes(&self) -> &[Complex64] {
        &self.modes
    }

    pub fn modes_mut(&mut self) -> &mut [Complex64] {
        &mut self.modes
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.modes[c * n..(c + 1) * n]
    }

    pub fn get(&self, component: usize, flat: usize) -> Complex64 {
        self.modes[component * self.grid.len() + flat]
    }

    pub fn set(&mut self, component: usize, flat: usize, value: Complex64) {
        let n = self.grid.len();
        self.modes[component * n + flat] = value;
    }

    /// Coefficient at wavevector `k` of component `c`.
    pub fn at(&self, c: usize, k: &[i64]) -> Complex64 {
        self.get(c, self.grid.index_of(k))
    }

    pub fn l2_norm(&self) -> f64 {
        self.modes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `|m(k) - conj(m(-k))|` relative to the largest modulus.
    pub fn hermitian_residue(&self) -> f64 {
        let scale = self.max_modulus();
        if scale == 0.0 {
            return 0.0;
        }
        self.hermitian_defect() / scale
    }

    pub fn max_modulus(&self) -> f64 {
        self.modes.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Largest `|m(k) - conj(m(-k))|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.len();
        let mut worst = 0.0f64;
        for c in 0..self.components {
            let comp = &self.modes[c * n..(c + 1) * n];
            for flat in 0..n {
                let partner = comp[self.grid.conjugate_index(flat)];
                worst = worst.max((comp[flat] - partner.conj()).norm());
            }
        }
        worst
    }

    /// `‖self - other‖₂`.
    pub fn distance(&self, other: &SpectralField) -> Result<f64> {
        if self.grid != other.grid || self.components != other.components {
            return Err(Error::Structural("spectral field shapes differ".into()));
        }
        Ok(self
            .modes
            .iter()
            .zip(&other.modes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

fn transform_component(grid: &GridSpec, data: &mut [Complex64], direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let total = grid.len();
    let dim = grid.dim();
    for axis in 0..dim {
        let n = grid.sizes[axis];
        let fft = planner.plan_fft(n, direction);
        if axis == dim - 1 {
            data.par_chunks_mut(n).for_each(|line| fft.process(line));
            continue;
        }
        let stride = grid.strides[axis];
        let block = n * stride;
        // Lines along `axis` start at offsets (outer * block + inner).
        let starts: Vec<usize> = (0..total / block)
            .flat_map(|outer| (0..stride).map(move |inner| outer * block + inner))
            .collect();
        let src: &[Complex64] = data;
        let lines: Vec<Vec<Complex64>> = starts
            .par_iter()
            .map(|&s| {
                let mut line: Vec<Complex64> = (0..n).map(|i| src[s + i * stride]).collect();
                fft.process(&mut line);
                line
            })
            .collect();
        for (s, line) in starts.iter().zip(lines) {
            for (i, z) in line.into_iter().enumerate() {
                data[s + i * stride] = z;
            }
        }
    }
    let scale = 1.0 / (total as f64).sqrt();
    data.iter_mut().for_each(|z| *z *= scale);
}

/// Unitary forward DFT of every component.
pub fn forward_transform(f: &RealField) -> SpectralField {
    let n = f.grid.len();
    let mut modes: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    modes
        .par_chunks_mut(n)
        .for_each(|comp| transform_component(&f.grid, comp, FftDirection::Forward));
    SpectralField {
        grid: f.grid.clone(),
        components: f.components,
        modes,
    }
}

/// Unitary inverse DFT; rejects spectra that do not describe a real field.
pub fn inverse_transform(s: &SpectralField) -> Result<RealField> {
    inverse_transform_scaled(s, 0.0)
}

/// As [`inverse_transform`], measuring the Hermitian defect against
/// `max(scale, largest modulus)`. Spectra computed from an input of modulus
/// `scale` pass `scale` so that near-zero outputs are not judged by their
/// own roundoff.
pub fn inverse_transform_scaled(s: &SpectralField, scale: f64) -> Result<RealField> {
    let reference = s.max_modulus().max(scale);
    let residue = if reference == 0.0 {
        0.0
    } else {
        s.hermitian_defect() / reference
    };
    if residue > REALITY_TOLERANCE {
        return Err(Error::RealityViolation {
            residue,
            limit: REALITY_TOLERANCE,
        });
    }
    let n = s.grid.len();
    let mut data = s.modes.clone();
    data.par_chunks_mut(n)
        .for_each(|comp| transform_component(&s.grid, comp, FftDirection::Inverse));
    RealField::new(
        s.grid.clone(),
        s.components,
        data.into_iter().map(|z| z.re).collect(),
    )
}

/// `( Σ_k (1+|k|²)^t |s(k)|² )^{1/2}` summed over components.
pub fn sobolev_norm(s: &SpectralField, t: f64) -> f64 {
    if t == 0.0 {
        return s.l2_norm();
    }
    let weights = sobolev_weights(&s.grid, t);
    let n = s.grid.len();
    let mut acc = 0.0;
    for c in 0..s.components {
        for (z, w) in s.modes[c * n..(c + 1) * n].iter().zip(&weights) {
            acc += w * z.norm_sqr();
        }
    }
    acc.sqrt()
}

/// Per-mode weights `(1+|k|²)^t` in storage order.
pub fn sobolev_weights(grid: &GridSpec, t: f64) -> Vec<f64> {
    (0..grid.len())
        .map(|flat| (1.0 + grid.frequency(flat).norm_sq()).powf(t))
        .collect()
}

/// Applies the symbol `e` mode by mode: output vector at `k` is `e(k)` times
/// the input vector at `k`. A 1×1 symbol acts as a multiple of the identity.
pub fn apply_modewise(
    s: &SpectralField,
    e: &SymbolExpr,
    policy: SingularModePolicy,
) -> Result<SpectralField> {
    let dim = s.grid.dim();
    let shape = e.shape(dim)?;
    let out_components = if shape.is_scalar() {
        s.components
    } else if shape.cols == s.components {
        shape.rows
    } else {
        return Err(Error::Arity(format!(
            "symbol takes {} component(s), field has {}",
            shape.cols, s.components
        )));
    };
    let n = s.grid.len();
    let mut out = SpectralField::zeros(s.grid.clone(), out_components);
    let mut input = vec![Complex64::new(0.0, 0.0); s.components];
    for flat in 0..n {
        let freq = s.grid.frequency(flat);
        for (c, slot) in input.iter_mut().enumerate() {
            *slot = s.modes[c * n + flat];
        }
        match symbols::eval_symbol(e, &freq, policy)? {
            Some(m) => {
                let y = m.apply_broadcast(&input);
                for (c, v) in y.into_iter().enumerate() {
                    out.modes[c * n + flat] = v;
                }
            }
            None => {
                // Skip policy: the operator leaves this mode untouched.
                if out_components == s.components {
                    for (c, v) in input.iter().enumerate() {
                        out.modes[c * n + flat] = *v;
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: &GridSpec, m: usize, seed: u64) -> RealField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..m * grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        RealField::new(grid.clone(), m, values).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(&[8, 16]).is_ok());
        assert!(GridSpec::new(&[2]).is_err());
        assert!(GridSpec::new(&[12]).is_err());
        assert!(GridSpec::new(&[]).is_err());
        assert!(GridSpec::new(&[4, 4, 4, 4]).is_err());
        assert_eq!(GridSpec::new(&[8, 4]).unwrap().len(), 32);
    }

    #[test]
    fn wavevector_layout() {
        let g = GridSpec::new(&[8]).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wavevector(i)[0]).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        let g = GridSpec::new(&[4, 8]).unwrap();
        for flat in 0..g.len() {
            let k = g.wavevector(flat);
            assert_eq!(g.index_of(&k[..2]), flat);
            let neg = g.conjugate_index(flat);
            let kn = g.wavevector(neg);
            for axis in 0..2 {
                assert_eq!((k[axis] + kn[axis]).rem_euclid(g.sizes()[axis] as i64), 0);
            }
        }
    }

    #[test]
    fn zero_field_has_zero_modes() {
        let g = GridSpec::new(&[16, 16]).unwrap();
        let s = forward_transform(&RealField::zeros(g, 2));
        assert!(s.modes().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn single_cosine_has_two_modes() {
        let g = GridSpec::new(&[32]).unwrap();
        let f = RealField::from_fn(g.clone(), 1, |_, x| (3.0 * x[0]).cos()).unwrap();
        let s = forward_transform(&f);
        let nonzero: Vec<i64> = (0..g.len())
            .filter(|&i| s.get(0, i).norm() > 1e-12)
            .map(|i| g.wavevector(i)[0])
            .collect();
        assert_eq!(nonzero.len(), 2);
        assert!(nonzero.contains(&3) && nonzero.contains(&-3));
        assert!((s.at(0, &[3]).norm() - s.at(0, &[-3]).norm()).abs() < 1e-14);
    }

    #[test]
    fn parseval_and_round_trip() {
        let g = GridSpec::new(&[64, 64]).unwrap();
        let f = random_field(&g, 1, 7);
        let s = forward_transform(&f);
        let direct: f64 = f.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((s.l2_norm() - direct).abs() <= 1e-12 * direct);
        assert!(s.hermitian_residue() < 1e-14);

        let g = GridSpec::new(&[128]).unwrap();
        let f = random_field(&g, 1, 8);
        let back = inverse_transform(&forward_transform(&f)).unwrap();
        let err = back
            .values()
            .iter()
            .zip(f.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 1e-12 * f.max_abs());
    }

    #[test]
    fn hermitian_spectrum_round_trip() {
        let g = GridSpec::new(&[32, 32]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = SpectralField::zeros(g.clone(), 1);
        for flat in 0..g.len() {
            let partner = g.conjugate_index(flat);
            if partner < flat {
                continue;
            }
            let z = if partner == flat {
                Complex64::new(rng.random_range(-1.0..1.0), 0.0)
            } else {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            };
            s.set(0, flat, z);
            s.set(0, partner, z.conj());
        }
        let back = forward_transform(&inverse_transform(&s).unwrap());
        assert!(back.distance(&s).unwrap() <= 1e-12 * s.l2_norm());
    }

    #[test]
    fn single_mode_synthesizes_cosine() {
        let g = GridSpec::new(&[16]).unwrap();
        let mut s = SpectralField::zeros(g.clone(), 1);
        s.set(0, g.index_of(&[1]), Complex64::new(0.5, 0.0));
        s.set(0, g.index_of(&[-1]), Complex64::new(0.5, 0.0));
        let f = inverse_transform(&s).unwrap();
        let scale = 1.0 / (16.0f64).sqrt();
        for flat in 0..16 {
            let x = g.point(flat)[0];
            assert!((f.values()[flat] - scale * x.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let g = GridSpec::new(&[8]).unwrap();
        let mut s = SpectralField::zeros(g.clone(), 1);
        s.set(0, g.index_of(&[2]), Complex64::new(1.0, 0.0));
        assert!(matches!(
            inverse_transform(&s),
            Err(Error::RealityViolation { .. })
        ));
    }

    #[test]
    fn sobolev_norm_values() {
        let g = GridSpec::new(&[8, 8]).unwrap();
        let mut s = SpectralField::zeros(g.clone(), 1);
        s.set(0, g.index_of(&[1, 0]), Complex64::new(1.0, 0.0));
        assert!((sobolev_norm(&s, 1.0) - 2.0f64.sqrt()).abs() < 1e-15);
        let mut s = SpectralField::zeros(g.clone(), 1);
        s.set(0, g.index_of(&[2, 0]), Complex64::new(1.0, 0.0));
        assert!((sobolev_norm(&s, -1.0) - 5.0f64.powf(-0.5)).abs() < 1e-15);
        let f = random_field(&g, 2, 11);
        let s = forward_transform(&f);
        assert!((sobolev_norm(&s, 0.0) - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn field_shape_errors() {
        let g = GridSpec::new(&[4]).unwrap();
        assert!(RealField::new(g.clone(), 1, vec![0.0; 3]).is_err());
        assert!(matches!(
            RealField::new(g, 1, vec![0.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite(1))
        ));
    }
}
