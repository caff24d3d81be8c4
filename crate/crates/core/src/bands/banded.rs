use std::sync::Arc;

use num_complex::Complex64;

use super::partition::{BaseScheme, Partition};
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Per-axis derivation order `ν` of the wavelet family; `0` is the plain
/// Shannon family.
///
/// With `s = 4·2^{j_i}`, synthesis weighs a band coefficient at mode `k` by
/// `∏_i (i k_i / s)^{-ν_i}`, so that lowering `ν_i` by one while scaling the
/// band coefficients by `s` is exactly `∂/∂x_i`. DC coefficients are kept
/// as plain Fourier coefficients and weighed by `∏_i (i k_i)^{-ν_i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyTag(Vec<i32>);

impl FamilyTag {
    pub fn neutral(dim: usize) -> Self {
        FamilyTag(vec![0; dim])
    }

    pub fn orders(&self) -> &[i32] {
        &self.0
    }

    pub fn is_neutral(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }
}

/// Spectral restrictions of a field to each band of a partition.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedField {
    partition: Arc<Partition>,
    components: usize,
    /// Per band, component-major coefficients over the band's modes.
    bands: Vec<Vec<Complex64>>,
    dc: Vec<Complex64>,
    family: FamilyTag,
}

impl BandedField {
    pub fn partition(&self) -> &Arc<Partition> {
        &self.partition
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn family(&self) -> &FamilyTag {
        &self.family
    }

    pub fn band(&self, index: usize) -> &[Complex64] {
        &self.bands[index]
    }

    pub fn band_mut(&mut self, index: usize) -> &mut [Complex64] {
        &mut self.bands[index]
    }

    pub fn dc(&self) -> &[Complex64] {
        &self.dc
    }

    /// `‖v_j‖₂²` for every band, in partition order.
    pub fn band_energies(&self) -> Vec<f64> {
        self.bands
            .iter()
            .map(|b| b.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    pub fn dc_energy(&self) -> f64 {
        self.dc.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Copies each band's modes out of `s`.
pub fn analyze(s: &SpectralField, p: &Arc<Partition>) -> Result<BandedField> {
    if s.grid() != p.grid() {
        return Err(Error::Structural(format!(
            "field grid {} does not match partition grid {}",
            s.grid().describe(),
            p.grid().describe()
        )));
    }
    let m = s.components();
    let bands = p
        .bands()
        .iter()
        .map(|band| {
            (0..m)
                .flat_map(|c| band.modes().iter().map(move |&flat| s.get(c, flat)))
                .collect()
        })
        .collect();
    let dc = (0..m)
        .flat_map(|c| p.dc_modes().iter().map(move |&flat| s.get(c, flat)))
        .collect();
    Ok(BandedField {
        partition: Arc::clone(p),
        components: m,
        bands,
        dc,
        family: FamilyTag::neutral(p.grid().dim()),
    })
}

fn int_power(z: Complex64, n: i32) -> Complex64 {
    if n == 0 {
        Complex64::new(1.0, 0.0)
    } else if z == ZERO {
        ZERO
    } else {
        z.powi(n)
    }
}

/// Scatters the bands back into a spectrum, applying the family weights.
pub fn synthesize(b: &BandedField) -> Result<SpectralField> {
    let p = &b.partition;
    let grid = p.grid();
    let d = grid.dim();
    let n = grid.len();
    let m = b.components;
    let nu = b.family.orders();
    let mut out = SpectralField::zeros(grid.clone(), m);
    let mut written = vec![false; n];
    let mut claim = |flat: usize| -> Result<()> {
        if std::mem::replace(&mut written[flat], true) {
            return Err(Error::Consistency(format!(
                "mode {:?} belongs to two bands",
                &grid.wavevector(flat)[..d]
            )));
        }
        Ok(())
    };
    let i = Complex64::new(0.0, 1.0);
    for (band, coeffs) in p.bands().iter().zip(&b.bands) {
        let len = band.len();
        for (pos, &flat) in band.modes().iter().enumerate() {
            claim(flat)?;
            let mut g = Complex64::new(1.0, 0.0);
            if !b.family.is_neutral() {
                let f = grid.frequency(flat);
                for axis in 0..d {
                    let s = 4.0 * band.scale()[axis];
                    g *= int_power(i * f.odd(axis) / s, -nu[axis]);
                }
            }
            for c in 0..m {
                out.set(c, flat, coeffs[c * len + pos] * g);
            }
        }
    }
    let len = p.dc_modes().len();
    for (pos, &flat) in p.dc_modes().iter().enumerate() {
        claim(flat)?;
        let mut g = Complex64::new(1.0, 0.0);
        if !b.family.is_neutral() {
            let f = grid.frequency(flat);
            for axis in 0..d {
                g *= int_power(i * f.odd(axis), -nu[axis]);
            }
        }
        for c in 0..m {
            out.set(c, flat, b.dc[c * len + pos] * g);
        }
    }
    Ok(out)
}

fn derivation_step(b: &BandedField, axis: usize, order: i32) -> Result<BandedField> {
    let p = &b.partition;
    let d = p.grid().dim();
    if axis >= d {
        return Err(Error::AxisOutOfRange { axis, dim: d });
    }
    if p.scheme().base() != BaseScheme::Tensorial {
        return Err(Error::UnsupportedScheme(
            "wavelet derivation acts per tensor direction and needs a tensorial partition".into(),
        ));
    }
    let mut out = b.clone();
    for (band, coeffs) in p.bands().iter().zip(out.bands.iter_mut()) {
        let s = 4.0 * band.scale()[axis];
        let factor = if order > 0 { s } else { 1.0 / s };
        coeffs.iter_mut().for_each(|z| *z *= factor);
    }
    out.family.0[axis] -= order;
    Ok(out)
}

/// Differentiates along `axis` by scaling band-`j` coefficients by
/// `4·2^{j_axis}` and switching to the derived wavelet family.
pub fn apply_lemarie_derivative(b: &BandedField, axis: usize) -> Result<BandedField> {
    derivation_step(b, axis, 1)
}

/// Inverse of [`apply_lemarie_derivative`].
pub fn apply_lemarie_integral(b: &BandedField, axis: usize) -> Result<BandedField> {
    derivation_step(b, axis, -1)
}

#[cfg(test)]
mod tests {
    use super::super::{build_mra_partition, build_tensorial_partition, refine_packet};
    use super::*;
    use crate::spectral::{forward_transform, GridSpec, RealField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spectrum(grid: &GridSpec, m: usize, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..m * grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        forward_transform(&RealField::new(grid.clone(), m, v).unwrap())
    }

    #[test]
    fn zero_field_gives_zero_bands() {
        let g = GridSpec::new(&[16, 16]).unwrap();
        let p = Arc::new(build_tensorial_partition(&g));
        let b = analyze(&SpectralField::zeros(g, 1), &p).unwrap();
        assert!(b.band_energies().iter().all(|&e| e == 0.0));
    }

    #[test]
    fn single_mode_lands_in_its_box() {
        let g = GridSpec::new(&[8, 8]).unwrap();
        let p = Arc::new(build_tensorial_partition(&g));
        let mut s = SpectralField::zeros(g.clone(), 1);
        s.set(0, g.index_of(&[3, 1]), Complex64::new(1.0, 0.0));
        let b = analyze(&s, &p).unwrap();
        let hit: Vec<String> = p
            .bands()
            .iter()
            .zip(b.band_energies())
            .filter(|(_, e)| *e > 0.0)
            .map(|(band, _)| band.id().to_string())
            .collect();
        assert_eq!(hit, vec!["T(1,0)"]);
    }

    #[test]
    fn analyze_synthesize_is_bit_exact() {
        let g = GridSpec::new(&[32, 16]).unwrap();
        let s = random_spectrum(&g, 2, 5);
        let t = build_tensorial_partition(&g);
        for p in [t.clone(), refine_packet(&t, 2).unwrap()] {
            let p = Arc::new(p);
            assert_eq!(synthesize(&analyze(&s, &p).unwrap()).unwrap(), s);
        }
        let g = GridSpec::new(&[16, 16]).unwrap();
        let s = random_spectrum(&g, 1, 6);
        let p = Arc::new(build_mra_partition(&g).unwrap());
        assert_eq!(synthesize(&analyze(&s, &p).unwrap()).unwrap(), s);
    }

    #[test]
    fn derivative_matches_modewise_multiplication() {
        let g = GridSpec::new(&[32, 32]).unwrap();
        let s = random_spectrum(&g, 1, 9);
        let p = Arc::new(build_tensorial_partition(&g));
        for axis in 0..2 {
            let b = apply_lemarie_derivative(&analyze(&s, &p).unwrap(), axis).unwrap();
            let got = synthesize(&b).unwrap();
            let mut expected = s.clone();
            for flat in 0..g.len() {
                let f = g.frequency(flat);
                let z = s.get(0, flat) * Complex64::new(0.0, f.odd(axis));
                expected.set(0, flat, z);
            }
            assert!(got.distance(&expected).unwrap() <= 1e-12 * expected.l2_norm());
        }
    }

    #[test]
    fn derivative_then_integral_is_identity() {
        let g = GridSpec::new(&[16, 16]).unwrap();
        let s = random_spectrum(&g, 1, 10);
        let p = Arc::new(build_tensorial_partition(&g));
        let b = analyze(&s, &p).unwrap();
        let back = apply_lemarie_integral(&apply_lemarie_derivative(&b, 1).unwrap(), 1).unwrap();
        assert!(back.family().is_neutral());
        let r = synthesize(&back).unwrap();
        assert!(r.distance(&s).unwrap() <= 1e-12 * s.l2_norm());
    }

    #[test]
    fn derivative_of_axis_constant_field_vanishes() {
        let g = GridSpec::new(&[16, 16]).unwrap();
        let f = RealField::from_fn(g.clone(), 1, |_, x| (3.0 * x[1]).sin() + 0.5).unwrap();
        let p = Arc::new(build_tensorial_partition(&g));
        let b = analyze(&forward_transform(&f), &p).unwrap();
        let d = synthesize(&apply_lemarie_derivative(&b, 0).unwrap()).unwrap();
        assert!(d.l2_norm() < 1e-12);
    }

    #[test]
    fn derivation_errors() {
        let g = GridSpec::new(&[8, 8]).unwrap();
        let s = random_spectrum(&g, 1, 1);
        let p = Arc::new(build_tensorial_partition(&g));
        let b = analyze(&s, &p).unwrap();
        assert!(matches!(
            apply_lemarie_derivative(&b, 2),
            Err(Error::AxisOutOfRange { axis: 2, dim: 2 })
        ));
        let mra = Arc::new(build_mra_partition(&g).unwrap());
        let b = analyze(&s, &mra).unwrap();
        assert!(matches!(
            apply_lemarie_derivative(&b, 0),
            Err(Error::UnsupportedScheme(_))
        ));
    }

    #[test]
    fn overlapping_partition_is_reported() {
        let g = GridSpec::new(&[8]).unwrap();
        let p = build_tensorial_partition(&g);
        let mut bands = p.bands().to_vec();
        bands[0].modes.push(p.dc_modes()[0]);
        let bad = Arc::new(Partition::from_parts(
            g.clone(),
            p.scheme(),
            bands,
            p.dc_modes().to_vec(),
        ));
        let s = random_spectrum(&g, 1, 2);
        let b = analyze(&s, &bad).unwrap();
        assert!(matches!(synthesize(&b), Err(Error::Consistency(_))));
    }
}
