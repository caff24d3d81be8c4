//! Deterministic test fields.

use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bands::build_tensorial_partition;
use crate::error::{Error, Result};
use crate::solver::exact_leray;
use crate::spectral::{forward_transform, inverse_transform, GridSpec, RealField, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Random,
    Gradient,
    Solenoidal,
    CornerMode,
}

impl FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(FieldKind::Random),
            "gradient" => Ok(FieldKind::Gradient),
            "solenoidal" => Ok(FieldKind::Solenoidal),
            "corner-mode" => Ok(FieldKind::CornerMode),
            other => Err(Error::InvalidArgument(format!(
                "unknown field kind '{other}' (random|gradient|solenoidal|corner-mode)"
            ))),
        }
    }
}

pub fn generate(grid: &GridSpec, components: usize, kind: FieldKind, seed: u64) -> Result<RealField> {
    if components == 0 {
        return Err(Error::InvalidArgument("components must be >= 1".into()));
    }
    let vector_kind = matches!(kind, FieldKind::Gradient | FieldKind::Solenoidal);
    if vector_kind && components != grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "{kind:?} fields have one component per axis ({}), not {components}",
            grid.dim()
        )));
    }
    match kind {
        FieldKind::Random => Ok(random_field(grid, components, seed)),
        FieldKind::Gradient => gradient_field(grid, seed),
        FieldKind::Solenoidal => solenoidal_field(grid, seed),
        FieldKind::CornerMode => corner_mode_field(grid, components),
    }
}

/// Independent standard normal samples.
pub fn random_field(grid: &GridSpec, components: usize, seed: u64) -> RealField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..components * grid.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    RealField::new(grid.clone(), components, values).expect("normal samples are finite")
}

/// `∇p` for a random potential `p`.
pub fn gradient_field(grid: &GridSpec, seed: u64) -> Result<RealField> {
    let p = forward_transform(&random_field(grid, 1, seed));
    let d = grid.dim();
    let mut out = SpectralField::zeros(grid.clone(), d);
    for flat in 0..grid.len() {
        let f = grid.frequency(flat);
        for axis in 0..d {
            out.set(axis, flat, p.get(0, flat) * Complex64::new(0.0, f.odd(axis)));
        }
    }
    inverse_transform(&out)
}

/// Divergence-free part of a random vector field.
pub fn solenoidal_field(grid: &GridSpec, seed: u64) -> Result<RealField> {
    let u = random_field(grid, grid.dim(), seed);
    Ok(exact_leray(&u)?.0)
}

/// Unit-norm field whose energy sits at the largest-`|k|` modes of the top
/// tensorial band (`|k_i| = 2^{L_i−1} − 1` on every axis, all signs).
pub fn corner_mode_field(grid: &GridSpec, components: usize) -> Result<RealField> {
    let p = build_tensorial_partition(grid);
    let band = p
        .bands()
        .iter()
        .max_by(|a, b| a.box_hi().partial_cmp(b.box_hi()).expect("finite edges"))
        .ok_or_else(|| Error::InvalidGrid("grid has no tensorial band".into()))?;
    let corner: Vec<i64> = band.box_hi().iter().map(|&h| h as i64 - 1).collect();
    let d = grid.dim();
    let mut s = SpectralField::zeros(grid.clone(), components);
    for signs in 0..1usize << d {
        let k: Vec<i64> = (0..d)
            .map(|i| if signs >> i & 1 == 1 { -corner[i] } else { corner[i] })
            .collect();
        let flat = grid.index_of(&k);
        for c in 0..components {
            s.set(c, flat, Complex64::new(1.0, 0.0));
        }
    }
    let f = inverse_transform(&s)?;
    let norm = f.l2_norm();
    RealField::new(
        grid.clone(),
        components,
        f.values().iter().map(|v| v / norm).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_field() {
        let g = GridSpec::new(&[16, 16]).unwrap();
        assert_eq!(random_field(&g, 2, 9), random_field(&g, 2, 9));
        assert_ne!(random_field(&g, 2, 9), random_field(&g, 2, 10));
    }

    #[test]
    fn gradient_has_no_divergence_free_part() {
        let g = GridSpec::new(&[32, 16]).unwrap();
        let u = gradient_field(&g, 1).unwrap();
        let (div, _) = exact_leray(&u).unwrap();
        assert!(div.l2_norm() <= 1e-12 * u.l2_norm());
    }

    #[test]
    fn solenoidal_has_no_gradient_part() {
        let g = GridSpec::new(&[8, 8, 8]).unwrap();
        let u = solenoidal_field(&g, 2).unwrap();
        let (_, curl) = exact_leray(&u).unwrap();
        assert!(curl.l2_norm() <= 1e-12 * u.l2_norm());
    }

    #[test]
    fn corner_mode_is_unit_and_localized() {
        let g = GridSpec::new(&[16, 16]).unwrap();
        let f = corner_mode_field(&g, 1).unwrap();
        assert!((f.l2_norm() - 1.0).abs() < 1e-12);
        let s = forward_transform(&f);
        let z = s.at(0, &[7, -7]);
        assert!((z.norm() - 0.5).abs() < 1e-12);
        assert!(s.at(0, &[6, 7]).norm() < 1e-12);
    }

    #[test]
    fn vector_kinds_need_dim_components() {
        let g = GridSpec::new(&[8, 8]).unwrap();
        assert!(generate(&g, 1, FieldKind::Gradient, 0).is_err());
        assert!("nope".parse::<FieldKind>().is_err());
    }
}
