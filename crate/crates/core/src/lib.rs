//! Shannon-wavelet approximations of constant-coefficient differential
//! operators on periodic grids.
//!
//! Fields live on the torus `[0, 2π)^d` so that grid wavevectors are
//! integers. Shannon wavelets have perfect band-pass filters, which means a
//! wavelet decomposition is exactly a partition of the Fourier modes into
//! dyadic boxes; every algorithm here therefore runs in spectral space:
//!
//! * [`spectral`]: grids, unitary FFTs, Sobolev norms, modewise operators.
//! * [`bands`]: tensorial / MRA / packet partitions, band analysis and
//!   synthesis, derivation of wavelet families.
//! * [`symbols`]: constant-coefficient operator symbols and their algebra.
//! * [`precond`]: per-band constant approximations and contraction rates.
//! * [`solver`]: the band-preconditioned Richardson iteration and the
//!   iterative Helmholtz–Leray decomposition.

pub mod bands;
pub mod error;
pub mod generate;
pub mod precond;
pub mod solver;
pub mod spectral;
pub mod swf1;
pub mod symbols;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
