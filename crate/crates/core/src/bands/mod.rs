//! Dyadic frequency partitions induced by Shannon wavelets.
//!
//! The Shannon filters are perfect half-band splitters, so a wavelet level
//! is exactly the set of Fourier modes in a dyadic box and wavelet packets
//! halve each box's intervals. Band analysis is therefore a lossless copy of
//! modes; the half-sample phase of the Shannon wavelet is omitted because
//! every operator here acts modewise and the phase cancels between analysis
//! and synthesis.
//!
//! A mode belongs to the axis interval `[lo, hi)` by magnitude, half-open at
//! `hi`, so adjacent bands never share a mode. The zero mode and Nyquist
//! planes (and, for tensorial partitions, the coordinate planes `k_i = 0`)
//! go to the DC band.

mod banded;
mod partition;

pub use banded::{
    analyze, apply_lemarie_derivative, apply_lemarie_integral, synthesize, BandedField, FamilyTag,
};
pub use partition::{
    build_mra_partition, build_tensorial_partition, refine_packet, BandId, BaseScheme, Extrema,
    ExtremaMode, FrequencyBand, Partition, Scheme,
};

use crate::error::Result;
use crate::spectral::GridSpec;

/// Builds the base partition for `base` and refines it to `packet_depth`.
pub fn build_partition(grid: &GridSpec, base: BaseScheme, packet_depth: u32) -> Result<Partition> {
    let p = match base {
        BaseScheme::Tensorial => build_tensorial_partition(grid),
        BaseScheme::Mra => build_mra_partition(grid)?,
    };
    refine_packet(&p, packet_depth)
}
