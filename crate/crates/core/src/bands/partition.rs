use std::fmt;

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, MAX_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseScheme {
    Tensorial,
    Mra,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Tensorial,
    Mra,
    Packet { base: BaseScheme, depth: u32 },
}

impl Scheme {
    pub fn base(&self) -> BaseScheme {
        match self {
            Scheme::Tensorial => BaseScheme::Tensorial,
            Scheme::Mra => BaseScheme::Mra,
            Scheme::Packet { base, .. } => *base,
        }
    }

    pub fn depth(&self) -> u32 {
        match self {
            Scheme::Packet { depth, .. } => *depth,
            _ => 0,
        }
    }
}

/// Band index, ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BandId {
    /// Per-axis scale `j`.
    Tensorial(Vec<u32>),
    /// Scale `j` and type `ε ∈ {0,1}^d \ {0}`.
    Mra { j: u32, eps: Vec<u8> },
    /// Packet refinement of `parent` to `depth`, with the per-axis position
    /// of the sub-interval (`0..2^depth`).
    Packet {
        parent: Box<BandId>,
        depth: u32,
        path: Vec<u32>,
    },
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for BandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandId::Tensorial(j) => write!(f, "T({})", join(j)),
            BandId::Mra { j, eps } => write!(f, "M({};{})", j, join(eps)),
            BandId::Packet {
                parent,
                depth,
                path,
            } => write!(f, "{parent}/P{depth}({})", join(path)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyBand {
    pub(crate) id: BandId,
    pub(crate) lo: Vec<f64>,
    pub(crate) hi: Vec<f64>,
    /// Per-axis dyadic scale `2^{j_i}` of the underlying wavelet.
    pub(crate) scale: Vec<f64>,
    pub(crate) modes: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtremaMode {
    /// Over the band's discrete modes.
    Exact,
    /// Over the continuous box corners.
    Continuous,
}

/// Smallest and largest `|k|` over a band, overall and per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Extrema {
    pub a: f64,
    pub b: f64,
    pub per_axis: Vec<(f64, f64)>,
}

impl FrequencyBand {
    /// Builds a band without any mode; use [`Partition::from_parts`] to
    /// assemble hand-made partitions.
    pub fn new(id: BandId, lo: Vec<f64>, hi: Vec<f64>, modes: Vec<usize>) -> Self {
        let scale = lo.iter().zip(&hi).map(|(l, h)| if *l > 0.0 { *l } else { *h }).collect();
        Self {
            id,
            lo,
            hi,
            scale,
            modes,
        }
    }

    pub fn id(&self) -> &BandId {
        &self.id
    }

    /// Per-axis closed-open magnitude interval `[lo_i, hi_i)`.
    pub fn box_lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn box_hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    /// Flat indices of the band's grid modes, ascending.
    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn describe_box(&self) -> String {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| format!("[{l},{h})"))
            .collect::<Vec<_>>()
            .join("x")
    }

    pub fn extrema(&self, grid: &GridSpec, mode: ExtremaMode) -> Result<Extrema> {
        match mode {
            ExtremaMode::Continuous => {
                let a2: f64 = self.lo.iter().map(|l| l * l).sum();
                let b2: f64 = self.hi.iter().map(|h| h * h).sum();
                Ok(Extrema {
                    a: a2.sqrt(),
                    b: b2.sqrt(),
                    per_axis: self.lo.iter().cloned().zip(self.hi.iter().cloned()).collect(),
                })
            }
            ExtremaMode::Exact => {
                if self.modes.is_empty() {
                    return Err(Error::EmptyBand(self.id.to_string()));
                }
                let d = grid.dim();
                let mut a2 = f64::INFINITY;
                let mut b2 = 0.0f64;
                let mut per_axis = vec![(f64::INFINITY, 0.0f64); d];
                for &flat in &self.modes {
                    let k = grid.wavevector(flat);
                    let mut n2 = 0.0;
                    for axis in 0..d {
                        let m = k[axis].abs() as f64;
                        n2 += m * m;
                        per_axis[axis].0 = per_axis[axis].0.min(m);
                        per_axis[axis].1 = per_axis[axis].1.max(m);
                    }
                    a2 = a2.min(n2);
                    b2 = b2.max(n2);
                }
                Ok(Extrema {
                    a: a2.sqrt(),
                    b: b2.sqrt(),
                    per_axis,
                })
            }
        }
    }
}

/// A disjoint cover of all grid modes by frequency bands plus a DC band.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    grid: GridSpec,
    scheme: Scheme,
    bands: Vec<FrequencyBand>,
    dc: Vec<usize>,
    dropped_empty: usize,
}

impl Partition {
    /// Assembles a partition without checking it; see [`Partition::validate`].
    pub fn from_parts(
        grid: GridSpec,
        scheme: Scheme,
        bands: Vec<FrequencyBand>,
        dc: Vec<usize>,
    ) -> Self {
        Self {
            grid,
            scheme,
            bands,
            dc,
            dropped_empty: 0,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn bands(&self) -> &[FrequencyBand] {
        &self.bands
    }

    pub fn band(&self, id: &BandId) -> Option<&FrequencyBand> {
        self.bands
            .binary_search_by(|b| b.id.cmp(id))
            .ok()
            .map(|i| &self.bands[i])
    }

    /// Zero mode and every mode left outside the bands (Nyquist planes,
    /// and for tensorial partitions the coordinate planes).
    pub fn dc_modes(&self) -> &[usize] {
        &self.dc
    }

    /// Packet sub-bands dropped because they contained no grid mode.
    pub fn dropped_empty(&self) -> usize {
        self.dropped_empty
    }

    pub fn is_tensorial(&self) -> bool {
        self.scheme.base() == BaseScheme::Tensorial
    }

    /// Checks that bands and DC are pairwise disjoint and cover every mode.
    pub fn validate(&self) -> Result<()> {
        let mut owner = vec![false; self.grid.len()];
        let all = self
            .bands
            .iter()
            .flat_map(|b| b.modes.iter())
            .chain(self.dc.iter());
        for &flat in all {
            if flat >= owner.len() {
                return Err(Error::Consistency(format!("mode index {flat} out of range")));
            }
            if owner[flat] {
                return Err(Error::Consistency(format!(
                    "mode {:?} appears twice",
                    &self.grid.wavevector(flat)[..self.grid.dim()]
                )));
            }
            owner[flat] = true;
        }
        if let Some(missing) = owner.iter().position(|o| !o) {
            return Err(Error::Consistency(format!(
                "mode {:?} is not covered",
                &self.grid.wavevector(missing)[..self.grid.dim()]
            )));
        }
        Ok(())
    }

    /// One line per band, `band <id> box <lo,hi per axis> modes <count>`,
    /// followed by `dc modes <count>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for b in &self.bands {
            out.push_str(&format!(
                "band {} box {} modes {}\n",
                b.id,
                b.describe_box(),
                b.modes.len()
            ));
        }
        out.push_str(&format!("dc modes {}\n", self.dc.len()));
        out
    }
}

fn dyadic_level(m: i64) -> u32 {
    debug_assert!(m > 0);
    63 - (m as u64).leading_zeros()
}

/// Tensorial partition: band `j ∈ {0..L_i-2}^d` is the product of per-axis
/// magnitude intervals `[2^{j_i}, 2^{j_i+1})`.
pub fn build_tensorial_partition(grid: &GridSpec) -> Partition {
    let d = grid.dim();
    let levels = grid.levels();
    // Scales per axis: 0..=L-2.
    let counts: Vec<usize> = levels.iter().map(|&l| (l - 1) as usize).collect();
    let total_bands: usize = counts.iter().product();
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); total_bands];
    let mut dc = Vec::new();
    for flat in 0..grid.len() {
        let k = grid.wavevector(flat);
        let mut idx = 0usize;
        let mut inside = true;
        for axis in 0..d {
            let m = k[axis].abs();
            if m == 0 || m >= grid.sizes()[axis] as i64 / 2 {
                inside = false;
                break;
            }
            idx = idx * counts[axis] + dyadic_level(m) as usize;
        }
        if inside {
            buckets[idx].push(flat);
        } else {
            dc.push(flat);
        }
    }
    let mut bands = Vec::with_capacity(total_bands);
    for (idx, modes) in buckets.into_iter().enumerate() {
        let mut rem = idx;
        let mut j = vec![0u32; d];
        for axis in (0..d).rev() {
            j[axis] = (rem % counts[axis]) as u32;
            rem /= counts[axis];
        }
        let lo: Vec<f64> = j.iter().map(|&ji| (1u64 << ji) as f64).collect();
        let hi: Vec<f64> = lo.iter().map(|l| 2.0 * l).collect();
        bands.push(FrequencyBand {
            id: BandId::Tensorial(j),
            scale: lo.clone(),
            lo,
            hi,
            modes,
        });
    }
    Partition {
        grid: grid.clone(),
        scheme: Scheme::Tensorial,
        bands,
        dc,
        dropped_empty: 0,
    }
}

/// Isotropic MRA partition: band `(j, ε)` has per-axis box `[0, 2^j)` where
/// `ε_i = 0` and `[2^j, 2^{j+1})` where `ε_i = 1`.
pub fn build_mra_partition(grid: &GridSpec) -> Result<Partition> {
    if !grid.is_isotropic() {
        return Err(Error::UnsupportedScheme(format!(
            "MRA partition needs an isotropic grid, got {}",
            grid.describe()
        )));
    }
    let d = grid.dim();
    let levels = grid.levels()[0];
    let half = grid.sizes()[0] as i64 / 2;
    let types = (1usize << d) - 1;
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); (levels - 1) as usize * types];
    let mut dc = Vec::new();
    for flat in 0..grid.len() {
        let k = grid.wavevector(flat);
        let mags: Vec<i64> = k[..d].iter().map(|x| x.abs()).collect();
        let top = *mags.iter().max().unwrap();
        if top == 0 || top >= half {
            dc.push(flat);
            continue;
        }
        let j = dyadic_level(top);
        let mut eps = 0usize;
        for &m in &mags {
            eps = eps * 2 + usize::from(m >= 1 << j);
        }
        buckets[j as usize * types + (eps - 1)].push(flat);
    }
    let mut bands = Vec::with_capacity(buckets.len());
    for (idx, modes) in buckets.into_iter().enumerate() {
        let j = (idx / types) as u32;
        let code = idx % types + 1;
        let eps: Vec<u8> = (0..d).map(|axis| ((code >> (d - 1 - axis)) & 1) as u8).collect();
        let base = (1u64 << j) as f64;
        let lo: Vec<f64> = eps.iter().map(|&e| if e == 1 { base } else { 0.0 }).collect();
        let hi: Vec<f64> = eps.iter().map(|&e| if e == 1 { 2.0 * base } else { base }).collect();
        bands.push(FrequencyBand {
            id: BandId::Mra { j, eps },
            lo,
            hi,
            scale: vec![base; d],
            modes,
        });
    }
    Ok(Partition {
        grid: grid.clone(),
        scheme: Scheme::Mra,
        bands,
        dc,
        dropped_empty: 0,
    })
}

/// Splits every band's per-axis interval into `2^depth` equal sub-intervals.
/// Sub-bands holding no grid mode are dropped and counted.
pub fn refine_packet(p: &Partition, depth: u32) -> Result<Partition> {
    if depth == 0 {
        return Ok(p.clone());
    }
    if depth > 16 {
        return Err(Error::InvalidArgument(format!("packet depth {depth} is too large")));
    }
    let grid = &p.grid;
    let d = grid.dim();
    let parts = 1usize << depth;
    let mut bands = Vec::new();
    let mut dropped = p.dropped_empty;
    for band in &p.bands {
        let width: Vec<f64> = (0..d).map(|a| (band.hi[a] - band.lo[a]) / parts as f64).collect();
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); parts.pow(d as u32)];
        for &flat in &band.modes {
            let k = grid.wavevector(flat);
            let mut idx = 0usize;
            for axis in 0..d {
                let m = k[axis].abs() as f64;
                let s = (((m - band.lo[axis]) / width[axis]).floor() as usize).min(parts - 1);
                idx = idx * parts + s;
            }
            buckets[idx].push(flat);
        }
        for (idx, modes) in buckets.into_iter().enumerate() {
            if modes.is_empty() {
                dropped += 1;
                continue;
            }
            let mut sub = [0usize; MAX_DIM];
            let mut rem = idx;
            for axis in (0..d).rev() {
                sub[axis] = rem % parts;
                rem /= parts;
            }
            let lo: Vec<f64> = (0..d).map(|a| band.lo[a] + sub[a] as f64 * width[a]).collect();
            let hi: Vec<f64> = (0..d).map(|a| lo[a] + width[a]).collect();
            let id = match &band.id {
                BandId::Packet {
                    parent,
                    depth: old,
                    path,
                } => BandId::Packet {
                    parent: parent.clone(),
                    depth: old + depth,
                    path: (0..d).map(|a| (path[a] << depth) + sub[a] as u32).collect(),
                },
                base => BandId::Packet {
                    parent: Box::new(base.clone()),
                    depth,
                    path: sub[..d].iter().map(|&s| s as u32).collect(),
                },
            };
            bands.push(FrequencyBand {
                id,
                lo,
                hi,
                scale: band.scale.clone(),
                modes,
            });
        }
    }
    bands.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(Partition {
        grid: grid.clone(),
        scheme: Scheme::Packet {
            base: p.scheme.base(),
            depth: p.scheme.depth() + depth,
        },
        bands,
        dc: p.dc.clone(),
        dropped_empty: dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn magnitudes(grid: &GridSpec, modes: &[usize]) -> Vec<Vec<i64>> {
        let mut v: Vec<Vec<i64>> = modes
            .iter()
            .map(|&f| grid.wavevector(f)[..grid.dim()].to_vec())
            .collect();
        v.sort();
        v
    }

    #[test]
    fn tensorial_1d_eight_points() {
        let g = GridSpec::new(&[8]).unwrap();
        let p = build_tensorial_partition(&g);
        assert_eq!(p.bands().len(), 2);
        assert_eq!(p.bands()[0].id, BandId::Tensorial(vec![0]));
        assert_eq!(magnitudes(&g, p.bands()[0].modes()), vec![vec![-1], vec![1]]);
        assert_eq!(
            magnitudes(&g, p.bands()[1].modes()),
            vec![vec![-3], vec![-2], vec![2], vec![3]]
        );
        assert_eq!(magnitudes(&g, p.dc_modes()), vec![vec![-4], vec![0]]);
        p.validate().unwrap();
    }

    #[test]
    fn tensorial_2d_four_by_four() {
        let g = GridSpec::new(&[4, 4]).unwrap();
        let p = build_tensorial_partition(&g);
        assert_eq!(p.bands().len(), 1);
        assert_eq!(p.bands()[0].len(), 4);
        for k in magnitudes(&g, p.bands()[0].modes()) {
            assert!(k.iter().all(|x| x.abs() == 1));
        }
        assert_eq!(p.dc_modes().len(), 12);
    }

    #[test]
    fn mra_2d_one_level() {
        let g = GridSpec::new(&[4, 4]).unwrap();
        let p = build_mra_partition(&g).unwrap();
        let ids: Vec<BandId> = p.bands().iter().map(|b| b.id.clone()).collect();
        assert_eq!(
            ids,
            vec![
                BandId::Mra { j: 0, eps: vec![0, 1] },
                BandId::Mra { j: 0, eps: vec![1, 0] },
                BandId::Mra { j: 0, eps: vec![1, 1] },
            ]
        );
        p.validate().unwrap();
    }

    #[test]
    fn mra_band_contents() {
        let g = GridSpec::new(&[8, 8]).unwrap();
        let p = build_mra_partition(&g).unwrap();
        let b = p.band(&BandId::Mra { j: 1, eps: vec![1, 1] }).unwrap();
        let ks = magnitudes(&g, b.modes());
        assert_eq!(ks.len(), 16);
        assert!(ks.iter().all(|k| k.iter().all(|x| (2..=3).contains(&x.abs()))));
        assert!(matches!(
            build_mra_partition(&GridSpec::new(&[8, 16]).unwrap()),
            Err(Error::UnsupportedScheme(_))
        ));
    }

    #[test]
    fn packet_intervals() {
        let g = GridSpec::new(&[32]).unwrap();
        let p = build_tensorial_partition(&g);
        let p1 = refine_packet(&p, 1).unwrap();
        let boxes: Vec<(f64, f64)> = p1
            .bands()
            .iter()
            .filter(|b| b.scale[0] == 4.0)
            .map(|b| (b.lo[0], b.hi[0]))
            .collect();
        assert_eq!(boxes, vec![(4.0, 6.0), (6.0, 8.0)]);
        let p2 = refine_packet(&p, 2).unwrap();
        let boxes: Vec<(f64, f64)> = p2
            .bands()
            .iter()
            .filter(|b| b.scale[0] == 4.0)
            .map(|b| (b.lo[0], b.hi[0]))
            .collect();
        assert_eq!(boxes, vec![(4.0, 5.0), (5.0, 6.0), (6.0, 7.0), (7.0, 8.0)]);
        // [1,2) splits into [1,1.5) and an empty [1.5,2).
        assert_eq!(p1.dropped_empty(), 1);
        assert_eq!(refine_packet(&p, 0).unwrap(), p);
        p1.validate().unwrap();
        p2.validate().unwrap();
    }

    #[test]
    fn packet_nesting() {
        let g = GridSpec::new(&[64, 32]).unwrap();
        let p = build_tensorial_partition(&g);
        let twice = refine_packet(&refine_packet(&p, 1).unwrap(), 1).unwrap();
        let once = refine_packet(&p, 2).unwrap();
        assert_eq!(twice.bands(), once.bands());
        assert_eq!(twice.scheme(), once.scheme());
    }

    #[test]
    fn extrema() {
        let g = GridSpec::new(&[32]).unwrap();
        let p = build_tensorial_partition(&g);
        let b = p.band(&BandId::Tensorial(vec![2])).unwrap();
        let e = b.extrema(&g, ExtremaMode::Exact).unwrap();
        assert_eq!((e.a, e.b), (4.0, 7.0));
        let c = b.extrema(&g, ExtremaMode::Continuous).unwrap();
        assert_eq!((c.a, c.b), (4.0, 8.0));

        let g2 = GridSpec::new(&[16, 16]).unwrap();
        let p2 = build_tensorial_partition(&g2);
        let b = p2.band(&BandId::Tensorial(vec![0, 0])).unwrap();
        let c = b.extrema(&g2, ExtremaMode::Continuous).unwrap();
        assert!((c.a * c.a - 2.0).abs() < 1e-14 && (c.b * c.b - 8.0).abs() < 1e-14);
        for band in p2.bands() {
            let c = band.extrema(&g2, ExtremaMode::Continuous).unwrap();
            assert!((c.b - 2.0 * c.a).abs() < 1e-12);
        }
        let empty = FrequencyBand::new(BandId::Tensorial(vec![9]), vec![1.0], vec![2.0], vec![]);
        assert!(matches!(empty.extrema(&g, ExtremaMode::Exact), Err(Error::EmptyBand(_))));
    }

    #[test]
    fn dump_format() {
        let g = GridSpec::new(&[8]).unwrap();
        let dump = build_tensorial_partition(&g).dump();
        assert_eq!(
            dump,
            "band T(0) box [1,2) modes 2\nband T(1) box [2,4) modes 4\ndc modes 2\n"
        );
    }

    #[test]
    fn validate_detects_overlap() {
        let g = GridSpec::new(&[8]).unwrap();
        let p = build_tensorial_partition(&g);
        let mut bands = p.bands().to_vec();
        bands[0].modes.push(p.bands()[1].modes[0]);
        let bad = Partition::from_parts(g, Scheme::Tensorial, bands, p.dc_modes().to_vec());
        assert!(matches!(bad.validate(), Err(Error::Consistency(_))));
    }
}
