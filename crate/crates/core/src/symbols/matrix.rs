use nalgebra::DMatrix;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Small dense complex matrix, row-major. A 1×1 matrix acts as a scalar
/// multiple of the identity when combined with larger square matrices or
/// applied to vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn scalar(z: Complex64) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![z],
        }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols, "matrix data length mismatch");
        Self {
            rows,
            cols,
            data: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.cols + j] = z;
    }

    /// Expands a scalar to `z·Id_n`; other matrices are returned unchanged.
    pub fn expand(&self, n: usize) -> CMat {
        if self.is_scalar() && n != 1 {
            let mut m = CMat::identity(n);
            m.data.iter_mut().for_each(|v| *v *= self.data[0]);
            m
        } else {
            self.clone()
        }
    }

    pub fn scale(&self, z: Complex64) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * z).collect(),
        }
    }

    pub fn add(&self, other: &CMat) -> CMat {
        let (a, b) = broadcast_pair(self, other);
        assert!(
            a.rows == b.rows && a.cols == b.cols,
            "cannot add {}x{} and {}x{}",
            a.rows,
            a.cols,
            b.rows,
            b.cols
        );
        CMat {
            rows: a.rows,
            cols: a.cols,
            data: a.data.iter().zip(&b.data).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        self.add(&other.scale(-ONE))
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        if self.is_scalar() {
            return other.scale(self.data[0]);
        }
        if other.is_scalar() {
            return self.scale(other.data[0]);
        }
        assert_eq!(
            self.cols, other.rows,
            "cannot multiply {}x{} by {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    /// Matrix-vector product; a scalar multiplies every entry.
    pub fn apply_broadcast(&self, x: &[Complex64]) -> Vec<Complex64> {
        if self.is_scalar() {
            return x.iter().map(|v| v * self.data[0]).collect();
        }
        assert_eq!(self.cols, x.len(), "vector length mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn conj(&self) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        let (a, b) = broadcast_pair(self, other);
        assert!(a.rows == b.rows && a.cols == b.cols, "shape mismatch");
        a.data
            .iter()
            .zip(&b.data)
            .fold(0.0, |m, (x, y)| m.max((x - y).norm()))
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.data.iter().all(|z| z.im.abs() <= tol)
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<Complex64>) -> CMat {
        CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Moore–Penrose pseudo-inverse.
    pub fn pseudo_inverse(&self) -> CMat {
        if self.is_scalar() {
            let z = self.data[0];
            return CMat::scalar(if z == ZERO { ZERO } else { ONE / z });
        }
        let svd = self.to_nalgebra().svd(true, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        if smax == 0.0 {
            return CMat::zeros(self.cols, self.rows);
        }
        let cutoff = smax * self.rows.max(self.cols) as f64 * f64::EPSILON;
        let pinv = svd
            .pseudo_inverse(cutoff)
            .expect("SVD was computed with both singular vector sets");
        CMat::from_nalgebra(&pinv)
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        if self.is_scalar() {
            return self.data[0].norm();
        }
        self.to_nalgebra()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of a square matrix whose entries are all real.
    pub fn real_eigenvalues(&self) -> Vec<Complex64> {
        assert!(self.is_square(), "eigenvalues need a square matrix");
        let m = DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).re);
        m.complex_eigenvalues().iter().cloned().collect()
    }
}

fn broadcast_pair(a: &CMat, b: &CMat) -> (CMat, CMat) {
    match (a.is_scalar(), b.is_scalar()) {
        (true, false) if b.is_square() => (a.expand(b.rows), b.clone()),
        (false, true) if a.is_square() => (a.clone(), b.expand(a.rows)),
        _ => (a.clone(), b.clone()),
    }
}
