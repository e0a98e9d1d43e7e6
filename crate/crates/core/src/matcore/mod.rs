//! Dense square matrices over the reals or complexes.
//!
//! Every structure matrix, generator and group element in the crate is a
//! [`Matrix`]. Entries are stored as `Complex64`; a real matrix simply has
//! all imaginary parts equal to zero. Dimensions are desk scale, so all
//! kernels are straightforward O(n³) loops.

mod expm;
mod json;
mod linalg;

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use expm::{expm, expm_frechet};
pub use json::MatrixJson;
pub use linalg::Lu;

/// Field element. Real scalars carry `im == 0`.
pub type Scalar = Complex64;

/// Relative threshold below which a determinant counts as zero.
///
/// A matrix is singular when `|det M| <= SINGULAR_TOL * max|m_ij|^n`.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        Self {
            n,
            data: vec![Scalar::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Scalar::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_real_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Self::from_fn(n, |i, j| Scalar::new(f(i, j), 0.0))
    }

    /// Builds a real matrix from rows, rejecting ragged or non-finite input.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    row: i,
                    cols: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteInput);
                }
                m.data[i * n + j] = Scalar::new(v, 0.0);
            }
        }
        Ok(m)
    }

    /// Builds a complex matrix from separate real and imaginary row blocks.
    pub fn from_parts<R: AsRef<[f64]>>(real: &[R], imag: &[R]) -> Result<Self> {
        let mut m = Self::from_real_rows(real)?;
        let im = Self::from_real_rows(imag)?;
        if im.n != m.n {
            return Err(Error::DimensionMismatch {
                expected: m.n,
                found: im.n,
            });
        }
        for (z, w) in m.data.iter_mut().zip(&im.data) {
            z.im = w.re;
        }
        Ok(m)
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_real_fn(n, |i, j| if i == j { values[i] } else { 0.0 })
    }

    /// Square `n x n` sub-block starting at `(row0, col0)`.
    pub(crate) fn block(&self, row0: usize, col0: usize, n: usize) -> Self {
        Self::from_fn(n, |i, j| self[(row0 + i, col0 + j)])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn re(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j].re
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Row sums as complex scalars.
    pub fn row_sums(&self) -> Vec<Scalar> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<Scalar> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)]).sum())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, z| acc.max(z.im.abs()))
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.max_imag() <= tol
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Real parts, row by row.
    pub fn real_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|z| z.re).collect())
            .collect()
    }

    pub fn imag_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|z| z.im).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Scalar {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_complex(&self, s: Scalar) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self * other - other * self`
    pub fn commutator(&self, other: &Matrix) -> Self {
        &(self * other) - &(other * self)
    }

    /// Frobenius distance to another matrix of the same size.
    pub fn distance(&self, other: &Matrix) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.n == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                found: self.n,
            })
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFiniteInput)
        }
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.n);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    pub fn det(&self) -> Scalar {
        Lu::new(self).det()
    }

    /// Whether `|det|` falls below [`SINGULAR_TOL`] relative to the entry scale.
    pub fn is_singular(&self) -> bool {
        let scale = self.max_abs().powi(self.n as i32);
        self.det().norm() <= SINGULAR_TOL * scale
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_singular() {
            return Err(Error::SingularMatrix);
        }
        Lu::new(self).solve(&Self::identity(self.n))
    }

    /// Upper estimate of the spectral radius from `||M^(2^k)||_1^(1/2^k)`.
    ///
    /// The estimate never falls below the true spectral radius and never
    /// exceeds `||M||_1`. Iterates are renormalised after each squaring so
    /// small radii do not underflow.
    pub fn spectral_radius_estimate(&self) -> f64 {
        const SQUARINGS: u32 = 8;
        let norm = self.norm_one();
        if norm == 0.0 {
            return 0.0;
        }
        let mut p = self.scale(1.0 / norm);
        // log ||M^(2^k)|| kept separately from the unit-norm iterate
        let mut log_norm = norm.ln();
        let mut best = norm;
        for k in 1..=SQUARINGS {
            let sq = &p * &p;
            let c = sq.norm_one();
            if c == 0.0 {
                return 0.0;
            }
            log_norm = 2.0 * log_norm + c.ln();
            p = sq.scale(1.0 / c);
            best = best.min((log_norm / f64::from(1u32 << k)).exp());
        }
        best
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Scalar;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix product");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Mul for Matrix {
    type Output = Matrix;

    fn mul(self, rhs: Matrix) -> Matrix {
        &self * &rhs
    }
}

impl Mul<f64> for &Matrix {
    type Output = Matrix;

    fn mul(self, s: f64) -> Matrix {
        self.scale(s)
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix sum");
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl AddAssign<&Matrix> for Matrix {
    fn add_assign(&mut self, rhs: &Matrix) {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix sum");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix difference");
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}
