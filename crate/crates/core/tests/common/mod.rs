//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use evolflow::Matrix;
use rand::Rng;

/// Scaled Taylor series: shrink to norm <= 1/2, sum 60 terms, square back.
pub fn expm_series(x: &Matrix) -> Matrix {
    let n = x.dim();
    let norm = x.frob_norm();
    let mut s = 0;
    while norm / f64::powi(2.0, s) > 0.5 {
        s += 1;
    }
    let y = x.scale(f64::powi(2.0, -s));
    let mut term = Matrix::identity(n);
    let mut sum = Matrix::identity(n);
    for k in 1..=60 {
        term = (&term * &y).scale(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Laplace expansion along the first row of the real part.
pub fn det_cofactor(m: &Matrix) -> f64 {
    fn rec(rows: &[Vec<f64>]) -> f64 {
        let n = rows.len();
        if n == 1 {
            return rows[0][0];
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<f64>> = rows[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * rows[0][j] * rec(&minor)
            })
            .sum()
    }
    rec(&m.real_rows())
}

pub fn real(rows: &[&[f64]]) -> Matrix {
    Matrix::from_real_rows(rows).unwrap()
}

/// Entries i.i.d. uniform on `[-r, r)`.
pub fn random_matrix<R: Rng>(rng: &mut R, n: usize, r: f64) -> Matrix {
    Matrix::from_real_fn(n, |_, _| rng.random_range(-r..r))
}

pub fn random_skew<R: Rng>(rng: &mut R, n: usize, r: f64) -> Matrix {
    let a = random_matrix(rng, n, r);
    &a - &a.transpose()
}

/// Row-normalized positive matrix.
pub fn random_stochastic<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    let m = Matrix::from_real_fn(n, |_, _| rng.random_range(0.05..1.0));
    let sums = m.row_sums();
    Matrix::from_real_fn(n, |i, j| m.re(i, j) / sums[i].re)
}

/// Two-state flip-flop transition matrix written out by hand.
pub fn flip_flop_closed(lambda: f64, t: f64) -> Matrix {
    let e = (-2.0 * lambda * t).exp();
    let (p, q) = (0.5 * (1.0 + e), 0.5 * (1.0 - e));
    real(&[&[p, q], &[q, p]])
}

/// `[[1,a,b],[0,1,c],[0,0,1]]`
pub fn unitriangular(a: f64, b: f64, c: f64) -> Matrix {
    real(&[&[1.0, a, b], &[0.0, 1.0, c], &[0.0, 0.0, 1.0]])
}
