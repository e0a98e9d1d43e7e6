//! Matrix exponential by scaling and squaring with a degree-13 diagonal
//! Padé approximant (Higham 2005, Algorithm 2.3 without the lower-degree
//! shortcuts).

use super::{Lu, Matrix, Scalar};
use crate::error::{Error, Result};

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the unscaled [13/13] approximant is accurate
/// to unit roundoff.
const THETA13: f64 = 5.371_920_351_148_152;

/// `e^X` for a finite square matrix.
pub fn expm(x: &Matrix) -> Result<Matrix> {
    x.check_finite()?;
    let n = x.dim();
    if n == 1 {
        return Ok(Matrix::from_fn(1, |_, _| x[(0, 0)].exp()));
    }
    let norm = x.norm_one();
    if norm == 0.0 {
        return Ok(Matrix::identity(n));
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = x.scale(2f64.powi(-squarings));
    let mut r = pade13(&a)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(Error::Overflow);
    }
    Ok(r)
}

fn pade13(a: &Matrix) -> Result<Matrix> {
    let b = &PADE13;
    let n = a.dim();
    let ident = Matrix::identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let lincomb = |c6: f64, c4: f64, c2: f64, c0: f64| -> Matrix {
        let mut m = a6.scale(c6);
        m += &a4.scale(c4);
        m += &a2.scale(c2);
        m += &ident.scale(c0);
        m
    };

    let inner_u = &a6 * &lincomb(b[13], b[11], b[9], 0.0);
    let u = a * &(&inner_u + &lincomb(b[7], b[5], b[3], b[1]));
    let inner_v = &a6 * &lincomb(b[12], b[10], b[8], 0.0);
    let v = &inner_v + &lincomb(b[6], b[4], b[2], b[0]);

    let denom = &v - &u;
    let numer = &v + &u;
    Lu::new(&denom).solve(&numer)
}

/// `(e^A, L(A, E))` where `L` is the Fréchet derivative of the exponential
/// at `A` in direction `E`, read off the block exponential
/// `exp([[A, E], [0, A]]) = [[e^A, L], [0, e^A]]`.
pub fn expm_frechet(a: &Matrix, e: &Matrix) -> Result<(Matrix, Matrix)> {
    let n = a.dim();
    e.check_dim(n)?;
    let zero = Scalar::new(0.0, 0.0);
    let big = Matrix::from_fn(2 * n, |i, j| match (i < n, j < n) {
        (true, true) => a[(i, j)],
        (true, false) => e[(i, j - n)],
        (false, true) => zero,
        (false, false) => a[(i - n, j - n)],
    });
    let ex = expm(&big)?;
    Ok((ex.block(0, 0, n), ex.block(0, n, n)))
}
