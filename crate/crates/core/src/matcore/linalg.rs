use num_complex::Complex64;

use super::{Matrix, Scalar};
use crate::error::{Error, Result};

/// LU factorisation with partial pivoting, `P M = L U`.
///
/// `L` (unit lower) and `U` share one packed matrix. Zero pivots are kept
/// rather than rejected so that `det` stays defined for singular input.
#[derive(Clone, Debug)]
pub struct Lu {
    packed: Matrix,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    pub fn new(m: &Matrix) -> Self {
        let n = m.dim();
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| a[(x, k)].norm().total_cmp(&a[(y, k)].norm()))
                .unwrap_or(k);
            if p != k {
                for j in 0..n {
                    let tmp = a[(k, j)];
                    a[(k, j)] = a[(p, j)];
                    a[(p, j)] = tmp;
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = a[(k, k)];
            if pivot.norm() == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let u = a[(k, j)];
                    a[(i, j)] -= f * u;
                }
            }
        }
        Self {
            packed: a,
            perm,
            swaps,
        }
    }

    pub fn det(&self) -> Scalar {
        let n = self.packed.dim();
        let mut d: Scalar = (0..n).map(|i| self.packed[(i, i)]).product();
        if self.swaps % 2 == 1 {
            d = -d;
        }
        d
    }

    /// Solves `M X = B` column by column.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        let n = self.packed.dim();
        b.check_dim(n)?;
        if (0..n).any(|i| self.packed[(i, i)].norm() == 0.0) {
            return Err(Error::SingularMatrix);
        }
        let mut x = Matrix::zeros(n);
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for col in 0..n {
            for i in 0..n {
                let mut s = b[(self.perm[i], col)];
                for (k, yk) in y.iter().enumerate().take(i) {
                    s -= self.packed[(i, k)] * yk;
                }
                y[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = y[i];
                for k in i + 1..n {
                    s -= self.packed[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = s / self.packed[(i, i)];
            }
        }
        Ok(x)
    }
}
