//! First Magnus term, exact when the generator commutes with its integral.

use super::Generator;
use crate::error::{Error, Result};
use crate::matcore::{expm, Matrix};

pub const DEFAULT_COMMUTATOR_TOL: f64 = 1e-8;

const MIN_INTERVALS: usize = 128;
const MAX_INTERVALS: usize = 1 << 20;
const QUADRATURE_TOL: f64 = 1e-11;

fn simpson(gen: &Generator, t: f64, intervals: usize) -> Result<Matrix> {
    let h = t / intervals as f64;
    let mut acc = gen.at(0.0)?;
    acc += &gen.at(t)?;
    for k in 1..intervals {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += &gen.at(k as f64 * h)?.scale(w);
    }
    Ok(acc.scale(h / 3.0))
}

/// `Omega(t) = int_0^t X(tau) dtau` by composite Simpson, starting at 129
/// nodes and doubling until successive estimates differ by at most 1e-11.
pub fn magnus_omega(gen: &Generator, t: f64) -> Result<Matrix> {
    let n = gen.dim()?;
    if !t.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    if t == 0.0 {
        return Ok(Matrix::zeros(n));
    }
    if let Some(x) = gen.as_constant() {
        return Ok(x.scale(t));
    }
    let mut intervals = MIN_INTERVALS;
    let mut prev = simpson(gen, t, intervals)?;
    loop {
        intervals *= 2;
        let next = simpson(gen, t, intervals)?;
        let change = next.distance(&prev);
        if change <= QUADRATURE_TOL {
            return Ok(next);
        }
        if intervals >= MAX_INTERVALS {
            return Err(Error::QuadratureNotConverged { change });
        }
        prev = next;
    }
}

/// `A0 exp(Omega(t))`, valid when `X(t)` commutes with `Omega(t)`.
///
/// Fails with `CommutatorTooLarge` when
/// `||X(t) Omega(t) - Omega(t) X(t)|| > tol ||X(t)|| ||Omega(t)||`.
pub fn commuting_magnus(gen: &Generator, a0: &Matrix, t: f64, tol: f64) -> Result<Matrix> {
    a0.check_finite()?;
    a0.check_dim(gen.dim()?)?;
    let omega = magnus_omega(gen, t)?;
    let x = gen.at(t)?;
    let defect = x.commutator(&omega).frob_norm();
    let bound = tol * x.frob_norm() * omega.frob_norm();
    if defect > bound {
        return Err(Error::CommutatorTooLarge { defect, bound });
    }
    Ok(a0 * &expm(&omega)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{ScalarFn, Wave};
    use crate::flows::GeneratorTerm;

    fn q() -> Matrix {
        Matrix::from_real_rows(&[[-1.0, 1.0], [1.0, -1.0]]).unwrap()
    }

    #[test]
    fn constant_generator_reduces_to_exp_line() {
        let a0 = Matrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let got = commuting_magnus(&Generator::constant(q()), &a0, 0.8, DEFAULT_COMMUTATOR_TOL).unwrap();
        let expected = &a0 * &expm(&q().scale(0.8)).unwrap();
        assert!(got.distance(&expected) < 1e-14);
    }

    #[test]
    fn cosine_family_uses_sine_antiderivative() {
        let gen = Generator::scaled(ScalarFn::Cos(Wave::default()), q());
        for t in [0.3, std::f64::consts::FRAC_PI_2, 2.0, -1.0] {
            let got = commuting_magnus(&gen, &Matrix::identity(2), t, DEFAULT_COMMUTATOR_TOL).unwrap();
            let expected = expm(&q().scale(t.sin())).unwrap();
            assert!(got.distance(&expected) < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn non_commuting_linear_family_rejected() {
        let x1 = Matrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let x2 = Matrix::from_real_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let gen = Generator::Combination {
            terms: vec![
                GeneratorTerm { coef: ScalarFn::constant(1.0), matrix: x1 },
                GeneratorTerm { coef: ScalarFn::identity(), matrix: x2 },
            ],
        };
        let r = commuting_magnus(&gen, &Matrix::identity(2), 1.0, DEFAULT_COMMUTATOR_TOL);
        assert!(matches!(r, Err(Error::CommutatorTooLarge { .. })), "{r:?}");
    }

    #[test]
    fn zero_time_is_base() {
        let gen = Generator::scaled(ScalarFn::Cos(Wave::default()), q());
        let a0 = Matrix::diag(&[2.0, 3.0]);
        assert_eq!(commuting_magnus(&gen, &a0, 0.0, 1e-8).unwrap(), a0);
    }
}
