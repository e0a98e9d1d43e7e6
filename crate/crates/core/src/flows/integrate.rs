use serde::{Deserialize, Serialize};

use super::{FlowLine, Generator, Side};
use crate::error::{Error, Result};
use crate::matcore::Matrix;

/// Fixed-step classical fourth-order Runge–Kutta settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub step: f64,
    pub horizon: f64,
}

impl IntegratorConfig {
    pub fn new(step: f64, horizon: f64) -> Result<Self> {
        let cfg = Self { step, horizon };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidParameter(format!("step must be positive, got {}", self.step)));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.step > self.horizon {
            return Err(Error::InvalidParameter("step exceeds horizon".into()));
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened to land on the horizon.
    pub fn steps(&self) -> usize {
        ((self.horizon / self.step) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn time(&self, k: usize) -> f64 {
        (k as f64 * self.step).min(self.horizon)
    }
}

fn field(a: &Matrix, x: &Matrix, side: Side) -> Matrix {
    match side {
        Side::Right => a * x,
        Side::Left => x * a,
    }
}

/// One RK4 step of `A' = A X(t)` (or `X(t) A`) from `(t, a)` with step `h`.
pub(crate) fn rk4_step(gen: &Generator, a: &Matrix, t: f64, h: f64, side: Side) -> Result<Matrix> {
    let x0 = gen.at(t)?;
    let xm = gen.at(t + 0.5 * h)?;
    let x1 = gen.at(t + h)?;
    let k1 = field(a, &x0, side);
    let k2 = field(&(a + &k1.scale(0.5 * h)), &xm, side);
    let k3 = field(&(a + &k2.scale(0.5 * h)), &xm, side);
    let k4 = field(&(a + &k3.scale(h)), &x1, side);
    let mut incr = k1;
    incr += &k2.scale(2.0);
    incr += &k3.scale(2.0);
    incr += &k4;
    Ok(a + &incr.scale(h / 6.0))
}

pub(crate) fn integrate(gen: &Generator, a0: &Matrix, cfg: &IntegratorConfig, side: Side) -> Result<FlowLine> {
    cfg.validate()?;
    a0.check_finite()?;
    a0.check_dim(gen.dim()?)?;
    let steps = cfg.steps();
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((0.0, a0.clone()));
    let mut a = a0.clone();
    for k in 0..steps {
        let t0 = cfg.time(k);
        let t1 = cfg.time(k + 1);
        a = rk4_step(gen, &a, t0, t1 - t0, side)?;
        if !a.is_finite() {
            return Err(Error::Overflow);
        }
        samples.push((t1, a.clone()));
    }
    Ok(FlowLine {
        base: a0.clone(),
        samples,
    })
}

/// Solves `A'(t) = A(t) X(t)`, `A(0) = A0`, sampling every step up to the horizon.
pub fn integrate_right(gen: &Generator, a0: &Matrix, cfg: &IntegratorConfig) -> Result<FlowLine> {
    integrate(gen, a0, cfg, Side::Right)
}

/// Solves `A'(t) = X(t) A(t)`, `A(0) = A0`.
pub fn integrate_left(gen: &Generator, a0: &Matrix, cfg: &IntegratorConfig) -> Result<FlowLine> {
    integrate(gen, a0, cfg, Side::Left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::expm;

    fn flip_flop_q(lambda: f64) -> Matrix {
        Matrix::from_real_rows(&[[-lambda, lambda], [lambda, -lambda]]).unwrap()
    }

    #[test]
    fn zero_generator_keeps_base() {
        let a0 = Matrix::from_real_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let line = integrate_right(&Generator::constant(Matrix::zeros(2)), &a0, &IntegratorConfig::new(0.1, 1.0).unwrap()).unwrap();
        assert_eq!(line.samples.len(), 11);
        assert!(line.samples.iter().all(|(_, a)| *a == a0));
    }

    #[test]
    fn flip_flop_matches_exponential() {
        let q = flip_flop_q(1.0);
        let line = integrate_right(&Generator::constant(q.clone()), &Matrix::identity(2), &IntegratorConfig::new(1e-3, 1.0).unwrap()).unwrap();
        let (t, last) = line.samples.last().unwrap();
        assert_eq!(*t, 1.0);
        assert!(last.distance(&expm(&q).unwrap()) < 1e-10);
    }

    #[test]
    fn short_last_step_lands_on_horizon() {
        let cfg = IntegratorConfig::new(0.3, 1.0).unwrap();
        assert_eq!(cfg.steps(), 4);
        assert_eq!(cfg.time(4), 1.0);
        let q = flip_flop_q(0.5);
        let line = integrate_left(&Generator::constant(q.clone()), &Matrix::identity(2), &cfg).unwrap();
        assert_eq!(line.samples.last().unwrap().0, 1.0);
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::new(0.0, 1.0).is_err());
        assert!(IntegratorConfig::new(2.0, 1.0).is_err());
        assert!(IntegratorConfig::new(0.1, f64::NAN).is_err());
    }

    #[test]
    fn non_finite_generator_errors() {
        let gen = Generator::from_fn(2, |t| if t > 0.5 { Matrix::identity(2).scale(f64::NAN) } else { Matrix::zeros(2) });
        let r = integrate_right(&gen, &Matrix::identity(2), &IntegratorConfig::new(0.1, 1.0).unwrap());
        assert!(matches!(r, Err(Error::NonFiniteGenerator { .. })));
    }
}
