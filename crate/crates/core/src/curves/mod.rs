//! Continuous evolution algebras: differentiable curves `t -> A(t)` of
//! structure matrices, with exact derivatives wherever the curve is given
//! in closed form.

mod scalar_fn;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::{integrate, rk4_step, FlowLine, Generator, IntegratorConfig, Side};
use crate::lie;
use crate::matcore::{expm, Matrix};

pub use scalar_fn::{ScalarFn, Wave};

/// Central-difference step for curves without a symbolic derivative.
pub const NUMERIC_DIFF_STEP: f64 = 1e-5;

/// Curves given by explicit formulas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ClosedForm {
    /// `[[cos t, sin t], [-sin t, cos t]]`
    So2,
    /// `A_i exp(t [[0,1],[1,0]])`, one curve per component of O(1,1).
    Lorentz11 { index: u8 },
    /// `[[1, alpha(t), beta(t)], [0, 1, delta(t)], [0, 0, 1]]`
    Heisenberg {
        alpha: ScalarFn,
        beta: ScalarFn,
        delta: ScalarFn,
    },
    /// `exp(X(a(t), b(t), c(t)))` in H(3).
    HeisenbergExp { a: ScalarFn, b: ScalarFn, c: ScalarFn },
    /// `exp(alpha(t) E1) exp(beta(t) E2) exp(delta(t) E3)` in SL(2, R).
    Sl2Iwasawa {
        alpha: ScalarFn,
        beta: ScalarFn,
        delta: ScalarFn,
    },
    /// Transition semigroup of the two-state flip-flop chain with rate `lambda`.
    FlipFlop { lambda: f64 },
}

/// Solution table of `A' = A X(t)` built once at construction.
#[derive(Clone, Debug)]
pub struct NumericCurve {
    generator: Generator,
    cfg: IntegratorConfig,
    side: Side,
    line: FlowLine,
}

#[derive(Clone, Debug)]
pub enum CurveSpec {
    Constant(Matrix),
    /// `I + tA`
    AffineLine(Matrix),
    /// `A0 exp(tX)`
    ExpLine { a0: Matrix, x: Matrix },
    /// `B exp(t B^{-1} V)`: the curve through `B` with velocity `V`.
    TangentInduced { b: Matrix, v: Matrix },
    ClosedForm(ClosedForm),
    Numeric(Arc<NumericCurve>),
}

/// Derivative of a curve at `t = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VelocityVector(pub Matrix);

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SubgroupReport {
    /// `||gamma(0) - I||`
    pub identity_residual: f64,
    /// `max ||gamma(s+t) - gamma(s) gamma(t)||` over grid pairs.
    pub homomorphism_residual: f64,
    pub max_residual: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OdeReport {
    /// `max ||A'(t) - A(t) X||` over the grid.
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetSample {
    pub t: f64,
    pub abs_det: f64,
    /// Sign of a real determinant, 0 when singular, absent for complex curves.
    pub sign: Option<i8>,
    pub perfect: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerfectnessProfile {
    pub samples: Vec<DetSample>,
    pub perfect_everywhere: bool,
    pub never_perfect: bool,
    /// For real curves: every sample is perfect with the same determinant sign.
    pub sign_constant: Option<bool>,
    /// For real `ExpLine` curves: the sign forced by `det A0`.
    pub expected_sign: Option<i8>,
}

fn so2(t: f64) -> Matrix {
    lie::rotation2(-t)
}

fn flip_flop(lambda: f64, t: f64) -> Matrix {
    let e = (-2.0 * lambda * t).exp();
    let (d, o) = (0.5 * (1.0 + e), 0.5 * (1.0 - e));
    Matrix::from_real_fn(2, |i, j| if i == j { d } else { o })
}

impl ClosedForm {
    pub fn dim(&self) -> usize {
        match self {
            ClosedForm::So2 | ClosedForm::Lorentz11 { .. } | ClosedForm::Sl2Iwasawa { .. } | ClosedForm::FlipFlop { .. } => 2,
            ClosedForm::Heisenberg { .. } | ClosedForm::HeisenbergExp { .. } => 3,
        }
    }

    pub fn eval(&self, t: f64) -> Result<Matrix> {
        Ok(match self {
            ClosedForm::So2 => so2(t),
            ClosedForm::Lorentz11 { index } => lie::o11_element(*index, t)?,
            ClosedForm::Heisenberg { alpha, beta, delta } => {
                lie::heisenberg_element(alpha.eval(t), beta.eval(t), delta.eval(t))
            }
            ClosedForm::HeisenbergExp { a, b, c } => lie::heisenberg_exp(a.eval(t), b.eval(t), c.eval(t)),
            ClosedForm::Sl2Iwasawa { alpha, beta, delta } => {
                lie::sl2_iwasawa(alpha.eval(t), beta.eval(t), delta.eval(t))
            }
            ClosedForm::FlipFlop { lambda } => flip_flop(*lambda, t),
        })
    }

    pub fn derivative(&self, t: f64) -> Result<Matrix> {
        Ok(match self {
            ClosedForm::So2 => {
                let (s, c) = t.sin_cos();
                Matrix::from_real_rows(&[[-s, c], [-c, -s]])?
            }
            ClosedForm::Lorentz11 { index } => {
                let (c, s) = (t.cosh(), t.sinh());
                let boost_dot = Matrix::from_real_rows(&[[s, c], [c, s]])?;
                &lie::o11_representative(*index)? * &boost_dot
            }
            ClosedForm::Heisenberg { alpha, beta, delta } => Matrix::from_real_rows(&[
                [0.0, alpha.derivative(t), beta.derivative(t)],
                [0.0, 0.0, delta.derivative(t)],
                [0.0, 0.0, 0.0],
            ])?,
            ClosedForm::HeisenbergExp { a, b, c } => {
                let (av, cv) = (a.eval(t), c.eval(t));
                let (ad, bd, cd) = (a.derivative(t), b.derivative(t), c.derivative(t));
                Matrix::from_real_rows(&[
                    [0.0, ad, bd + 0.5 * (ad * cv + av * cd)],
                    [0.0, 0.0, cd],
                    [0.0, 0.0, 0.0],
                ])?
            }
            ClosedForm::Sl2Iwasawa { alpha, beta, delta } => {
                let (al, be, de) = (alpha.eval(t), beta.eval(t), delta.eval(t));
                let k = lie::rotation2(al);
                let a = Matrix::diag(&[be.exp(), (-be).exp()]);
                let nil = lie::sl2_iwasawa(0.0, 0.0, de);
                let e1 = Matrix::from_real_rows(&[[0.0, -1.0], [1.0, 0.0]])?;
                let e2 = Matrix::diag(&[1.0, -1.0]);
                let e3 = Matrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]])?;
                let k_dot = (&k * &e1).scale(alpha.derivative(t));
                let a_dot = (&a * &e2).scale(beta.derivative(t));
                let n_dot = e3.scale(delta.derivative(t));
                let mut d = &(&k_dot * &a) * &nil;
                d += &(&(&k * &a_dot) * &nil);
                d += &(&(&k * &a) * &n_dot);
                d
            }
            ClosedForm::FlipFlop { lambda } => {
                let w = lambda * (-2.0 * lambda * t).exp();
                Matrix::from_real_fn(2, |i, j| if i == j { -w } else { w })
            }
        })
    }
}

impl NumericCurve {
    pub fn new(a0: Matrix, generator: Generator, cfg: IntegratorConfig, side: Side) -> Result<Self> {
        let line = integrate(&generator, &a0, &cfg, side)?;
        Ok(Self {
            generator,
            cfg,
            side,
            line,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.cfg.horizon
    }

    pub fn line(&self) -> &FlowLine {
        &self.line
    }

    pub fn dim(&self) -> usize {
        self.line.base.dim()
    }

    /// Table lookup, finishing with one partial RK4 step between samples.
    pub fn eval(&self, t: f64) -> Result<Matrix> {
        if !(0.0..=self.cfg.horizon).contains(&t) {
            return Err(Error::HorizonExceeded {
                t,
                horizon: self.cfg.horizon,
            });
        }
        let k = ((t / self.cfg.step).floor() as usize).min(self.cfg.steps());
        let (tk, ak) = &self.line.samples[k];
        if t == *tk {
            return Ok(ak.clone());
        }
        rk4_step(&self.generator, ak, *tk, t - tk, self.side)
    }

    /// Second-order finite difference, one-sided at the ends of the horizon.
    pub fn derivative(&self, t: f64) -> Result<Matrix> {
        let h = NUMERIC_DIFF_STEP;
        let horizon = self.cfg.horizon;
        if !(0.0..=horizon).contains(&t) {
            return Err(Error::HorizonExceeded { t, horizon });
        }
        if t - h >= 0.0 && t + h <= horizon {
            let d = &self.eval(t + h)? - &self.eval(t - h)?;
            Ok(d.scale(0.5 / h))
        } else if t + 2.0 * h <= horizon {
            let mut d = self.eval(t)?.scale(-3.0);
            d += &self.eval(t + h)?.scale(4.0);
            d += &self.eval(t + 2.0 * h)?.scale(-1.0);
            Ok(d.scale(0.5 / h))
        } else {
            let mut d = self.eval(t)?.scale(3.0);
            d += &self.eval(t - h)?.scale(-4.0);
            d += &self.eval(t - 2.0 * h)?;
            Ok(d.scale(0.5 / h))
        }
    }
}

impl CurveSpec {
    pub fn exp_line(a0: Matrix, x: Matrix) -> Self {
        CurveSpec::ExpLine { a0, x }
    }

    pub fn numeric(a0: Matrix, generator: Generator, cfg: IntegratorConfig) -> Result<Self> {
        Ok(CurveSpec::Numeric(Arc::new(NumericCurve::new(a0, generator, cfg, Side::Right)?)))
    }

    /// Dimension, after checking stored matrices agree and are finite.
    pub fn dim(&self) -> Result<usize> {
        match self {
            CurveSpec::Constant(a) | CurveSpec::AffineLine(a) => {
                a.check_finite()?;
                Ok(a.dim())
            }
            CurveSpec::ExpLine { a0: p, x: q } | CurveSpec::TangentInduced { b: p, v: q } => {
                p.check_finite()?;
                q.check_finite()?;
                q.check_dim(p.dim())?;
                Ok(p.dim())
            }
            CurveSpec::ClosedForm(c) => Ok(c.dim()),
            CurveSpec::Numeric(c) => Ok(c.dim()),
        }
    }

    /// Whether every value of the curve is a real matrix.
    pub fn is_real(&self) -> bool {
        match self {
            CurveSpec::Constant(a) | CurveSpec::AffineLine(a) => a.max_imag() == 0.0,
            CurveSpec::ExpLine { a0: p, x: q } | CurveSpec::TangentInduced { b: p, v: q } => {
                p.max_imag() == 0.0 && q.max_imag() == 0.0
            }
            CurveSpec::ClosedForm(_) => true,
            CurveSpec::Numeric(c) => c.line.samples.iter().all(|(_, a)| a.max_imag() == 0.0),
        }
    }
}

fn tangent_generator(b: &Matrix, v: &Matrix) -> Result<Matrix> {
    Ok(&b.inv()? * v)
}

/// Structure matrix `A(t)`.
pub fn eval_curve(c: &CurveSpec, t: f64) -> Result<Matrix> {
    if !t.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let n = c.dim()?;
    match c {
        CurveSpec::Constant(a) => Ok(a.clone()),
        CurveSpec::AffineLine(a) => Ok(&Matrix::identity(n) + &a.scale(t)),
        CurveSpec::ExpLine { a0, x } => Ok(a0 * &expm(&x.scale(t))?),
        CurveSpec::TangentInduced { b, v } => {
            let x = tangent_generator(b, v)?;
            Ok(b * &expm(&x.scale(t))?)
        }
        CurveSpec::ClosedForm(f) => f.eval(t),
        CurveSpec::Numeric(nc) => nc.eval(t),
    }
}

/// `A'(t)`; exact for every variant except `Numeric`.
pub fn derivative(c: &CurveSpec, t: f64) -> Result<Matrix> {
    if !t.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let n = c.dim()?;
    match c {
        CurveSpec::Constant(_) => Ok(Matrix::zeros(n)),
        CurveSpec::AffineLine(a) => Ok(a.clone()),
        CurveSpec::ExpLine { a0, x } => Ok(&(a0 * &expm(&x.scale(t))?) * x),
        CurveSpec::TangentInduced { b, v } => {
            let x = tangent_generator(b, v)?;
            Ok(&(b * &expm(&x.scale(t))?) * &x)
        }
        CurveSpec::ClosedForm(f) => f.derivative(t),
        CurveSpec::Numeric(nc) => nc.derivative(t),
    }
}

pub fn velocity_at_origin(c: &CurveSpec) -> Result<VelocityVector> {
    derivative(c, 0.0).map(VelocityVector)
}

/// Radius `1 / rho(A)` of the interval on which `I + tA` is invertible.
pub fn nonsingularity_interval(c: &CurveSpec) -> Result<f64> {
    match c {
        CurveSpec::AffineLine(a) => {
            let rho = a.spectral_radius_estimate();
            Ok(if rho <= 1e-12 { f64::INFINITY } else { 1.0 / rho })
        }
        _ => Err(Error::WrongVariant {
            expected: "affine_line",
        }),
    }
}

/// Checks `gamma(0) = I` and `gamma(s + t) = gamma(s) gamma(t)` on all grid pairs.
pub fn check_one_parameter_subgroup(c: &CurveSpec, grid: &[f64], tol: f64) -> Result<SubgroupReport> {
    if grid.is_empty() {
        return Err(Error::BadGrid("empty grid".into()));
    }
    let n = c.dim()?;
    let identity_residual = eval_curve(c, 0.0)?.distance(&Matrix::identity(n));
    let values = grid
        .iter()
        .map(|&t| eval_curve(c, t))
        .collect::<Result<Vec<_>>>()?;
    let mut homomorphism_residual = 0.0f64;
    for (s, gs) in grid.iter().zip(&values) {
        for (t, gt) in grid.iter().zip(&values) {
            let lhs = eval_curve(c, s + t)?;
            homomorphism_residual = homomorphism_residual.max(lhs.distance(&(gs * gt)));
        }
    }
    let max_residual = identity_residual.max(homomorphism_residual);
    Ok(SubgroupReport {
        identity_residual,
        homomorphism_residual,
        max_residual,
        pass: max_residual <= tol,
    })
}

/// Residual of `A'(t) = A(t) X` over the grid.
pub fn check_ode(c: &CurveSpec, x: &Matrix, grid: &[f64], tol: f64) -> Result<OdeReport> {
    x.check_dim(c.dim()?)?;
    let mut residual = 0.0f64;
    for &t in grid {
        let d = derivative(c, t)?;
        residual = residual.max(d.distance(&(&eval_curve(c, t)? * x)));
    }
    Ok(OdeReport {
        residual,
        pass: residual <= tol,
    })
}

/// Per-sample `|det A(t)|` and sign along the grid.
pub fn perfectness_profile(c: &CurveSpec, grid: &[f64]) -> Result<PerfectnessProfile> {
    let real = c.is_real();
    let samples = grid
        .iter()
        .map(|&t| {
            let a = eval_curve(c, t)?;
            let det = a.det();
            let perfect = !a.is_singular();
            let sign = real.then_some(if !perfect { 0 } else if det.re > 0.0 { 1 } else { -1 });
            Ok(DetSample {
                t,
                abs_det: det.norm(),
                sign,
                perfect,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let perfect_everywhere = samples.iter().all(|s| s.perfect);
    let never_perfect = samples.iter().all(|s| !s.perfect);
    let sign_constant = real.then(|| {
        samples
            .first()
            .is_none_or(|first| samples.iter().all(|s| s.perfect && s.sign == first.sign))
    });
    let expected_sign = match c {
        CurveSpec::ExpLine { a0, .. } if real => {
            Some(lie::connected_component_sign(a0).unwrap_or(0))
        }
        _ => None,
    };
    Ok(PerfectnessProfile {
        samples,
        perfect_everywhere,
        never_perfect,
        sign_constant,
        expected_sign,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
enum CurveJson {
    Constant {
        #[serde(rename = "A")]
        a: Matrix,
    },
    AffineLine {
        #[serde(rename = "A")]
        a: Matrix,
    },
    ExpLine {
        #[serde(rename = "A0")]
        a0: Matrix,
        #[serde(rename = "X")]
        x: Matrix,
    },
    TangentInduced {
        #[serde(rename = "B")]
        b: Matrix,
        #[serde(rename = "V")]
        v: Matrix,
    },
    ClosedForm(ClosedForm),
    Numeric {
        #[serde(rename = "A0")]
        a0: Matrix,
        generator: Generator,
        step: f64,
        horizon: f64,
        #[serde(default)]
        side: Side,
    },
}

impl TryFrom<CurveJson> for CurveSpec {
    type Error = Error;

    fn try_from(j: CurveJson) -> Result<Self> {
        let c = match j {
            CurveJson::Constant { a } => CurveSpec::Constant(a),
            CurveJson::AffineLine { a } => CurveSpec::AffineLine(a),
            CurveJson::ExpLine { a0, x } => CurveSpec::ExpLine { a0, x },
            CurveJson::TangentInduced { b, v } => CurveSpec::TangentInduced { b, v },
            CurveJson::ClosedForm(f) => CurveSpec::ClosedForm(f),
            CurveJson::Numeric {
                a0,
                generator,
                step,
                horizon,
                side,
            } => {
                let cfg = IntegratorConfig::new(step, horizon)?;
                CurveSpec::Numeric(Arc::new(NumericCurve::new(a0, generator, cfg, side)?))
            }
        };
        c.dim()?;
        Ok(c)
    }
}

impl Serialize for CurveSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let j = match self.clone() {
            CurveSpec::Constant(a) => CurveJson::Constant { a },
            CurveSpec::AffineLine(a) => CurveJson::AffineLine { a },
            CurveSpec::ExpLine { a0, x } => CurveJson::ExpLine { a0, x },
            CurveSpec::TangentInduced { b, v } => CurveJson::TangentInduced { b, v },
            CurveSpec::ClosedForm(f) => CurveJson::ClosedForm(f),
            CurveSpec::Numeric(nc) => CurveJson::Numeric {
                a0: nc.line.base.clone(),
                generator: nc.generator.clone(),
                step: nc.cfg.step,
                horizon: nc.cfg.horizon,
                side: nc.side,
            },
        };
        j.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CurveSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        CurveSpec::try_from(CurveJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn m2(rows: [[f64; 2]; 2]) -> Matrix {
        Matrix::from_real_rows(&rows).unwrap()
    }

    fn grid() -> Vec<f64> {
        (-4..=4).map(|k| k as f64 * 0.5).collect()
    }

    #[test]
    fn constant_curve() {
        let a = m2([[0.0, 1.0], [1.0, 3.0]]);
        let c = CurveSpec::Constant(a.clone());
        for t in grid() {
            assert_eq!(eval_curve(&c, t).unwrap(), a);
            assert_eq!(derivative(&c, t).unwrap(), Matrix::zeros(2));
        }
    }

    #[test]
    fn so2_quarter_turn_and_velocity() {
        let c = CurveSpec::ClosedForm(ClosedForm::So2);
        assert!(eval_curve(&c, FRAC_PI_2).unwrap().distance(&m2([[0.0, 1.0], [-1.0, 0.0]])) < 1e-15);
        assert_eq!(velocity_at_origin(&c).unwrap().0, m2([[0.0, 1.0], [-1.0, 0.0]]));
    }

    #[test]
    fn flip_flop_values() {
        let c = CurveSpec::ClosedForm(ClosedForm::FlipFlop { lambda: 1.0 });
        let a = eval_curve(&c, 1.0).unwrap();
        assert!((a.re(0, 0) - 0.567_667_641_618_306_3).abs() < 1e-15);
        assert!((a.re(0, 1) - 0.432_332_358_381_693_7).abs() < 1e-15);
        let lambda = 2.5;
        let c = CurveSpec::ClosedForm(ClosedForm::FlipFlop { lambda });
        assert_eq!(velocity_at_origin(&c).unwrap().0, m2([[-lambda, lambda], [lambda, -lambda]]));
    }

    #[test]
    fn lorentz_curve_one_is_boost() {
        let c = CurveSpec::ClosedForm(ClosedForm::Lorentz11 { index: 1 });
        let t = 0.7f64;
        assert_eq!(eval_curve(&c, t).unwrap(), m2([[t.cosh(), t.sinh()], [t.sinh(), t.cosh()]]));
    }

    #[test]
    fn exp_line_derivative_and_affine_line() {
        let x = m2([[0.2, -1.0], [0.5, 0.1]]);
        let c = CurveSpec::exp_line(Matrix::identity(2), x.clone());
        let t = 0.9;
        let expected = &expm(&x.scale(t)).unwrap() * &x;
        assert!(derivative(&c, t).unwrap().distance(&expected) < 1e-15);
        assert_eq!(velocity_at_origin(&c).unwrap().0, x);
        let a = m2([[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(derivative(&CurveSpec::AffineLine(a.clone()), -3.0).unwrap(), a);
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        let w = Wave::new(0.8, 1.3, -0.2);
        let forms = [
            ClosedForm::So2,
            ClosedForm::Lorentz11 { index: 4 },
            ClosedForm::FlipFlop { lambda: 0.7 },
            ClosedForm::Heisenberg {
                alpha: ScalarFn::Sin(w),
                beta: ScalarFn::Poly { coeffs: vec![0.0, 1.0, -0.5] },
                delta: ScalarFn::Exp(w),
            },
            ClosedForm::HeisenbergExp {
                a: ScalarFn::Cos(w),
                b: ScalarFn::Sinh(w),
                c: ScalarFn::Poly { coeffs: vec![1.0, 2.0] },
            },
            ClosedForm::Sl2Iwasawa {
                alpha: ScalarFn::Sin(w),
                beta: ScalarFn::Cosh(w),
                delta: ScalarFn::Poly { coeffs: vec![0.5, -1.0, 0.25] },
            },
        ];
        let h = 1e-5;
        for f in &forms {
            for t in [-1.5, 0.0, 0.4, 1.2] {
                let fd = (&f.eval(t + h).unwrap() - &f.eval(t - h).unwrap()).scale(0.5 / h);
                let d = f.derivative(t).unwrap();
                assert!(d.distance(&fd) < 1e-8 * (1.0 + d.frob_norm()), "{f:?} at {t}");
            }
        }
    }

    #[test]
    fn nonsingularity_radius() {
        let nil = CurveSpec::AffineLine(m2([[0.0, 1.0], [0.0, 0.0]]));
        assert_eq!(nonsingularity_interval(&nil).unwrap(), f64::INFINITY);
        let d = nonsingularity_interval(&CurveSpec::AffineLine(Matrix::diag(&[2.0, -1.0]))).unwrap();
        assert!((d - 0.5).abs() < 1e-5);
        assert_eq!(nonsingularity_interval(&CurveSpec::AffineLine(Matrix::identity(3))).unwrap(), 1.0);
        assert!(matches!(
            nonsingularity_interval(&CurveSpec::Constant(Matrix::identity(2))),
            Err(Error::WrongVariant { .. })
        ));
    }

    #[test]
    fn subgroup_check() {
        let x = m2([[0.3, -0.7], [0.4, -0.1]]);
        let grid: Vec<f64> = (-2..=2).map(f64::from).collect();
        let rep = check_one_parameter_subgroup(&CurveSpec::exp_line(Matrix::identity(2), x.clone()), &grid, 1e-9).unwrap();
        assert!(rep.pass, "{rep:?}");

        let shifted = CurveSpec::exp_line(Matrix::diag(&[2.0, 1.0]), x);
        let rep = check_one_parameter_subgroup(&shifted, &grid, 1e-9).unwrap();
        assert!(!rep.pass && rep.identity_residual == 1.0);

        // (I + sA)(I + tA) - I - (s+t)A = st A^2
        let a = m2([[0.0, 1.0], [-1.0, 0.0]]);
        let rep = check_one_parameter_subgroup(&CurveSpec::AffineLine(a.clone()), &[1.0, 2.0], 1e-9).unwrap();
        let st_a2 = (&a * &a).scale(4.0).frob_norm();
        assert!(!rep.pass);
        assert!((rep.homomorphism_residual - st_a2).abs() < 1e-12);

        assert!(check_one_parameter_subgroup(&CurveSpec::AffineLine(a), &[], 1e-9).is_err());
    }

    #[test]
    fn ode_check() {
        let x = m2([[0.3, -0.7], [0.4, -0.1]]);
        let a0 = m2([[0.0, 1.0], [1.0, 0.0]]);
        let rep = check_ode(&CurveSpec::exp_line(a0.clone(), x.clone()), &x, &grid(), 1e-9).unwrap();
        assert!(rep.pass);
        assert!(!check_ode(&CurveSpec::Constant(a0), &x, &grid(), 1e-9).unwrap().pass);
        let lambda = 1.4;
        let q = m2([[-lambda, lambda], [lambda, -lambda]]);
        let ff = CurveSpec::ClosedForm(ClosedForm::FlipFlop { lambda });
        assert!(check_ode(&ff, &q, &grid(), 1e-9).unwrap().pass);
    }

    #[test]
    fn perfectness_profiles() {
        let x = m2([[0.5, -1.0], [2.0, 0.3]]);
        let up = perfectness_profile(&CurveSpec::exp_line(Matrix::identity(2), x.clone()), &grid()).unwrap();
        assert!(up.perfect_everywhere && up.sign_constant == Some(true));
        assert!(up.samples.iter().all(|s| s.sign == Some(1)));

        let alpha = 1.5;
        let shear = m2([[0.0, alpha], [0.0, 0.0]]);
        let swap = m2([[0.0, 1.0], [1.0, 0.0]]);
        let down = perfectness_profile(&CurveSpec::exp_line(swap, shear), &grid()).unwrap();
        assert_eq!(down.expected_sign, Some(-1));
        assert!(down.samples.iter().all(|s| s.sign == Some(-1)));

        let singular = m2([[1.0, 2.0], [2.0, 4.0]]);
        let flat = perfectness_profile(&CurveSpec::exp_line(singular, x), &grid()).unwrap();
        assert!(flat.never_perfect && flat.sign_constant == Some(false));
    }

    #[test]
    fn tangent_induced_passes_through_base_with_velocity() {
        let b = m2([[2.0, 1.0], [0.5, 1.0]]);
        let v = m2([[0.1, -0.3], [0.7, 0.2]]);
        let c = CurveSpec::TangentInduced { b: b.clone(), v: v.clone() };
        assert!(eval_curve(&c, 0.0).unwrap().distance(&b) < 1e-10);
        assert!(velocity_at_origin(&c).unwrap().0.distance(&v) < 1e-10);
    }

    #[test]
    fn heisenberg_exp_with_constants_matches_shifted_heisenberg() {
        let (a, b, c) = (0.7, -1.1, 2.3);
        let e = ClosedForm::HeisenbergExp {
            a: ScalarFn::constant(a),
            b: ScalarFn::constant(b),
            c: ScalarFn::constant(c),
        };
        let h = ClosedForm::Heisenberg {
            alpha: ScalarFn::constant(a),
            beta: ScalarFn::constant(b + a * c / 2.0),
            delta: ScalarFn::constant(c),
        };
        assert_eq!(e.eval(0.3).unwrap(), h.eval(0.3).unwrap());
    }

    #[test]
    fn numeric_curve_horizon_and_accuracy() {
        let q = m2([[-1.0, 1.0], [1.0, -1.0]]);
        let cfg = IntegratorConfig::new(1e-2, 2.0).unwrap();
        let c = CurveSpec::numeric(Matrix::identity(2), Generator::constant(q.clone()), cfg).unwrap();
        for t in [0.0, 0.005, 0.73, 2.0] {
            let exact = expm(&q.scale(t)).unwrap();
            assert!(eval_curve(&c, t).unwrap().distance(&exact) < 1e-9, "t = {t}");
            let d = derivative(&c, t).unwrap();
            assert!(d.distance(&(&exact * &q)) < 1e-7, "t = {t}");
        }
        assert!(matches!(eval_curve(&c, 2.5), Err(Error::HorizonExceeded { .. })));
        assert!(matches!(eval_curve(&c, -0.1), Err(Error::HorizonExceeded { .. })));
    }

    #[test]
    fn curve_json_round_trip() {
        let src = r#"{"variant":"exp_line","A0":{"n":2,"real":[[1,0],[0,1]]},"X":{"n":2,"real":[[0,1],[-1,0]]}}"#;
        let c: CurveSpec = serde_json::from_str(src).unwrap();
        let back: CurveSpec = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(eval_curve(&c, 0.4).unwrap(), eval_curve(&back, 0.4).unwrap());

        let ff: CurveSpec = serde_json::from_str(r#"{"variant":"closed_form","name":"flip_flop","lambda":1.0}"#).unwrap();
        assert!(matches!(ff, CurveSpec::ClosedForm(ClosedForm::FlipFlop { .. })));

        let hs = r#"{"variant":"closed_form","name":"heisenberg","alpha":{"kind":"sin","scale":2,"shift":0},"beta":{"kind":"poly","coeffs":[1]},"delta":{"kind":"cos"}}"#;
        let h: CurveSpec = serde_json::from_str(hs).unwrap();
        assert_eq!(h.dim().unwrap(), 3);

        let bad = r#"{"variant":"exp_line","A0":{"n":2,"real":[[1,0],[0,1]]},"X":{"n":1,"real":[[0]]}}"#;
        assert!(serde_json::from_str::<CurveSpec>(bad).is_err());
    }
}
