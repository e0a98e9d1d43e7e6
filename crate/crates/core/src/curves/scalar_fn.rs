use serde::{Deserialize, Serialize};

/// `amp * f(scale * t + shift)` for a fixed elementary `f`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    #[serde(default = "one")]
    pub amp: f64,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub shift: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for Wave {
    fn default() -> Self {
        Self {
            amp: 1.0,
            scale: 1.0,
            shift: 0.0,
        }
    }
}

impl Wave {
    pub fn new(amp: f64, scale: f64, shift: f64) -> Self {
        Self { amp, scale, shift }
    }

    fn arg(&self, t: f64) -> f64 {
        self.scale * t + self.shift
    }
}

/// Catalogue of scalar functions of time with exact derivatives.
///
/// Wire form: `{"kind": "sin", "scale": s, "shift": c}` (optional `amp`)
/// or `{"kind": "poly", "coeffs": [c0, c1, ...]}` for `c0 + c1 t + ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarFn {
    Poly { coeffs: Vec<f64> },
    Sin(Wave),
    Cos(Wave),
    Exp(Wave),
    Cosh(Wave),
    Sinh(Wave),
}

impl ScalarFn {
    pub fn constant(c: f64) -> Self {
        ScalarFn::Poly { coeffs: vec![c] }
    }

    /// `t`
    pub fn identity() -> Self {
        ScalarFn::Poly {
            coeffs: vec![0.0, 1.0],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarFn::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            ScalarFn::Sin(w) => w.amp * w.arg(t).sin(),
            ScalarFn::Cos(w) => w.amp * w.arg(t).cos(),
            ScalarFn::Exp(w) => w.amp * w.arg(t).exp(),
            ScalarFn::Cosh(w) => w.amp * w.arg(t).cosh(),
            ScalarFn::Sinh(w) => w.amp * w.arg(t).sinh(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            ScalarFn::Poly { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * t + k as f64 * c),
            ScalarFn::Sin(w) => w.amp * w.scale * w.arg(t).cos(),
            ScalarFn::Cos(w) => -w.amp * w.scale * w.arg(t).sin(),
            ScalarFn::Exp(w) => w.amp * w.scale * w.arg(t).exp(),
            ScalarFn::Cosh(w) => w.amp * w.scale * w.arg(t).sinh(),
            ScalarFn::Sinh(w) => w.amp * w.scale * w.arg(t).cosh(),
        }
    }

    /// Constant functions, i.e. polynomials of degree at most 0.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            ScalarFn::Poly { coeffs } if coeffs.iter().skip(1).all(|&c| c == 0.0) => {
                Some(coeffs.first().copied().unwrap_or(0.0))
            }
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            ScalarFn::Poly { coeffs } => coeffs.iter().all(|c| c.is_finite()),
            ScalarFn::Sin(w) | ScalarFn::Cos(w) | ScalarFn::Exp(w) | ScalarFn::Cosh(w) | ScalarFn::Sinh(w) => {
                w.amp.is_finite() && w.scale.is_finite() && w.shift.is_finite()
            }
        }
    }
}
