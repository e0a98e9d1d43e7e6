use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curves::ScalarFn;
use crate::error::{Error, Result};
use crate::matcore::Matrix;

/// One summand `coef(t) * matrix` of a [`Generator::Combination`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorTerm {
    pub coef: ScalarFn,
    pub matrix: Matrix,
}

/// Arbitrary time-dependent generator supplied as a closure.
#[derive(Clone)]
pub struct CallableGenerator {
    n: usize,
    f: Arc<dyn Fn(f64) -> Matrix + Send + Sync>,
}

impl fmt::Debug for CallableGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CallableGenerator").field("n", &self.n).finish_non_exhaustive()
    }
}

/// Time-dependent generator `t -> X(t)` of the linear system `A' = A X(t)`.
///
/// Wire forms: `{"kind": "constant", "X": <matrix>}` and
/// `{"kind": "combination", "terms": [{"coef": <scalar fn>, "matrix": <matrix>}, ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Constant {
        #[serde(rename = "X")]
        x: Matrix,
    },
    Combination { terms: Vec<GeneratorTerm> },
    #[serde(skip)]
    Callable(CallableGenerator),
}

impl Generator {
    pub fn constant(x: Matrix) -> Self {
        Generator::Constant { x }
    }

    /// `t -> f(t) * x`
    pub fn scaled(f: ScalarFn, x: Matrix) -> Self {
        Generator::Combination {
            terms: vec![GeneratorTerm { coef: f, matrix: x }],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> Matrix + Send + Sync + 'static) -> Self {
        Generator::Callable(CallableGenerator { n, f: Arc::new(f) })
    }

    /// Dimension, after checking that all parts agree.
    pub fn dim(&self) -> Result<usize> {
        match self {
            Generator::Constant { x } => Ok(x.dim()),
            Generator::Combination { terms } => {
                let first = terms
                    .first()
                    .ok_or_else(|| Error::InvalidParameter("generator has no terms".into()))?;
                let n = first.matrix.dim();
                for term in terms {
                    term.matrix.check_dim(n)?;
                    if !term.coef.is_finite() {
                        return Err(Error::NonFiniteInput);
                    }
                }
                Ok(n)
            }
            Generator::Callable(c) => Ok(c.n),
        }
    }

    /// `X(t)`, rejecting non-finite or wrongly sized values.
    pub fn at(&self, t: f64) -> Result<Matrix> {
        let x = match self {
            Generator::Constant { x } => x.clone(),
            Generator::Combination { terms } => {
                let mut acc = Matrix::zeros(terms[0].matrix.dim());
                for term in terms {
                    acc += &term.matrix.scale(term.coef.eval(t));
                }
                acc
            }
            Generator::Callable(c) => {
                let x = (c.f)(t);
                x.check_dim(c.n)?;
                x
            }
        };
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::NonFiniteGenerator { t })
        }
    }

    pub fn as_constant(&self) -> Option<&Matrix> {
        match self {
            Generator::Constant { x } => Some(x),
            _ => None,
        }
    }
}
