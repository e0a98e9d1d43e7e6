use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};

/// Wire form `{"n": 2, "real": [[..],[..]], "imag": [[..],[..]]}`.
///
/// `imag` is optional on input and omitted on output for real matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub real: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<Vec<f64>>>,
}

impl TryFrom<MatrixJson> for Matrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        if j.real.len() != j.n {
            return Err(Error::DimensionMismatch {
                expected: j.n,
                found: j.real.len(),
            });
        }
        match j.imag {
            None => Matrix::from_real_rows(&j.real),
            Some(im) => Matrix::from_parts(&j.real, &im),
        }
    }
}

impl From<&Matrix> for MatrixJson {
    fn from(m: &Matrix) -> Self {
        let imag = (m.max_imag() > 0.0).then(|| m.imag_rows());
        Self {
            n: m.dim(),
            real: m.real_rows(),
            imag,
        }
    }
}

impl From<Matrix> for MatrixJson {
    fn from(m: Matrix) -> Self {
        MatrixJson::from(&m)
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        Matrix::try_from(j).map_err(serde::de::Error::custom)
    }
}
