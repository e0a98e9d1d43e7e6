//! A single evolution algebra: one time-slice of a continuous evolution
//! algebra, multiplied in its natural basis.
//!
//! Structure matrices follow the row convention: row `i` of `A` holds the
//! coordinates of `e_i * e_i`. Products of distinct basis vectors vanish.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{Matrix, Scalar, SINGULAR_TOL};

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionAlgebra {
    structure: Matrix,
}

/// Coordinates in the natural basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    coords: Vec<Scalar>,
}

/// Outcome of the perfectness test `A^2 = A`, i.e. `det A != 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Perfectness {
    pub perfect: bool,
    pub abs_det: f64,
}

impl Element {
    pub fn new(coords: Vec<Scalar>) -> Result<Self> {
        if coords.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self { coords })
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| Scalar::new(x, 0.0)).collect())
    }

    /// Basis vector `e_i` (zero-based).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut coords = vec![Scalar::new(0.0, 0.0); n];
        coords[i] = Scalar::new(1.0, 0.0);
        Self { coords }
    }

    /// The evolution element `e = e_1 + ... + e_n`.
    pub fn evolution_element(n: usize) -> Self {
        Self {
            coords: vec![Scalar::new(1.0, 0.0); n],
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            coords: vec![Scalar::new(0.0, 0.0); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }

    pub fn scale(&self, s: Scalar) -> Self {
        Self {
            coords: self.coords.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Element) -> Result<Self> {
        check_len(self.dim(), other.dim())?;
        Ok(Self {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Euclidean distance between coordinate vectors.
    pub fn distance(&self, other: &Element) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

impl EvolutionAlgebra {
    pub fn new(structure: Matrix) -> Result<Self> {
        structure.check_finite()?;
        Ok(Self { structure })
    }

    pub fn dim(&self) -> usize {
        self.structure.dim()
    }

    pub fn structure(&self) -> &Matrix {
        &self.structure
    }

    /// `x * y = sum_i x_i y_i e_i^2`.
    pub fn mul(&self, x: &Element, y: &Element) -> Result<Element> {
        let n = self.dim();
        check_len(n, x.dim())?;
        check_len(n, y.dim())?;
        let mut out = vec![Scalar::new(0.0, 0.0); n];
        for i in 0..n {
            let w = x.coords[i] * y.coords[i];
            if w.re == 0.0 && w.im == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.structure.row(i)) {
                *o += w * a;
            }
        }
        Ok(Element { coords: out })
    }

    /// Matrix of left multiplication by the evolution element, column `i`
    /// being the coordinates of `e * e_i = e_i^2`. This is `A^T`.
    pub fn evolution_operator(&self) -> Matrix {
        self.structure.transpose()
    }

    /// Applies the evolution operator `k` times to `x`.
    pub fn iterate_operator(&self, x: &Element, k: usize) -> Result<Element> {
        check_len(self.dim(), x.dim())?;
        let op = self.evolution_operator();
        let mut v = x.coords.clone();
        for _ in 0..k {
            v = mat_vec(&op, &v);
        }
        Ok(Element { coords: v })
    }

    pub fn perfectness(&self) -> Perfectness {
        let abs_det = self.structure.det().norm();
        let scale = self.structure.max_abs().powi(self.dim() as i32);
        Perfectness {
            perfect: abs_det > SINGULAR_TOL * scale,
            abs_det,
        }
    }

    pub fn is_perfect(&self) -> bool {
        self.perfectness().perfect
    }

    /// Real, entrywise nonnegative (down to `-tol`) and row stochastic.
    pub fn is_markov(&self, tol: f64) -> bool {
        let a = &self.structure;
        a.is_real(tol)
            && a.entries().iter().all(|z| z.re >= -tol)
            && a.row_sums().iter().all(|s| (s.re - 1.0).abs() <= tol)
    }
}

pub(crate) fn mat_vec(m: &Matrix, v: &[Scalar]) -> Vec<Scalar> {
    (0..m.dim())
        .map(|i| m.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Wire form `{"coords_real": [...], "coords_imag": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementJson {
    pub coords_real: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords_imag: Option<Vec<f64>>,
}

impl TryFrom<ElementJson> for Element {
    type Error = Error;

    fn try_from(j: ElementJson) -> Result<Self> {
        let im = match j.coords_imag {
            Some(im) => {
                check_len(j.coords_real.len(), im.len())?;
                im
            }
            None => vec![0.0; j.coords_real.len()],
        };
        Element::new(
            j.coords_real
                .iter()
                .zip(&im)
                .map(|(&re, &im)| Scalar::new(re, im))
                .collect(),
        )
    }
}

impl From<&Element> for ElementJson {
    fn from(e: &Element) -> Self {
        let any_imag = e.coords.iter().any(|z| z.im != 0.0);
        Self {
            coords_real: e.coords.iter().map(|z| z.re).collect(),
            coords_imag: any_imag.then(|| e.coords.iter().map(|z| z.im).collect()),
        }
    }
}
