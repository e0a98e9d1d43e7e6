//! Matrix Lie groups and their Lie algebras.
//!
//! Membership is decided numerically: every predicate returns the size of
//! the defect that would vanish for an exact member, and a matrix belongs
//! when that residual is at most the caller's tolerance.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{Matrix, Scalar};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "group", rename_all = "snake_case")]
pub enum GroupId {
    Gl { n: usize },
    Sl { n: usize },
    O { n: usize },
    So { n: usize },
    U { n: usize },
    Su { n: usize },
    /// Invertible real matrices with unit row sums.
    Stochastic { n: usize },
    /// Invertible real matrices whose row and column sums all equal `s`.
    GenDoublyStochastic { n: usize, s: f64 },
    Lorentz11,
    O11,
    Heisenberg3,
    /// Invertible matrices whose last column is `e_n`: affine maps of
    /// `n - 1` dimensional row vectors.
    Affine { n: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "algebra", rename_all = "snake_case")]
pub enum AlgebraId {
    Gl { n: usize },
    /// Traceless.
    Sl { n: usize },
    /// Real skew-symmetric.
    So { n: usize },
    /// Skew-hermitian.
    U { n: usize },
    Su { n: usize },
    /// Markov generators.
    Rate { n: usize },
    /// Row and column sums zero.
    Omega0 { n: usize },
    /// Strictly upper triangular 3x3.
    Heis3,
    /// Multiples of `[[0,1],[1,0]]`.
    Lor11,
}

/// Connected-component label of a real group element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    /// Sign of the determinant.
    Det(i8),
    /// `(sign det, sign of the (1,1) entry)`, used for O(1,1).
    DetLead(i8, i8),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MembershipReport {
    pub belongs: bool,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component: Option<Component>,
}

impl GroupId {
    pub fn dim(&self) -> usize {
        match *self {
            GroupId::Gl { n }
            | GroupId::Sl { n }
            | GroupId::O { n }
            | GroupId::So { n }
            | GroupId::U { n }
            | GroupId::Su { n }
            | GroupId::Stochastic { n }
            | GroupId::GenDoublyStochastic { n, .. }
            | GroupId::Affine { n } => n,
            GroupId::Lorentz11 | GroupId::O11 => 2,
            GroupId::Heisenberg3 => 3,
        }
    }

    /// Lie algebra `{X : exp(tX) in G for all t}`.
    ///
    /// `O(1,1)` shares its algebra with its identity component; affine and
    /// generalized doubly stochastic groups report their closest catalogued
    /// algebra (`gl` and `omega0`).
    pub fn algebra(&self) -> AlgebraId {
        match *self {
            GroupId::Gl { n } | GroupId::Affine { n } => AlgebraId::Gl { n },
            GroupId::Sl { n } => AlgebraId::Sl { n },
            GroupId::O { n } | GroupId::So { n } => AlgebraId::So { n },
            GroupId::U { n } => AlgebraId::U { n },
            GroupId::Su { n } => AlgebraId::Su { n },
            GroupId::Stochastic { n } => AlgebraId::Rate { n },
            GroupId::GenDoublyStochastic { n, .. } => AlgebraId::Omega0 { n },
            GroupId::Lorentz11 | GroupId::O11 => AlgebraId::Lor11,
            GroupId::Heisenberg3 => AlgebraId::Heis3,
        }
    }

    /// Parses the short CLI names (`so`, `sl`, `stochastic`, `omega`, ...).
    pub fn parse(name: &str, n: usize, s: f64) -> Result<Self> {
        Ok(match name.to_ascii_lowercase().as_str() {
            "gl" => GroupId::Gl { n },
            "sl" => GroupId::Sl { n },
            "o" => GroupId::O { n },
            "so" => GroupId::So { n },
            "u" => GroupId::U { n },
            "su" => GroupId::Su { n },
            "stochastic" | "s" => GroupId::Stochastic { n },
            "omega" | "doubly-stochastic" => GroupId::GenDoublyStochastic { n, s },
            "lorentz11" | "lor11" => GroupId::Lorentz11,
            "o11" => GroupId::O11,
            "heis3" | "heisenberg" | "h3" => GroupId::Heisenberg3,
            "affine" | "aff" => GroupId::Affine { n },
            other => return Err(Error::InvalidParameter(format!("unknown group `{other}`"))),
        })
    }

    /// Whether the predicates for this group require a real matrix.
    fn real_only(&self) -> bool {
        !matches!(
            self,
            GroupId::Gl { .. } | GroupId::Sl { .. } | GroupId::U { .. } | GroupId::Su { .. } | GroupId::Affine { .. }
        )
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GroupId::Gl { n } => write!(f, "GL({n})"),
            GroupId::Sl { n } => write!(f, "SL({n})"),
            GroupId::O { n } => write!(f, "O({n})"),
            GroupId::So { n } => write!(f, "SO({n})"),
            GroupId::U { n } => write!(f, "U({n})"),
            GroupId::Su { n } => write!(f, "SU({n})"),
            GroupId::Stochastic { n } => write!(f, "S({n})"),
            GroupId::GenDoublyStochastic { n, s } => write!(f, "Omega^{s}({n})"),
            GroupId::Lorentz11 => write!(f, "Lor(1,1)"),
            GroupId::O11 => write!(f, "O(1,1)"),
            GroupId::Heisenberg3 => write!(f, "H(3)"),
            GroupId::Affine { n } => write!(f, "Aff({})", n.saturating_sub(1)),
        }
    }
}

impl AlgebraId {
    pub fn dim(&self) -> usize {
        match *self {
            AlgebraId::Gl { n }
            | AlgebraId::Sl { n }
            | AlgebraId::So { n }
            | AlgebraId::U { n }
            | AlgebraId::Su { n }
            | AlgebraId::Rate { n }
            | AlgebraId::Omega0 { n } => n,
            AlgebraId::Heis3 => 3,
            AlgebraId::Lor11 => 2,
        }
    }

    /// A group whose one-parameter subgroups this algebra generates.
    pub fn group(&self) -> GroupId {
        match *self {
            AlgebraId::Gl { n } => GroupId::Gl { n },
            AlgebraId::Sl { n } => GroupId::Sl { n },
            AlgebraId::So { n } => GroupId::So { n },
            AlgebraId::U { n } => GroupId::U { n },
            AlgebraId::Su { n } => GroupId::Su { n },
            AlgebraId::Rate { n } => GroupId::Stochastic { n },
            AlgebraId::Omega0 { n } => GroupId::GenDoublyStochastic { n, s: 1.0 },
            AlgebraId::Heis3 => GroupId::Heisenberg3,
            AlgebraId::Lor11 => GroupId::Lorentz11,
        }
    }

    pub fn parse(name: &str, n: usize) -> Result<Self> {
        Ok(match name.to_ascii_lowercase().as_str() {
            "gl" => AlgebraId::Gl { n },
            "sl" => AlgebraId::Sl { n },
            "so" => AlgebraId::So { n },
            "u" => AlgebraId::U { n },
            "su" => AlgebraId::Su { n },
            "rate" | "markov" => AlgebraId::Rate { n },
            "omega0" | "omega" => AlgebraId::Omega0 { n },
            "heis3" | "heisenberg" => AlgebraId::Heis3,
            "lor11" | "lorentz11" => AlgebraId::Lor11,
            other => return Err(Error::InvalidParameter(format!("unknown algebra `{other}`"))),
        })
    }
}

fn report(residual: f64, tol: f64, component: Option<Component>) -> MembershipReport {
    MembershipReport {
        belongs: residual <= tol,
        residual,
        component,
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// 0 for invertible matrices, 1 otherwise.
fn singular_indicator(m: &Matrix) -> f64 {
    if m.is_singular() {
        1.0
    } else {
        0.0
    }
}

fn max_abs_of(values: impl IntoIterator<Item = Scalar>, target: f64) -> f64 {
    values
        .into_iter()
        .fold(0.0, |acc, z| acc.max((z - target).norm()))
}

fn minkowski() -> Matrix {
    Matrix::diag(&[1.0, -1.0])
}

fn det_component(m: &Matrix) -> Option<Component> {
    if m.max_imag() > 0.0 || m.is_singular() {
        None
    } else {
        Some(Component::Det(sign(m.det().re)))
    }
}

fn o11_component(m: &Matrix) -> Option<Component> {
    if m.max_imag() > 0.0 || m.is_singular() {
        None
    } else {
        Some(Component::DetLead(sign(m.det().re), sign(m.re(0, 0))))
    }
}

/// Frobenius defect of `A^T J A = J` (or `A^* A = I` with `J = I`).
fn isometry_defect(m: &Matrix, form: &Matrix, adjoint: bool) -> f64 {
    let mt = if adjoint { m.conj_transpose() } else { m.transpose() };
    (&(&mt * form) * m).distance(form)
}

pub fn in_group(m: &Matrix, g: GroupId, tol: f64) -> Result<MembershipReport> {
    m.check_dim(g.dim())?;
    let n = m.dim();
    let imag = if g.real_only() { m.max_imag() } else { 0.0 };
    let det = m.det();
    let det_defect = (det - 1.0).norm();
    let (residual, component) = match g {
        GroupId::Gl { .. } => (singular_indicator(m), det_component(m)),
        GroupId::Sl { .. } => (det_defect, det_component(m)),
        GroupId::O { .. } => (isometry_defect(m, &Matrix::identity(n), false), det_component(m)),
        GroupId::So { .. } => (
            isometry_defect(m, &Matrix::identity(n), false).max(det_defect),
            det_component(m),
        ),
        GroupId::U { .. } => (isometry_defect(m, &Matrix::identity(n), true), None),
        GroupId::Su { .. } => (
            isometry_defect(m, &Matrix::identity(n), true).max(det_defect),
            None,
        ),
        GroupId::Stochastic { .. } => (
            max_abs_of(m.row_sums(), 1.0).max(singular_indicator(m)),
            det_component(m),
        ),
        GroupId::GenDoublyStochastic { s, .. } => (
            max_abs_of(m.row_sums(), s)
                .max(max_abs_of(m.col_sums(), s))
                .max(singular_indicator(m)),
            det_component(m),
        ),
        GroupId::Lorentz11 => {
            let lead_defect = (-m.re(0, 0)).max(0.0);
            (
                isometry_defect(m, &minkowski(), false)
                    .max(det_defect)
                    .max(lead_defect),
                o11_component(m),
            )
        }
        GroupId::O11 => (isometry_defect(m, &minkowski(), false), o11_component(m)),
        GroupId::Heisenberg3 => {
            let mut sq = 0.0;
            for i in 0..3 {
                for j in 0..=i {
                    let target = if i == j { 1.0 } else { 0.0 };
                    sq += (m[(i, j)] - target).norm_sqr();
                }
            }
            (sq.sqrt(), det_component(m))
        }
        GroupId::Affine { .. } => {
            let col_defect = (0..n)
                .map(|i| (m[(i, n - 1)] - if i == n - 1 { 1.0 } else { 0.0 }).norm())
                .fold(0.0, f64::max);
            (col_defect.max(singular_indicator(m)), det_component(m))
        }
    };
    Ok(report(residual.max(imag), tol, component))
}

pub fn in_algebra(x: &Matrix, a: AlgebraId, tol: f64) -> Result<MembershipReport> {
    x.check_dim(a.dim())?;
    let n = x.dim();
    let imag = x.max_imag();
    let trace = x.trace().norm();
    let residual = match a {
        AlgebraId::Gl { .. } => 0.0,
        AlgebraId::Sl { .. } => trace,
        AlgebraId::So { .. } => (x + &x.transpose()).frob_norm().max(imag),
        AlgebraId::U { .. } => (x + &x.conj_transpose()).frob_norm(),
        AlgebraId::Su { .. } => (x + &x.conj_transpose()).frob_norm().max(trace),
        AlgebraId::Rate { .. } => {
            let mut neg = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        neg = neg.max(-x.re(i, j));
                    }
                }
            }
            neg.max(max_abs_of(x.row_sums(), 0.0)).max(imag)
        }
        AlgebraId::Omega0 { .. } => max_abs_of(x.row_sums(), 0.0)
            .max(max_abs_of(x.col_sums(), 0.0))
            .max(imag),
        AlgebraId::Heis3 => {
            let mut sq = 0.0;
            for i in 0..3 {
                for j in 0..=i {
                    sq += x[(i, j)].norm_sqr();
                }
            }
            sq.sqrt().max(imag)
        }
        AlgebraId::Lor11 => x[(0, 0)]
            .norm()
            .max(x[(1, 1)].norm())
            .max((x[(0, 1)] - x[(1, 0)]).norm())
            .max(imag),
    };
    Ok(report(residual, tol, None))
}

/// Sign of the determinant of a real invertible matrix.
pub fn connected_component_sign(m: &Matrix) -> Result<i8> {
    let max_imag = m.max_imag();
    if max_imag > 0.0 {
        return Err(Error::NotReal { max_imag });
    }
    if m.is_singular() {
        return Err(Error::SingularMatrix);
    }
    Ok(sign(m.det().re))
}

/// Upper unitriangular `[[1,a,b],[0,1,c],[0,0,1]]`.
pub fn heisenberg_element(a: f64, b: f64, c: f64) -> Matrix {
    Matrix::from_real_fn(3, |i, j| match (i, j) {
        (0, 1) => a,
        (0, 2) => b,
        (1, 2) => c,
        _ if i == j => 1.0,
        _ => 0.0,
    })
}

/// Strictly upper triangular generator `[[0,a,b],[0,0,c],[0,0,0]]`.
pub fn heisenberg_generator(a: f64, b: f64, c: f64) -> Matrix {
    Matrix::from_real_fn(3, |i, j| match (i, j) {
        (0, 1) => a,
        (0, 2) => b,
        (1, 2) => c,
        _ => 0.0,
    })
}

/// `exp(X(a, b, c)) = A(a, b + ac/2, c)`.
pub fn heisenberg_exp(a: f64, b: f64, c: f64) -> Matrix {
    heisenberg_element(a, b + 0.5 * a * c, c)
}

/// Inverse of [`heisenberg_exp`] on H(3): recovers `(a, b, c)`.
pub fn heisenberg_log(m: &Matrix) -> Result<(f64, f64, f64)> {
    m.check_dim(3)?;
    let (a, c) = (m.re(0, 1), m.re(1, 2));
    Ok((a, m.re(0, 2) - 0.5 * a * c, c))
}

/// Rotation by `alpha`, `exp(alpha E1)` with `E1 = E21 - E12`.
pub fn rotation2(alpha: f64) -> Matrix {
    let (s, c) = alpha.sin_cos();
    Matrix::from_real_fn(2, |i, j| match (i, j) {
        (0, 0) | (1, 1) => c,
        (0, 1) => -s,
        _ => s,
    })
}

/// `exp(alpha E1) exp(beta E2) exp(delta E3)` with `E1 = E21 - E12`,
/// `E2 = E11 - E22`, `E3 = E12`.
pub fn sl2_iwasawa(alpha: f64, beta: f64, delta: f64) -> Matrix {
    let k = rotation2(alpha);
    let a = Matrix::diag(&[beta.exp(), (-beta).exp()]);
    let nil = Matrix::from_real_fn(2, |i, j| match (i, j) {
        (0, 1) => delta,
        _ if i == j => 1.0,
        _ => 0.0,
    });
    &(&k * &a) * &nil
}

/// `[[cosh t, sinh t], [sinh t, cosh t]] = exp(t [[0,1],[1,0]])`.
pub fn lorentz_boost(t: f64) -> Matrix {
    let (c, s) = (t.cosh(), t.sinh());
    Matrix::from_real_fn(2, |i, j| if i == j { c } else { s })
}

/// Coset representative `A_i` of O(1,1): `I, -I, diag(1,-1), diag(-1,1)`.
pub fn o11_representative(i: u8) -> Result<Matrix> {
    Ok(match i {
        1 => Matrix::identity(2),
        2 => Matrix::diag(&[-1.0, -1.0]),
        3 => Matrix::diag(&[1.0, -1.0]),
        4 => Matrix::diag(&[-1.0, 1.0]),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "O(1,1) component index must be 1..=4, got {i}"
            )))
        }
    })
}

/// `A_i exp(t X)` with `X = [[0,1],[1,0]]`, one curve per component of O(1,1).
pub fn o11_element(i: u8, t: f64) -> Result<Matrix> {
    Ok(&o11_representative(i)? * &lorentz_boost(t))
}

/// Change of basis `Q = [e_1, ..., e_{n-1}, 1]` taking S(n) to the affine pattern.
fn affine_basis(n: usize) -> Matrix {
    Matrix::from_real_fn(n, |i, j| if i == j || j == n - 1 { 1.0 } else { 0.0 })
}

fn affine_basis_inv(n: usize) -> Matrix {
    Matrix::from_real_fn(n, |i, j| {
        if i == j {
            1.0
        } else if j == n - 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// `Q^{-1} M Q` for `M` in the stochastic group; the image has last column `e_n`.
pub fn stochastic_affine_embed(m: &Matrix, tol: f64) -> Result<Matrix> {
    let n = m.dim();
    let rep = in_group(m, GroupId::Stochastic { n }, tol)?;
    if !rep.belongs {
        return Err(Error::NotStochastic {
            residual: rep.residual,
        });
    }
    Ok(&(&affine_basis_inv(n) * m) * &affine_basis(n))
}

/// Inverse of [`stochastic_affine_embed`].
pub fn affine_to_stochastic(m: &Matrix) -> Matrix {
    let n = m.dim();
    &(&affine_basis(n) * m) * &affine_basis_inv(n)
}
