//! Global flows `Phi(t, A) = A exp(tX)` on matrix Lie groups, the linear
//! matrix ODE `A' = A X(t)` and its commuting-case closed form.

mod generator;
mod integrate;
mod magnus;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{in_algebra, in_group, GroupId};
use crate::matcore::{expm, Matrix};

pub use generator::{CallableGenerator, Generator, GeneratorTerm};
pub use integrate::{integrate_left, integrate_right, IntegratorConfig};
pub(crate) use integrate::{integrate, rk4_step};
pub use magnus::{commuting_magnus, magnus_omega, DEFAULT_COMMUTATOR_TOL};

/// Which side the generator multiplies on.
///
/// `Right` gives `A' = A X` and the flow `A exp(tX)` of a left-invariant
/// field; `Left` gives `A' = X A` and `exp(tX) A`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    #[default]
    Right,
    Left,
}

/// Any action of `(R, +)` on square matrices.
pub trait GlobalFlow {
    fn apply(&self, t: f64, a: &Matrix) -> Result<Matrix>;
}

/// Flow of the invariant vector field generated by `x` on `group`.
#[derive(Clone, Debug, PartialEq)]
pub struct Flow {
    x: Matrix,
    group: GroupId,
    side: Side,
    tol: f64,
}

/// Sampled orbit `t -> Phi(t, base)`; the first sample is always `(0, base)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowLine {
    pub base: Matrix,
    pub samples: Vec<(f64, Matrix)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowAxiomReport {
    /// `max ||Phi(0, A) - A||`
    pub identity_residual: f64,
    /// `max ||Phi(s, Phi(t, A)) - Phi(s + t, A)||`
    pub composition_residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitSample {
    pub t: f64,
    pub group_residual: f64,
    pub det: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitReport {
    pub samples: Vec<OrbitSample>,
    pub max_group_residual: f64,
    pub in_group: bool,
    pub det_sign_constant: bool,
}

impl Flow {
    /// Rejects generators outside the Lie algebra of `group`.
    pub fn new(x: Matrix, group: GroupId, tol: f64) -> Result<Self> {
        x.check_finite()?;
        let rep = in_algebra(&x, group.algebra(), tol)?;
        if !rep.belongs {
            return Err(Error::NotInAlgebra {
                group: group.to_string(),
                residual: rep.residual,
            });
        }
        Ok(Self {
            x,
            group,
            side: Side::Right,
            tol,
        })
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }

    pub fn generator(&self) -> &Matrix {
        &self.x
    }

    pub fn group(&self) -> GroupId {
        self.group
    }

    pub fn side(&self) -> Side {
        self.side
    }

    fn check_base(&self, a: &Matrix) -> Result<()> {
        let rep = in_group(a, self.group, self.tol)?;
        if rep.belongs {
            Ok(())
        } else {
            Err(Error::NotInGroup {
                group: self.group.to_string(),
                residual: rep.residual,
            })
        }
    }

    fn act(&self, t: f64, a: &Matrix) -> Result<Matrix> {
        let g = expm(&self.x.scale(t))?;
        Ok(match self.side {
            Side::Right => a * &g,
            Side::Left => &g * a,
        })
    }

    /// Velocity of the flow line through `a` at `t = 0`.
    pub fn velocity_at(&self, a: &Matrix) -> Matrix {
        match self.side {
            Side::Right => a * &self.x,
            Side::Left => &self.x * a,
        }
    }
}

impl GlobalFlow for Flow {
    fn apply(&self, t: f64, a: &Matrix) -> Result<Matrix> {
        flow_apply(self, t, a)
    }
}

/// `Phi(t, A)`, requiring `A` in the flow's group.
pub fn flow_apply(f: &Flow, t: f64, a: &Matrix) -> Result<Matrix> {
    f.check_base(a)?;
    f.act(t, a)
}

/// Checks `Phi(0, A) = A` and `Phi(s, Phi(t, A)) = Phi(s + t, A)` over all
/// bases and all `(s, t)` grid pairs.
pub fn flow_axioms<F: GlobalFlow + ?Sized>(
    f: &F,
    bases: &[Matrix],
    grid: &[f64],
    tol: f64,
) -> Result<FlowAxiomReport> {
    let mut identity_residual = 0.0f64;
    let mut composition_residual = 0.0f64;
    for a in bases {
        identity_residual = identity_residual.max(f.apply(0.0, a)?.distance(a));
        for &t in grid {
            let inner = f.apply(t, a)?;
            for &s in grid {
                let lhs = f.apply(s, &inner)?;
                let rhs = f.apply(s + t, a)?;
                composition_residual = composition_residual.max(lhs.distance(&rhs));
            }
        }
    }
    Ok(FlowAxiomReport {
        identity_residual,
        composition_residual,
        pass: identity_residual <= tol && composition_residual <= tol,
    })
}

/// Samples the flow line through `a` at `0` followed by the grid points.
pub fn flow_line(f: &Flow, a: &Matrix, grid: &[f64]) -> Result<FlowLine> {
    f.check_base(a)?;
    let mut samples = vec![(0.0, a.clone())];
    for &t in grid.iter().filter(|&&t| t != 0.0) {
        samples.push((t, f.act(t, a)?));
    }
    Ok(FlowLine {
        base: a.clone(),
        samples,
    })
}

impl FlowLine {
    /// Samples sorted by time.
    pub fn sorted(&self) -> Vec<(f64, Matrix)> {
        let mut s = self.samples.clone();
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        s
    }

    pub fn last(&self) -> &Matrix {
        &self.samples.last().expect("flow line is never empty").1
    }

    /// Group residual and determinant of every sample.
    pub fn orbit_report(&self, group: GroupId, tol: f64) -> Result<OrbitReport> {
        let mut samples = Vec::with_capacity(self.samples.len());
        let mut signs = Vec::with_capacity(self.samples.len());
        let mut max_group_residual = 0.0f64;
        let mut all_in = true;
        for (t, a) in &self.samples {
            let rep = in_group(a, group, tol)?;
            max_group_residual = max_group_residual.max(rep.residual);
            all_in &= rep.belongs;
            let det = a.det();
            signs.push(if a.is_singular() { 0.0 } else { det.re.signum() });
            samples.push(OrbitSample {
                t: *t,
                group_residual: rep.residual,
                det: det.re,
            });
        }
        let det_sign_constant = signs.iter().all(|&s| s != 0.0 && s == signs[0]);
        Ok(OrbitReport {
            samples,
            max_group_residual,
            in_group: all_in,
            det_sign_constant,
        })
    }
}
