//! Continuous-time Markov evolution algebras: rate matrices, their
//! transition semigroups `exp(tQ)` and the laws those semigroups obey.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{expm, expm_frechet, Matrix};

/// Entries of `exp(tQ)` down to this value count as nonnegative.
pub const NONNEG_TOL: f64 = 1e-12;

/// A validated Markov generator: real, nonnegative off the diagonal, zero row sums.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RateMatrix(Matrix);

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct StationaryDistribution(Vec<f64>);

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "defect", rename_all = "snake_case")]
pub enum RateDefect {
    NegativeOffDiagonal { row: usize, col: usize, value: f64 },
    RowSumNonzero { row: usize, sum: f64 },
}

/// `exp(tQ)` together with its Markov diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SemigroupSample {
    pub t: f64,
    pub matrix: Matrix,
    /// Set for `t < 0`, where nonnegativity is no longer guaranteed.
    pub non_markov_range: bool,
    pub min_entry: f64,
    pub row_sum_defect: f64,
    pub det: f64,
    /// `e^{t tr Q}`
    pub exp_trace: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomsReport {
    /// (i) each `A(t)` is a Markov matrix.
    pub markov_matrix: AxiomCheck,
    /// (ii) `A(0) = I`.
    pub identity_at_zero: AxiomCheck,
    /// (iii) `A(t + s) = A(t) A(s)`.
    pub chapman_kolmogorov: AxiomCheck,
    /// (iv) `||A(2^-k) - I||` decreasing to zero, k = 1..20.
    pub continuity_at_zero: AxiomCheck,
    pub continuity_profile: Vec<f64>,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KolmogorovReport {
    /// `max ||A'(t) - Q A(t)||`
    pub backward: f64,
    /// `max ||A'(t) - A(t) Q||`
    pub forward: f64,
    /// `||A'(0) - Q||`
    pub at_origin: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BalanceReport {
    pub max_defect: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub pass: bool,
}

/// All violations of the rate-matrix conditions, in row-major order.
pub fn rate_defects(q: &Matrix, tol: f64) -> Vec<RateDefect> {
    let n = q.dim();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && q.re(i, j) < -tol {
                out.push(RateDefect::NegativeOffDiagonal {
                    row: i,
                    col: j,
                    value: q.re(i, j),
                });
            }
        }
    }
    for (i, s) in q.row_sums().iter().enumerate() {
        if s.re.abs() > tol {
            out.push(RateDefect::RowSumNonzero { row: i, sum: s.re });
        }
    }
    out
}

pub fn validate_rate(q: &Matrix, tol: f64) -> Result<RateMatrix> {
    q.check_finite()?;
    let max_imag = q.max_imag();
    if max_imag > 0.0 {
        return Err(Error::NotReal { max_imag });
    }
    match rate_defects(q, tol).first() {
        None => Ok(RateMatrix(q.clone())),
        Some(&RateDefect::NegativeOffDiagonal { row, col, value }) => {
            Err(Error::NegativeOffDiagonal { row, col, value })
        }
        Some(&RateDefect::RowSumNonzero { row, sum }) => Err(Error::RowSumNonzero { row, sum }),
    }
}

impl RateMatrix {
    pub fn new(q: Matrix, tol: f64) -> Result<Self> {
        validate_rate(&q, tol)
    }

    /// Rate matrix of the two-state flip-flop chain.
    pub fn flip_flop(lambda: f64) -> Result<Self> {
        let q = Matrix::from_real_rows(&[[-lambda, lambda], [lambda, -lambda]])?;
        validate_rate(&q, 0.0)
    }

    /// Birth–death chain: `births[i]` is the rate `i -> i+1`, `deaths[i]`
    /// the rate `i+1 -> i`.
    pub fn birth_death(births: &[f64], deaths: &[f64]) -> Result<Self> {
        if births.len() != deaths.len() {
            return Err(Error::DimensionMismatch {
                expected: births.len(),
                found: deaths.len(),
            });
        }
        let n = births.len() + 1;
        let mut q = Matrix::zeros(n);
        for i in 0..n - 1 {
            q[(i, i + 1)].re = births[i];
            q[(i + 1, i)].re = deaths[i];
        }
        Ok(RateMatrix(with_balanced_diagonal(&q)))
    }

    /// Off-diagonal rates i.i.d. uniform on `[0, 1)`, diagonal set to minus the row sum.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let q = Matrix::from_real_fn(n, |i, j| if i == j { 0.0 } else { rng.random::<f64>() });
        RateMatrix(with_balanced_diagonal(&q))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }
}

/// Replaces each diagonal entry by minus the off-diagonal row sum.
fn with_balanced_diagonal(q: &Matrix) -> Matrix {
    let n = q.dim();
    let mut out = q.clone();
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| q.re(i, j)).sum();
        out[(i, i)].re = -off;
        out[(i, i)].im = 0.0;
    }
    out
}

impl StationaryDistribution {
    pub fn new(p: Vec<f64>, tol: f64) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < -tol) {
            return Err(Error::InvalidDistribution(format!("entry {x} is not a probability")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(Self(p))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// Stationary law of a birth–death chain from `pi_{i+1} / pi_i = births[i] / deaths[i]`.
    pub fn birth_death(births: &[f64], deaths: &[f64]) -> Result<Self> {
        let mut w = vec![1.0];
        for (b, d) in births.iter().zip(deaths) {
            if *d <= 0.0 {
                return Err(Error::InvalidDistribution("death rates must be positive".into()));
            }
            let last = *w.last().unwrap();
            w.push(last * b / d);
        }
        let total: f64 = w.iter().sum();
        Ok(Self(w.into_iter().map(|x| x / total).collect()))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    /// Restriction to `subset`, renormalised.
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        let mut w = Vec::with_capacity(subset.len());
        for &i in subset {
            w.push(*self.0.get(i).ok_or_else(|| {
                Error::InvalidParameter(format!("state {i} out of range"))
            })?);
        }
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("no mass on subset".into()));
        }
        Ok(Self(w.into_iter().map(|x| x / total).collect()))
    }
}

pub fn semigroup_at(q: &RateMatrix, t: f64) -> Result<SemigroupSample> {
    if !t.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let a = expm(&q.0.scale(t))?;
    let min_entry = a.entries().iter().fold(f64::INFINITY, |m, z| m.min(z.re));
    let row_sum_defect = a
        .row_sums()
        .iter()
        .fold(0.0f64, |m, s| m.max((s.re - 1.0).abs()));
    Ok(SemigroupSample {
        t,
        det: a.det().re,
        exp_trace: (t * q.trace()).exp(),
        matrix: a,
        non_markov_range: t < 0.0,
        min_entry,
        row_sum_defect,
    })
}

impl SemigroupSample {
    /// Whether the sample is a Markov matrix up to rounding.
    pub fn is_markov(&self, tol: f64) -> bool {
        self.min_entry >= -NONNEG_TOL && self.row_sum_defect <= tol
    }

    /// The matrix with entries in `[-NONNEG_TOL, 0)` set to zero.
    pub fn clamped(&self) -> Matrix {
        let mut m = self.matrix.clone();
        let n = m.dim();
        for i in 0..n {
            for j in 0..n {
                let z = &mut m[(i, j)];
                if z.re < 0.0 && z.re >= -NONNEG_TOL {
                    z.re = 0.0;
                }
            }
        }
        m
    }
}

fn check(residual: f64, tol: f64) -> AxiomCheck {
    AxiomCheck {
        residual,
        pass: residual <= tol,
    }
}

/// Checks the four standard-semigroup axioms on a grid of nonnegative times.
pub fn axioms_report(q: &RateMatrix, grid: &[f64], tol: f64) -> Result<AxiomsReport> {
    if let Some(t) = grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::BadGrid(format!("time {t} is not in [0, inf)")));
    }
    let n = q.dim();
    let samples = grid
        .iter()
        .map(|&t| semigroup_at(q, t))
        .collect::<Result<Vec<_>>>()?;

    let mut markov = 0.0f64;
    let mut markov_ok = true;
    for s in &samples {
        markov = markov.max(s.row_sum_defect).max((-s.min_entry).max(0.0));
        markov_ok &= s.is_markov(tol);
    }
    let markov_matrix = AxiomCheck {
        residual: markov,
        pass: markov_ok,
    };

    let identity_at_zero = check(semigroup_at(q, 0.0)?.matrix.distance(&Matrix::identity(n)), tol);

    let mut ck = 0.0f64;
    for (s, a) in grid.iter().zip(&samples) {
        for (t, b) in grid.iter().zip(&samples) {
            let joint = semigroup_at(q, s + t)?.matrix;
            ck = ck.max(joint.distance(&(&a.matrix * &b.matrix)));
        }
    }
    let chapman_kolmogorov = check(ck, tol);

    // ||e^{tQ} - I|| <= e^{t||Q||} - 1, and the profile must not increase.
    let qn = q.0.frob_norm();
    let mut profile = Vec::with_capacity(20);
    let mut cont = 0.0f64;
    for k in 1..=20 {
        let t = 2f64.powi(-k);
        let d = semigroup_at(q, t)?.matrix.distance(&Matrix::identity(n));
        cont = cont.max(d - (t * qn).exp_m1());
        if let Some(&prev) = profile.last() {
            cont = cont.max(d - prev);
        }
        profile.push(d);
    }
    let continuity_at_zero = check(cont.max(0.0), tol);

    let pass = markov_matrix.pass && identity_at_zero.pass && chapman_kolmogorov.pass && continuity_at_zero.pass;
    Ok(AxiomsReport {
        markov_matrix,
        identity_at_zero,
        chapman_kolmogorov,
        continuity_at_zero,
        continuity_profile: profile,
        pass,
    })
}

/// Residuals of `A' = Q A` and `A' = A Q` with `A'(t)` taken from the
/// Fréchet derivative of the exponential in direction `Q`.
pub fn kolmogorov_residuals(q: &RateMatrix, grid: &[f64]) -> Result<KolmogorovReport> {
    let qm = &q.0;
    let mut backward = 0.0f64;
    let mut forward = 0.0f64;
    for &t in grid {
        let (a, da) = expm_frechet(&qm.scale(t), qm)?;
        backward = backward.max(da.distance(&(qm * &a)));
        forward = forward.max(da.distance(&(&a * qm)));
    }
    let (_, d0) = expm_frechet(&Matrix::zeros(q.dim()), qm)?;
    Ok(KolmogorovReport {
        backward,
        forward,
        at_origin: d0.distance(qm),
    })
}

/// `max_t |det e^{tQ} - e^{t tr Q}| / e^{t tr Q}`
pub fn det_trace_identity(q: &RateMatrix, grid: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &t in grid {
        let s = semigroup_at(q, t)?;
        worst = worst.max((s.det - s.exp_trace).abs() / s.exp_trace);
    }
    Ok(worst)
}

/// `max_{i != j} |pi_i q_ij - pi_j q_ji|`
pub fn detailed_balance(q: &RateMatrix, pi: &StationaryDistribution, tol: f64) -> Result<BalanceReport> {
    let n = q.dim();
    if pi.0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: pi.0.len(),
        });
    }
    let mut max_defect = 0.0f64;
    let mut worst_pair = None;
    for i in 0..n {
        for j in i + 1..n {
            let d = (pi.0[i] * q.0.re(i, j) - pi.0[j] * q.0.re(j, i)).abs();
            if d > max_defect {
                max_defect = d;
                worst_pair = Some((i, j));
            }
        }
    }
    Ok(BalanceReport {
        max_defect,
        worst_pair,
        pass: max_defect <= tol,
    })
}

/// Keeps the off-diagonal rates among `subset` (in the given order) and
/// rebalances the diagonal.
pub fn truncate_reversible(q: &RateMatrix, subset: &[usize]) -> Result<RateMatrix> {
    if subset.len() < 2 {
        return Err(Error::SubsetTooSmall(subset.len()));
    }
    let n = q.dim();
    let mut seen = vec![false; n];
    for &i in subset {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParameter(format!("bad or repeated state {i} in subset")));
        }
    }
    let m = subset.len();
    let kept = Matrix::from_real_fn(m, |a, b| if a == b { 0.0 } else { q.0.re(subset[a], subset[b]) });
    Ok(RateMatrix(with_balanced_diagonal(&kept)))
}

/// Row vector `p A`.
pub fn evolve_distribution(p: &[f64], a: &Matrix) -> Result<Vec<f64>> {
    let n = a.dim();
    if p.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.len(),
        });
    }
    Ok((0..n).map(|j| (0..n).map(|i| p[i] * a.re(i, j)).sum()).collect())
}
