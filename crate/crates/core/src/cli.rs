//! `evolflow` command-line front end.
//!
//! Every invocation prints one JSON report on standard output and a one-line
//! summary on standard error. Exit codes: 0 pass, 1 a check failed its
//! tolerance, 2 usage or I/O error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::curves::{self, CurveSpec};
use crate::error::Error;
use crate::flows::{self, Flow, Generator, IntegratorConfig, Side};
use crate::lie::{self, AlgebraId, GroupId};
use crate::markov::{self, RateMatrix, StationaryDistribution};
use crate::matcore::{expm, Matrix};

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "EVOLFLOW_SEED";

#[derive(Parser, Debug)]
#[command(name = "evolflow", version, about = "Continuous evolution algebras on matrix Lie groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Matrix exponential of a matrix file.
    Expm(ExpmArgs),
    /// Evaluate a curve (or its derivative) on a time grid.
    CurveEval(CurveEvalArgs),
    /// Check a curve: one-parameter subgroup law, matrix ODE, or perfectness.
    CurveCheck(CurveCheckArgs),
    /// Membership of a matrix in a matrix Lie group.
    GroupCheck(GroupCheckArgs),
    /// Membership of a matrix in a Lie algebra.
    AlgebraCheck(AlgebraCheckArgs),
    /// Transition semigroup exp(tQ) of a rate matrix.
    MarkovSemigroup(MarkovSemigroupArgs),
    /// Validate a rate matrix and check the semigroup axioms.
    MarkovValidate(MarkovValidateArgs),
    /// Detailed balance of a rate matrix against a distribution.
    MarkovBalance(MarkovBalanceArgs),
    /// Sample a flow line A exp(tX) and check it stays in its group.
    FlowOrbit(FlowOrbitArgs),
    /// Integrate A' = A X(t) with fixed-step RK4.
    OdeSolve(OdeSolveArgs),
    /// Commuting-case solution A0 exp(int_0^t X).
    Magnus(MagnusArgs),
}

#[derive(Args, Debug)]
struct ExpmArgs {
    matrix: PathBuf,
    /// Exponentiate t * X.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    t: f64,
    /// Tolerance on ||exp(-tX) exp(tX) - I||.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Debug)]
struct CurveEvalArgs {
    curve: PathBuf,
    /// Time grid: `a:b:step`, a number, a comma list or a JSON list.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    t: String,
    #[arg(long)]
    derivative: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CurveCheckKind {
    Subgroup,
    Ode,
    Perfectness,
}

#[derive(Args, Debug)]
struct CurveCheckArgs {
    curve: PathBuf,
    #[arg(long, value_enum)]
    check: CurveCheckKind,
    #[arg(long, default_value = "-2:2:0.1", allow_hyphen_values = true)]
    grid: String,
    /// Generator matrix X for the `ode` check.
    #[arg(long)]
    generator: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args, Debug)]
struct GroupCheckArgs {
    /// gl, sl, o, so, u, su, stochastic, omega, lorentz11, o11, heis3, affine
    #[arg(long)]
    group: String,
    /// Common row/column sum for `omega`.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    s: f64,
    #[arg(long, default_value_t = lie::DEFAULT_TOL)]
    tol: f64,
    matrix: PathBuf,
}

#[derive(Args, Debug)]
struct AlgebraCheckArgs {
    /// gl, sl, so, u, su, rate, omega0, heis3, lor11
    #[arg(long)]
    algebra: String,
    #[arg(long, default_value_t = lie::DEFAULT_TOL)]
    tol: f64,
    matrix: PathBuf,
}

#[derive(Args, Debug)]
struct MarkovSemigroupArgs {
    /// Flip-flop rate.
    #[arg(long, conflicts_with_all = ["rate", "random"])]
    lambda: Option<f64>,
    /// Rate matrix file.
    #[arg(long, conflicts_with = "random")]
    rate: Option<PathBuf>,
    /// Random rate matrix with this many states.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Time grid string.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "t_grid")]
    t: Option<String>,
    /// Time grid file (JSON list).
    #[arg(long)]
    t_grid: Option<PathBuf>,
    /// Row-sum tolerance for the Markov property.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MarkovValidateArgs {
    #[arg(long)]
    rate: PathBuf,
    /// Tolerance on negative rates and row sums.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value = "0,0.3,0.7,1.1")]
    grid: String,
    #[arg(long, default_value_t = 1e-9)]
    axiom_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    kolmogorov_tol: f64,
}

#[derive(Args, Debug)]
struct MarkovBalanceArgs {
    #[arg(long)]
    rate: PathBuf,
    /// Distribution file (JSON list).
    #[arg(long)]
    pi: PathBuf,
    /// Zero-based states to keep, e.g. `0,1,2`.
    #[arg(long)]
    truncate: Option<String>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Right,
    Left,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Right => Side::Right,
            SideArg::Left => Side::Left,
        }
    }
}

#[derive(Args, Debug)]
struct FlowOrbitArgs {
    #[arg(long)]
    generator: PathBuf,
    #[arg(long)]
    base: PathBuf,
    #[arg(long, default_value = "-2:2:0.1", allow_hyphen_values = true)]
    grid: String,
    #[arg(long)]
    group: String,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    s: f64,
    #[arg(long, value_enum, default_value = "right")]
    side: SideArg,
    #[arg(long, default_value_t = lie::DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OdeSolveArgs {
    #[arg(long)]
    gen_spec: PathBuf,
    #[arg(long)]
    a0: PathBuf,
    #[arg(long = "T")]
    horizon: f64,
    #[arg(long)]
    h: f64,
    #[arg(long, value_enum, default_value = "right")]
    side: SideArg,
    /// Tolerance against the exponential for constant generators.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MagnusArgs {
    #[arg(long)]
    gen_spec: PathBuf,
    /// Initial matrix; identity when absent.
    #[arg(long)]
    a0: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    t: f64,
    #[arg(long, default_value_t = flows::DEFAULT_COMMUTATOR_TOL)]
    tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// Machine-readable outcome of one invocation.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub residuals: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Report {
    fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            status: Status::Pass,
            residuals: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            payload: None,
            csv: None,
            message: None,
        }
    }

    /// Records a residual and its tolerance; fails the report if exceeded.
    fn check(&mut self, name: &str, residual: f64, tol: f64) {
        self.residuals.insert(name.into(), residual);
        self.tolerances.insert(name.into(), tol);
        if residual.is_nan() || residual > tol {
            self.status = Status::Fail;
        }
    }

    fn require(&mut self, ok: bool) {
        if !ok {
            self.status = Status::Fail;
        }
    }

    fn payload<T: Serialize>(&mut self, value: &T) {
        self.payload = Some(serde_json::to_value(value).expect("report payload serializes"));
    }

    fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Io(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Errors that mean "a check did not hold" rather than "bad invocation".
fn failure_residual(e: &Error) -> Option<(&'static str, f64)> {
    match *e {
        Error::NotInGroup { residual, .. } => Some(("group_membership", residual)),
        Error::NotInAlgebra { residual, .. } => Some(("algebra_membership", residual)),
        Error::NotStochastic { residual } => Some(("stochastic", residual)),
        Error::CommutatorTooLarge { defect, .. } => Some(("commutator_defect", defect)),
        Error::NegativeOffDiagonal { value, .. } => Some(("negative_rate", -value)),
        Error::RowSumNonzero { sum, .. } => Some(("rate_row_sum", sum.abs())),
        _ => None,
    }
}

/// Parses a time grid.
///
/// Accepts `a:b:step` (inclusive, last interval may be short), a single
/// number, a comma-separated list, or a JSON list.
pub fn parse_grid(spec: &str) -> crate::Result<Vec<f64>> {
    let spec = spec.trim();
    let bad = |msg: String| Error::BadGrid(msg);
    let values: Vec<f64> = if spec.starts_with('[') {
        serde_json::from_str(spec).map_err(|e| bad(format!("{spec}: {e}")))?
    } else if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("expected a:b:step, got `{spec}`")));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
        let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(a.is_finite() && b.is_finite() && step.is_finite()) {
            return Err(bad("non-finite grid bound".into()));
        }
        if a > b {
            return Err(bad(format!("start {a} exceeds end {b}")));
        }
        if step <= 0.0 {
            return Err(bad(format!("step must be positive, got {step}")));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize;
        let mut pts: Vec<f64> = (0..=count)
            .map(|k| {
                let x = a + k as f64 * step;
                if x.abs() < 1e-12 * step {
                    0.0
                } else {
                    x
                }
            })
            .collect();
        let last = pts.last_mut().expect("grid has a first point");
        if (*last - b).abs() <= 1e-9 * step {
            *last = b;
        } else if *last < b {
            pts.push(b);
        }
        pts
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}"))))
            .collect::<crate::Result<_>>()?
    };
    if values.is_empty() {
        return Err(bad("empty grid".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("non-finite grid point".into()));
    }
    Ok(values)
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn seed(explicit: Option<u64>) -> u64 {
    explicit
        .or_else(|| std::env::var(SEED_ENV).ok()?.trim().parse().ok())
        .unwrap_or(0)
}

fn entry_header(n: usize) -> String {
    let mut h = String::new();
    for i in 1..=n {
        for j in 1..=n {
            let _ = write!(h, ",a_{i}_{j}");
        }
    }
    h
}

/// Real parts, row-major, each preceded by a comma.
fn entry_fields(m: &Matrix) -> String {
    let mut s = String::new();
    for z in m.entries() {
        let _ = write!(s, ",{}", z.re);
    }
    s
}

fn matrix_csv(samples: &[(f64, Matrix)]) -> String {
    let n = samples.first().map_or(0, |(_, m)| m.dim());
    let mut csv = format!("t{}\n", entry_header(n));
    for (t, m) in samples {
        let _ = writeln!(csv, "{t}{}", entry_fields(m));
    }
    csv
}

fn cmd_expm(a: &ExpmArgs) -> CliResult<Report> {
    let x: Matrix = read_json(&a.matrix)?;
    let e = expm(&x.scale(a.t))?;
    let e_inv = expm(&x.scale(-a.t))?;
    let mut r = Report::new("expm");
    r.check("inverse_law", (&e_inv * &e).distance(&Matrix::identity(x.dim())), a.tol);
    r.payload(&json!({ "matrix": e, "det": e.det().re, "exp_trace": (a.t * x.trace().re).exp() }));
    Ok(r)
}

fn cmd_curve_eval(a: &CurveEvalArgs) -> CliResult<Report> {
    let c: CurveSpec = read_json(&a.curve)?;
    let grid = parse_grid(&a.t)?;
    let samples = grid
        .iter()
        .map(|&t| {
            let m = if a.derivative {
                curves::derivative(&c, t)?
            } else {
                curves::eval_curve(&c, t)?
            };
            Ok((t, m))
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let mut r = Report::new("curve-eval");
    let payload: Vec<Value> = samples
        .iter()
        .map(|(t, m)| json!({ "t": t, "matrix": m }))
        .collect();
    r.payload(&payload);
    if let Some(out) = &a.out {
        write_text(out, &matrix_csv(&samples))?;
        r.csv = Some(out.clone());
    }
    Ok(r)
}

fn cmd_curve_check(a: &CurveCheckArgs) -> CliResult<Report> {
    let c: CurveSpec = read_json(&a.curve)?;
    let grid = parse_grid(&a.grid)?;
    let mut r = Report::new("curve-check");
    match a.check {
        CurveCheckKind::Subgroup => {
            let rep = curves::check_one_parameter_subgroup(&c, &grid, a.tol)?;
            r.check("identity", rep.identity_residual, a.tol);
            r.check("homomorphism", rep.homomorphism_residual, a.tol);
            r.payload(&rep);
        }
        CurveCheckKind::Ode => {
            let path = a
                .generator
                .as_ref()
                .ok_or_else(|| CliError::Io("--generator is required for the ode check".into()))?;
            let x: Matrix = read_json(path)?;
            let rep = curves::check_ode(&c, &x, &grid, a.tol)?;
            r.check("ode", rep.residual, a.tol);
            r.payload(&rep);
        }
        CurveCheckKind::Perfectness => {
            let rep = curves::perfectness_profile(&c, &grid)?;
            let ok = match rep.expected_sign {
                Some(0) => rep.never_perfect,
                Some(s) => rep.perfect_everywhere && rep.samples.iter().all(|p| p.sign == Some(s)),
                None => rep.perfect_everywhere && rep.sign_constant != Some(false),
            };
            r.require(ok);
            r.payload(&rep);
        }
    }
    Ok(r)
}

fn cmd_group_check(a: &GroupCheckArgs) -> CliResult<Report> {
    let m: Matrix = read_json(&a.matrix)?;
    let g = GroupId::parse(&a.group, m.dim(), a.s)?;
    let rep = lie::in_group(&m, g, a.tol)?;
    let mut r = Report::new("group-check");
    r.check("membership", rep.residual, a.tol);
    r.payload(&json!({ "group": g.to_string(), "report": rep }));
    Ok(r)
}

fn cmd_algebra_check(a: &AlgebraCheckArgs) -> CliResult<Report> {
    let m: Matrix = read_json(&a.matrix)?;
    let alg = AlgebraId::parse(&a.algebra, m.dim())?;
    let rep = lie::in_algebra(&m, alg, a.tol)?;
    let mut r = Report::new("algebra-check");
    r.check("membership", rep.residual, a.tol);
    r.payload(&json!({ "algebra": alg, "report": rep }));
    Ok(r)
}

fn markov_source(lambda: Option<f64>, rate: Option<&PathBuf>, random: Option<usize>, seed_arg: Option<u64>) -> CliResult<RateMatrix> {
    Ok(match (lambda, rate, random) {
        (Some(l), None, None) => RateMatrix::flip_flop(l)?,
        (None, Some(path), None) => {
            let q: Matrix = read_json(path)?;
            markov::validate_rate(&q, 1e-12)?
        }
        (None, None, Some(n)) if n > 0 => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed(seed_arg));
            RateMatrix::random(n, &mut rng)
        }
        _ => {
            return Err(CliError::Io(
                "give exactly one of --lambda, --rate, --random <n>".into(),
            ))
        }
    })
}

fn cmd_markov_semigroup(a: &MarkovSemigroupArgs) -> CliResult<Report> {
    let q = markov_source(a.lambda, a.rate.as_ref(), a.random, a.seed)?;
    let grid = match (&a.t, &a.t_grid) {
        (Some(spec), None) => parse_grid(spec)?,
        (None, Some(path)) => parse_grid(&read_text(path)?)?,
        _ => return Err(CliError::Io("give --t or --t-grid".into())),
    };
    let samples = grid
        .iter()
        .map(|&t| markov::semigroup_at(&q, t))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut r = Report::new("markov-semigroup");
    let forward: Vec<_> = samples.iter().filter(|s| !s.non_markov_range).collect();
    let row_sum = forward.iter().fold(0.0f64, |m, s| m.max(s.row_sum_defect));
    let negative = forward.iter().fold(0.0f64, |m, s| m.max(-s.min_entry));
    let det_trace = samples
        .iter()
        .fold(0.0f64, |m, s| m.max((s.det - s.exp_trace).abs() / s.exp_trace));
    r.check("row_sum_defect", row_sum, a.tol);
    r.check("negative_entry", negative.max(0.0), markov::NONNEG_TOL);
    r.check("det_trace", det_trace, 1e-8);
    let flagged: Vec<f64> = samples.iter().filter(|s| s.non_markov_range).map(|s| s.t).collect();
    let rows: Vec<Value> = samples
        .iter()
        .map(|s| {
            let m = if s.non_markov_range { s.matrix.clone() } else { s.clamped() };
            json!({
                "t": s.t,
                "matrix": m,
                "non_markov_range": s.non_markov_range,
                "min_entry": s.min_entry,
                "row_sum_defect": s.row_sum_defect,
                "det": s.det,
                "exp_trace": s.exp_trace,
            })
        })
        .collect();
    r.payload(&json!({ "rate": q, "samples": rows, "non_markov_range": flagged }));
    if let Some(out) = &a.out {
        let mut csv = format!("t{},row_sum_defect,det,exp_trace\n", entry_header(q.dim()));
        for s in &samples {
            let _ = writeln!(csv, "{}{},{},{},{}", s.t, entry_fields(&s.matrix), s.row_sum_defect, s.det, s.exp_trace);
        }
        write_text(out, &csv)?;
        r.csv = Some(out.clone());
    }
    Ok(r)
}

fn cmd_markov_validate(a: &MarkovValidateArgs) -> CliResult<Report> {
    let m: Matrix = read_json(&a.rate)?;
    let mut r = Report::new("markov-validate");
    let defects = markov::rate_defects(&m, a.tol);
    if !defects.is_empty() || m.max_imag() > 0.0 {
        r.status = Status::Fail;
        r.payload(&json!({ "valid": false, "defects": defects, "max_imag": m.max_imag() }));
        return Ok(r);
    }
    let q = markov::validate_rate(&m, a.tol)?;
    let grid = parse_grid(&a.grid)?;
    let ax = markov::axioms_report(&q, &grid, a.axiom_tol)?;
    r.check("markov_matrix", ax.markov_matrix.residual, a.axiom_tol);
    r.check("identity_at_zero", ax.identity_at_zero.residual, a.axiom_tol);
    r.check("chapman_kolmogorov", ax.chapman_kolmogorov.residual, a.axiom_tol);
    r.check("continuity_at_zero", ax.continuity_at_zero.residual, a.axiom_tol);
    r.require(ax.pass);
    let k = markov::kolmogorov_residuals(&q, &grid)?;
    r.check("kolmogorov_backward", k.backward, a.kolmogorov_tol);
    r.check("kolmogorov_forward", k.forward, a.kolmogorov_tol);
    r.check("kolmogorov_origin", k.at_origin, a.kolmogorov_tol);
    let dt = markov::det_trace_identity(&q, &grid)?;
    r.check("det_trace", dt, a.kolmogorov_tol);
    r.payload(&json!({ "valid": true, "axioms": ax, "kolmogorov": k }));
    Ok(r)
}

fn parse_states(spec: &str) -> CliResult<Vec<usize>> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| CliError::Io(format!("bad state `{s}`: {e}")))
        })
        .collect()
}

fn cmd_markov_balance(a: &MarkovBalanceArgs) -> CliResult<Report> {
    let m: Matrix = read_json(&a.rate)?;
    let mut q = markov::validate_rate(&m, 1e-12)?;
    let mut pi = StationaryDistribution::new(read_json(&a.pi)?, 1e-9)?;
    let mut r = Report::new("markov-balance");
    if let Some(spec) = &a.truncate {
        let subset = parse_states(spec)?;
        q = markov::truncate_reversible(&q, &subset)?;
        pi = pi.restrict(&subset)?;
    }
    let rep = markov::detailed_balance(&q, &pi, a.tol)?;
    r.check("detailed_balance", rep.max_defect, a.tol);
    r.payload(&json!({ "rate": q, "pi": pi, "report": rep }));
    Ok(r)
}

fn cmd_flow_orbit(a: &FlowOrbitArgs) -> CliResult<Report> {
    let x: Matrix = read_json(&a.generator)?;
    let base: Matrix = read_json(&a.base)?;
    let group = GroupId::parse(&a.group, base.dim(), a.s)?;
    let grid = parse_grid(&a.grid)?;
    let f = Flow::new(x, group, a.tol)?.with_side(a.side.into());
    let line = flows::flow_line(&f, &base, &grid)?;
    let orbit = line.orbit_report(group, a.tol)?;
    let axioms = flows::flow_axioms(&f, std::slice::from_ref(&base), &grid, a.tol)?;
    let mut r = Report::new("flow-orbit");
    r.check("max_group_residual", orbit.max_group_residual, a.tol);
    r.check("flow_identity", axioms.identity_residual, a.tol);
    r.check("flow_composition", axioms.composition_residual, a.tol);
    r.require(orbit.det_sign_constant);
    r.payload(&json!({
        "group": group.to_string(),
        "det_sign_constant": orbit.det_sign_constant,
        "velocity_at_base": f.velocity_at(&base),
        "samples": orbit.samples,
    }));
    if let Some(out) = &a.out {
        let mut sorted: Vec<_> = line.samples.iter().zip(&orbit.samples).collect();
        sorted.sort_by(|p, q| p.0 .0.total_cmp(&q.0 .0));
        let mut csv = format!("t{},group_residual,det\n", entry_header(base.dim()));
        for ((t, m), s) in sorted {
            let _ = writeln!(csv, "{t}{},{},{}", entry_fields(m), s.group_residual, s.det);
        }
        write_text(out, &csv)?;
        r.csv = Some(out.clone());
    }
    Ok(r)
}

fn cmd_ode_solve(a: &OdeSolveArgs) -> CliResult<Report> {
    let gen: Generator = read_json(&a.gen_spec)?;
    let a0: Matrix = read_json(&a.a0)?;
    let cfg = IntegratorConfig::new(a.h, a.horizon)?;
    let side: Side = a.side.into();
    let line = match side {
        Side::Right => flows::integrate_right(&gen, &a0, &cfg)?,
        Side::Left => flows::integrate_left(&gen, &a0, &cfg)?,
    };
    let last = line.last().clone();
    let mut r = Report::new("ode-solve");
    if let Some(x) = gen.as_constant() {
        let g = expm(&x.scale(a.horizon))?;
        let oracle = match side {
            Side::Right => &a0 * &g,
            Side::Left => &g * &a0,
        };
        r.check("oracle_error", last.distance(&oracle), a.tol);
    }
    r.payload(&json!({
        "T": a.horizon,
        "steps": line.samples.len() - 1,
        "matrix": last,
        "det": last.det().re,
    }));
    if let Some(out) = &a.out {
        write_text(out, &matrix_csv(&line.samples))?;
        r.csv = Some(out.clone());
    }
    Ok(r)
}

fn cmd_magnus(a: &MagnusArgs) -> CliResult<Report> {
    let gen: Generator = read_json(&a.gen_spec)?;
    let a0 = match &a.a0 {
        Some(p) => read_json(p)?,
        None => Matrix::identity(gen.dim()?),
    };
    let m = flows::commuting_magnus(&gen, &a0, a.t, a.tol)?;
    let mut r = Report::new("magnus");
    r.payload(&json!({ "t": a.t, "matrix": m, "omega": flows::magnus_omega(&gen, a.t)? }));
    Ok(r)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Expm(_) => "expm",
        Command::CurveEval(_) => "curve-eval",
        Command::CurveCheck(_) => "curve-check",
        Command::GroupCheck(_) => "group-check",
        Command::AlgebraCheck(_) => "algebra-check",
        Command::MarkovSemigroup(_) => "markov-semigroup",
        Command::MarkovValidate(_) => "markov-validate",
        Command::MarkovBalance(_) => "markov-balance",
        Command::FlowOrbit(_) => "flow-orbit",
        Command::OdeSolve(_) => "ode-solve",
        Command::Magnus(_) => "magnus",
    }
}

fn dispatch(c: &Command) -> CliResult<Report> {
    match c {
        Command::Expm(a) => cmd_expm(a),
        Command::CurveEval(a) => cmd_curve_eval(a),
        Command::CurveCheck(a) => cmd_curve_check(a),
        Command::GroupCheck(a) => cmd_group_check(a),
        Command::AlgebraCheck(a) => cmd_algebra_check(a),
        Command::MarkovSemigroup(a) => cmd_markov_semigroup(a),
        Command::MarkovValidate(a) => cmd_markov_validate(a),
        Command::MarkovBalance(a) => cmd_markov_balance(a),
        Command::FlowOrbit(a) => cmd_flow_orbit(a),
        Command::OdeSolve(a) => cmd_ode_solve(a),
        Command::Magnus(a) => cmd_magnus(a),
    }
}

fn summary(r: &Report) -> String {
    let status = match r.status {
        Status::Pass => "pass",
        Status::Fail => "FAIL",
        Status::Error => "error",
    };
    let mut line = format!("{}: {status}", r.command);
    for (k, v) in &r.residuals {
        match r.tolerances.get(k) {
            Some(tol) => {
                let _ = write!(line, "  {k}={v:.3e} (tol {tol:.0e})");
            }
            None => {
                let _ = write!(line, "  {k}={v:.3e}");
            }
        }
    }
    if let Some(m) = &r.message {
        let _ = write!(line, "  {m}");
    }
    line
}

/// Runs one invocation, writing the JSON report to `out` and diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    2
                }
            };
        }
    };
    let name = command_name(&cli.command);
    let report = match dispatch(&cli.command) {
        Ok(r) => r,
        Err(CliError::Lib(e)) if failure_residual(&e).is_some() => {
            let (key, residual) = failure_residual(&e).expect("checked above");
            let mut r = Report::new(name);
            r.status = Status::Fail;
            r.residuals.insert(key.into(), residual);
            if let Error::CommutatorTooLarge { bound, .. } = e {
                r.tolerances.insert(key.into(), bound);
            }
            r.message = Some(e.to_string());
            r
        }
        Err(e) => {
            let mut r = Report::new(name);
            r.status = Status::Error;
            r.message = Some(match e {
                CliError::Io(m) => m,
                CliError::Lib(e) => e.to_string(),
            });
            r
        }
    };
    let text = serde_json::to_string(&report).expect("report serializes");
    let _ = writeln!(out, "{text}");
    let _ = writeln!(err, "{}", summary(&report));
    report.exit_code()
}

/// Entry point used by the binary.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}
