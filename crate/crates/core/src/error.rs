use thiserror::Error;

/// Errors raised by the numerical kernel and the layers built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in input")]
    NonFiniteInput,
    #[error("result overflowed to a non-finite value")]
    Overflow,
    #[error("matrix is singular to working precision")]
    SingularMatrix,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square: {rows} rows, row {row} has {cols} entries")]
    NotSquare { rows: usize, row: usize, cols: usize },
    #[error("matrix has imaginary entries (max |im| = {max_imag:e})")]
    NotReal { max_imag: f64 },
    #[error("time {t} outside the integrated horizon [0, {horizon}]")]
    HorizonExceeded { t: f64, horizon: f64 },
    #[error("operation requires the {expected} curve variant")]
    WrongVariant { expected: &'static str },
    #[error("matrix is not in the stochastic group (residual {residual:e})")]
    NotStochastic { residual: f64 },
    #[error("negative off-diagonal rate q[{row}][{col}] = {value}")]
    NegativeOffDiagonal { row: usize, col: usize, value: f64 },
    #[error("row {row} of the rate matrix sums to {sum}, not 0")]
    RowSumNonzero { row: usize, sum: f64 },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("state subset needs at least 2 states, got {0}")]
    SubsetTooSmall(usize),
    #[error("base point is not in {group} (residual {residual:e})")]
    NotInGroup { group: String, residual: f64 },
    #[error("generator is not in the Lie algebra of {group} (residual {residual:e})")]
    NotInAlgebra { group: String, residual: f64 },
    #[error("generator evaluated to a non-finite matrix at t = {t}")]
    NonFiniteGenerator { t: f64 },
    #[error("commutator defect {defect:e} exceeds {bound:e}")]
    CommutatorTooLarge { defect: f64, bound: f64 },
    #[error("quadrature did not settle (last change {change:e})")]
    QuadratureNotConverged { change: f64 },
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
