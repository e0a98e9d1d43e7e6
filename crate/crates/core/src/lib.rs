//! Continuous evolution algebras as differentiable structure-matrix curves
//! on matrix Lie groups.
//!
//! An evolution algebra with natural basis `e_1..e_n` is fixed by its
//! structure matrix `A`, row `i` holding the coordinates of `e_i^2`. Letting
//! `A` move along a differentiable curve `t -> A(t)` gives a continuous
//! evolution algebra. The modules here build such curves (one-parameter
//! subgroups, Markov semigroups, flow lines, ODE solutions), evaluate the
//! algebras they carry and check the laws they must satisfy.

pub mod cli;
pub mod curves;
pub mod error;
pub mod evoalg;
pub mod flows;
pub mod lie;
pub mod markov;
pub mod matcore;

pub use error::{Error, Result};
pub use matcore::{expm, Matrix, Scalar};
