//! Reverse-mode automatic differentiation for objective programs.
//!
//! Objectives are written as [`Expr`] graphs over a parameter vector, compiled
//! once with [`build_objective`], and evaluated through the [`Objective`]
//! trait. Each gradient evaluation records one [`Tape`] and runs one reverse
//! sweep over it.

mod expr;
mod oracle;
mod tape;

pub use expr::{build_objective, Binary, Expr, Program, Unary};
pub use oracle::{
    fd_gradient, fd_gradient_scaled, program_oracle, AnalyticOracle, LossScale, Objective,
    ObjectiveOracle, ProgramOracle,
};
pub use tape::{Adjoints, OpKind, Tape, Var};

pub(crate) use tape::logistic;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdError {
    #[error("domain error in `{op}` at tape node {node}")]
    Domain { node: usize, op: &'static str },
    #[error("variable belongs to a different tape")]
    ForeignVar,
    #[error("shape mismatch in `{op}`: {left} vs {right}")]
    Shape {
        op: &'static str,
        left: usize,
        right: usize,
    },
    #[error("expected a scalar, got length {len}")]
    NotScalar { len: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("unsupported operation `{0}`")]
    Unsupported(String),
    #[error("parameter used with dimensions {first} and {second}")]
    ParamDim { first: usize, second: usize },
    #[error("objective does not depend on a parameter vector")]
    NoParameter,
    #[error("expected parameter vector of length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),
}
