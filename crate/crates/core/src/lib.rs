//! Sparsity-constrained optimization: minimize f(θ) subject to ‖θ‖₀ ≤ s.
//!
//! Objectives are programmed with [`ad::Expr`] and differentiated by a
//! reverse-mode tape, or supplied with an analytic gradient. Eight iterative
//! solvers share the [`ScoProblem`] / [`ScoSolution`] contract; the
//! [`selection`] module picks s by information criteria or cross-validation,
//! and [`zoo`] holds the benchmark models.

pub mod ad;
mod error;
pub mod exhaustive;
pub mod metrics;
pub mod problem;
pub mod restricted;
pub mod selection;
pub mod solvers;
pub mod threshold;
pub mod zoo;

pub use ad::{AdError, Expr, LossScale, Objective, ObjectiveOracle};
pub use error::{Result, ScoError};
pub use problem::{
    validate_solution, GroupView, ScoProblem, ScoProblemBuilder, ScoSolution, SolverConfig,
    TraceEntry,
};
pub use restricted::{restricted_minimize, Restricted};
pub use solvers::{solve, SolverKind};
pub use threshold::{hard_threshold, project_feasible};
pub use exhaustive::exhaustive_oracle;
pub use metrics::{support_metrics, Metrics};
pub use selection::{
    cross_validate, information_criterion, select_by_criterion, solve_path, Criterion, PathResult,
    SparsityGrid,
};
pub use zoo::{generate, Dataset, ModelKind, ModelSpec};
