//! The eight sparsity-constrained solvers.
//!
//! Every solver works on selectable units (coordinates, or groups of them),
//! treats preselected coordinates as always free, and finishes with a
//! restricted refit on its final support.

mod greedy;
mod pdas;
mod scope;
mod thresholding;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ad::AdError;
use crate::error::{Result, ScoError};
use crate::problem::{GroupView, ScoProblem, ScoSolution, SolverConfig, TraceEntry};
use crate::restricted::{restricted_minimize, Restricted};
use crate::threshold::top_k;

pub use greedy::{solve_foba, solve_forward, solve_omp};
pub use pdas::solve_pdas;
pub use scope::solve_scope;
pub use thresholding::{solve_grasp, solve_htp, solve_iht};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolverKind {
    Forward,
    Omp,
    Iht,
    Htp,
    Grasp,
    Pdas,
    Foba,
    Scope,
}

impl SolverKind {
    pub const ALL: [SolverKind; 8] = [
        SolverKind::Forward,
        SolverKind::Omp,
        SolverKind::Iht,
        SolverKind::Htp,
        SolverKind::Grasp,
        SolverKind::Pdas,
        SolverKind::Foba,
        SolverKind::Scope,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Forward => "forward",
            SolverKind::Omp => "omp",
            SolverKind::Iht => "iht",
            SolverKind::Htp => "htp",
            SolverKind::Grasp => "grasp",
            SolverKind::Pdas => "pdas",
            SolverKind::Foba => "foba",
            SolverKind::Scope => "scope",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = ScoError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase();
        let key = key.strip_suffix("solver").unwrap_or(&key);
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| ScoError::Config(format!("unknown solver `{s}`")))
    }
}

/// Runs `kind` on `problem`.
pub fn solve(kind: SolverKind, problem: &ScoProblem, config: &SolverConfig) -> Result<ScoSolution> {
    match kind {
        SolverKind::Forward => solve_forward(problem, config),
        SolverKind::Omp => solve_omp(problem, config),
        SolverKind::Iht => solve_iht(problem, config),
        SolverKind::Htp => solve_htp(problem, config),
        SolverKind::Grasp => solve_grasp(problem, config),
        SolverKind::Pdas => solve_pdas(problem, config),
        SolverKind::Foba => solve_foba(problem, config),
        SolverKind::Scope => solve_scope(problem, config),
    }
}

/// Per-solve state shared by the solver loops.
pub(crate) struct Ctx<'a> {
    problem: &'a ScoProblem,
    config: &'a SolverConfig,
    view: &'a GroupView,
    s: usize,
    trace: Vec<TraceEntry>,
    start: Instant,
}

impl<'a> Ctx<'a> {
    fn new(problem: &'a ScoProblem, config: &'a SolverConfig) -> Result<Self> {
        config.validate(problem.dim())?;
        Ok(Ctx {
            problem,
            config,
            view: problem.view(),
            s: problem.sparsity(),
            trace: Vec::new(),
            start: Instant::now(),
        })
    }

    fn units(&self) -> usize {
        self.view.unit_count()
    }

    fn fit(&self, units: &[usize], init: &[f64]) -> Result<Restricted> {
        restricted_minimize(self.problem, &self.view.coords_of(units), init, self.config)
    }

    fn gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok(self.problem.oracle().value_and_gradient(theta)?)
    }

    /// Objective at `theta`, or `None` outside the objective's domain.
    fn try_value(&self, theta: &[f64]) -> Result<Option<f64>> {
        match self.problem.oracle().value(theta) {
            Ok(f) => Ok(Some(f)),
            Err(AdError::Domain { .. }) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Units carried by the warm start, trimmed to the budget.
    fn warm_units(&self) -> Option<Vec<usize>> {
        let w = self.config.warm_start.as_ref()?;
        let scores = self.view.scores(w);
        let nz: Vec<usize> = (0..scores.len()).filter(|&u| scores[u] > 0.0).collect();
        if nz.is_empty() {
            return None;
        }
        Some(top_k(&scores, self.s, |u| scores[u] > 0.0))
    }

    /// Starting support and its refit: the warm start's units, or nothing.
    fn start(&self) -> Result<(Vec<usize>, Restricted)> {
        let zeros = vec![0.0; self.problem.dim()];
        let init = self.config.warm_start.as_deref().unwrap_or(&zeros);
        let units = self.warm_units().unwrap_or_default();
        let fit = self.fit(&units, init)?;
        Ok((units, fit))
    }

    fn record(&mut self, iteration: usize, objective: f64, changes: usize) {
        self.trace.push(TraceEntry {
            iteration,
            objective,
            support_changes: changes,
        });
    }

    /// Refits on `units`, compares against the warm start's own support, and
    /// packages the better of the two.
    fn finish(
        self,
        units: &[usize],
        hint: &[f64],
        iterations: usize,
        converged: bool,
    ) -> Result<ScoSolution> {
        let mut units = units.to_vec();
        units.sort_unstable();
        let mut best = self.fit(&units, hint)?;
        if let (Some(wu), Some(w)) = (self.warm_units(), self.config.warm_start.as_ref()) {
            let cand = self.fit(&wu, w)?;
            if cand.objective < best.objective {
                best = cand;
                units = wu;
            }
        }
        let objective = self.problem.oracle().value(&best.params)?;
        Ok(ScoSolution {
            support: self.view.coords_of(&units),
            params: best.params,
            objective,
            iterations,
            converged,
            runtime: self.start.elapsed().as_secs_f64(),
            trace: self.trace,
        })
    }
}

fn changes(a: &[usize], b: &[usize]) -> usize {
    a.iter().filter(|u| !b.contains(u)).count() + b.iter().filter(|u| !a.contains(u)).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
        }
        assert_eq!("ScopeSolver".parse::<SolverKind>().unwrap(), SolverKind::Scope);
        assert!("lasso".parse::<SolverKind>().is_err());
    }
}
