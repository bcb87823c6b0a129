//! Problem, configuration and solution types shared by every solver.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ad::ObjectiveOracle;
use crate::error::{Result, ScoError};

/// Selectable units of a problem: singletons, or user-defined groups that
/// enter and leave the support together. Preselected coordinates belong to no
/// unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupView {
    units: Vec<Vec<usize>>,
    unit_of: Vec<Option<usize>>,
}

impl GroupView {
    pub fn singletons(p: usize, preselect: &[usize]) -> Self {
        let mut unit_of = vec![None; p];
        let mut units = Vec::new();
        let pre: BTreeSet<usize> = preselect.iter().copied().collect();
        for (j, slot) in unit_of.iter_mut().enumerate() {
            if !pre.contains(&j) {
                *slot = Some(units.len());
                units.push(vec![j]);
            }
        }
        GroupView { units, unit_of }
    }

    /// Builds units from a group id per coordinate. Ids at preselected
    /// coordinates are ignored; every id in `0..G` must label at least one
    /// other coordinate.
    pub fn from_groups(groups: &[usize], preselect: &[usize]) -> Result<Self> {
        let pre: BTreeSet<usize> = preselect.iter().copied().collect();
        let g_count = groups
            .iter()
            .enumerate()
            .filter(|(j, _)| !pre.contains(j))
            .map(|(_, &g)| g + 1)
            .max()
            .unwrap_or(0);
        let mut units = vec![Vec::new(); g_count];
        let mut unit_of = vec![None; groups.len()];
        for (j, &g) in groups.iter().enumerate() {
            if pre.contains(&j) {
                continue;
            }
            units[g].push(j);
            unit_of[j] = Some(g);
        }
        if let Some(g) = units.iter().position(Vec::is_empty) {
            return Err(ScoError::Problem(format!(
                "group id {g} labels no selectable coordinate"
            )));
        }
        Ok(GroupView { units, unit_of })
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    pub fn coords(&self, unit: usize) -> &[usize] {
        &self.units[unit]
    }

    pub fn unit_of(&self, coord: usize) -> Option<usize> {
        self.unit_of[coord]
    }

    pub fn dim(&self) -> usize {
        self.unit_of.len()
    }

    /// Euclidean norm of `v` over each unit.
    pub fn scores(&self, v: &[f64]) -> Vec<f64> {
        self.sq_scores(v).into_iter().map(f64::sqrt).collect()
    }

    pub fn sq_scores(&self, v: &[f64]) -> Vec<f64> {
        self.units
            .iter()
            .map(|cs| cs.iter().map(|&j| v[j] * v[j]).sum())
            .collect()
    }

    /// Sorted coordinates covered by `units`.
    pub fn coords_of(&self, units: &[usize]) -> Vec<usize> {
        let mut c: Vec<usize> = units.iter().flat_map(|&u| self.units[u].iter().copied()).collect();
        c.sort_unstable();
        c
    }

    /// Units holding at least one nonzero entry of `v`.
    pub fn nonzero_units(&self, v: &[f64]) -> Vec<usize> {
        (0..self.units.len())
            .filter(|&u| self.units[u].iter().any(|&j| v[j] != 0.0))
            .collect()
    }
}

/// argmin f(θ) subject to at most `s` selected units.
#[derive(Clone)]
pub struct ScoProblem {
    oracle: ObjectiveOracle,
    s: usize,
    view: GroupView,
    groups: Option<Vec<usize>>,
    preselect: Vec<usize>,
    sample_size: Option<usize>,
}

impl std::fmt::Debug for ScoProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScoProblem")
            .field("p", &self.dim())
            .field("s", &self.s)
            .field("units", &self.view.unit_count())
            .field("preselect", &self.preselect)
            .field("sample_size", &self.sample_size)
            .finish()
    }
}

#[derive(Clone)]
pub struct ScoProblemBuilder {
    oracle: ObjectiveOracle,
    s: usize,
    groups: Option<Vec<usize>>,
    preselect: Vec<usize>,
    sample_size: Option<usize>,
}

impl ScoProblemBuilder {
    pub fn groups(mut self, groups: Vec<usize>) -> Self {
        self.groups = Some(groups);
        self
    }

    pub fn preselect(mut self, coords: Vec<usize>) -> Self {
        self.preselect = coords;
        self
    }

    pub fn sample_size(mut self, n: usize) -> Self {
        self.sample_size = Some(n);
        self
    }

    pub fn build(self) -> Result<ScoProblem> {
        let p = self.oracle.dim();
        let mut preselect = self.preselect;
        preselect.sort_unstable();
        preselect.dedup();
        if let Some(&j) = preselect.iter().find(|&&j| j >= p) {
            return Err(ScoError::Problem(format!("preselected index {j} >= p = {p}")));
        }
        let view = match &self.groups {
            Some(g) if g.len() != p => {
                return Err(ScoError::Problem(format!(
                    "group array has length {}, expected {p}",
                    g.len()
                )))
            }
            Some(g) => GroupView::from_groups(g, &preselect)?,
            None => GroupView::singletons(p, &preselect),
        };
        let problem = ScoProblem {
            oracle: self.oracle,
            s: self.s,
            view,
            groups: self.groups,
            preselect,
            sample_size: self.sample_size,
        };
        problem.check_sparsity(self.s)?;
        Ok(problem)
    }
}

impl ScoProblem {
    pub fn builder(oracle: ObjectiveOracle, s: usize) -> ScoProblemBuilder {
        ScoProblemBuilder {
            oracle,
            s,
            groups: None,
            preselect: Vec::new(),
            sample_size: None,
        }
    }

    pub fn new(oracle: ObjectiveOracle, s: usize) -> Result<Self> {
        Self::builder(oracle, s).build()
    }

    fn check_sparsity(&self, s: usize) -> Result<()> {
        let g = self.view.unit_count();
        if s == 0 || s > g {
            return Err(ScoError::Problem(format!(
                "sparsity {s} outside 1..={g} selectable units"
            )));
        }
        Ok(())
    }

    /// Same problem with a different budget.
    pub fn with_sparsity(&self, s: usize) -> Result<Self> {
        self.check_sparsity(s)?;
        let mut p = self.clone();
        p.s = s;
        Ok(p)
    }

    pub fn oracle(&self) -> &ObjectiveOracle {
        &self.oracle
    }

    pub fn dim(&self) -> usize {
        self.oracle.dim()
    }

    pub fn sparsity(&self) -> usize {
        self.s
    }

    pub fn view(&self) -> &GroupView {
        &self.view
    }

    pub fn groups(&self) -> Option<&[usize]> {
        self.groups.as_deref()
    }

    pub fn preselect(&self) -> &[usize] {
        &self.preselect
    }

    pub fn sample_size(&self) -> Option<usize> {
        self.sample_size
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Objective-improvement stopping threshold.
    pub tol: f64,
    /// First trial step of gradient-step backtracking.
    pub step_size: f64,
    pub inner_max_iter: usize,
    pub inner_tol: f64,
    /// Backward-step acceptance factor for FoBa.
    pub foba_nu: f64,
    pub seed: Option<u64>,
    pub warm_start: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 100,
            tol: 1e-8,
            step_size: 1.0,
            inner_max_iter: 100,
            inner_tol: 1e-8,
            foba_nu: 0.5,
            seed: None,
            warm_start: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, p: usize) -> Result<()> {
        let positive = [
            ("tol", self.tol),
            ("step_size", self.step_size),
            ("inner_tol", self.inner_tol),
            ("foba_nu", self.foba_nu),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ScoError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iter == 0 || self.inner_max_iter == 0 {
            return Err(ScoError::Config("iteration limits must be at least 1".into()));
        }
        if let Some(w) = &self.warm_start {
            if w.len() != p {
                return Err(ScoError::Config(format!(
                    "warm start has length {}, expected {p}",
                    w.len()
                )));
            }
        }
        Ok(())
    }

    pub fn with_warm_start(mut self, w: Vec<f64>) -> Self {
        self.warm_start = Some(w);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub objective: f64,
    pub support_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoSolution {
    pub params: Vec<f64>,
    /// Sorted coordinates of the selected units.
    pub support: Vec<usize>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub runtime: f64,
    pub trace: Vec<TraceEntry>,
}

impl ScoSolution {
    pub fn units(&self, view: &GroupView) -> Vec<usize> {
        let mut u: Vec<usize> = self.support.iter().filter_map(|&j| view.unit_of(j)).collect();
        u.sort_unstable();
        u.dedup();
        u
    }
}

/// Checks the solution invariants: params vanish off support ∪ preselect, the
/// support is made of whole units within budget, and the stored objective
/// matches a fresh evaluation within `tol·(1 + |f|)`.
pub fn validate_solution(problem: &ScoProblem, sol: &ScoSolution, tol: f64) -> Result<()> {
    let p = problem.dim();
    let bad = |m: String| Err(ScoError::Problem(m));
    if sol.params.len() != p {
        return bad(format!("params length {} != {p}", sol.params.len()));
    }
    if sol.support.windows(2).any(|w| w[0] >= w[1]) || sol.support.iter().any(|&j| j >= p) {
        return bad("support is not a sorted index set".into());
    }
    let view = problem.view();
    if sol.support.iter().any(|&j| view.unit_of(j).is_none()) {
        return bad("support contains preselected coordinates".into());
    }
    let units: Vec<usize> = sol
        .support
        .iter()
        .filter_map(|&j| view.unit_of(j))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if view.coords_of(&units) != sol.support {
        return bad("support does not consist of whole units".into());
    }
    if units.len() > problem.sparsity() {
        return bad(format!("{} units selected, budget {}", units.len(), problem.sparsity()));
    }
    let active: BTreeSet<usize> = sol.support.iter().chain(problem.preselect()).copied().collect();
    if let Some(j) = (0..p).find(|j| !active.contains(j) && sol.params[*j] != 0.0) {
        return bad(format!("params[{j}] nonzero outside support"));
    }
    let f = problem.oracle().value(&sol.params)?;
    if (f - sol.objective).abs() > tol * (1.0 + f.abs()) {
        return bad(format!("objective {} differs from recomputed {f}", sol.objective));
    }
    Ok(())
}
