use serde::{Deserialize, Serialize};

use sco::{ScoSolution, SolverKind};

/// JSON shape of a single solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub solver: String,
    pub support: Vec<usize>,
    pub params: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub runtime_s: f64,
}

impl SolveOutput {
    pub fn new(kind: SolverKind, sol: &ScoSolution) -> Self {
        SolveOutput {
            solver: kind.name().to_string(),
            support: sol.support.clone(),
            params: sol.params.clone(),
            objective: sol.objective,
            iterations: sol.iterations,
            converged: sol.converged,
            runtime_s: sol.runtime,
        }
    }
}
