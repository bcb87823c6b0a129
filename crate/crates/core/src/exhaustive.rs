//! Brute-force best-subset search for small problems.

use std::time::Instant;

use itertools::Itertools;

use crate::error::{Result, ScoError};
use crate::problem::{ScoProblem, ScoSolution, SolverConfig, TraceEntry};
use crate::restricted::{restricted_minimize, Restricted};

/// Largest number of supports [`exhaustive_oracle`] will enumerate.
pub const MAX_SUPPORTS: u128 = 1_000_000;

/// C(n, k), saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Minimizes over every support of exactly s units with default inner
/// settings. Supports are visited in lexicographic order and a later one
/// replaces the incumbent only if strictly better.
pub fn exhaustive_oracle(problem: &ScoProblem) -> Result<ScoSolution> {
    exhaustive_oracle_with(problem, &SolverConfig::default())
}

pub fn exhaustive_oracle_with(problem: &ScoProblem, config: &SolverConfig) -> Result<ScoSolution> {
    let view = problem.view();
    let count = binomial(view.unit_count(), problem.sparsity());
    if count > MAX_SUPPORTS {
        return Err(ScoError::TooManySupports {
            count,
            limit: MAX_SUPPORTS,
        });
    }
    let start = Instant::now();
    let zeros = vec![0.0; problem.dim()];
    let mut best: Option<(Vec<usize>, Restricted)> = None;
    for units in (0..view.unit_count()).combinations(problem.sparsity()) {
        let r = restricted_minimize(problem, &view.coords_of(&units), &zeros, config)?;
        if best.as_ref().is_none_or(|(_, b)| r.objective < b.objective) {
            best = Some((units, r));
        }
    }
    let (units, fit) = best.expect("at least one support when s <= unit count");
    let objective = problem.oracle().value(&fit.params)?;
    Ok(ScoSolution {
        support: view.coords_of(&units),
        params: fit.params,
        objective,
        iterations: count as usize,
        converged: true,
        runtime: start.elapsed().as_secs_f64(),
        trace: vec![TraceEntry {
            iteration: count as usize,
            objective,
            support_changes: 0,
        }],
    })
}
