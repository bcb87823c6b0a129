//! Splicing.
//!
//! With θ refit on the active set A and g = ∇f(θ), an active unit's backward
//! sacrifice is ‖θ_u‖² and an inactive unit's forward sacrifice is ‖g_u‖².
//! For k from s down to 1, the k cheapest active units are exchanged for the
//! k most promising inactive ones; the first exchange that lowers f by more
//! than `tol` is kept and the scan restarts.

use std::cmp::Ordering;

use crate::error::Result;
use crate::problem::{ScoProblem, ScoSolution, SolverConfig};
use crate::threshold::{desc, top_k};

use super::{changes, Ctx};

pub fn solve_scope(problem: &ScoProblem, config: &SolverConfig) -> Result<ScoSolution> {
    let mut ctx = Ctx::new(problem, config)?;
    let (mut active, start) = ctx.start()?;
    if active.len() < ctx.s {
        let (_, g) = ctx.gradient(&start.params)?;
        let zeta = ctx.view.sq_scores(&g);
        let need = ctx.s - active.len();
        let extra = top_k(&zeta, need, |u| !active.contains(&u));
        active.extend(extra);
        active.sort_unstable();
    }
    let mut fit = ctx.fit(&active, &start.params)?;
    ctx.record(0, fit.objective, 0);

    let mut converged = false;
    let mut splices = 0;
    while splices < config.max_iter {
        let (_, g) = ctx.gradient(&fit.params)?;
        let xi = ctx.view.sq_scores(&fit.params);
        let zeta = ctx.view.sq_scores(&g);

        let mut is_active = vec![false; ctx.units()];
        for &u in &active {
            is_active[u] = true;
        }
        let mut weakest = active.clone();
        weakest.sort_by(|&a, &b| xi[a].partial_cmp(&xi[b]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        let mut strongest: Vec<usize> = (0..ctx.units()).filter(|&u| !is_active[u]).collect();
        strongest.sort_by(|&a, &b| desc(zeta[a], zeta[b]).then(a.cmp(&b)));

        let k_max = ctx.s.min(weakest.len()).min(strongest.len());
        let mut accepted = None;
        for k in (1..=k_max).rev() {
            let mut cand: Vec<usize> = weakest[k..].to_vec();
            cand.extend_from_slice(&strongest[..k]);
            cand.sort_unstable();
            let trial = ctx.fit(&cand, &fit.params)?;
            if trial.objective < fit.objective - config.tol {
                accepted = Some((cand, trial));
                break;
            }
        }
        let Some((cand, trial)) = accepted else {
            converged = true;
            break;
        };
        splices += 1;
        ctx.record(splices, trial.objective, changes(&active, &cand));
        active = cand;
        fit = trial;
    }
    ctx.finish(&active, &fit.params, splices, converged)
}
