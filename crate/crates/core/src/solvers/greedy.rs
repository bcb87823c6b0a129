//! Greedy support growth: exact forward selection, OMP, and FoBa.

use crate::error::Result;
use crate::problem::{ScoProblem, ScoSolution, SolverConfig};
use crate::restricted::Restricted;
use crate::threshold::desc;

use super::Ctx;

/// Adds, one unit at a time, the unit whose restricted refit lowers f most.
pub fn solve_forward(problem: &ScoProblem, config: &SolverConfig) -> Result<ScoSolution> {
    let mut ctx = Ctx::new(problem, config)?;
    let (mut units, mut fit) = ctx.start()?;
    ctx.record(0, fit.objective, 0);
    let mut it = 0;
    while units.len() < ctx.s && it < config.max_iter {
        let Some((u, next)) = best_addition(&ctx, &units, &fit.params)? else { break };
        it += 1;
        units.push(u);
        fit = next;
        ctx.record(it, fit.objective, 1);
    }
    let done = units.len() == ctx.s;
    ctx.finish(&units, &fit.params, it, done)
}

/// Orthogonal matching pursuit: add the inactive unit with the largest
/// gradient norm, then refit.
pub fn solve_omp(problem: &ScoProblem, config: &SolverConfig) -> Result<ScoSolution> {
    let mut ctx = Ctx::new(problem, config)?;
    let (mut units, mut fit) = ctx.start()?;
    ctx.record(0, fit.objective, 0);
    let mut it = 0;
    while units.len() < ctx.s && it < config.max_iter {
        let (_, g) = ctx.gradient(&fit.params)?;
        let scores = ctx.view.scores(&g);
        let Some(u) = (0..ctx.units())
            .filter(|u| !units.contains(u))
            .min_by(|&a, &b| desc(scores[a], scores[b]).then(a.cmp(&b)))
        else {
            break;
        };
        it += 1;
        units.push(u);
        fit = ctx.fit(&units, &fit.params)?;
        ctx.record(it, fit.objective, 1);
    }
    let done = units.len() == ctx.s;
    ctx.finish(&units, &fit.params, it, done)
}

/// Forward-backward greedy selection.
///
/// Each round takes one forward step with gain δ, then deletes units while
/// the accumulated increase stays within ν·δ and the round still makes net
/// progress. Stops when the support is full and no deletion fires.
pub fn solve_foba(problem: &ScoProblem, config: &SolverConfig) -> Result<ScoSolution> {
    let mut ctx = Ctx::new(problem, config)?;
    let (mut units, mut fit) = ctx.start()?;
    ctx.record(0, fit.objective, 0);
    let nu = config.foba_nu;
    let mut round = 0;
    let mut converged = false;
    while round < config.max_iter {
        round += 1;
        let mut delta = 0.0;
        let mut changed = 0;
        if units.len() < ctx.s {
            let Some((u, next)) = best_addition(&ctx, &units, &fit.params)? else {
                converged = true;
                break;
            };
            delta = fit.objective - next.objective;
            units.push(u);
            fit = next;
            changed += 1;
        }

        let mut increase = 0.0;
        let mut fired = false;
        while units.len() > 1 {
            let Some((k, next)) = best_deletion(&ctx, &units, &fit.params)? else { break };
            let step = next.objective - fit.objective;
            let total = increase + step;
            if total <= nu * delta && delta - total > config.tol {
                increase = total;
                units.remove(k);
                fit = next;
                fired = true;
                changed += 1;
            } else {
                break;
            }
        }
        ctx.record(round, fit.objective, changed);
        if units.len() == ctx.s && !fired {
            converged = true;
            break;
        }
    }
    ctx.finish(&units, &fit.params, round, converged)
}

/// Best single-unit extension of `units` by restricted objective. Ties go to
/// the lower unit index.
fn best_addition(ctx: &Ctx<'_>, units: &[usize], theta: &[f64]) -> Result<Option<(usize, Restricted)>> {
    let mut active = vec![false; ctx.units()];
    for &u in units {
        active[u] = true;
    }
    let mut best: Option<(usize, Restricted)> = None;
    let mut cand = units.to_vec();
    cand.push(0);
    for u in (0..ctx.units()).filter(|&u| !active[u]) {
        *cand.last_mut().unwrap() = u;
        let r = ctx.fit(&cand, theta)?;
        if best.as_ref().is_none_or(|(_, b)| r.objective < b.objective) {
            best = Some((u, r));
        }
    }
    Ok(best)
}

/// Position in `units` whose removal raises the objective least.
fn best_deletion(ctx: &Ctx<'_>, units: &[usize], theta: &[f64]) -> Result<Option<(usize, Restricted)>> {
    let mut order: Vec<usize> = (0..units.len()).collect();
    order.sort_by_key(|&k| units[k]);
    let mut best: Option<(usize, Restricted)> = None;
    for k in order {
        let rest: Vec<usize> = units.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &u)| u).collect();
        let r = ctx.fit(&rest, theta)?;
        if best.as_ref().is_none_or(|(_, b)| r.objective < b.objective) {
            best = Some((k, r));
        }
    }
    Ok(best)
}
