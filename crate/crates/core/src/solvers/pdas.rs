//! Primal-dual active set iteration.

use std::collections::HashSet;

use crate::error::Result;
use crate::problem::{ScoProblem, ScoSolution, SolverConfig};
use crate::threshold::top_k;

use super::{changes, Ctx};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 50;

/// Active units are scored by coefficient norm, inactive ones by the norm of
/// a gradient step of length η, where η is the last step accepted by an
/// Armijo search along the inactive part of −∇f. The top s scores form the
/// next active set; the loop ends when a set repeats.
pub fn solve_pdas(problem: &ScoProblem, config: &SolverConfig) -> Result<ScoSolution> {
    let mut ctx = Ctx::new(problem, config)?;
    let (warm, fit) = ctx.start()?;
    let mut theta = fit.params;
    let mut f = fit.objective;
    ctx.record(0, f, 0);
    let mut eta = config.step_size;
    let mut active = warm;
    if active.len() < ctx.s {
        active = next_active(&ctx, &active, &theta, f, &mut eta)?;
    }

    let (mut best_units, mut best_theta, mut best_f) = (Vec::new(), theta.clone(), f64::INFINITY);
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    let mut previous: Vec<usize> = Vec::new();
    let mut converged = false;
    let mut it = 0;
    while it < config.max_iter {
        it += 1;
        let refit = ctx.fit(&active, &theta)?;
        theta = refit.params;
        f = refit.objective;
        ctx.record(it, f, changes(&previous, &active));
        if f < best_f {
            (best_units, best_theta, best_f) = (active.clone(), theta.clone(), f);
        }
        visited.insert(active.clone());
        let next = next_active(&ctx, &active, &theta, f, &mut eta)?;
        if next == active || visited.contains(&next) {
            converged = true;
            break;
        }
        previous = std::mem::replace(&mut active, next);
    }
    ctx.finish(&best_units, &best_theta, it, converged)
}

fn next_active(
    ctx: &Ctx<'_>,
    active: &[usize],
    theta: &[f64],
    f: f64,
    eta: &mut f64,
) -> Result<Vec<usize>> {
    let (_, g) = ctx.gradient(theta)?;
    let view = ctx.view;
    let mut is_active = vec![false; ctx.units()];
    for &u in active {
        is_active[u] = true;
    }
    let inactive_coords: Vec<usize> = (0..ctx.units())
        .filter(|&u| !is_active[u])
        .flat_map(|u| view.coords(u).iter().copied())
        .collect();
    let g2: f64 = inactive_coords.iter().map(|&j| g[j] * g[j]).sum();
    if g2 > 0.0 {
        let mut step = ctx.config.step_size;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = theta.to_vec();
            for &j in &inactive_coords {
                trial[j] -= step * g[j];
            }
            if let Some(ft) = ctx.try_value(&trial)? {
                if ft <= f - ARMIJO * step * g2 {
                    *eta = step;
                    break;
                }
            }
            step *= 0.5;
        }
    }
    let coef = view.scores(theta);
    let grad = view.scores(&g);
    let scores: Vec<f64> = (0..ctx.units())
        .map(|u| if is_active[u] { coef[u] } else { *eta * grad[u] })
        .collect();
    Ok(top_k(&scores, ctx.s, |_| true))
}
