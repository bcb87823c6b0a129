//! Gradient-step methods built on hard thresholding: IHT, HTP and GraSP.

use std::collections::HashSet;

use crate::error::Result;
use crate::problem::{ScoProblem, ScoSolution, SolverConfig};
use crate::threshold::{hard_threshold, top_k};

use super::{changes, Ctx};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 50;

struct Step {
    theta: Vec<f64>,
    objective: f64,
    units: Vec<usize>,
}

/// Backtracking projected gradient step from `theta`: halve η from
/// `config.step_size` until f(θ⁺) ≤ f(θ) − c·η‖g restricted to supp θ⁺‖²,
/// giving up after 50 halvings with the last trial.
fn projected_step(ctx: &Ctx<'_>, theta: &[f64], f: f64, g: &[f64]) -> Result<Option<Step>> {
    let pre = ctx.problem.preselect();
    let mut eta = ctx.config.step_size;
    let mut last = None;
    for _ in 0..=MAX_HALVINGS {
        let moved: Vec<f64> = theta.iter().zip(g).map(|(t, d)| t - eta * d).collect();
        let units = hard_threshold(&moved, ctx.s, ctx.view);
        let keep: Vec<usize> = ctx.view.coords_of(&units).into_iter().chain(pre.iter().copied()).collect();
        let mut cand = vec![0.0; theta.len()];
        let mut g2 = 0.0;
        for &j in &keep {
            cand[j] = moved[j];
            g2 += g[j] * g[j];
        }
        if let Some(fc) = ctx.try_value(&cand)? {
            let ok = fc <= f - ARMIJO * eta * g2;
            last = Some(Step {
                theta: cand,
                objective: fc,
                units,
            });
            if ok {
                break;
            }
        }
        eta *= 0.5;
    }
    Ok(last)
}

/// Iterative hard thresholding with backtracking.
pub fn solve_iht(problem: &ScoProblem, config: &SolverConfig) -> Result<ScoSolution> {
    let mut ctx = Ctx::new(problem, config)?;
    let mut theta = match &config.warm_start {
        Some(w) => crate::threshold::project_feasible(w, problem),
        None => vec![0.0; problem.dim()],
    };
    let mut units = ctx.view.nonzero_units(&theta);
    let (mut f, mut g) = ctx.gradient(&theta)?;
    ctx.record(0, f, 0);
    let mut converged = false;
    let mut it = 0;
    while it < config.max_iter {
        it += 1;
        let Some(step) = projected_step(&ctx, &theta, f, &g)? else { break };
        if step.objective > f {
            converged = true;
            break;
        }
        let improvement = f - step.objective;
        let moved = changes(&units, &step.units);
        theta = step.theta;
        units = step.units;
        ctx.record(it, step.objective, moved);
        if improvement <= config.tol {
            converged = true;
            break;
        }
        (f, g) = ctx.gradient(&theta)?;
    }
    ctx.finish(&units, &theta, it, converged)
}

/// Hard thresholding pursuit: a projected gradient step picks the support,
/// a restricted refit sets the coefficients.
pub fn solve_htp(problem: &ScoProblem, config: &SolverConfig) -> Result<ScoSolution> {
    let mut ctx = Ctx::new(problem, config)?;
    let (mut units, fit) = ctx.start()?;
    let mut theta = fit.params;
    let (mut f, mut g) = ctx.gradient(&theta)?;
    ctx.record(0, f, 0);
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    visited.insert(units.clone());
    let mut converged = false;
    let mut it = 0;
    while it < config.max_iter {
        it += 1;
        let Some(step) = projected_step(&ctx, &theta, f, &g)? else { break };
        let next = step.units;
        if next == units {
            converged = true;
            break;
        }
        let refit = ctx.fit(&next, &step.theta)?;
        if refit.objective > f {
            converged = true;
            break;
        }
        ctx.record(it, refit.objective, changes(&units, &next));
        let seen = !visited.insert(next.clone());
        units = next;
        theta = refit.params;
        if seen {
            converged = true;
            break;
        }
        (f, g) = ctx.gradient(&theta)?;
    }
    ctx.finish(&units, &theta, it, converged)
}

/// Gradient support pursuit: merge the 2s strongest gradient units into the
/// support, minimize on the union, prune to s units and refit.
pub fn solve_grasp(problem: &ScoProblem, config: &SolverConfig) -> Result<ScoSolution> {
    let mut ctx = Ctx::new(problem, config)?;
    let (mut units, fit) = ctx.start()?;
    let mut theta = fit.params;
    let mut f = fit.objective;
    ctx.record(0, f, 0);
    let (mut best_units, mut best_theta, mut best_f) = (units.clone(), theta.clone(), f);
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    let mut converged = false;
    let mut it = 0;
    while it < config.max_iter {
        it += 1;
        let (_, g) = ctx.gradient(&theta)?;
        let width = (2 * ctx.s).min(ctx.units());
        let mut merged = top_k(&ctx.view.scores(&g), width, |_| true);
        merged.extend(units.iter().copied());
        merged.sort_unstable();
        merged.dedup();
        let wide = ctx.fit(&merged, &theta)?;
        let next = hard_threshold(&wide.params, ctx.s, ctx.view);
        let pruned = ctx.fit(&next, &wide.params)?;
        ctx.record(it, pruned.objective, changes(&units, &next));
        let stable = next == units;
        let seen = !visited.insert(next.clone());
        units = next;
        theta = pruned.params;
        f = pruned.objective;
        if f < best_f {
            (best_units, best_theta, best_f) = (units.clone(), theta.clone(), f);
        }
        if stable || seen {
            converged = true;
            break;
        }
    }
    ctx.finish(&best_units, &best_theta, it, converged)
}
