//! Minimization of f over a fixed support.
//!
//! Limited-memory BFGS (memory 10) with Armijo backtracking. Coordinates off
//! the support stay pinned at zero and only the free block of the gradient is
//! requested from the oracle.

use std::collections::VecDeque;

use crate::ad::{AdError, Objective};
use crate::error::Result;
use crate::problem::{ScoProblem, SolverConfig};

const MEMORY: usize = 10;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 50;
const MAX_STALLS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Restricted {
    pub params: Vec<f64>,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Minimizes f over `support ∪ preselect` starting from `init`, which is
/// masked to those coordinates first.
pub fn restricted_minimize(
    problem: &ScoProblem,
    support: &[usize],
    init: &[f64],
    config: &SolverConfig,
) -> Result<Restricted> {
    let mut free: Vec<usize> = support.iter().chain(problem.preselect()).copied().collect();
    free.sort_unstable();
    free.dedup();
    minimize_on(
        problem.oracle().as_ref(),
        &free,
        init,
        config.inner_max_iter,
        config.inner_tol,
    )
}

pub(crate) fn minimize_on(
    oracle: &dyn Objective,
    free: &[usize],
    init: &[f64],
    max_iter: usize,
    tol: f64,
) -> Result<Restricted> {
    let p = oracle.dim();
    let mut theta = vec![0.0; p];
    for &j in free {
        theta[j] = init[j];
    }
    if free.is_empty() {
        let objective = oracle.value(&theta)?;
        return Ok(Restricted {
            params: theta,
            objective,
            converged: true,
            iterations: 0,
        });
    }

    let (mut f, mut g) = oracle.value_and_partial_gradient(&theta, free)?;
    let (start, f0) = (theta.clone(), f);
    let mut stalled = 0;
    let mut x: Vec<f64> = free.iter().map(|&j| theta[j]).collect();
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(MEMORY);
    let mut converged = inf_norm(&g) <= tol;
    let mut iterations = 0;

    while !converged && iterations < max_iter {
        iterations += 1;
        let mut d = two_loop(&g, &mem);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            mem.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            for (k, &j) in free.iter().enumerate() {
                theta[j] = trial[k];
            }
            match oracle.value_and_partial_gradient(&theta, free) {
                Ok((ft, gt)) => {
                    let sufficient = ft <= f + ARMIJO * step * slope;
                    // Near the optimum the decrease falls below rounding noise in f.
                    let flat = ft <= f + noise(f) && inf_norm(&gt) < inf_norm(&g);
                    if sufficient || flat {
                        accepted = Some((trial, ft, gt));
                        break;
                    }
                }
                Err(AdError::Domain { .. }) => {}
                Err(e) => return Err(e.into()),
            }
            step *= 0.5;
        }

        let Some((xn, fn_, gn)) = accepted else { break };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > f64::EPSILON * dot(&y, &y) {
            if mem.len() == MEMORY {
                mem.pop_front();
            }
            mem.push_back((s, y, 1.0 / sy));
        }
        let gain = f - fn_;
        let shrink = inf_norm(&gn) / inf_norm(&g);
        x = xn;
        f = fn_;
        g = gn;
        converged = inf_norm(&g) <= tol;
        if gain <= noise(f) && shrink > 0.5 {
            stalled += 1;
            if stalled == MAX_STALLS {
                break;
            }
        } else {
            stalled = 0;
        }
    }

    if f > f0 {
        return Ok(Restricted {
            params: start,
            objective: f0,
            converged: false,
            iterations,
        });
    }
    for (k, &j) in free.iter().enumerate() {
        theta[j] = x[k];
    }
    Ok(Restricted {
        params: theta,
        objective: f,
        converged,
        iterations,
    })
}

fn two_loop(g: &[f64], mem: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alpha = Vec::with_capacity(mem.len());
    for (s, y, rho) in mem.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alpha.push(a);
    }
    if let Some((s, y, _)) = mem.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in mem.iter().zip(alpha.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// Rounding slack on an objective value.
fn noise(f: f64) -> f64 {
    16.0 * f64::EPSILON * (1.0 + f.abs())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
