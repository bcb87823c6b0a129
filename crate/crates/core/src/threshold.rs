use std::cmp::Ordering;

use crate::problem::{GroupView, ScoProblem};

/// Indices of the `k` largest scores among those passing `eligible`, sorted
/// ascending. Equal scores prefer the lower index.
pub fn top_k(scores: &[f64], k: usize, eligible: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).filter(|&i| eligible(i)).collect();
    idx.sort_by(|&a, &b| desc(scores[a], scores[b]).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Descending order for finite scores; NaN sorts last.
pub(crate) fn desc(a: f64, b: f64) -> Ordering {
    b.partial_cmp(&a).unwrap_or_else(|| a.is_nan().cmp(&b.is_nan()))
}

/// The `s` units of `v` with the largest Euclidean norms.
pub fn hard_threshold(v: &[f64], s: usize, view: &GroupView) -> Vec<usize> {
    debug_assert!(s <= view.unit_count());
    top_k(&view.scores(v), s, |_| true)
}

/// Zeroes every coordinate outside the top-`s` units and the preselected set.
pub fn project_feasible(v: &[f64], problem: &ScoProblem) -> Vec<f64> {
    let view = problem.view();
    let keep = hard_threshold(v, problem.sparsity(), view);
    let mut out = vec![0.0; v.len()];
    for j in view.coords_of(&keep).into_iter().chain(problem.preselect().iter().copied()) {
        out[j] = v[j];
    }
    out
}
