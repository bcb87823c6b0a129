//! Choosing the sparsity level: warm-started paths over a grid of s values,
//! scored by an information criterion or K-fold cross-validation.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ad::LossScale;
use crate::error::{Result, ScoError};
use crate::problem::{ScoProblem, ScoSolution, SolverConfig};
use crate::solvers::{solve, SolverKind};

/// Strictly increasing candidate sparsity levels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsityGrid(Vec<usize>);

impl SparsityGrid {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        if values.is_empty() {
            return Err(ScoError::Selection("sparsity grid is empty".into()));
        }
        if values[0] == 0 {
            return Err(ScoError::Selection("sparsity levels start at 1".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ScoError::Selection(format!("grid {values:?} is not strictly increasing")));
        }
        Ok(SparsityGrid(values))
    }

    /// `lo..=hi`.
    pub fn range(lo: usize, hi: usize) -> Result<Self> {
        Self::new((lo..=hi).collect())
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn max(&self) -> usize {
        *self.0.last().expect("non-empty grid")
    }

    fn check(&self, units: usize) -> Result<()> {
        if self.max() > units {
            return Err(ScoError::Selection(format!(
                "grid maximum {} exceeds the {units} selectable units",
                self.max()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    Aic,
    Bic,
    Gic,
    Sic,
    /// K-fold cross-validation.
    CrossValidation(usize),
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Aic => "aic",
            Criterion::Bic => "bic",
            Criterion::Gic => "gic",
            Criterion::Sic => "sic",
            Criterion::CrossValidation(_) => "cv",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::CrossValidation(k) => write!(f, "cv({k})"),
            c => f.write_str(c.name()),
        }
    }
}

/// Parses `aic`, `bic`, `gic`, `sic`, `cv` (5 folds) or `cv<K>`.
impl FromStr for Criterion {
    type Err = ScoError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "aic" => Ok(Criterion::Aic),
            "bic" => Ok(Criterion::Bic),
            "gic" => Ok(Criterion::Gic),
            "sic" => Ok(Criterion::Sic),
            "cv" => Ok(Criterion::CrossValidation(5)),
            _ => lower
                .strip_prefix("cv")
                .and_then(|k| k.parse().ok())
                .map(Criterion::CrossValidation)
                .ok_or_else(|| ScoError::Selection(format!("unknown criterion `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEntry {
    pub s: usize,
    pub solution: ScoSolution,
    /// Criterion value, or mean holdout loss for cross-validation.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub criterion: Criterion,
    pub entries: Vec<PathEntry>,
    pub chosen_s: usize,
    pub chosen: ScoSolution,
}

impl PathResult {
    /// Picks the smallest value, preferring the smaller s on ties.
    fn from_entries(criterion: Criterion, entries: Vec<PathEntry>) -> Result<Self> {
        let mut best: Option<&PathEntry> = None;
        for e in &entries {
            if e.value.is_nan() {
                return Err(ScoError::Selection(format!("criterion value at s = {} is NaN", e.s)));
            }
            if best.is_none_or(|b| e.value < b.value) {
                best = Some(e);
            }
        }
        let best = best.ok_or_else(|| ScoError::Selection("empty path".into()))?;
        Ok(PathResult {
            criterion,
            chosen_s: best.s,
            chosen: best.solution.clone(),
            entries,
        })
    }
}

/// A path that stopped early; `completed` holds the solves that finished.
#[derive(Debug, Error)]
#[error("path stopped at s = {failed_s}: {source}")]
pub struct PathError {
    pub completed: Vec<ScoSolution>,
    pub failed_s: usize,
    #[source]
    pub source: ScoError,
}

impl From<PathError> for ScoError {
    fn from(e: PathError) -> Self {
        e.source
    }
}

/// Solves at every grid value in increasing order, each solve warm-started
/// from the previous solution. A cold solve at the same level replaces the
/// warm one when it reaches a lower objective.
pub fn solve_path(
    problem: &ScoProblem,
    grid: &SparsityGrid,
    kind: SolverKind,
    config: &SolverConfig,
) -> std::result::Result<Vec<ScoSolution>, PathError> {
    let mut completed: Vec<ScoSolution> = Vec::with_capacity(grid.values().len());
    if let Err(source) = grid.check(problem.view().unit_count()) {
        return Err(PathError {
            completed,
            failed_s: grid.max(),
            source,
        });
    }
    let mut cold = config.clone();
    cold.warm_start = Some(config.warm_start.clone().unwrap_or_else(|| vec![0.0; problem.dim()]));
    for &s in grid.values() {
        let attempt = problem.with_sparsity(s).and_then(|p| {
            let Some(prev) = completed.last() else {
                return solve(kind, &p, &cold);
            };
            let warm = SolverConfig {
                warm_start: Some(prev.params.clone()),
                ..config.clone()
            };
            let from_prev = solve(kind, &p, &warm)?;
            // Non-monotone solvers can do worse from a warm start.
            let fresh = solve(kind, &p, &cold)?;
            Ok(if fresh.objective < from_prev.objective { fresh } else { from_prev })
        });
        match attempt {
            Ok(sol) => completed.push(sol),
            Err(source) => {
                return Err(PathError {
                    completed,
                    failed_s: s,
                    source,
                })
            }
        }
    }
    Ok(completed)
}

/// Information criterion of a fit with objective `f` on `s` units, `n`
/// samples and `p` candidate units.
///
/// * AIC = 2f + 2s
/// * BIC = 2f + s·ln n
/// * GIC = 2f + s·ln p·ln ln n
/// * SIC = n·ln(2f/n) + s·ln p·ln ln n, for half-RSS objectives only
pub fn information_criterion(
    criterion: Criterion,
    f: f64,
    s: usize,
    n: usize,
    p: usize,
    scale: LossScale,
) -> Result<f64> {
    if n < 2 || p < 1 {
        return Err(ScoError::Selection(format!("need n >= 2 and p >= 1, got n = {n}, p = {p}")));
    }
    let (s, nf, pf) = (s as f64, n as f64, p as f64);
    let loglog = || {
        if nf <= std::f64::consts::E {
            Err(ScoError::Criterion {
                criterion: criterion.name(),
                needs: "n > e so that ln ln n is defined",
            })
        } else {
            Ok(nf.ln().ln())
        }
    };
    match criterion {
        Criterion::CrossValidation(_) => Err(ScoError::Selection(
            "cross-validation has no closed-form criterion".into(),
        )),
        _ if scale == LossScale::Unspecified => Err(ScoError::Criterion {
            criterion: criterion.name(),
            needs: "an objective tagged as RSS or NLL scale",
        }),
        Criterion::Aic => Ok(2.0 * f + 2.0 * s),
        Criterion::Bic => Ok(2.0 * f + s * nf.ln()),
        Criterion::Gic => Ok(2.0 * f + s * pf.ln() * loglog()?),
        Criterion::Sic => {
            if scale != LossScale::Rss {
                return Err(ScoError::Criterion {
                    criterion: "sic",
                    needs: "a half residual-sum-of-squares objective",
                });
            }
            if !(f > 0.0) {
                return Err(ScoError::Criterion {
                    criterion: "sic",
                    needs: "a positive residual sum of squares",
                });
            }
            Ok(nf * (2.0 * f / nf).ln() + s * pf.ln() * loglog()?)
        }
    }
}

/// Solves the path and scores each solution with an information criterion.
/// The problem must record its sample size.
pub fn select_by_criterion(
    problem: &ScoProblem,
    grid: &SparsityGrid,
    kind: SolverKind,
    criterion: Criterion,
    config: &SolverConfig,
) -> Result<PathResult> {
    if let Criterion::CrossValidation(_) = criterion {
        return Err(ScoError::Selection("use cross_validate for cross-validation".into()));
    }
    let n = problem
        .sample_size()
        .ok_or_else(|| ScoError::Selection("problem has no sample size".into()))?;
    let p = problem.view().unit_count();
    let scale = problem.oracle().scale();
    let path = solve_path(problem, grid, kind, config)?;
    let entries = grid
        .values()
        .iter()
        .zip(path)
        .map(|(&s, solution)| {
            let value = information_criterion(criterion, solution.objective, s, n, p, scale)?;
            Ok(PathEntry { s, solution, value })
        })
        .collect::<Result<Vec<_>>>()?;
    PathResult::from_entries(criterion, entries)
}

/// Splits rows into `k` folds: rows are shuffled with `seed` and the i-th
/// shuffled row goes to fold i mod k. Each fold is returned sorted.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(ScoError::Selection(format!("need at least 2 folds, got {k}")));
    }
    if n < k {
        return Err(ScoError::Selection(format!("{k} folds over {n} rows leaves a fold empty")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (i, &row) in perm.iter().enumerate() {
        folds[i % k].push(row);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// K-fold cross-validation over the grid.
///
/// `factory` builds the problem on a subset of rows; its sparsity is
/// overridden. For each s the score is the mean over folds of the held-out
/// objective at the solution trained on the other folds. Entries carry the
/// full-data path, and the chosen solution is the full-data fit at the
/// chosen s.
pub fn cross_validate<F>(
    factory: F,
    n_rows: usize,
    k: usize,
    grid: &SparsityGrid,
    kind: SolverKind,
    config: &SolverConfig,
) -> Result<PathResult>
where
    F: Fn(&[usize]) -> Result<ScoProblem>,
{
    let folds = fold_assignment(n_rows, k, config.seed.unwrap_or(0))?;
    let mut loss = vec![0.0; grid.values().len()];
    for (i, holdout) in folds.iter().enumerate() {
        let train: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, f)| f.iter().copied())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let train_problem = factory(&train)?;
        let test_oracle = factory(holdout)?.oracle().clone();
        let path = solve_path(&train_problem, grid, kind, config)?;
        for (l, sol) in loss.iter_mut().zip(&path) {
            *l += test_oracle.value(&sol.params)?;
        }
    }
    let all: Vec<usize> = (0..n_rows).collect();
    let full = solve_path(&factory(&all)?, grid, kind, config)?;
    let entries = grid
        .values()
        .iter()
        .zip(full)
        .zip(loss)
        .map(|((&s, solution), l)| PathEntry {
            s,
            solution,
            value: l / k as f64,
        })
        .collect();
    PathResult::from_entries(Criterion::CrossValidation(k), entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bic_example() {
        let v = information_criterion(Criterion::Bic, 10.0, 2, 100, 5, LossScale::Nll).unwrap();
        assert!((v - 29.210_340_371_976_18).abs() < 1e-9);
    }

    #[test]
    fn criterion_errors() {
        assert!(information_criterion(Criterion::Sic, 1.0, 1, 100, 5, LossScale::Nll).is_err());
        assert!(information_criterion(Criterion::Gic, 1.0, 1, 2, 5, LossScale::Nll).is_err());
        assert!(information_criterion(Criterion::Sic, 1.0, 1, 2, 5, LossScale::Rss).is_err());
        assert!(information_criterion(Criterion::Aic, 1.0, 1, 20, 5, LossScale::Unspecified).is_err());
        assert!(information_criterion(Criterion::Sic, 0.0, 1, 20, 5, LossScale::Rss).is_err());
        assert!(information_criterion(Criterion::CrossValidation(5), 1.0, 1, 20, 5, LossScale::Rss).is_err());
    }

    #[test]
    fn grids() {
        assert!(SparsityGrid::new(vec![]).is_err());
        assert!(SparsityGrid::new(vec![2, 2]).is_err());
        assert!(SparsityGrid::new(vec![0, 1]).is_err());
        assert_eq!(SparsityGrid::range(1, 3).unwrap().values(), &[1, 2, 3]);
    }

    #[test]
    fn criterion_names_parse() {
        assert_eq!("BIC".parse::<Criterion>().unwrap(), Criterion::Bic);
        assert_eq!("cv".parse::<Criterion>().unwrap(), Criterion::CrossValidation(5));
        assert_eq!("cv10".parse::<Criterion>().unwrap(), Criterion::CrossValidation(10));
        assert!("mdl".parse::<Criterion>().is_err());
    }

    #[test]
    fn folds_partition_rows() {
        let folds = fold_assignment(100, 5, 3).unwrap();
        assert!(folds.iter().all(|f| f.len() == 20));
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_eq!(folds, fold_assignment(100, 5, 3).unwrap());

        let loo = fold_assignment(10, 10, 0).unwrap();
        assert!(loo.iter().all(|f| f.len() == 1));
        assert!(fold_assignment(4, 5, 0).is_err());
        assert!(fold_assignment(10, 1, 0).is_err());
    }

    proptest! {
        #[test]
        fn penalties_increase_in_s(f in 0.1f64..1e4, s in 0usize..50, n in 3usize..5000, p in 2usize..5000) {
            for c in [Criterion::Aic, Criterion::Bic, Criterion::Gic, Criterion::Sic] {
                let a = information_criterion(c, f, s, n, p, LossScale::Rss).unwrap();
                let b = information_criterion(c, f, s + 1, n, p, LossScale::Rss).unwrap();
                prop_assert!(b > a);
            }
        }
    }
}
