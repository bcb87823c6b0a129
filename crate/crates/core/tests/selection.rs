mod common;

use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

use sco::selection::{
    cross_validate, fold_assignment, information_criterion, select_by_criterion, solve_path, Criterion,
    SparsityGrid,
};
use sco::ad::AnalyticOracle;
use sco::{generate, solve, AdError, LossScale, ScoProblem, ModelKind, ModelSpec, SolverConfig, SolverKind};

use common::{ols_problem, orthonormal, rng};

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

#[test]
fn single_point_path_equals_cold_solve() {
    let data = generate(&ModelSpec::new(ModelKind::Linear, 80, 20, 3, 4)).unwrap();
    let problem = data.problem(3).unwrap();
    let grid = SparsityGrid::new(vec![3]).unwrap();
    for kind in SolverKind::ALL {
        let path = solve_path(&problem, &grid, kind, &cfg()).unwrap();
        let direct = solve(kind, &problem, &cfg().with_warm_start(vec![0.0; 20])).unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!(path[0].params, direct.params, "{kind}");
        assert_eq!(path[0].objective, direct.objective, "{kind}");
    }
}

#[test]
fn orthonormal_paths_are_nested() {
    let x = orthonormal(30, 10, 2);
    let mut r = rng(5);
    let y: Vec<f64> = (0..30).map(|_| r.sample(StandardNormal)).collect();
    let problem = ols_problem(x, y, 1);
    let grid = SparsityGrid::range(1, 3).unwrap();
    for kind in SolverKind::ALL {
        let path = solve_path(&problem, &grid, kind, &cfg()).unwrap();
        for w in path.windows(2) {
            assert!(w[0].support.iter().all(|j| w[1].support.contains(j)), "{kind}");
        }
    }
}

#[test]
fn linear_path_objectives_strictly_decrease() {
    let data = generate(&ModelSpec::new(ModelKind::Linear, 200, 50, 5, 0)).unwrap();
    let problem = data.problem(1).unwrap();
    let grid = SparsityGrid::range(1, 10).unwrap();
    for kind in SolverKind::ALL {
        let path = solve_path(&problem, &grid, kind, &cfg()).unwrap();
        for w in path.windows(2) {
            assert!(w[1].objective < w[0].objective, "{kind}");
        }
    }
}

#[test]
fn warm_paths_are_no_worse_than_cold_solves() {
    for seed in 0..3 {
        let data = generate(&ModelSpec::new(ModelKind::Linear, 200, 50, 5, seed)).unwrap();
        let problem = data.problem(1).unwrap();
        let grid = SparsityGrid::range(1, 8).unwrap();
        for kind in SolverKind::ALL {
            let path = solve_path(&problem, &grid, kind, &cfg()).unwrap();
            for (sol, &s) in path.iter().zip(grid.values()) {
                let cold = solve(kind, &problem.with_sparsity(s).unwrap(), &cfg()).unwrap();
                assert!(sol.objective <= cold.objective + 1e-8, "{kind} s={s}: {} vs {}", sol.objective, cold.objective);
            }
        }
    }
}

#[test]
fn failed_path_reports_completed_solves() {
    // Evaluation fails outright once three coordinates are nonzero.
    let dense = |t: &[f64]| t.iter().filter(|v| **v != 0.0).count() >= 3;
    let value = move |t: &[f64]| {
        if dense(t) {
            return Err(AdError::Unsupported("dense".into()));
        }
        Ok(t.iter().enumerate().map(|(i, v)| (v - i as f64).powi(2)).sum())
    };
    let grad = |t: &[f64]| Ok(t.iter().enumerate().map(|(i, v)| 2.0 * (v - i as f64)).collect());
    let oracle = AnalyticOracle::new(6, value, grad).into_oracle();
    let problem = ScoProblem::new(oracle, 1).unwrap();
    let grid = SparsityGrid::range(1, 4).unwrap();
    let err = solve_path(&problem, &grid, SolverKind::Omp, &cfg()).unwrap_err();
    assert_eq!(err.failed_s, 3);
    assert_eq!(err.completed.len(), 2);
    assert_eq!(err.completed[1].support, vec![4, 5]);

    let too_wide = SparsityGrid::range(1, 7).unwrap();
    let err = solve_path(&problem, &too_wide, SolverKind::Omp, &cfg()).unwrap_err();
    assert!(err.completed.is_empty());
}

#[test]
fn chosen_level_is_the_argmin() {
    let data = generate(&ModelSpec::new(ModelKind::Logistic, 150, 30, 4, 1)).unwrap();
    let problem = data.problem(1).unwrap();
    let grid = SparsityGrid::range(1, 8).unwrap();
    for c in [Criterion::Aic, Criterion::Bic, Criterion::Gic] {
        let r = select_by_criterion(&problem, &grid, SolverKind::Scope, c, &cfg()).unwrap();
        let best = r.entries.iter().map(|e| e.value).fold(f64::INFINITY, f64::min);
        let first = r.entries.iter().find(|e| e.value == best).unwrap();
        assert_eq!(r.chosen_s, first.s);
        assert_eq!(r.chosen, first.solution);
    }
    assert!(select_by_criterion(&problem, &grid, SolverKind::Scope, Criterion::Sic, &cfg()).is_err());
}

#[test]
fn criteria_need_a_tag_and_a_sample_size() {
    let data = generate(&ModelSpec::new(ModelKind::Linear, 50, 10, 2, 1)).unwrap();
    let untagged = sco::ScoProblem::new(data.objective().unwrap(), 1).unwrap();
    let grid = SparsityGrid::range(1, 3).unwrap();
    assert!(select_by_criterion(&untagged, &grid, SolverKind::Omp, Criterion::Bic, &cfg()).is_err());
    let norm = sco::zoo::objective_trend_norm(&sco::zoo::gen_random_walk(30, 1)).unwrap();
    let p = sco::ScoProblem::builder(norm, 1).sample_size(30).build().unwrap();
    assert!(select_by_criterion(&p, &grid, SolverKind::Omp, Criterion::Aic, &cfg()).is_err());
}

#[test]
fn cross_validation_picks_near_the_truth() {
    let grid = SparsityGrid::range(1, 10).unwrap();
    let mut near = 0;
    for seed in 0..20 {
        let data = generate(&ModelSpec::new(ModelKind::Linear, 200, 50, 5, seed)).unwrap();
        let config = SolverConfig { seed: Some(seed), ..cfg() };
        let r = cross_validate(|rows| data.subset(rows)?.problem(1), 200, 5, &grid, SolverKind::Scope, &config).unwrap();
        assert_eq!(r.chosen.support.len(), r.chosen_s);
        near += usize::from((4..=6).contains(&r.chosen_s));
    }
    assert!(near >= 16, "{near}");
}

#[test]
fn cross_validation_is_reproducible() {
    let data = generate(&ModelSpec::new(ModelKind::Logistic, 120, 30, 3, 3)).unwrap();
    let grid = SparsityGrid::range(1, 6).unwrap();
    let config = SolverConfig { seed: Some(3), ..cfg() };
    let run = || cross_validate(|rows| data.subset(rows)?.problem(1), 120, 4, &grid, SolverKind::Grasp, &config).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.chosen_s, b.chosen_s);
    assert_eq!(a.chosen.params, b.chosen.params);
    let values = |r: &sco::selection::PathResult| r.entries.iter().map(|e| e.value).collect::<Vec<_>>();
    assert_eq!(values(&a), values(&b));
}

#[test]
fn leave_one_out_is_allowed() {
    let data = generate(&ModelSpec::new(ModelKind::Linear, 10, 4, 1, 0)).unwrap();
    let folds = fold_assignment(10, 10, 0).unwrap();
    assert!(folds.iter().all(|f| f.len() == 1));
    let grid = SparsityGrid::range(1, 2).unwrap();
    let r = cross_validate(|rows| data.subset(rows)?.problem(1), 10, 10, &grid, SolverKind::Omp, &cfg()).unwrap();
    assert_eq!(r.criterion, Criterion::CrossValidation(10));
    assert!(cross_validate(|rows| data.subset(rows)?.problem(1), 10, 11, &grid, SolverKind::Omp, &cfg()).is_err());
}

proptest! {
    #[test]
    fn equal_fits_prefer_fewer_units(f in 0.5f64..1e3, s in 1usize..20, n in 10usize..1000, p in 2usize..500) {
        for c in [Criterion::Aic, Criterion::Bic, Criterion::Gic, Criterion::Sic] {
            let small = information_criterion(c, f, s, n, p, LossScale::Rss).unwrap();
            let large = information_criterion(c, f, s + 3, n, p, LossScale::Rss).unwrap();
            prop_assert!(small < large);
        }
    }
}
