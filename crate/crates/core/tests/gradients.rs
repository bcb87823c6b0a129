mod common;

use std::sync::Arc;

use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

use sco::ad::{build_objective, fd_gradient_scaled, program_oracle, Expr, LossScale, Objective};
use sco::zoo::{gen_random_walk, objective_trend_norm};
use sco::{generate, ModelKind, ModelSpec};

use common::{gaussian, inf_norm, rng};

fn fd_close(oracle: &dyn Objective, theta: &[f64]) -> f64 {
    let (_, ad) = oracle.value_and_gradient(theta).unwrap();
    let fd = fd_gradient_scaled(oracle, theta, 1e-6).unwrap();
    let diff: Vec<f64> = ad.iter().zip(&fd).map(|(a, b)| a - b).collect();
    inf_norm(&diff) / (1.0 + inf_norm(&fd))
}

#[test]
fn product_plus_exp_at_zero_one() {
    let th = Expr::param(2);
    let f = th.get(0) * th.get(1) + th.get(0).exp();
    let o = program_oracle(&f, LossScale::Unspecified).unwrap();
    let (v, g) = o.value_and_gradient(&[0.0, 1.0]).unwrap();
    assert_eq!(v, 1.0);
    assert_eq!(g, vec![2.0, 0.0]);
}

#[test]
fn least_squares_identity_design() {
    let x = Arc::new(Array2::eye(2));
    let th = Expr::param(2);
    let f = 0.5 * (Expr::vector(vec![1.0, 2.0]) - Expr::matvec(x, &th)).sum_sq();
    let o = program_oracle(&f, LossScale::Rss).unwrap();
    assert_eq!(o.value_and_gradient(&[0.0, 0.0]).unwrap().1, vec![-1.0, -2.0]);
}

#[test]
fn unsquared_trend_norm_matches_fd() {
    let d = gen_random_walk(60, 9);
    let o = objective_trend_norm(&d).unwrap();
    let mut r = rng(1);
    for _ in 0..5 {
        let theta: Vec<f64> = (0..60).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        assert!(fd_close(o.as_ref(), &theta) <= 1e-6);
    }
}

#[test]
fn small_logistic_matches_fd() {
    let x = gaussian(5, 4, 3);
    let y = vec![1.0, 0.0, 0.0, 1.0, 1.0];
    let th = Expr::param(4);
    let eta = Expr::matvec(Arc::new(x), &th);
    let f = eta.log1pexp().sum() - Expr::vector(y).dot(&eta);
    let o = program_oracle(&f, LossScale::Nll).unwrap();
    let theta = [0.3, -1.2, 0.7, 2.0];
    let (_, ad) = o.value_and_gradient(&theta).unwrap();
    let fd = fd_gradient_scaled(o.as_ref(), &theta, 1e-6).unwrap();
    let diff = inf_norm(&ad.iter().zip(&fd).map(|(a, b)| a - b).collect::<Vec<_>>());
    assert!(diff <= 1e-6 * (1.0 + inf_norm(&ad)), "{diff}");
}

#[test]
fn zoo_objectives_match_fd_on_random_draws() {
    let kinds = [
        (ModelKind::Linear, 30, 8, 3),
        (ModelKind::Logistic, 30, 8, 3),
        (ModelKind::TrendFilter, 25, 0, 2),
        (ModelKind::Ising, 20, 5, 3),
    ];
    for (kind, n, p, s) in kinds {
        let mut worst: f64 = 0.0;
        for draw in 0..100u64 {
            let data = generate(&ModelSpec::new(kind, n, p, s, draw)).unwrap();
            let o = data.objective().unwrap();
            let mut r = rng(1000 + draw);
            let theta: Vec<f64> = (0..o.dim()).map(|_| 0.5 * r.sample::<f64, _>(StandardNormal)).collect();
            worst = worst.max(fd_close(o.as_ref(), &theta));
        }
        assert!(worst <= 1e-6, "{kind}: {worst}");
    }
}

#[test]
fn replay_is_bit_identical() {
    let data = generate(&ModelSpec::new(ModelKind::Logistic, 40, 10, 3, 2)).unwrap();
    let o = data.objective().unwrap();
    let theta: Vec<f64> = (0..10).map(|i| (i as f64 - 4.5) / 7.0).collect();
    let a = o.value_and_gradient(&theta).unwrap();
    let b = o.value_and_gradient(&theta).unwrap();
    assert_eq!(a.0.to_bits(), b.0.to_bits());
    assert!(a.1.iter().zip(&b.1).all(|(u, v)| u.to_bits() == v.to_bits()));
}

#[test]
fn partial_gradient_agrees_with_full() {
    let data = generate(&ModelSpec::new(ModelKind::Ising, 30, 6, 3, 5)).unwrap();
    let o = data.objective().unwrap();
    let theta: Vec<f64> = (0..o.dim()).map(|i| ((i * 7) % 5) as f64 / 10.0).collect();
    let (f, g) = o.value_and_gradient(&theta).unwrap();
    let coords = [0, 3, 4, 11];
    let (fp, gp) = o.value_and_partial_gradient(&theta, &coords).unwrap();
    assert_eq!(f, fp);
    for (k, &j) in coords.iter().enumerate() {
        assert!((g[j] - gp[k]).abs() <= 1e-12 * (1.0 + g[j].abs()));
    }
}

#[test]
fn unsupported_names_fail_at_construction() {
    let th = Expr::param(2);
    assert!(build_objective(&th.apply("tanh").sum()).is_err());
    assert!(build_objective(&th.exp()).is_err());
}

#[test]
fn domain_errors_name_the_node() {
    let th = Expr::param(1);
    let o = program_oracle(&th.ln().sum(), LossScale::Unspecified).unwrap();
    let err = o.value(&[-1.0]).unwrap_err();
    assert!(matches!(err, sco::AdError::Domain { op: "log", .. }), "{err:?}");
}

/// Random scalar programs over a 3-vector, built from the full vocabulary.
fn program() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::param(3)),
        (-2.0f64..2.0).prop_map(|c| Expr::vector(vec![c, 1.0 - c, 0.5])),
    ];
    let vecs = leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| a.sigmoid()),
            inner.clone().prop_map(|a| a.log1pexp()),
            inner.clone().prop_map(|a| (a * 0.3).exp()),
            inner.clone().prop_map(|a| a.cumsum()),
            inner.clone().prop_map(|a| (a.sum_sq() + 1.0).sqrt() * a),
            inner.prop_map(|a| 2.0 / (a.sigmoid() + 1.0)),
        ]
    });
    // The trailing term keeps the parameter in every program.
    prop_oneof![
        vecs.clone().prop_map(|v| v.sum_sq()),
        vecs.clone().prop_map(|v| v.sum()),
        (vecs.clone(), vecs).prop_map(|(a, b)| a.dot(&b)),
    ]
    .prop_map(|f| f + Expr::param(3).get(0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tapes_are_ordered_and_swept_once(expr in program(), x in proptest::collection::vec(-1.5f64..1.5, 3)) {
        let prog = build_objective(&expr).unwrap();
        let (tape, _, out) = prog.record(&x).unwrap();
        prop_assert!(tape.is_topologically_ordered());
        let adj = tape.backward(out).unwrap();
        prop_assert_eq!(adj.visits(), out.index() + 1);
    }

    #[test]
    fn random_programs_match_fd(expr in program(), x in proptest::collection::vec(-1.5f64..1.5, 3)) {
        let o = program_oracle(&expr, LossScale::Unspecified).unwrap();
        prop_assert!(fd_close(o.as_ref(), &x) <= 1e-6);
    }

    #[test]
    fn gradient_is_linear(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        x in proptest::collection::vec(-1.0f64..1.0, 6),
    ) {
        let data = generate(&ModelSpec::new(ModelKind::Logistic, 20, 6, 2, 4)).unwrap();
        let xm = Arc::clone(data.x.as_ref().unwrap());
        let th = Expr::param(6);
        let eta = Expr::matvec(xm, &th);
        let f = eta.log1pexp().sum();
        let g = (eta.clone() - Expr::vector(data.y.clone().unwrap())).sum_sq();
        let combo = a * f.clone() + b * g.clone();
        let of = program_oracle(&f, LossScale::Unspecified).unwrap();
        let og = program_oracle(&g, LossScale::Unspecified).unwrap();
        let oc = program_oracle(&combo, LossScale::Unspecified).unwrap();
        let (_, gf) = of.value_and_gradient(&x).unwrap();
        let (_, gg) = og.value_and_gradient(&x).unwrap();
        let (_, gc) = oc.value_and_gradient(&x).unwrap();
        for i in 0..6 {
            let expect = a * gf[i] + b * gg[i];
            prop_assert!((gc[i] - expect).abs() <= 1e-12 * (1.0 + expect.abs().max(gc[i].abs()) + (a * gf[i]).abs() + (b * gg[i]).abs()));
        }
    }
}
