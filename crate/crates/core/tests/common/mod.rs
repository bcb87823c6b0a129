#![allow(dead_code)]

use std::sync::Arc;

use ndarray::{Array2, ShapeBuilder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sco::zoo::objective_linear;
use sco::{Dataset, ModelKind, ScoProblem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(n: usize, p: usize, seed: u64) -> Array2<f64> {
    let mut r = rng(seed);
    let mut x = Array2::zeros((n, p).f());
    for v in x.iter_mut() {
        *v = r.sample(StandardNormal);
    }
    x
}

/// Columns orthonormalized by modified Gram-Schmidt, so XᵀX = I.
pub fn orthonormal(n: usize, p: usize, seed: u64) -> Array2<f64> {
    let mut x = gaussian(n, p, seed);
    for j in 0..p {
        for k in 0..j {
            let proj = x.column(j).dot(&x.column(k));
            let qk = x.column(k).to_owned();
            x.column_mut(j).scaled_add(-proj, &qk);
        }
        let norm = x.column(j).dot(&x.column(j)).sqrt();
        x.column_mut(j).mapv_inplace(|v| v / norm);
    }
    x
}

pub fn linear_data(x: Array2<f64>, y: Vec<f64>) -> Dataset {
    let p = x.ncols();
    Dataset {
        kind: ModelKind::Linear,
        x: Some(Arc::new(x)),
        y: Some(y),
        theta_true: vec![0.0; p],
        support_true: Vec::new(),
    }
}

pub fn ols_problem(x: Array2<f64>, y: Vec<f64>, s: usize) -> ScoProblem {
    let n = y.len();
    let data = linear_data(x, y);
    ScoProblem::builder(objective_linear(&data).unwrap(), s)
        .sample_size(n)
        .build()
        .unwrap()
}

/// Random OLS instance: Gaussian design, standard normal response.
pub fn random_ols(n: usize, p: usize, s: usize, seed: u64) -> ScoProblem {
    let x = gaussian(n, p, seed);
    let mut r = rng(seed ^ 0x5eed);
    let y = (0..n).map(|_| r.sample(StandardNormal)).collect();
    ols_problem(x, y, s)
}

pub fn xty(x: &Array2<f64>, y: &[f64]) -> Vec<f64> {
    (0..x.ncols()).map(|j| x.column(j).iter().zip(y).map(|(a, b)| a * b).sum()).collect()
}

/// Indices of the `k` largest |v|, ties to the lower index, sorted.
pub fn top_abs(v: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].abs().partial_cmp(&v[a].abs()).unwrap().then(a.cmp(&b)));
    let mut out = idx[..k].to_vec();
    out.sort_unstable();
    out
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
