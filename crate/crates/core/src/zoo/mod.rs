//! Benchmark models: synthetic data generators and their objectives.
//!
//! * linear regression, f(θ) = ½‖y − Xθ‖²
//! * logistic regression, f(θ) = Σ log(1 + e^{xᵢᵀθ}) − yᵢ xᵢᵀθ
//! * trend filtering, f(θ) = ½‖data − cumsum(θ)‖² with θ the increments
//! * Ising model, negative log-pseudo-likelihood over edge couplings
//!
//! Every generator is a pure function of its [`ModelSpec`].

mod table;

pub use table::{read_csv, write_csv, Table};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::{Array2, ShapeBuilder};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ad::{logistic, program_oracle, Expr, LossScale, ObjectiveOracle};
use crate::error::{Result, ScoError};
use crate::problem::ScoProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    Linear,
    Logistic,
    TrendFilter,
    Ising,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Logistic => "logistic",
            ModelKind::TrendFilter => "trend",
            ModelKind::Ising => "ising",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ScoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(ModelKind::Linear),
            "logistic" => Ok(ModelKind::Logistic),
            "trend" | "trend-filter" | "trendfilter" => Ok(ModelKind::TrendFilter),
            "ising" => Ok(ModelKind::Ising),
            _ => Err(ScoError::Data(format!("unknown model `{s}`"))),
        }
    }
}

/// Data-generating settings.
///
/// `p` is the number of features for the regressions, and the number of
/// spins for the Ising model (which then has p(p−1)/2 edge parameters). For
/// trend filtering the parameter count is `n` and `p` is ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub n: usize,
    pub p: usize,
    pub s_true: usize,
    /// var(Xθ*)/var(ε) for linear data; infinite means noiseless.
    pub snr: f64,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, n: usize, p: usize, s_true: usize, seed: u64) -> Self {
        ModelSpec {
            kind,
            n,
            p,
            s_true,
            snr: 5.0,
            seed,
        }
    }

    pub fn with_snr(mut self, snr: f64) -> Self {
        self.snr = snr;
        self
    }

    /// Number of parameters of the model's objective.
    pub fn dim(&self) -> usize {
        match self.kind {
            ModelKind::Linear | ModelKind::Logistic => self.p,
            ModelKind::TrendFilter => self.n,
            ModelKind::Ising => self.p * self.p.saturating_sub(1) / 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.s_true == 0 {
            return Err(ScoError::Data("n and s_true must be at least 1".into()));
        }
        if self.kind != ModelKind::TrendFilter && self.p == 0 {
            return Err(ScoError::Data("p must be at least 1".into()));
        }
        if self.s_true > self.dim() {
            return Err(ScoError::Data(format!(
                "s_true = {} exceeds the {} model parameters",
                self.s_true,
                self.dim()
            )));
        }
        if !(self.snr > 0.0) {
            return Err(ScoError::Data(format!("snr must be positive, got {}", self.snr)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub kind: ModelKind,
    /// Design matrix, or the ±1 spin matrix for the Ising model.
    pub x: Option<Arc<Array2<f64>>>,
    /// Response, or the observed series for trend filtering.
    pub y: Option<Vec<f64>>,
    pub theta_true: Vec<f64>,
    pub support_true: Vec<usize>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        match (&self.x, &self.y) {
            (Some(x), _) => x.nrows(),
            (None, Some(y)) => y.len(),
            (None, None) => 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.theta_true.len()
    }

    /// The dataset restricted to `rows`. Trend series have no exchangeable
    /// rows and are rejected.
    pub fn subset(&self, rows: &[usize]) -> Result<Dataset> {
        if self.kind == ModelKind::TrendFilter {
            return Err(ScoError::Data("trend series cannot be split by rows".into()));
        }
        let x = self.x.as_ref().map(|x| {
            let mut out = Array2::zeros((rows.len(), x.ncols()).f());
            for (k, &i) in rows.iter().enumerate() {
                out.row_mut(k).assign(&x.row(i));
            }
            Arc::new(out)
        });
        let y = self.y.as_ref().map(|y| rows.iter().map(|&i| y[i]).collect());
        Ok(Dataset {
            kind: self.kind,
            x,
            y,
            theta_true: self.theta_true.clone(),
            support_true: self.support_true.clone(),
        })
    }

    pub fn objective(&self) -> Result<ObjectiveOracle> {
        match self.kind {
            ModelKind::Linear => objective_linear(self),
            ModelKind::Logistic => objective_logistic(self),
            ModelKind::TrendFilter => objective_trend(self),
            ModelKind::Ising => objective_ising(self),
        }
    }

    /// Problem with budget `s` and the sample size recorded for criteria.
    pub fn problem(&self, s: usize) -> Result<ScoProblem> {
        ScoProblem::builder(self.objective()?, s)
            .sample_size(self.n())
            .build()
    }
}

pub fn generate(spec: &ModelSpec) -> Result<Dataset> {
    match spec.kind {
        ModelKind::Linear => gen_linear(spec),
        ModelKind::Logistic => gen_logistic(spec),
        ModelKind::TrendFilter => gen_trend(spec),
        ModelKind::Ising => gen_ising(spec),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_design(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Array2<f64> {
    // Row-major draw order, column-major storage.
    let mut x = Array2::zeros((n, p).f());
    for i in 0..n {
        for j in 0..p {
            x[[i, j]] = rng.sample(StandardNormal);
        }
    }
    x
}

/// Support drawn uniformly, values sign·U[lo, hi].
fn planted(rng: &mut ChaCha8Rng, p: usize, s: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<usize>) {
    let mut support = sample(rng, p, s).into_vec();
    support.sort_unstable();
    let mut theta = vec![0.0; p];
    for &j in &support {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        theta[j] = sign * rng.random_range(lo..=hi);
    }
    (theta, support)
}

fn matvec(x: &Array2<f64>, theta: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.nrows()];
    for (j, &t) in theta.iter().enumerate() {
        if t != 0.0 {
            for (o, v) in out.iter_mut().zip(x.column(j)) {
                *o += t * v;
            }
        }
    }
    out
}

fn variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

/// Gaussian design, planted ±[1, 2] coefficients, noise rescaled so that the
/// sample variance ratio var(Xθ*)/var(ε) equals `spec.snr`.
pub fn gen_linear(spec: &ModelSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut r = rng(spec.seed);
    let x = gaussian_design(&mut r, spec.n, spec.p);
    let (theta, support) = planted(&mut r, spec.p, spec.s_true, 1.0, 2.0);
    let mut y = matvec(&x, &theta);
    if spec.snr.is_finite() {
        let eps: Vec<f64> = (0..spec.n).map(|_| r.sample(StandardNormal)).collect();
        let (vs, ve) = (variance(&y), variance(&eps));
        let scale = if ve > 0.0 { (vs / (spec.snr * ve)).sqrt() } else { 0.0 };
        for (yi, e) in y.iter_mut().zip(&eps) {
            *yi += scale * e;
        }
    }
    Ok(Dataset {
        kind: ModelKind::Linear,
        x: Some(Arc::new(x)),
        y: Some(y),
        theta_true: theta,
        support_true: support,
    })
}

/// Gaussian design, planted ±[1, 2] coefficients, yᵢ ~ Bernoulli(σ(xᵢᵀθ*)).
pub fn gen_logistic(spec: &ModelSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut r = rng(spec.seed);
    let x = gaussian_design(&mut r, spec.n, spec.p);
    let (theta, support) = planted(&mut r, spec.p, spec.s_true, 1.0, 2.0);
    let eta = matvec(&x, &theta);
    let y = eta
        .iter()
        .map(|&e| {
            let b = Bernoulli::new(logistic(e)).expect("probability in [0, 1]");
            if b.sample(&mut r) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(Dataset {
        kind: ModelKind::Logistic,
        x: Some(Arc::new(x)),
        y: Some(y),
        theta_true: theta,
        support_true: support,
    })
}

/// Piecewise-constant series with `s_true` jumps of size ±[5, 8], observed
/// under standard normal noise. Jumps sit at increments 1..n, at least
/// `n / (4(s_true + 1))` (and 2) apart; the level starts at zero.
pub fn gen_trend(spec: &ModelSpec) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.n;
    let s = spec.s_true;
    let gap = (n / (4 * (s + 1))).max(2);
    if n < 2 || (s - 1) * gap + 1 > n - 1 {
        return Err(ScoError::Data(format!("cannot place {s} jumps {gap} apart in a series of {n}")));
    }
    let mut r = rng(spec.seed);
    let positions = loop {
        let mut pos: Vec<usize> = sample(&mut r, n - 1, s).into_iter().map(|i| i + 1).collect();
        pos.sort_unstable();
        if pos.windows(2).all(|w| w[1] - w[0] >= gap) {
            break pos;
        }
    };
    let mut theta = vec![0.0; n];
    for &j in &positions {
        let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
        theta[j] = sign * r.random_range(5.0..=8.0);
    }
    let mut level = 0.0;
    let y = theta
        .iter()
        .map(|t| {
            level += t;
            level + r.sample::<f64, _>(StandardNormal)
        })
        .collect();
    Ok(Dataset {
        kind: ModelKind::TrendFilter,
        x: None,
        y: Some(y),
        theta_true: theta,
        support_true: positions,
    })
}

/// Random walk with standard normal increments. Every increment is part of
/// the truth.
pub fn gen_random_walk(n: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let theta: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
    let mut level = 0.0;
    let y = theta
        .iter()
        .map(|t| {
            level += t;
            level
        })
        .collect();
    Dataset {
        kind: ModelKind::TrendFilter,
        x: None,
        y: Some(y),
        support_true: (0..n).filter(|&j| theta[j] != 0.0).collect(),
        theta_true: theta,
    }
}

/// Position of edge (a, b), a < b, in the upper-triangular parameter vector.
pub fn edge_index(q: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < q);
    a * q - a * (a + 1) / 2 + (b - a - 1)
}

const GIBBS_BURN_IN: usize = 200;

/// Ising model on `spec.p` spins with `s_true` edges of coupling ±[0.5, 1].
/// Each sample is the end state of its own Gibbs chain after 200 sweeps.
pub fn gen_ising(spec: &ModelSpec) -> Result<Dataset> {
    spec.validate()?;
    let q = spec.p;
    let mut r = rng(spec.seed);
    let (theta, support) = planted(&mut r, spec.dim(), spec.s_true, 0.5, 1.0);
    let mut coupling = vec![vec![0.0; q]; q];
    for a in 0..q {
        for b in a + 1..q {
            let w = theta[edge_index(q, a, b)];
            coupling[a][b] = w;
            coupling[b][a] = w;
        }
    }
    let mut spins = Array2::zeros((spec.n, q).f());
    let mut z = vec![0.0; q];
    for i in 0..spec.n {
        for v in z.iter_mut() {
            *v = if r.random::<bool>() { 1.0 } else { -1.0 };
        }
        for _ in 0..GIBBS_BURN_IN {
            for a in 0..q {
                let h: f64 = coupling[a].iter().zip(&z).map(|(w, s)| w * s).sum();
                z[a] = if r.random::<f64>() < logistic(2.0 * h) { 1.0 } else { -1.0 };
            }
        }
        for a in 0..q {
            spins[[i, a]] = z[a];
        }
    }
    Ok(Dataset {
        kind: ModelKind::Ising,
        x: Some(Arc::new(spins)),
        y: None,
        theta_true: theta,
        support_true: support,
    })
}

fn design(data: &Dataset) -> Result<&Arc<Array2<f64>>> {
    data.x.as_ref().ok_or_else(|| ScoError::Data("dataset has no design matrix".into()))
}

fn response(data: &Dataset) -> Result<&Vec<f64>> {
    data.y.as_ref().ok_or_else(|| ScoError::Data("dataset has no response".into()))
}

/// ½‖y − Xθ‖², RSS-scaled.
pub fn objective_linear(data: &Dataset) -> Result<ObjectiveOracle> {
    let x = design(data)?;
    let theta = Expr::param(x.ncols());
    let resid = Expr::vector(response(data)?.clone()) - Expr::matvec(Arc::clone(x), &theta);
    Ok(program_oracle(&(0.5 * resid.sum_sq()), LossScale::Rss)?)
}

/// Σ log(1 + e^{xᵢᵀθ}) − yᵢ xᵢᵀθ, NLL-scaled.
pub fn objective_logistic(data: &Dataset) -> Result<ObjectiveOracle> {
    let x = design(data)?;
    let theta = Expr::param(x.ncols());
    let eta = Expr::matvec(Arc::clone(x), &theta);
    let f = eta.log1pexp().sum() - Expr::vector(response(data)?.clone()).dot(&eta);
    Ok(program_oracle(&f, LossScale::Nll)?)
}

/// ½‖data − cumsum(θ)‖², RSS-scaled.
pub fn objective_trend(data: &Dataset) -> Result<ObjectiveOracle> {
    let y = response(data)?;
    let resid = Expr::vector(y.clone()) - Expr::param(y.len()).cumsum();
    Ok(program_oracle(&(0.5 * resid.sum_sq()), LossScale::Rss)?)
}

/// ‖data − cumsum(θ)‖, the unsquared trend objective.
pub fn objective_trend_norm(data: &Dataset) -> Result<ObjectiveOracle> {
    let y = response(data)?;
    let resid = Expr::vector(y.clone()) - Expr::param(y.len()).cumsum();
    Ok(program_oracle(&resid.norm(), LossScale::Unspecified)?)
}

/// −Σᵢ Σₐ log σ(2 zᵢₐ Σ_{b≠a} θₐᵦ zᵢᵦ), NLL-scaled.
pub fn objective_ising(data: &Dataset) -> Result<ObjectiveOracle> {
    let z = design(data)?;
    let (n, q) = z.dim();
    let dim = q * q.saturating_sub(1) / 2;
    // Row (i, a) maps θ to the margin 2 zᵢₐ Σ_b θₐᵦ zᵢᵦ.
    let mut m = Array2::zeros((n * q, dim).f());
    for i in 0..n {
        for a in 0..q {
            for b in a + 1..q {
                let e = edge_index(q, a, b);
                let v = 2.0 * z[[i, a]] * z[[i, b]];
                m[[i * q + a, e]] = v;
                m[[i * q + b, e]] = v;
            }
        }
    }
    let margin = Expr::matvec(Arc::new(m), &Expr::param(dim));
    Ok(program_oracle(&(-margin).log1pexp().sum(), LossScale::Nll)?)
}
