use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::expr::{build_objective, Expr, Program};
use super::AdError;

/// Scale on which an objective value should be read by information criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossScale {
    /// Half residual sum of squares, `½‖y − ŷ‖²`.
    Rss,
    /// Negative log-likelihood (or pseudo-likelihood).
    Nll,
    Unspecified,
}

/// Value and gradient of f: ℝᵖ → ℝ.
///
/// Implementations are immutable; every evaluation owns its scratch state,
/// so one oracle may serve many concurrent solves.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, theta: &[f64]) -> Result<f64, AdError>;

    fn value_and_gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>), AdError>;

    /// Value and the gradient entries at `coords`, in that order.
    fn value_and_partial_gradient(
        &self,
        theta: &[f64],
        coords: &[usize],
    ) -> Result<(f64, Vec<f64>), AdError> {
        let (f, g) = self.value_and_gradient(theta)?;
        Ok((f, coords.iter().map(|&i| g[i]).collect()))
    }

    fn scale(&self) -> LossScale {
        LossScale::Unspecified
    }
}

pub type ObjectiveOracle = Arc<dyn Objective>;

/// Objective backed by a compiled [`Program`]; gradients come from the tape.
#[derive(Debug, Clone)]
pub struct ProgramOracle {
    program: Program,
    scale: LossScale,
}

impl ProgramOracle {
    pub fn new(program: Program) -> Self {
        ProgramOracle {
            program,
            scale: LossScale::Unspecified,
        }
    }

    pub fn with_scale(mut self, scale: LossScale) -> Self {
        self.scale = scale;
        self
    }

    pub fn into_oracle(self) -> ObjectiveOracle {
        Arc::new(self)
    }

    pub fn program(&self) -> &Program {
        &self.program
    }
}

/// Builds a tape-backed oracle from an expression.
pub fn program_oracle(expr: &Expr, scale: LossScale) -> Result<ObjectiveOracle, AdError> {
    Ok(ProgramOracle::new(build_objective(expr)?)
        .with_scale(scale)
        .into_oracle())
}

impl Objective for ProgramOracle {
    fn dim(&self) -> usize {
        self.program.dim()
    }

    fn value(&self, theta: &[f64]) -> Result<f64, AdError> {
        let (tape, _, out) = self.program.record(theta)?;
        tape.scalar(out)
    }

    fn value_and_gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>), AdError> {
        let (tape, param, out) = self.program.record(theta)?;
        let f = tape.scalar(out)?;
        let mut adj = tape.backward(out)?;
        let g = adj.take(param).unwrap_or_else(|| vec![0.0; theta.len()]);
        Ok((f, g))
    }

    fn value_and_partial_gradient(
        &self,
        theta: &[f64],
        coords: &[usize],
    ) -> Result<(f64, Vec<f64>), AdError> {
        let (tape, param, out) = self.program.record(theta)?;
        let f = tape.scalar(out)?;
        let mut adj = tape.backward_masked(out, Some(coords))?;
        let g = match adj.take(param) {
            Some(g) => coords.iter().map(|&i| g[i]).collect(),
            None => vec![0.0; coords.len()],
        };
        Ok((f, g))
    }

    fn scale(&self) -> LossScale {
        self.scale
    }
}

type ValueFn = dyn Fn(&[f64]) -> Result<f64, AdError> + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Result<Vec<f64>, AdError> + Send + Sync;

/// Objective with a hand-written gradient, bypassing the tape.
pub struct AnalyticOracle {
    dim: usize,
    value: Box<ValueFn>,
    gradient: Box<GradFn>,
    scale: LossScale,
}

impl fmt::Debug for AnalyticOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticOracle")
            .field("dim", &self.dim)
            .field("scale", &self.scale)
            .finish_non_exhaustive()
    }
}

impl AnalyticOracle {
    pub fn new(
        dim: usize,
        value: impl Fn(&[f64]) -> Result<f64, AdError> + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Result<Vec<f64>, AdError> + Send + Sync + 'static,
    ) -> Self {
        AnalyticOracle {
            dim,
            value: Box::new(value),
            gradient: Box::new(gradient),
            scale: LossScale::Unspecified,
        }
    }

    pub fn with_scale(mut self, scale: LossScale) -> Self {
        self.scale = scale;
        self
    }

    pub fn into_oracle(self) -> ObjectiveOracle {
        Arc::new(self)
    }

    fn check(&self, theta: &[f64]) -> Result<(), AdError> {
        if theta.len() != self.dim {
            return Err(AdError::Dimension {
                expected: self.dim,
                got: theta.len(),
            });
        }
        Ok(())
    }
}

impl Objective for AnalyticOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, theta: &[f64]) -> Result<f64, AdError> {
        self.check(theta)?;
        (self.value)(theta)
    }

    fn value_and_gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>), AdError> {
        self.check(theta)?;
        Ok(((self.value)(theta)?, (self.gradient)(theta)?))
    }

    fn scale(&self) -> LossScale {
        self.scale
    }
}

/// Central-difference gradient with a fixed step.
pub fn fd_gradient(oracle: &dyn Objective, theta: &[f64], step: f64) -> Result<Vec<f64>, AdError> {
    if !(step > 0.0) {
        return Err(AdError::InvalidStep(step));
    }
    fd_with(oracle, theta, |_| step)
}

/// Central differences with per-coordinate step `rel·(1 + |θᵢ|)`.
pub fn fd_gradient_scaled(
    oracle: &dyn Objective,
    theta: &[f64],
    rel: f64,
) -> Result<Vec<f64>, AdError> {
    if !(rel > 0.0) {
        return Err(AdError::InvalidStep(rel));
    }
    fd_with(oracle, theta, |x| rel * (1.0 + x.abs()))
}

fn fd_with(
    oracle: &dyn Objective,
    theta: &[f64],
    step: impl Fn(f64) -> f64,
) -> Result<Vec<f64>, AdError> {
    let mut x = theta.to_vec();
    let mut g = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let h = step(theta[i]);
        x[i] = theta[i] + h;
        let up = oracle.value(&x)?;
        x[i] = theta[i] - h;
        let down = oracle.value(&x)?;
        x[i] = theta[i];
        g.push((up - down) / (2.0 * h));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_on_square() {
        let th = Expr::param(1);
        let o = program_oracle(&th.sum_sq(), LossScale::Unspecified).unwrap();
        let g = fd_gradient(o.as_ref(), &[3.0], 1e-5).unwrap();
        assert!((g[0] - 6.0).abs() <= 1e-8);
    }

    #[test]
    fn fd_on_constant_is_zero() {
        let th = Expr::param(3);
        let f = th.sum() * 0.0 + 4.0;
        let o = program_oracle(&f, LossScale::Unspecified).unwrap();
        let g = fd_gradient(o.as_ref(), &[1.0, -2.0, 0.5], 1e-4).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fd_rejects_nonpositive_step() {
        let o = program_oracle(&Expr::param(1).sum(), LossScale::Unspecified).unwrap();
        assert!(fd_gradient(o.as_ref(), &[0.0], 0.0).is_err());
    }

    #[test]
    fn analytic_oracle_bypasses_tape() {
        let o = AnalyticOracle::new(
            2,
            |t| Ok(t[0] * t[0] + 3.0 * t[1]),
            |t| Ok(vec![2.0 * t[0], 3.0]),
        );
        let (f, g) = o.value_and_gradient(&[2.0, 1.0]).unwrap();
        assert_eq!(f, 7.0);
        assert_eq!(g, vec![4.0, 3.0]);
        let (_, gp) = o.value_and_partial_gradient(&[2.0, 1.0], &[1]).unwrap();
        assert_eq!(gp, vec![3.0]);
        assert!(o.value(&[1.0]).is_err());
    }
}
