//! Objective programs.
//!
//! An [`Expr`] is a small expression graph over a single parameter vector and
//! constants. [`build_objective`] checks shapes once and flattens the graph
//! into a [`Program`], which records a fresh [`Tape`] on every evaluation.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use ndarray::{Array2, ShapeBuilder};

use super::tape::{Tape, Var};
use super::AdError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unary {
    Neg,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sigmoid,
    Log1pExp,
    SumSq,
    Norm,
    Cumsum,
    Sum,
}

impl Unary {
    fn from_name(name: &str) -> Option<Unary> {
        Some(match name {
            "neg" => Unary::Neg,
            "exp" => Unary::Exp,
            "log" | "ln" => Unary::Ln,
            "sqrt" => Unary::Sqrt,
            "abs" => Unary::Abs,
            "sigmoid" | "logistic" => Unary::Sigmoid,
            "log1pexp" | "softplus" => Unary::Log1pExp,
            "sum_sq" => Unary::SumSq,
            "norm" => Unary::Norm,
            "cumsum" => Unary::Cumsum,
            "sum" => Unary::Sum,
            _ => return None,
        })
    }

    fn reduces(self) -> bool {
        matches!(self, Unary::SumSq | Unary::Norm | Unary::Sum)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binary {
    Add,
    Sub,
    Mul,
    Div,
    Dot,
}

#[derive(Debug)]
enum Node {
    Param(usize),
    Const(Arc<Vec<f64>>),
    Unary(Unary, Expr),
    Named(String, Expr),
    Powf(Expr, f64),
    Binary(Binary, Expr, Expr),
    MatVec(Arc<Array2<f64>>, Expr),
    Index(Expr, usize),
}

/// Shared handle to an expression node. Cloning is cheap and keeps sharing,
/// so common subexpressions are evaluated once.
#[derive(Debug, Clone)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    /// The parameter vector θ of length `dim`.
    pub fn param(dim: usize) -> Self {
        Expr::new(Node::Param(dim))
    }

    pub fn scalar(value: f64) -> Self {
        Expr::new(Node::Const(Arc::new(vec![value])))
    }

    pub fn vector(values: Vec<f64>) -> Self {
        Expr::new(Node::Const(Arc::new(values)))
    }

    /// Applies a function by name. Unknown names are reported by
    /// [`build_objective`].
    pub fn apply(&self, name: &str) -> Self {
        Expr::new(Node::Named(name.to_string(), self.clone()))
    }

    fn unary(&self, op: Unary) -> Self {
        Expr::new(Node::Unary(op, self.clone()))
    }

    pub fn exp(&self) -> Self {
        self.unary(Unary::Exp)
    }

    pub fn ln(&self) -> Self {
        self.unary(Unary::Ln)
    }

    pub fn sqrt(&self) -> Self {
        self.unary(Unary::Sqrt)
    }

    pub fn abs(&self) -> Self {
        self.unary(Unary::Abs)
    }

    pub fn sigmoid(&self) -> Self {
        self.unary(Unary::Sigmoid)
    }

    pub fn log1pexp(&self) -> Self {
        self.unary(Unary::Log1pExp)
    }

    pub fn powf(&self, e: f64) -> Self {
        Expr::new(Node::Powf(self.clone(), e))
    }

    pub fn sum_sq(&self) -> Self {
        self.unary(Unary::SumSq)
    }

    pub fn norm(&self) -> Self {
        self.unary(Unary::Norm)
    }

    pub fn cumsum(&self) -> Self {
        self.unary(Unary::Cumsum)
    }

    pub fn sum(&self) -> Self {
        self.unary(Unary::Sum)
    }

    pub fn dot(&self, other: &Expr) -> Self {
        Expr::new(Node::Binary(Binary::Dot, self.clone(), other.clone()))
    }

    pub fn get(&self, i: usize) -> Self {
        Expr::new(Node::Index(self.clone(), i))
    }

    /// `m · self` for a constant matrix.
    pub fn matvec(m: Arc<Array2<f64>>, v: &Expr) -> Self {
        let m = if m.t().is_standard_layout() {
            m
        } else {
            let mut f = Array2::zeros(m.dim().f());
            f.assign(&*m);
            Arc::new(f)
        };
        Expr::new(Node::MatVec(m, v.clone()))
    }

    fn binary(op: Binary, a: &Expr, b: &Expr) -> Self {
        Expr::new(Node::Binary(op, a.clone(), b.clone()))
    }

    fn key(&self) -> *const Node {
        Arc::as_ptr(&self.0)
    }
}

macro_rules! impl_binop {
    ($tr:ident, $method:ident, $op:expr) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, &self, &rhs)
            }
        }
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
        impl $tr<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::binary($op, &self, &Expr::scalar(rhs))
            }
        }
        impl $tr<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, &Expr::scalar(self), &rhs)
            }
        }
    };
}

impl_binop!(Add, add, Binary::Add);
impl_binop!(Sub, sub, Binary::Sub);
impl_binop!(Mul, mul, Binary::Mul);
impl_binop!(Div, div, Binary::Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.unary(Unary::Neg)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.unary(Unary::Neg)
    }
}

#[derive(Debug, Clone)]
enum Instr {
    Param,
    Const(Arc<Vec<f64>>),
    Unary(Unary, usize),
    Powf(usize, f64),
    Binary(Binary, usize, usize),
    MatVec(Arc<Array2<f64>>, usize),
    Index(usize, usize),
}

/// A validated objective program in evaluation order.
#[derive(Debug, Clone)]
pub struct Program {
    instrs: Vec<Instr>,
    dim: usize,
}

/// Checks an expression and flattens it into a [`Program`].
///
/// The expression must reduce to a scalar, mention the parameter vector with
/// one consistent dimension, and use only known operations.
pub fn build_objective(expr: &Expr) -> Result<Program, AdError> {
    let mut c = Compiler::default();
    let out = c.visit(expr)?;
    if c.lens[out] != 1 {
        return Err(AdError::NotScalar { len: c.lens[out] });
    }
    let dim = c.dim.ok_or(AdError::NoParameter)?;
    Ok(Program {
        instrs: c.instrs,
        dim,
    })
}

#[derive(Default)]
struct Compiler {
    instrs: Vec<Instr>,
    lens: Vec<usize>,
    seen: HashMap<*const Node, usize>,
    dim: Option<usize>,
}

impl Compiler {
    fn emit(&mut self, instr: Instr, len: usize) -> usize {
        self.instrs.push(instr);
        self.lens.push(len);
        self.instrs.len() - 1
    }

    fn visit(&mut self, e: &Expr) -> Result<usize, AdError> {
        if let Some(&i) = self.seen.get(&e.key()) {
            return Ok(i);
        }
        let idx = match &*e.0 {
            Node::Param(d) => {
                if let Some(prev) = self.dim {
                    if prev != *d {
                        return Err(AdError::ParamDim {
                            first: prev,
                            second: *d,
                        });
                    }
                }
                self.dim = Some(*d);
                self.emit(Instr::Param, *d)
            }
            Node::Const(v) => self.emit(Instr::Const(Arc::clone(v)), v.len()),
            Node::Unary(op, a) => {
                let a = self.visit(a)?;
                self.unary(*op, a)
            }
            Node::Named(name, a) => {
                let op = Unary::from_name(name)
                    .ok_or_else(|| AdError::Unsupported(name.clone()))?;
                let a = self.visit(a)?;
                self.unary(op, a)
            }
            Node::Powf(a, p) => {
                let a = self.visit(a)?;
                let len = self.lens[a];
                self.emit(Instr::Powf(a, *p), len)
            }
            Node::Binary(op, a, b) => {
                let (a, b) = (self.visit(a)?, self.visit(b)?);
                let (la, lb) = (self.lens[a], self.lens[b]);
                let len = match op {
                    Binary::Dot if la == lb => 1,
                    _ if la == lb => la,
                    Binary::Dot => {
                        return Err(AdError::Shape {
                            op: "dot",
                            left: la,
                            right: lb,
                        })
                    }
                    _ if la == 1 => lb,
                    _ if lb == 1 => la,
                    _ => {
                        return Err(AdError::Shape {
                            op: "elementwise",
                            left: la,
                            right: lb,
                        })
                    }
                };
                self.emit(Instr::Binary(*op, a, b), len)
            }
            Node::MatVec(m, a) => {
                let a = self.visit(a)?;
                if m.ncols() != self.lens[a] {
                    return Err(AdError::Shape {
                        op: "matvec",
                        left: m.ncols(),
                        right: self.lens[a],
                    });
                }
                self.emit(Instr::MatVec(Arc::clone(m), a), m.nrows())
            }
            Node::Index(a, i) => {
                let a = self.visit(a)?;
                if *i >= self.lens[a] {
                    return Err(AdError::IndexOutOfRange {
                        index: *i,
                        len: self.lens[a],
                    });
                }
                self.emit(Instr::Index(a, *i), 1)
            }
        };
        self.seen.insert(e.key(), idx);
        Ok(idx)
    }

    fn unary(&mut self, op: Unary, a: usize) -> usize {
        let len = if op.reduces() { 1 } else { self.lens[a] };
        self.emit(Instr::Unary(op, a), len)
    }
}

impl Program {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    /// Replays the program on a new tape at `theta`. Returns the tape, the
    /// parameter node and the scalar output node.
    pub fn record(&self, theta: &[f64]) -> Result<(Tape, Var, Var), AdError> {
        if theta.len() != self.dim {
            return Err(AdError::Dimension {
                expected: self.dim,
                got: theta.len(),
            });
        }
        let mut t = Tape::with_capacity(self.instrs.len());
        let mut vars: Vec<Var> = Vec::with_capacity(self.instrs.len());
        let mut param = None;
        for instr in &self.instrs {
            let v = match instr {
                Instr::Param => match param {
                    Some(p) => p,
                    None => {
                        let p = t.param(theta)?;
                        param = Some(p);
                        p
                    }
                },
                Instr::Const(c) => t.constant(c)?,
                Instr::Unary(op, a) => {
                    let a = vars[*a];
                    match op {
                        Unary::Neg => t.neg(a)?,
                        Unary::Exp => t.exp(a)?,
                        Unary::Ln => t.ln(a)?,
                        Unary::Sqrt => t.sqrt(a)?,
                        Unary::Abs => t.abs(a)?,
                        Unary::Sigmoid => t.sigmoid(a)?,
                        Unary::Log1pExp => t.log1pexp(a)?,
                        Unary::SumSq => t.sum_sq(a)?,
                        Unary::Norm => t.norm(a)?,
                        Unary::Cumsum => t.cumsum(a)?,
                        Unary::Sum => t.sum(a)?,
                    }
                }
                Instr::Powf(a, e) => t.powf(vars[*a], *e)?,
                Instr::Binary(op, a, b) => {
                    let (a, b) = (vars[*a], vars[*b]);
                    match op {
                        Binary::Add => t.add(a, b)?,
                        Binary::Sub => t.sub(a, b)?,
                        Binary::Mul => t.mul(a, b)?,
                        Binary::Div => t.div(a, b)?,
                        Binary::Dot => t.dot(a, b)?,
                    }
                }
                Instr::MatVec(m, a) => t.matvec(m, vars[*a])?,
                Instr::Index(a, i) => t.index(vars[*a], *i)?,
            };
            vars.push(v);
        }
        let out = *vars.last().ok_or(AdError::NoParameter)?;
        let param = param.ok_or(AdError::NoParameter)?;
        Ok((t, param, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_subexpressions_compile_once() {
        let th = Expr::param(3);
        let s = th.sum_sq();
        let f = &s + &s;
        let prog = build_objective(&f).unwrap();
        assert_eq!(prog.len(), 3);
    }

    #[test]
    fn construction_errors() {
        let th = Expr::param(3);
        assert!(matches!(
            build_objective(&th.apply("tanh").sum()),
            Err(AdError::Unsupported(_))
        ));
        assert!(matches!(build_objective(&th), Err(AdError::NotScalar { len: 3 })));
        assert!(matches!(
            build_objective(&(Expr::param(3).sum() + Expr::param(4).sum())),
            Err(AdError::ParamDim { .. })
        ));
        assert!(matches!(
            build_objective(&th.dot(&Expr::vector(vec![1.0; 2]))),
            Err(AdError::Shape { .. })
        ));
        assert!(matches!(
            build_objective(&Expr::scalar(1.0)),
            Err(AdError::NoParameter)
        ));
        assert!(build_objective(&th.apply("exp").sum()).is_ok());
    }

    #[test]
    fn record_checks_dimension() {
        let prog = build_objective(&Expr::param(2).sum()).unwrap();
        assert!(matches!(prog.record(&[1.0]), Err(AdError::Dimension { .. })));
    }
}
