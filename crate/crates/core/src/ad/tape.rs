//! Reverse-mode tape.
//!
//! Every node holds a value vector (scalars are length one) together with the
//! local partial derivatives needed by the reverse sweep. Nodes are appended in
//! evaluation order, so operands always precede their consumers and a single
//! backward pass in reverse index order visits each node exactly once.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use ndarray::Array2;

use super::AdError;

static NEXT_TAPE_ID: AtomicU64 = AtomicU64::new(1);

/// Operation recorded in a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Param,
    Const,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Exp,
    Ln,
    Sqrt,
    Powf,
    Abs,
    Sigmoid,
    Log1pExp,
    Dot,
    SumSq,
    Norm,
    Cumsum,
    Sum,
    MatVec,
    Index,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Param => "param",
            OpKind::Const => "const",
            OpKind::Add => "add",
            OpKind::Sub => "sub",
            OpKind::Mul => "mul",
            OpKind::Div => "div",
            OpKind::Neg => "neg",
            OpKind::Exp => "exp",
            OpKind::Ln => "log",
            OpKind::Sqrt => "sqrt",
            OpKind::Powf => "pow",
            OpKind::Abs => "abs",
            OpKind::Sigmoid => "sigmoid",
            OpKind::Log1pExp => "log1pexp",
            OpKind::Dot => "dot",
            OpKind::SumSq => "sum_sq",
            OpKind::Norm => "norm",
            OpKind::Cumsum => "cumsum",
            OpKind::Sum => "sum",
            OpKind::MatVec => "matvec",
            OpKind::Index => "index",
        }
    }
}

#[derive(Debug, Clone)]
enum Aux {
    None,
    Matrix(Arc<Array2<f64>>),
    Index(usize),
}

#[derive(Debug, Clone)]
struct Node {
    kind: OpKind,
    args: [usize; 2],
    arity: u8,
    value: Vec<f64>,
    /// Local partials per operand. Empty when the op is linear and the
    /// backward rule needs no stored values.
    partials: [Vec<f64>; 2],
    aux: Aux,
}

/// Handle to a node of a particular tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var {
    tape: u64,
    index: usize,
}

impl Var {
    pub fn index(&self) -> usize {
        self.index
    }
}

/// Append-only record of one evaluation.
#[derive(Debug)]
pub struct Tape {
    id: u64,
    nodes: Vec<Node>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            id: NEXT_TAPE_ID.fetch_add(1, Ordering::Relaxed),
            nodes: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize) -> Self {
        let mut t = Self::new();
        t.nodes.reserve(n);
        t
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> Result<&[f64], AdError> {
        self.check(v)?;
        Ok(&self.nodes[v.index].value)
    }

    /// Value of a length-one node.
    pub fn scalar(&self, v: Var) -> Result<f64, AdError> {
        let val = self.value(v)?;
        if val.len() != 1 {
            return Err(AdError::NotScalar { len: val.len() });
        }
        Ok(val[0])
    }

    pub fn kind(&self, v: Var) -> Result<OpKind, AdError> {
        self.check(v)?;
        Ok(self.nodes[v.index].kind)
    }

    /// Checks that every operand index precedes its node.
    pub fn is_topologically_ordered(&self) -> bool {
        self.nodes
            .iter()
            .enumerate()
            .all(|(i, n)| n.args[..n.arity as usize].iter().all(|&a| a < i))
    }

    fn check(&self, v: Var) -> Result<(), AdError> {
        if v.tape != self.id || v.index >= self.nodes.len() {
            return Err(AdError::ForeignVar);
        }
        Ok(())
    }

    fn push(&mut self, node: Node) -> Result<Var, AdError> {
        let index = self.nodes.len();
        if node.value.iter().any(|x| !x.is_finite())
            || node.partials.iter().any(|p| p.iter().any(|x| !x.is_finite()))
        {
            return Err(AdError::Domain {
                node: index,
                op: node.kind.name(),
            });
        }
        self.nodes.push(node);
        Ok(Var {
            tape: self.id,
            index,
        })
    }

    fn leaf(&mut self, kind: OpKind, value: Vec<f64>) -> Result<Var, AdError> {
        self.push(Node {
            kind,
            args: [0; 2],
            arity: 0,
            value,
            partials: [Vec::new(), Vec::new()],
            aux: Aux::None,
        })
    }

    /// Differentiable input vector.
    pub fn param(&mut self, values: &[f64]) -> Result<Var, AdError> {
        self.leaf(OpKind::Param, values.to_vec())
    }

    pub fn constant(&mut self, values: &[f64]) -> Result<Var, AdError> {
        self.leaf(OpKind::Const, values.to_vec())
    }

    pub fn scalar_constant(&mut self, value: f64) -> Result<Var, AdError> {
        self.leaf(OpKind::Const, vec![value])
    }

    fn domain(&self, kind: OpKind) -> AdError {
        AdError::Domain {
            node: self.nodes.len(),
            op: kind.name(),
        }
    }

    fn unary_node(
        &mut self,
        kind: OpKind,
        a: Var,
        value: Vec<f64>,
        partial: Vec<f64>,
        aux: Aux,
    ) -> Result<Var, AdError> {
        self.push(Node {
            kind,
            args: [a.index, 0],
            arity: 1,
            value,
            partials: [partial, Vec::new()],
            aux,
        })
    }

    fn broadcast_len(&self, kind: OpKind, a: Var, b: Var) -> Result<usize, AdError> {
        let (la, lb) = (self.nodes[a.index].value.len(), self.nodes[b.index].value.len());
        match (la, lb) {
            _ if la == lb => Ok(la),
            (1, _) => Ok(lb),
            (_, 1) => Ok(la),
            _ => Err(AdError::Shape {
                op: kind.name(),
                left: la,
                right: lb,
            }),
        }
    }

    fn elementwise(
        &mut self,
        kind: OpKind,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> Result<(f64, f64, f64), ()>,
    ) -> Result<Var, AdError> {
        self.check(a)?;
        self.check(b)?;
        let len = self.broadcast_len(kind, a, b)?;
        let (va, vb) = (&self.nodes[a.index].value, &self.nodes[b.index].value);
        let pick = |v: &Vec<f64>, i: usize| if v.len() == 1 { v[0] } else { v[i] };
        let mut value = Vec::with_capacity(len);
        let mut da = Vec::with_capacity(len);
        let mut db = Vec::with_capacity(len);
        for i in 0..len {
            let (y, pa, pb) = f(pick(va, i), pick(vb, i)).map_err(|_| self.domain(kind))?;
            value.push(y);
            da.push(pa);
            db.push(pb);
        }
        self.push(Node {
            kind,
            args: [a.index, b.index],
            arity: 2,
            value,
            partials: [da, db],
            aux: Aux::None,
        })
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, AdError> {
        self.elementwise(OpKind::Add, a, b, |x, y| Ok((x + y, 1.0, 1.0)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, AdError> {
        self.elementwise(OpKind::Sub, a, b, |x, y| Ok((x - y, 1.0, -1.0)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, AdError> {
        self.elementwise(OpKind::Mul, a, b, |x, y| Ok((x * y, y, x)))
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var, AdError> {
        self.elementwise(OpKind::Div, a, b, |x, y| {
            if y == 0.0 {
                Err(())
            } else {
                Ok((x / y, 1.0 / y, -x / (y * y)))
            }
        })
    }

    fn map(
        &mut self,
        kind: OpKind,
        a: Var,
        f: impl Fn(f64) -> Result<(f64, f64), ()>,
    ) -> Result<Var, AdError> {
        self.check(a)?;
        let src = &self.nodes[a.index].value;
        let mut value = Vec::with_capacity(src.len());
        let mut d = Vec::with_capacity(src.len());
        for &x in src {
            let (y, dy) = f(x).map_err(|_| self.domain(kind))?;
            value.push(y);
            d.push(dy);
        }
        self.unary_node(kind, a, value, d, Aux::None)
    }

    pub fn neg(&mut self, a: Var) -> Result<Var, AdError> {
        self.map(OpKind::Neg, a, |x| Ok((-x, -1.0)))
    }

    pub fn exp(&mut self, a: Var) -> Result<Var, AdError> {
        self.map(OpKind::Exp, a, |x| {
            let e = x.exp();
            Ok((e, e))
        })
    }

    pub fn ln(&mut self, a: Var) -> Result<Var, AdError> {
        self.map(OpKind::Ln, a, |x| if x > 0.0 { Ok((x.ln(), 1.0 / x)) } else { Err(()) })
    }

    pub fn sqrt(&mut self, a: Var) -> Result<Var, AdError> {
        self.map(OpKind::Sqrt, a, |x| {
            if x > 0.0 {
                let r = x.sqrt();
                Ok((r, 0.5 / r))
            } else {
                Err(())
            }
        })
    }

    /// `a^e` for a real exponent. Negative bases need an integral exponent.
    pub fn powf(&mut self, a: Var, e: f64) -> Result<Var, AdError> {
        self.map(OpKind::Powf, a, |x| {
            if x < 0.0 && e.fract() != 0.0 {
                return Err(());
            }
            if e == 0.0 {
                return Ok((1.0, 0.0));
            }
            Ok((x.powf(e), e * x.powf(e - 1.0)))
        })
    }

    /// |a|, with derivative 0 at 0.
    pub fn abs(&mut self, a: Var) -> Result<Var, AdError> {
        self.map(OpKind::Abs, a, |x| {
            let d = if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            };
            Ok((x.abs(), d))
        })
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var, AdError> {
        self.map(OpKind::Sigmoid, a, |x| {
            let s = logistic(x);
            Ok((s, s * (1.0 - s)))
        })
    }

    /// log(1 + e^a), evaluated without overflow.
    pub fn log1pexp(&mut self, a: Var) -> Result<Var, AdError> {
        self.map(OpKind::Log1pExp, a, |x| Ok((log1pexp(x), logistic(x))))
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var, AdError> {
        self.check(a)?;
        self.check(b)?;
        let (va, vb) = (&self.nodes[a.index].value, &self.nodes[b.index].value);
        if va.len() != vb.len() {
            return Err(AdError::Shape {
                op: "dot",
                left: va.len(),
                right: vb.len(),
            });
        }
        let d: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
        let (pa, pb) = (vb.clone(), va.clone());
        self.push(Node {
            kind: OpKind::Dot,
            args: [a.index, b.index],
            arity: 2,
            value: vec![d],
            partials: [pa, pb],
            aux: Aux::None,
        })
    }

    pub fn sum_sq(&mut self, a: Var) -> Result<Var, AdError> {
        self.check(a)?;
        let src = &self.nodes[a.index].value;
        let v: f64 = src.iter().map(|x| x * x).sum();
        let d = src.iter().map(|x| 2.0 * x).collect();
        self.unary_node(OpKind::SumSq, a, vec![v], d, Aux::None)
    }

    /// Euclidean norm; the gradient at the origin is taken to be zero.
    pub fn norm(&mut self, a: Var) -> Result<Var, AdError> {
        self.check(a)?;
        let src = &self.nodes[a.index].value;
        let r = src.iter().map(|x| x * x).sum::<f64>().sqrt();
        let d = if r > 0.0 {
            src.iter().map(|x| x / r).collect()
        } else {
            vec![0.0; src.len()]
        };
        self.unary_node(OpKind::Norm, a, vec![r], d, Aux::None)
    }

    pub fn cumsum(&mut self, a: Var) -> Result<Var, AdError> {
        self.check(a)?;
        let mut acc = 0.0;
        let value = self.nodes[a.index]
            .value
            .iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        self.unary_node(OpKind::Cumsum, a, value, Vec::new(), Aux::None)
    }

    pub fn sum(&mut self, a: Var) -> Result<Var, AdError> {
        self.check(a)?;
        let v = self.nodes[a.index].value.iter().sum();
        self.unary_node(OpKind::Sum, a, vec![v], Vec::new(), Aux::None)
    }

    /// Product of a constant matrix with `a`. Zero entries of `a` are skipped.
    pub fn matvec(&mut self, m: &Arc<Array2<f64>>, a: Var) -> Result<Var, AdError> {
        self.check(a)?;
        let src = &self.nodes[a.index].value;
        if src.len() != m.ncols() {
            return Err(AdError::Shape {
                op: "matvec",
                left: m.ncols(),
                right: src.len(),
            });
        }
        let mut out = vec![0.0; m.nrows()];
        for (j, &t) in src.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            axpy(t, m.column(j), &mut out);
        }
        self.unary_node(OpKind::MatVec, a, out, Vec::new(), Aux::Matrix(Arc::clone(m)))
    }

    /// Component `i` of `a` as a scalar.
    pub fn index(&mut self, a: Var, i: usize) -> Result<Var, AdError> {
        self.check(a)?;
        let src = &self.nodes[a.index].value;
        let v = *src.get(i).ok_or(AdError::IndexOutOfRange {
            index: i,
            len: src.len(),
        })?;
        self.unary_node(OpKind::Index, a, vec![v], Vec::new(), Aux::Index(i))
    }

    /// Reverse sweep seeded with d(output)/d(output) = 1.
    pub fn backward(&self, output: Var) -> Result<Adjoints, AdError> {
        self.backward_masked(output, None)
    }

    /// Reverse sweep where only the listed coordinates of parameter nodes are
    /// needed. Matrix products feeding directly from a parameter skip the
    /// other columns; entries outside the mask are left at zero.
    pub fn backward_masked(
        &self,
        output: Var,
        mask: Option<&[usize]>,
    ) -> Result<Adjoints, AdError> {
        self.check(output)?;
        if self.nodes[output.index].value.len() != 1 {
            return Err(AdError::NotScalar {
                len: self.nodes[output.index].value.len(),
            });
        }
        let mut adj: Vec<Option<Vec<f64>>> = vec![None; output.index + 1];
        adj[output.index] = Some(vec![1.0]);
        let mut visits = 0;
        for i in (0..=output.index).rev() {
            visits += 1;
            let Some(g) = adj[i].take() else { continue };
            let node = &self.nodes[i];
            self.propagate(node, &g, &mut adj, mask);
            adj[i] = Some(g);
        }
        Ok(Adjoints {
            tape: self.id,
            adj,
            visits,
        })
    }

    fn propagate(
        &self,
        node: &Node,
        g: &[f64],
        adj: &mut [Option<Vec<f64>>],
        mask: Option<&[usize]>,
    ) {
        let arg_len = |k: usize| self.nodes[node.args[k]].value.len();
        match node.kind {
            OpKind::Param | OpKind::Const => {}
            OpKind::Add
            | OpKind::Sub
            | OpKind::Mul
            | OpKind::Div
            | OpKind::Neg
            | OpKind::Exp
            | OpKind::Ln
            | OpKind::Sqrt
            | OpKind::Powf
            | OpKind::Abs
            | OpKind::Sigmoid
            | OpKind::Log1pExp => {
                for k in 0..node.arity as usize {
                    let len = arg_len(k);
                    let p = &node.partials[k];
                    let slot = accumulator(adj, node.args[k], len);
                    if len == 1 && g.len() > 1 {
                        slot[0] += g.iter().zip(p).map(|(a, b)| a * b).sum::<f64>();
                    } else {
                        for ((s, a), b) in slot.iter_mut().zip(g).zip(p) {
                            *s += a * b;
                        }
                    }
                }
            }
            OpKind::Dot | OpKind::SumSq | OpKind::Norm => {
                for k in 0..node.arity as usize {
                    let len = arg_len(k);
                    let p = &node.partials[k];
                    let slot = accumulator(adj, node.args[k], len);
                    for (s, b) in slot.iter_mut().zip(p) {
                        *s += g[0] * b;
                    }
                }
            }
            OpKind::Sum => {
                let slot = accumulator(adj, node.args[0], arg_len(0));
                for s in slot.iter_mut() {
                    *s += g[0];
                }
            }
            OpKind::Index => {
                let Aux::Index(i) = node.aux else { unreachable!() };
                let slot = accumulator(adj, node.args[0], arg_len(0));
                slot[i] += g[0];
            }
            OpKind::Cumsum => {
                let slot = accumulator(adj, node.args[0], arg_len(0));
                let mut acc = 0.0;
                for (s, a) in slot.iter_mut().zip(g).rev() {
                    acc += a;
                    *s += acc;
                }
            }
            OpKind::MatVec => {
                let Aux::Matrix(ref m) = node.aux else { unreachable!() };
                let arg = node.args[0];
                let from_param = self.nodes[arg].kind == OpKind::Param;
                let slot = accumulator(adj, arg, m.ncols());
                match mask {
                    Some(cols) if from_param => {
                        for &j in cols {
                            slot[j] += column_dot(m.column(j), g);
                        }
                    }
                    _ => {
                        for (j, s) in slot.iter_mut().enumerate() {
                            *s += column_dot(m.column(j), g);
                        }
                    }
                }
            }
        }
    }
}

fn accumulator(adj: &mut [Option<Vec<f64>>], index: usize, len: usize) -> &mut Vec<f64> {
    adj[index].get_or_insert_with(|| vec![0.0; len])
}

fn axpy(t: f64, col: ndarray::ArrayView1<'_, f64>, out: &mut [f64]) {
    match col.as_slice() {
        Some(c) => {
            for (o, x) in out.iter_mut().zip(c) {
                *o += t * x;
            }
        }
        None => {
            for (o, x) in out.iter_mut().zip(col.iter()) {
                *o += t * x;
            }
        }
    }
}

fn column_dot(col: ndarray::ArrayView1<'_, f64>, g: &[f64]) -> f64 {
    match col.as_slice() {
        Some(c) => c.iter().zip(g).map(|(a, b)| a * b).sum(),
        None => col.iter().zip(g).map(|(a, b)| a * b).sum(),
    }
}

pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn log1pexp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Result of a reverse sweep.
#[derive(Debug)]
pub struct Adjoints {
    tape: u64,
    adj: Vec<Option<Vec<f64>>>,
    visits: usize,
}

impl Adjoints {
    /// Gradient of the output with respect to `v`, zeros if `v` does not
    /// influence the output.
    pub fn wrt(&self, v: Var, len: usize) -> Result<Vec<f64>, AdError> {
        if v.tape != self.tape {
            return Err(AdError::ForeignVar);
        }
        Ok(match self.adj.get(v.index) {
            Some(Some(g)) => g.clone(),
            _ => vec![0.0; len],
        })
    }

    pub(crate) fn take(&mut self, v: Var) -> Option<Vec<f64>> {
        self.adj.get_mut(v.index).and_then(Option::take)
    }

    /// Number of nodes visited by the sweep.
    pub fn visits(&self) -> usize {
        self.visits
    }
}
