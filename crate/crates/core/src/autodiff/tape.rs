//! Reverse-mode differentiation over a flat operation tape.
//!
//! Every forward primitive appends one node holding its value; [`Tape::backward`]
//! walks the nodes in reverse and returns the gradient of a scalar with
//! respect to every node that requires one.

use std::rc::Rc;

use super::params::{ParamId, ParamStore};
use super::{Tensor, TensorError};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Primitive kinds, used for fault injection and tape inspection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Leaf,
    MatMul,
    Add,
    AddRow,
    Sub,
    Mul,
    Div,
    DivCol,
    ScalarMul,
    Scale,
    Relu,
    Sigmoid,
    Exp,
    Log,
    Square,
    Sqrt,
    Transpose,
    ConcatRows,
    ConcatCols,
    RowSum,
    ColSum,
    SumAll,
    MeanAll,
    Reshape,
    NeighborSum,
    SegmentSum,
    SliceRows,
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Div(Var, Var),
    DivCol(Var, Var),
    ScalarMul(Var, f64),
    Scale(Var, Var),
    Relu(Var),
    Sigmoid(Var),
    Exp(Var),
    Log(Var),
    Square(Var),
    Sqrt(Var),
    Transpose(Var),
    ConcatRows(Vec<Var>),
    ConcatCols(Var, Var),
    RowSum(Var),
    ColSum(Var),
    SumAll(Var),
    MeanAll(Var),
    Reshape(Var),
    NeighborSum(Var, Rc<Vec<Vec<usize>>>),
    SegmentSum { input: Var, offsets: Rc<Vec<usize>>, mean: bool },
    SliceRows(Var, usize),
}

impl Op {
    fn kind(&self) -> OpKind {
        match self {
            Op::Leaf => OpKind::Leaf,
            Op::MatMul(..) => OpKind::MatMul,
            Op::Add(..) => OpKind::Add,
            Op::AddRow(..) => OpKind::AddRow,
            Op::Sub(..) => OpKind::Sub,
            Op::Mul(..) => OpKind::Mul,
            Op::Div(..) => OpKind::Div,
            Op::DivCol(..) => OpKind::DivCol,
            Op::ScalarMul(..) => OpKind::ScalarMul,
            Op::Scale(..) => OpKind::Scale,
            Op::Relu(..) => OpKind::Relu,
            Op::Sigmoid(..) => OpKind::Sigmoid,
            Op::Exp(..) => OpKind::Exp,
            Op::Log(..) => OpKind::Log,
            Op::Square(..) => OpKind::Square,
            Op::Sqrt(..) => OpKind::Sqrt,
            Op::Transpose(..) => OpKind::Transpose,
            Op::ConcatRows(..) => OpKind::ConcatRows,
            Op::ConcatCols(..) => OpKind::ConcatCols,
            Op::RowSum(..) => OpKind::RowSum,
            Op::ColSum(..) => OpKind::ColSum,
            Op::SumAll(..) => OpKind::SumAll,
            Op::MeanAll(..) => OpKind::MeanAll,
            Op::Reshape(..) => OpKind::Reshape,
            Op::NeighborSum(..) => OpKind::NeighborSum,
            Op::SegmentSum { .. } => OpKind::SegmentSum,
            Op::SliceRows(..) => OpKind::SliceRows,
        }
    }
}

struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
    param: Option<ParamId>,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    fault: Option<OpKind>,
}

/// Result of [`Tape::backward`]: one optional gradient per tape node.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient of the loss with respect to `v`, or `None` when `v` does not
    /// require a gradient or does not influence the loss.
    pub fn wrt(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }
}

fn same_shape(op: &'static str, a: &Tensor, b: &Tensor) -> Result<(), TensorError> {
    if a.shape() != b.shape() {
        return Err(TensorError::Shape { op, left: a.shape(), right: b.shape() });
    }
    Ok(())
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Handles to every node, in recording order.
    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (0..self.nodes.len()).map(Var)
    }

    /// Scales the backward rule of `kind` by 1.5. Only for negative-control
    /// tests of the gradient checker.
    #[doc(hidden)]
    pub fn inject_fault(&mut self, kind: OpKind) {
        self.fault = Some(kind);
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    pub fn kind(&self, v: Var) -> OpKind {
        self.nodes[v.0].op.kind()
    }

    pub fn param_of(&self, v: Var) -> Option<ParamId> {
        self.nodes[v.0].param
    }

    /// Sign of every ReLU input on the tape, in recording order.
    pub fn relu_pattern(&self) -> Vec<bool> {
        let mut out = Vec::new();
        for node in &self.nodes {
            if let Op::Relu(a) = node.op {
                out.extend(self.nodes[a.0].value.data().iter().map(|&x| x > 0.0));
            }
        }
        out
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[Var]) -> Var {
        let requires_grad = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        self.nodes.push(Node { value, op, requires_grad, param: None });
        Var(self.nodes.len() - 1)
    }

    /// Leaf that never receives a gradient (data, targets, masks).
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.nodes.push(Node { value, op: Op::Leaf, requires_grad: false, param: None });
        Var(self.nodes.len() - 1)
    }

    /// Leaf with `requires_grad` set.
    pub fn variable(&mut self, value: Tensor) -> Var {
        self.nodes.push(Node { value, op: Op::Leaf, requires_grad: true, param: None });
        Var(self.nodes.len() - 1)
    }

    /// Leaf bound to a stored parameter; its gradient can be accumulated back
    /// with [`Tape::accumulate`].
    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        let p = store.get(id);
        self.nodes.push(Node { value: p.value.clone(), op: Op::Leaf, requires_grad: p.requires_grad, param: Some(id) });
        Var(self.nodes.len() - 1)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let value = self.value(a).matmul(self.value(b))?;
        Ok(self.push(value, Op::MatMul(a, b), &[a, b]))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        same_shape("add", self.value(a), self.value(b))?;
        let value = self.value(a).zip_map(self.value(b), |x, y| x + y);
        Ok(self.push(value, Op::Add(a, b), &[a, b]))
    }

    /// `a + b` with the `1 x c` row `b` broadcast over every row of `a`.
    pub fn add_row(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let (ta, tb) = (self.value(a), self.value(b));
        if tb.rows() != 1 || tb.cols() != ta.cols() {
            return Err(TensorError::Shape { op: "add_row", left: ta.shape(), right: tb.shape() });
        }
        let mut value = ta.clone();
        let c = ta.cols();
        for (i, x) in value.data_mut().iter_mut().enumerate() {
            *x += tb.data()[i % c];
        }
        Ok(self.push(value, Op::AddRow(a, b), &[a, b]))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        same_shape("sub", self.value(a), self.value(b))?;
        let value = self.value(a).zip_map(self.value(b), |x, y| x - y);
        Ok(self.push(value, Op::Sub(a, b), &[a, b]))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        same_shape("mul", self.value(a), self.value(b))?;
        let value = self.value(a).zip_map(self.value(b), |x, y| x * y);
        Ok(self.push(value, Op::Mul(a, b), &[a, b]))
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        same_shape("div", self.value(a), self.value(b))?;
        let value = self.value(a).zip_map(self.value(b), |x, y| x / y);
        Ok(self.push(value, Op::Div(a, b), &[a, b]))
    }

    /// Divides row `i` of `a` by entry `i` of the column `b`.
    pub fn div_col(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let (ta, tb) = (self.value(a), self.value(b));
        if tb.cols() != 1 || tb.rows() != ta.rows() {
            return Err(TensorError::Shape { op: "div_col", left: ta.shape(), right: tb.shape() });
        }
        let c = ta.cols();
        let mut value = ta.clone();
        for (i, x) in value.data_mut().iter_mut().enumerate() {
            *x /= tb.data()[i / c];
        }
        Ok(self.push(value, Op::DivCol(a, b), &[a, b]))
    }

    pub fn scalar_mul(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a).map(|x| x * c);
        self.push(value, Op::ScalarMul(a, c), &[a])
    }

    /// `s * a` for a `1 x 1` tensor `s`.
    pub fn scale(&mut self, a: Var, s: Var) -> Result<Var, TensorError> {
        let factor = self.value(s).item()?;
        let value = self.value(a).map(|x| x * factor);
        Ok(self.push(value, Op::Scale(a, s), &[a, s]))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|x| x.max(0.0));
        self.push(value, Op::Relu(a), &[a])
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = self.value(a).map(sigmoid);
        self.push(value, Op::Sigmoid(a), &[a])
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::exp);
        self.push(value, Op::Exp(a), &[a])
    }

    pub fn log(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::ln);
        self.push(value, Op::Log(a), &[a])
    }

    pub fn square(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|x| x * x);
        self.push(value, Op::Square(a), &[a])
    }

    pub fn sqrt(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::sqrt);
        self.push(value, Op::Sqrt(a), &[a])
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let value = self.value(a).transpose();
        self.push(value, Op::Transpose(a), &[a])
    }

    /// Stacks the inputs vertically; all must share a column count.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var, TensorError> {
        let first = *parts.first().ok_or(TensorError::Empty("concat_rows"))?;
        let cols = self.value(first).cols();
        let mut data = Vec::new();
        let mut rows = 0;
        for &p in parts {
            let t = self.value(p);
            if t.cols() != cols {
                return Err(TensorError::Shape { op: "concat_rows", left: self.value(first).shape(), right: t.shape() });
            }
            rows += t.rows();
            data.extend_from_slice(t.data());
        }
        let value = Tensor::new(rows, cols, data)?;
        Ok(self.push(value, Op::ConcatRows(parts.to_vec()), parts))
    }

    /// Places `b` to the right of `a`; both must share a row count.
    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.rows() != tb.rows() {
            return Err(TensorError::Shape { op: "concat_cols", left: ta.shape(), right: tb.shape() });
        }
        let mut data = Vec::with_capacity(ta.data().len() + tb.data().len());
        for r in 0..ta.rows() {
            data.extend_from_slice(ta.row(r));
            data.extend_from_slice(tb.row(r));
        }
        let value = Tensor::new(ta.rows(), ta.cols() + tb.cols(), data)?;
        Ok(self.push(value, Op::ConcatCols(a, b), &[a, b]))
    }

    /// Sum of each row, as an `n x 1` column.
    pub fn row_sum(&mut self, a: Var) -> Var {
        let t = self.value(a);
        let data = (0..t.rows()).map(|r| t.row(r).iter().sum()).collect();
        let value = Tensor::new(t.rows(), 1, data).expect("row_sum shape");
        self.push(value, Op::RowSum(a), &[a])
    }

    /// Sum of each column, as a `1 x c` row.
    pub fn col_sum(&mut self, a: Var) -> Var {
        let t = self.value(a);
        let mut data = vec![0.0; t.cols()];
        for r in 0..t.rows() {
            for (d, x) in data.iter_mut().zip(t.row(r)) {
                *d += x;
            }
        }
        let value = Tensor::new(1, t.cols(), data).expect("col_sum shape");
        self.push(value, Op::ColSum(a), &[a])
    }

    pub fn sum_all(&mut self, a: Var) -> Var {
        let value = Tensor::scalar(self.value(a).sum());
        self.push(value, Op::SumAll(a), &[a])
    }

    pub fn mean_all(&mut self, a: Var) -> Var {
        let t = self.value(a);
        let value = Tensor::scalar(t.sum() / t.data().len() as f64);
        self.push(value, Op::MeanAll(a), &[a])
    }

    pub fn reshape(&mut self, a: Var, rows: usize, cols: usize) -> Result<Var, TensorError> {
        let t = self.value(a);
        if rows * cols != t.data().len() {
            return Err(TensorError::Shape { op: "reshape", left: t.shape(), right: (rows, cols) });
        }
        let value = Tensor::new(rows, cols, t.data().to_vec())?;
        Ok(self.push(value, Op::Reshape(a), &[a]))
    }

    /// Row `v` of the output is the sum of rows `adjacency[v]` of `a`.
    pub fn neighbor_sum(&mut self, a: Var, adjacency: Rc<Vec<Vec<usize>>>) -> Result<Var, TensorError> {
        let t = self.value(a);
        if adjacency.len() != t.rows() || adjacency.iter().flatten().any(|&u| u >= t.rows()) {
            return Err(TensorError::Shape { op: "neighbor_sum", left: t.shape(), right: (adjacency.len(), 0) });
        }
        let c = t.cols();
        let mut value = Tensor::zeros(t.rows(), c);
        for (v, neigh) in adjacency.iter().enumerate() {
            let out = &mut value.data_mut()[v * c..(v + 1) * c];
            for &u in neigh {
                for (o, x) in out.iter_mut().zip(t.row(u)) {
                    *o += x;
                }
            }
        }
        Ok(self.push(value, Op::NeighborSum(a, adjacency), &[a]))
    }

    /// Row `g` of the output sums (or averages) rows `offsets[g]..offsets[g+1]` of `a`.
    pub fn segment_sum(&mut self, a: Var, offsets: Rc<Vec<usize>>, mean: bool) -> Result<Var, TensorError> {
        let t = self.value(a);
        let valid = offsets.first() == Some(&0)
            && offsets.last() == Some(&t.rows())
            && offsets.windows(2).all(|w| w[0] < w[1]);
        if !valid {
            return Err(TensorError::Shape { op: "segment_sum", left: t.shape(), right: (offsets.len(), 0) });
        }
        let c = t.cols();
        let segments = offsets.len() - 1;
        let mut value = Tensor::zeros(segments, c);
        for g in 0..segments {
            let scale = if mean { 1.0 / (offsets[g + 1] - offsets[g]) as f64 } else { 1.0 };
            let out = &mut value.data_mut()[g * c..(g + 1) * c];
            for r in offsets[g]..offsets[g + 1] {
                for (o, x) in out.iter_mut().zip(t.row(r)) {
                    *o += x * scale;
                }
            }
        }
        Ok(self.push(value, Op::SegmentSum { input: a, offsets, mean }, &[a]))
    }

    /// Rows `start..end` of `a`.
    pub fn slice_rows(&mut self, a: Var, start: usize, end: usize) -> Result<Var, TensorError> {
        let t = self.value(a);
        if start >= end || end > t.rows() {
            return Err(TensorError::Shape { op: "slice_rows", left: t.shape(), right: (start, end) });
        }
        let c = t.cols();
        let value = Tensor::new(end - start, c, t.data()[start * c..end * c].to_vec())?;
        Ok(self.push(value, Op::SliceRows(a, start), &[a]))
    }

    /// Gradients of the scalar `loss` with respect to every node that
    /// requires one.
    pub fn backward(&self, loss: Var) -> Result<Gradients, TensorError> {
        if self.nodes.is_empty() {
            return Err(TensorError::Empty("backward"));
        }
        let shape = self.value(loss).shape();
        if shape != (1, 1) {
            return Err(TensorError::NotScalar(shape));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(Tensor::scalar(1.0));

        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            if !node.requires_grad || matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            let kind = node.op.kind();
            let factor = if self.fault == Some(kind) { 1.5 } else { 1.0 };
            let out = &node.value;
            let mut acc = |v: Var, t: Tensor| {
                if !self.nodes[v.0].requires_grad {
                    return;
                }
                let t = if factor != 1.0 { t.map(|x| x * factor) } else { t };
                match &mut grads[v.0] {
                    Some(existing) => existing.add_assign(&t),
                    slot => *slot = Some(t),
                }
            };
            match &node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let (ta, tb) = (self.value(*a), self.value(*b));
                    if self.nodes[a.0].requires_grad {
                        acc(*a, g.matmul(&tb.transpose())?);
                    }
                    if self.nodes[b.0].requires_grad {
                        acc(*b, ta.transpose().matmul(&g)?);
                    }
                }
                Op::Add(a, b) => {
                    acc(*a, g.clone());
                    acc(*b, g.clone());
                }
                Op::AddRow(a, b) => {
                    let c = g.cols();
                    let mut gb = Tensor::zeros(1, c);
                    for (i, x) in g.data().iter().enumerate() {
                        gb.data_mut()[i % c] += x;
                    }
                    acc(*a, g.clone());
                    acc(*b, gb);
                }
                Op::Sub(a, b) => {
                    acc(*a, g.clone());
                    acc(*b, g.map(|x| -x));
                }
                Op::Mul(a, b) => {
                    let (ta, tb) = (self.value(*a), self.value(*b));
                    acc(*a, g.zip_map(tb, |x, y| x * y));
                    acc(*b, g.zip_map(ta, |x, y| x * y));
                }
                Op::Div(a, b) => {
                    let (ta, tb) = (self.value(*a), self.value(*b));
                    acc(*a, g.zip_map(tb, |x, y| x / y));
                    let ratio = ta.zip_map(tb, |x, y| x / (y * y));
                    acc(*b, g.zip_map(&ratio, |x, r| -x * r));
                }
                Op::DivCol(a, b) => {
                    let (ta, tb) = (self.value(*a), self.value(*b));
                    let c = ta.cols();
                    let mut ga = g.clone();
                    let mut gb = Tensor::zeros(tb.rows(), 1);
                    for (i, x) in ga.data_mut().iter_mut().enumerate() {
                        let d = tb.data()[i / c];
                        gb.data_mut()[i / c] -= *x * ta.data()[i] / (d * d);
                        *x /= d;
                    }
                    acc(*a, ga);
                    acc(*b, gb);
                }
                Op::ScalarMul(a, c) => acc(*a, g.map(|x| x * c)),
                Op::Scale(a, s) => {
                    let (ta, ts) = (self.value(*a), self.value(*s));
                    let factor_s = ts.data()[0];
                    acc(*a, g.map(|x| x * factor_s));
                    let gs: f64 = g.data().iter().zip(ta.data()).map(|(x, y)| x * y).sum();
                    acc(*s, Tensor::scalar(gs));
                }
                Op::Relu(a) => {
                    let ta = self.value(*a);
                    acc(*a, g.zip_map(ta, |x, y| if y > 0.0 { x } else { 0.0 }));
                }
                Op::Sigmoid(a) => acc(*a, g.zip_map(out, |x, y| x * y * (1.0 - y))),
                Op::Exp(a) => acc(*a, g.zip_map(out, |x, y| x * y)),
                Op::Log(a) => acc(*a, g.zip_map(self.value(*a), |x, y| x / y)),
                Op::Square(a) => acc(*a, g.zip_map(self.value(*a), |x, y| 2.0 * x * y)),
                Op::Sqrt(a) => acc(*a, g.zip_map(out, |x, y| x / (2.0 * y))),
                Op::Transpose(a) => acc(*a, g.transpose()),
                Op::ConcatRows(parts) => {
                    let c = g.cols();
                    let mut start = 0;
                    for p in parts {
                        let r = self.value(*p).rows();
                        let piece = Tensor::new(r, c, g.data()[start * c..(start + r) * c].to_vec())?;
                        acc(*p, piece);
                        start += r;
                    }
                }
                Op::ConcatCols(a, b) => {
                    let ca = self.value(*a).cols();
                    let cb = self.value(*b).cols();
                    let mut ga = Vec::with_capacity(g.rows() * ca);
                    let mut gb = Vec::with_capacity(g.rows() * cb);
                    for r in 0..g.rows() {
                        ga.extend_from_slice(&g.row(r)[..ca]);
                        gb.extend_from_slice(&g.row(r)[ca..]);
                    }
                    acc(*a, Tensor::new(g.rows(), ca, ga)?);
                    acc(*b, Tensor::new(g.rows(), cb, gb)?);
                }
                Op::RowSum(a) => {
                    let (r, c) = self.value(*a).shape();
                    let data = (0..r * c).map(|i| g.data()[i / c]).collect();
                    acc(*a, Tensor::new(r, c, data)?);
                }
                Op::ColSum(a) => {
                    let (r, c) = self.value(*a).shape();
                    let data = (0..r * c).map(|i| g.data()[i % c]).collect();
                    acc(*a, Tensor::new(r, c, data)?);
                }
                Op::SumAll(a) => {
                    let (r, c) = self.value(*a).shape();
                    acc(*a, Tensor::filled(r, c, g.data()[0]));
                }
                Op::MeanAll(a) => {
                    let (r, c) = self.value(*a).shape();
                    acc(*a, Tensor::filled(r, c, g.data()[0] / (r * c) as f64));
                }
                Op::Reshape(a) => {
                    let (r, c) = self.value(*a).shape();
                    acc(*a, Tensor::new(r, c, g.data().to_vec())?);
                }
                Op::NeighborSum(a, adjacency) => {
                    let (r, c) = self.value(*a).shape();
                    let mut ga = Tensor::zeros(r, c);
                    for (v, neigh) in adjacency.iter().enumerate() {
                        for &u in neigh {
                            let src = &g.data()[v * c..(v + 1) * c];
                            for (o, x) in ga.data_mut()[u * c..(u + 1) * c].iter_mut().zip(src) {
                                *o += x;
                            }
                        }
                    }
                    acc(*a, ga);
                }
                Op::SegmentSum { input, offsets, mean } => {
                    let (r, c) = self.value(*input).shape();
                    let mut ga = Tensor::zeros(r, c);
                    for s in 0..offsets.len() - 1 {
                        let scale = if *mean { 1.0 / (offsets[s + 1] - offsets[s]) as f64 } else { 1.0 };
                        for row in offsets[s]..offsets[s + 1] {
                            for j in 0..c {
                                ga.data_mut()[row * c + j] = g.data()[s * c + j] * scale;
                            }
                        }
                    }
                    acc(*input, ga);
                }
                Op::SliceRows(a, start) => {
                    let (r, c) = self.value(*a).shape();
                    let mut ga = Tensor::zeros(r, c);
                    ga.data_mut()[start * c..start * c + g.data().len()].copy_from_slice(g.data());
                    acc(*a, ga);
                }
            }
        }
        Ok(Gradients { grads })
    }

    /// Adds the gradients of every parameter leaf into `store`.
    pub fn accumulate(&self, grads: &Gradients, store: &mut ParamStore) -> Result<(), TensorError> {
        for (idx, node) in self.nodes.iter().enumerate() {
            if let (Some(id), Some(g)) = (node.param, grads.grads.get(idx).and_then(Option::as_ref)) {
                store.accumulate_grad(id, g)?;
            }
        }
        Ok(())
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
