//! Tape-based reverse-mode differentiation.
//!
//! A [`Graph`] records every operation eagerly: each call computes its output
//! immediately and appends a node that references earlier nodes only, so the
//! tape is acyclic by construction and reverse index order is a valid
//! topological order for the backward sweep.

use std::sync::Arc;

use super::tensor::{gemm, Tensor};
use super::NumericsError;

/// Handle to a node in a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Sparse linear "gather with sign" map: `out[e] = sign[e] * x[source[e]]`,
/// or `0` when `source[e]` is `None`. Realizes tied weight matrices from
/// free coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct GatherMap {
    pub shape: Vec<usize>,
    pub source: Vec<Option<usize>>,
    pub sign: Vec<f64>,
}

impl GatherMap {
    pub fn apply(&self, x: &[f64]) -> Tensor {
        let data = self
            .source
            .iter()
            .zip(&self.sign)
            .map(|(s, &sg)| s.map_or(0.0, |i| sg * x[i]))
            .collect();
        Tensor::new(self.shape.clone(), data).expect("gather map shape")
    }
}

#[derive(Clone, Debug)]
enum Op {
    Input,
    Param,
    MatMul(Var, Var),
    /// `a · bᵀ`
    MatMulT(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    MulRow(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    Relu(Var),
    Elu(Var),
    Exp(Var),
    Log(Var),
    Tanh(Var),
    Square(Var),
    Sum(Var),
    Mean(Var),
    RowSum(Var),
    Clip(Var, f64, f64),
    Minimum(Var, Var),
    ConcatCols(Vec<Var>),
    SliceCols(Var, usize, usize),
    Gather(Var, Arc<GatherMap>),
}

impl Op {
    fn tag(&self) -> &'static str {
        match self {
            Op::Input => "input",
            Op::Param => "param",
            Op::MatMul(..) => "matmul",
            Op::MatMulT(..) => "matmul_t",
            Op::Add(..) => "add",
            Op::Sub(..) => "sub",
            Op::Mul(..) => "mul",
            Op::AddRow(..) => "add_row",
            Op::MulRow(..) => "mul_row",
            Op::Scale(..) => "scale",
            Op::AddScalar(..) => "add_scalar",
            Op::Relu(..) => "relu",
            Op::Elu(..) => "elu",
            Op::Exp(..) => "exp",
            Op::Log(..) => "log",
            Op::Tanh(..) => "tanh",
            Op::Square(..) => "square",
            Op::Sum(..) => "sum",
            Op::Mean(..) => "mean",
            Op::RowSum(..) => "row_sum",
            Op::Clip(..) => "clip",
            Op::Minimum(..) => "minimum",
            Op::ConcatCols(..) => "concat_cols",
            Op::SliceCols(..) => "slice_cols",
            Op::Gather(..) => "gather",
        }
    }
}

#[derive(Debug)]
struct Node {
    op: Op,
    value: Tensor,
    needs_grad: bool,
}

/// Gradients produced by [`Graph::backward`], indexed by node.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
    params: Vec<Var>,
}

impl Gradients {
    /// Gradient of the root with respect to `v`, `None` if `v` does not
    /// influence the root or is not differentiable.
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient for `v`, or zeros shaped like `like` when no path exists.
    pub fn get_or_zeros(&self, v: Var, like: &Tensor) -> Tensor {
        self.get(v)
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(like.shape()))
    }

    /// Parameter nodes in creation order.
    pub fn params(&self) -> &[Var] {
        &self.params
    }
}

/// Computation tape. Confined to one thread; build a fresh one per
/// evaluation.
#[derive(Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
    params: Vec<Var>,
}

#[inline]
fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp_m1()
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, op: Op, value: Tensor, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            op,
            value,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn ng(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    /// Constant leaf; receives no gradient.
    pub fn input(&mut self, t: Tensor) -> Var {
        self.push(Op::Input, t, false)
    }

    /// Differentiable leaf.
    pub fn param(&mut self, t: Tensor) -> Var {
        let v = self.push(Op::Param, t, true);
        self.params.push(v);
        v
    }

    fn unary(&mut self, a: Var, op: Op, f: impl Fn(f64) -> f64) -> Var {
        let value = self.value(a).map(f);
        let ng = self.ng(a);
        self.push(op, value, ng)
    }

    fn check_same(&self, op: &'static str, a: Var, b: Var) {
        let (sa, sb) = (self.value(a).shape(), self.value(b).shape());
        assert!(
            sa == sb,
            "{}",
            NumericsError::ShapeMismatch {
                op,
                left: sa.to_vec(),
                right: sb.to_vec()
            }
        );
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let value = self
            .value(a)
            .matmul(self.value(b))
            .unwrap_or_else(|e| panic!("{e}"));
        let ng = self.ng(a) || self.ng(b);
        self.push(Op::MatMul(a, b), value, ng)
    }

    /// `a · bᵀ` without materializing the transpose; the layer primitive
    /// for `x · Wᵀ` with `W` stored `[out, in]`.
    pub fn matmul_t(&mut self, a: Var, b: Var) -> Var {
        let (va, vb) = (self.value(a), self.value(b));
        let (m, k) = (va.rows(), va.cols());
        let (n, k2) = (vb.rows(), vb.cols());
        assert!(
            k == k2 && va.ndim() == 2 && vb.ndim() == 2,
            "{}",
            NumericsError::ShapeMismatch {
                op: "matmul_t",
                left: va.shape().to_vec(),
                right: vb.shape().to_vec()
            }
        );
        let mut out = vec![0.0; m * n];
        gemm(m, k, n, va.data(), false, vb.data(), true, &mut out, 0.0);
        let ng = self.ng(a) || self.ng(b);
        self.push(Op::MatMulT(a, b), Tensor::matrix(m, n, out), ng)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.check_same("add", a, b);
        let value = self.value(a).zip_map(self.value(b), |x, y| x + y);
        let ng = self.ng(a) || self.ng(b);
        self.push(Op::Add(a, b), value, ng)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.check_same("sub", a, b);
        let value = self.value(a).zip_map(self.value(b), |x, y| x - y);
        let ng = self.ng(a) || self.ng(b);
        self.push(Op::Sub(a, b), value, ng)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.check_same("mul", a, b);
        let value = self.value(a).zip_map(self.value(b), |x, y| x * y);
        let ng = self.ng(a) || self.ng(b);
        self.push(Op::Mul(a, b), value, ng)
    }

    fn row_broadcast(&mut self, a: Var, r: Var, mul: bool) -> Var {
        let (va, vr) = (self.value(a), self.value(r));
        let cols = va.cols();
        assert!(
            vr.len() == cols,
            "{}",
            NumericsError::ShapeMismatch {
                op: if mul { "mul_row" } else { "add_row" },
                left: va.shape().to_vec(),
                right: vr.shape().to_vec()
            }
        );
        let mut value = va.clone();
        for row in value.data_mut().chunks_mut(cols) {
            for (x, &y) in row.iter_mut().zip(vr.data()) {
                if mul {
                    *x *= y;
                } else {
                    *x += y;
                }
            }
        }
        let ng = self.ng(a) || self.ng(r);
        let op = if mul { Op::MulRow(a, r) } else { Op::AddRow(a, r) };
        self.push(op, value, ng)
    }

    /// Adds the row vector `r` (length = cols of `a`) to every row of `a`.
    pub fn add_row(&mut self, a: Var, r: Var) -> Var {
        self.row_broadcast(a, r, false)
    }

    /// Multiplies every row of `a` elementwise by `r`.
    pub fn mul_row(&mut self, a: Var, r: Var) -> Var {
        self.row_broadcast(a, r, true)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        self.unary(a, Op::Scale(a, c), |x| c * x)
    }

    pub fn neg(&mut self, a: Var) -> Var {
        self.scale(a, -1.0)
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Var {
        self.unary(a, Op::AddScalar(a), |x| x + c)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.unary(a, Op::Relu(a), |x| if x > 0.0 { x } else { 0.0 })
    }

    pub fn elu(&mut self, a: Var) -> Var {
        self.unary(a, Op::Elu(a), elu)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        self.unary(a, Op::Exp(a), f64::exp)
    }

    pub fn log(&mut self, a: Var) -> Var {
        self.unary(a, Op::Log(a), f64::ln)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.unary(a, Op::Tanh(a), f64::tanh)
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.unary(a, Op::Square(a), |x| x * x)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let value = Tensor::scalar(self.value(a).sum());
        let ng = self.ng(a);
        self.push(Op::Sum(a), value, ng)
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let t = self.value(a);
        let value = Tensor::scalar(t.sum() / t.len() as f64);
        let ng = self.ng(a);
        self.push(Op::Mean(a), value, ng)
    }

    /// Sums each row: `[rows, cols] -> [rows, 1]`.
    pub fn row_sum(&mut self, a: Var) -> Var {
        let t = self.value(a);
        let rows = t.rows();
        let data = (0..rows).map(|r| t.row(r).iter().sum()).collect();
        let ng = self.ng(a);
        self.push(Op::RowSum(a), Tensor::matrix(rows, 1, data), ng)
    }

    /// Clamps to `[lo, hi]`; gradient passes through strictly inside the
    /// interval and is zero outside.
    pub fn clip(&mut self, a: Var, lo: f64, hi: f64) -> Var {
        self.unary(a, Op::Clip(a, lo, hi), |x| x.clamp(lo, hi))
    }

    /// Elementwise minimum; ties route the gradient to `a`.
    pub fn minimum(&mut self, a: Var, b: Var) -> Var {
        self.check_same("minimum", a, b);
        let value = self.value(a).zip_map(self.value(b), f64::min);
        let ng = self.ng(a) || self.ng(b);
        self.push(Op::Minimum(a, b), value, ng)
    }

    /// Concatenates matrices with equal row counts along columns.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let rows = self.value(parts[0]).rows();
        let widths: Vec<usize> = parts.iter().map(|&p| self.value(p).cols()).collect();
        let total: usize = widths.iter().sum();
        let mut data = Vec::with_capacity(rows * total);
        for r in 0..rows {
            for &p in parts {
                let t = self.value(p);
                assert_eq!(t.rows(), rows, "concat_cols row mismatch");
                data.extend_from_slice(t.row(r));
            }
        }
        let ng = parts.iter().any(|&p| self.ng(p));
        self.push(
            Op::ConcatCols(parts.to_vec()),
            Tensor::matrix(rows, total, data),
            ng,
        )
    }

    /// Columns `[start, end)` of a matrix.
    pub fn slice_cols(&mut self, a: Var, start: usize, end: usize) -> Var {
        let t = self.value(a);
        assert!(start <= end && end <= t.cols(), "slice_cols out of range");
        let rows = t.rows();
        let mut data = Vec::with_capacity(rows * (end - start));
        for r in 0..rows {
            data.extend_from_slice(&t.row(r)[start..end]);
        }
        let ng = self.ng(a);
        self.push(
            Op::SliceCols(a, start, end),
            Tensor::matrix(rows, end - start, data),
            ng,
        )
    }

    pub fn gather(&mut self, a: Var, map: Arc<GatherMap>) -> Var {
        let value = map.apply(self.value(a).data());
        let ng = self.ng(a);
        self.push(Op::Gather(a, map), value, ng)
    }

    /// Reverse sweep from a scalar `root`.
    pub fn backward(&self, root: Var) -> Result<Gradients, NumericsError> {
        let root_value = self.value(root);
        if root_value.len() != 1 {
            return Err(NumericsError::NonScalarRoot {
                shape: root_value.shape().to_vec(),
            });
        }
        for (i, node) in self.nodes[..=root.0].iter().enumerate() {
            if !node.value.is_finite() {
                return Err(NumericsError::NonFinite {
                    node: i,
                    op: node.op.tag(),
                });
            }
        }

        let mut grads: Vec<Option<Tensor>> = vec![None; root.0 + 1];
        grads[root.0] = Some(Tensor::filled(root_value.shape(), 1.0));

        for i in (0..=root.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            self.propagate(&node.op, &node.value, &g, &mut grads);
            if !g.is_finite() {
                return Err(NumericsError::NonFinite {
                    node: i,
                    op: node.op.tag(),
                });
            }
            grads[i] = Some(g);
        }

        // Only parameters keep their adjoint; intermediate adjoints are
        // consumed by the sweep.
        let mut out = vec![None; self.nodes.len()];
        for &p in &self.params {
            if p.0 <= root.0 {
                out[p.0] = grads[p.0].take();
            }
        }
        Ok(Gradients {
            grads: out,
            params: self.params.clone(),
        })
    }

    fn accumulate(&self, grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
        if !self.ng(v) {
            return;
        }
        match &mut grads[v.0] {
            Some(acc) => acc.add_assign(&g),
            slot => *slot = Some(g),
        }
    }

    fn propagate(&self, op: &Op, out: &Tensor, g: &Tensor, grads: &mut [Option<Tensor>]) {
        match op {
            Op::Input | Op::Param => {}
            Op::MatMul(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                let (m, k, n) = (va.rows(), va.cols(), vb.cols());
                if self.ng(*a) {
                    // dA = G · Bᵀ
                    let mut da = vec![0.0; m * k];
                    gemm(m, n, k, g.data(), false, vb.data(), true, &mut da, 0.0);
                    self.accumulate(grads, *a, Tensor::matrix(m, k, da));
                }
                if self.ng(*b) {
                    // dB = Aᵀ · G
                    let mut db = vec![0.0; k * n];
                    gemm(k, m, n, va.data(), true, g.data(), false, &mut db, 0.0);
                    self.accumulate(grads, *b, Tensor::matrix(k, n, db));
                }
            }
            Op::MatMulT(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                let (m, k, n) = (va.rows(), va.cols(), vb.rows());
                if self.ng(*a) {
                    // dA = G · B
                    let mut da = vec![0.0; m * k];
                    gemm(m, n, k, g.data(), false, vb.data(), false, &mut da, 0.0);
                    self.accumulate(grads, *a, Tensor::matrix(m, k, da));
                }
                if self.ng(*b) {
                    // dB = Gᵀ · A
                    let mut db = vec![0.0; n * k];
                    gemm(n, m, k, g.data(), true, va.data(), false, &mut db, 0.0);
                    self.accumulate(grads, *b, Tensor::matrix(n, k, db));
                }
            }
            Op::Add(a, b) => {
                self.accumulate(grads, *a, g.clone());
                self.accumulate(grads, *b, g.clone());
            }
            Op::Sub(a, b) => {
                self.accumulate(grads, *a, g.clone());
                self.accumulate(grads, *b, g.map(|x| -x));
            }
            Op::Mul(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                self.accumulate(grads, *a, g.zip_map(vb, |x, y| x * y));
                self.accumulate(grads, *b, g.zip_map(va, |x, y| x * y));
            }
            Op::AddRow(a, r) => {
                self.accumulate(grads, *a, g.clone());
                if self.ng(*r) {
                    let vr = self.value(*r);
                    let mut dr = vec![0.0; vr.len()];
                    for row in g.data().chunks(vr.len()) {
                        for (d, x) in dr.iter_mut().zip(row) {
                            *d += x;
                        }
                    }
                    self.accumulate(grads, *r, Tensor::new(vr.shape().to_vec(), dr).unwrap());
                }
            }
            Op::MulRow(a, r) => {
                let (va, vr) = (self.value(*a), self.value(*r));
                let cols = vr.len();
                if self.ng(*a) {
                    let mut da = g.clone();
                    for row in da.data_mut().chunks_mut(cols) {
                        for (x, y) in row.iter_mut().zip(vr.data()) {
                            *x *= y;
                        }
                    }
                    self.accumulate(grads, *a, da);
                }
                if self.ng(*r) {
                    let mut dr = vec![0.0; cols];
                    for (grow, arow) in g.data().chunks(cols).zip(va.data().chunks(cols)) {
                        for ((d, x), y) in dr.iter_mut().zip(grow).zip(arow) {
                            *d += x * y;
                        }
                    }
                    self.accumulate(grads, *r, Tensor::new(vr.shape().to_vec(), dr).unwrap());
                }
            }
            Op::Scale(a, c) => self.accumulate(grads, *a, g.map(|x| c * x)),
            Op::AddScalar(a) => self.accumulate(grads, *a, g.clone()),
            Op::Relu(a) => {
                let va = self.value(*a);
                self.accumulate(grads, *a, g.zip_map(va, |x, y| if y > 0.0 { x } else { 0.0 }));
            }
            Op::Elu(a) => {
                let va = self.value(*a);
                self.accumulate(
                    grads,
                    *a,
                    g.zip_map(va, |x, y| if y > 0.0 { x } else { x * y.exp() }),
                );
            }
            Op::Exp(a) => self.accumulate(grads, *a, g.zip_map(out, |x, y| x * y)),
            Op::Log(a) => {
                let va = self.value(*a);
                self.accumulate(grads, *a, g.zip_map(va, |x, y| x / y));
            }
            Op::Tanh(a) => self.accumulate(grads, *a, g.zip_map(out, |x, y| x * (1.0 - y * y))),
            Op::Square(a) => {
                let va = self.value(*a);
                self.accumulate(grads, *a, g.zip_map(va, |x, y| 2.0 * x * y));
            }
            Op::Sum(a) => {
                let va = self.value(*a);
                self.accumulate(grads, *a, Tensor::filled(va.shape(), g.item()));
            }
            Op::Mean(a) => {
                let va = self.value(*a);
                let s = g.item() / va.len() as f64;
                self.accumulate(grads, *a, Tensor::filled(va.shape(), s));
            }
            Op::RowSum(a) => {
                let va = self.value(*a);
                let cols = va.cols();
                let mut da = Tensor::zeros(va.shape());
                for (r, row) in da.data_mut().chunks_mut(cols).enumerate() {
                    row.fill(g.data()[r]);
                }
                self.accumulate(grads, *a, da);
            }
            Op::Clip(a, lo, hi) => {
                let va = self.value(*a);
                self.accumulate(
                    grads,
                    *a,
                    g.zip_map(va, |x, y| if y > *lo && y < *hi { x } else { 0.0 }),
                );
            }
            Op::Minimum(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                let mut da = g.clone();
                let mut db = g.clone();
                for (((x, y), p), q) in da
                    .data_mut()
                    .iter_mut()
                    .zip(db.data_mut().iter_mut())
                    .zip(va.data())
                    .zip(vb.data())
                {
                    if p <= q {
                        *y = 0.0;
                    } else {
                        *x = 0.0;
                    }
                }
                self.accumulate(grads, *a, da);
                self.accumulate(grads, *b, db);
            }
            Op::ConcatCols(parts) => {
                let rows = g.rows();
                let total = g.cols();
                let mut offset = 0;
                for &p in parts {
                    let w = self.value(p).cols();
                    if self.ng(p) {
                        let mut data = Vec::with_capacity(rows * w);
                        for r in 0..rows {
                            data.extend_from_slice(&g.data()[r * total + offset..r * total + offset + w]);
                        }
                        self.accumulate(grads, p, Tensor::matrix(rows, w, data));
                    }
                    offset += w;
                }
            }
            Op::SliceCols(a, start, end) => {
                let va = self.value(*a);
                let cols = va.cols();
                let w = end - start;
                let mut da = Tensor::zeros(va.shape());
                for r in 0..va.rows() {
                    da.data_mut()[r * cols + start..r * cols + end]
                        .copy_from_slice(&g.data()[r * w..(r + 1) * w]);
                }
                self.accumulate(grads, *a, da);
            }
            Op::Gather(a, map) => {
                let va = self.value(*a);
                let mut da = Tensor::zeros(va.shape());
                let d = da.data_mut();
                for ((s, sg), x) in map.source.iter().zip(&map.sign).zip(g.data()) {
                    if let Some(i) = s {
                        d[*i] += sg * x;
                    }
                }
                self.accumulate(grads, *a, da);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_of_squares() {
        let mut g = Graph::new();
        let x = g.param(Tensor::vector(vec![1.0, 2.0, 3.0]));
        let sq = g.mul(x, x);
        let root = g.sum(sq);
        let grads = g.backward(root).unwrap();
        assert_eq!(grads.get(x).unwrap().data(), &[2.0, 4.0, 6.0]);
    }

    #[test]
    fn relu_kink_is_zero() {
        let mut g = Graph::new();
        let x = g.param(Tensor::vector(vec![-1.0, 2.0, 0.0]));
        let r = g.relu(x);
        let root = g.sum(r);
        let grads = g.backward(root).unwrap();
        assert_eq!(grads.get(x).unwrap().data(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn non_scalar_root_rejected() {
        let mut g = Graph::new();
        let x = g.param(Tensor::vector(vec![1.0, 2.0]));
        assert!(matches!(
            g.backward(x),
            Err(NumericsError::NonScalarRoot { .. })
        ));
    }

    #[test]
    fn non_finite_reports_tag() {
        let mut g = Graph::new();
        let x = g.param(Tensor::vector(vec![0.0]));
        let l = g.log(x);
        let root = g.sum(l);
        match g.backward(root) {
            Err(NumericsError::NonFinite { op, .. }) => assert_eq!(op, "log"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn backward_twice_identical() {
        let mut g = Graph::new();
        let w = g.param(Tensor::matrix(2, 2, vec![0.3, -0.1, 0.7, 0.2]));
        let x = g.input(Tensor::matrix(1, 2, vec![1.5, -2.0]));
        let y = g.matmul_t(x, w);
        let e = g.elu(y);
        let root = g.sum(e);
        let a = g.backward(root).unwrap();
        let b = g.backward(root).unwrap();
        assert_eq!(a.get(w), b.get(w));
        assert!(a.get(x).is_none());
    }

    #[test]
    fn clip_gradient_mask() {
        let mut g = Graph::new();
        let x = g.param(Tensor::vector(vec![0.5, 1.0, 1.5]));
        let c = g.clip(x, 0.8, 1.2);
        let root = g.sum(c);
        let grads = g.backward(root).unwrap();
        assert_eq!(grads.get(x).unwrap().data(), &[0.0, 1.0, 0.0]);
    }
}
