//! Reverse-mode differentiation over matrix-valued nodes.
//!
//! Every operation appends a node holding its value and the recipe for pushing
//! an upstream gradient to its parents. Nodes that do not depend on a
//! trainable leaf are never visited by [`Tape::backward`].

use alloc::vec;
use alloc::vec::Vec;

use super::matrix::Matrix;
use crate::math;
use crate::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    AddRow(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Offset(Var),
    ColAffine(Var, Vec<f64>),
    RowScale(Var, Var),
    Relu(Var),
    Clamp(Var, f64, f64),
    Tanh(Var),
    Square(Var),
    Concat(Vec<Var>),
    Slice(Var, usize),
    SumAll(Var),
    MeanAll(Var),
    RowMean(Var),
    Select(Vec<Var>, Vec<usize>),
}

struct Node {
    value: Matrix,
    op: Op,
    requires_grad: bool,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of a scalar loss with respect to every node that required them.
pub struct Gradients {
    grads: Vec<Option<Matrix>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Matrix> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    /// Gradient for `v`, zeros of `shape` when the loss does not reach it.
    pub fn wrt(&self, v: Var, shape: (usize, usize)) -> Matrix {
        self.get(v).cloned().unwrap_or_else(|| Matrix::zeros(shape.0, shape.1))
    }
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

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value.data()[0]
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    fn push(&mut self, value: Matrix, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Trainable leaf.
    pub fn param(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Leaf that never receives a gradient.
    pub fn constant(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).matmul(self.value(b));
        let rg = self.rg(a) || self.rg(b);
        self.push(value, Op::MatMul(a, b), rg)
    }

    /// Adds the `1×n` row `b` to every row of `a`.
    pub fn add_row(&mut self, a: Var, b: Var) -> Var {
        let bias = self.value(b);
        assert_eq!(bias.rows(), 1, "add_row bias must be a row");
        let mut value = self.value(a).clone();
        let cols = value.cols();
        assert_eq!(bias.cols(), cols, "add_row width");
        for r in 0..value.rows() {
            for (x, &bv) in value.row_mut(r).iter_mut().zip(bias.data()) {
                *x += bv;
            }
        }
        let rg = self.rg(a) || self.rg(b);
        self.push(value, Op::AddRow(a, b), rg)
    }

    fn zip_with(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: Op) -> Var {
        let (va, vb) = (self.value(a), self.value(b));
        assert_eq!(va.shape(), vb.shape(), "elementwise shape");
        let data = va.data().iter().zip(vb.data()).map(|(&x, &y)| f(x, y)).collect();
        let value = Matrix::from_vec(va.rows(), va.cols(), data);
        let rg = self.rg(a) || self.rg(b);
        self.push(value, op, rg)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a).map(|x| x * c);
        let rg = self.rg(a);
        self.push(value, Op::Scale(a, c), rg)
    }

    pub fn offset(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a).map(|x| x + c);
        let rg = self.rg(a);
        self.push(value, Op::Offset(a), rg)
    }

    /// Column-wise `x * scale[c] + shift[c]`.
    pub fn col_affine(&mut self, a: Var, scale: &[f64], shift: &[f64]) -> Var {
        let mut value = self.value(a).clone();
        assert_eq!(value.cols(), scale.len(), "col_affine width");
        assert_eq!(value.cols(), shift.len(), "col_affine width");
        for r in 0..value.rows() {
            for ((x, s), t) in value.row_mut(r).iter_mut().zip(scale).zip(shift) {
                *x = *x * s + t;
            }
        }
        let rg = self.rg(a);
        self.push(value, Op::ColAffine(a, scale.to_vec()), rg)
    }

    /// Multiplies row `r` of `a` by `w[r, 0]`.
    pub fn row_scale(&mut self, a: Var, w: Var) -> Var {
        let (va, vw) = (self.value(a), self.value(w));
        assert_eq!(vw.shape(), (va.rows(), 1), "row_scale weights");
        let mut value = va.clone();
        for r in 0..value.rows() {
            let s = vw.data()[r];
            value.row_mut(r).iter_mut().for_each(|x| *x *= s);
        }
        let rg = self.rg(a) || self.rg(w);
        self.push(value, Op::RowScale(a, w), rg)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|x| if x > 0.0 { x } else { 0.0 });
        let rg = self.rg(a);
        self.push(value, Op::Relu(a), rg)
    }

    /// Elementwise clamp to `[lo, hi]`; the gradient is zero outside the interval.
    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Var {
        let value = self.value(a).map(|x| x.clamp(lo, hi));
        let rg = self.rg(a);
        self.push(value, Op::Clamp(a, lo, hi), rg)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let value = self.value(a).map(math::tanh);
        let rg = self.rg(a);
        self.push(value, Op::Tanh(a), rg)
    }

    pub fn square(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|x| x * x);
        let rg = self.rg(a);
        self.push(value, Op::Square(a), rg)
    }

    /// Concatenates along columns; all parts must have the same row count.
    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let rows = self.value(parts[0]).rows();
        let cols: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
        let mut value = Matrix::zeros(rows, cols);
        for r in 0..rows {
            let mut c0 = 0;
            for &p in parts {
                let v = self.value(p);
                assert_eq!(v.rows(), rows, "concat row count");
                value.row_mut(r)[c0..c0 + v.cols()].copy_from_slice(v.row(r));
                c0 += v.cols();
            }
        }
        let rg = parts.iter().any(|&p| self.rg(p));
        self.push(value, Op::Concat(parts.to_vec()), rg)
    }

    /// Columns `start..start + len` of `a`.
    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Var {
        let va = self.value(a);
        assert!(start + len <= va.cols(), "slice_cols range");
        let mut value = Matrix::zeros(va.rows(), len);
        for r in 0..va.rows() {
            value.row_mut(r).copy_from_slice(&va.row(r)[start..start + len]);
        }
        let rg = self.rg(a);
        self.push(value, Op::Slice(a, start), rg)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().sum();
        let rg = self.rg(a);
        self.push(Matrix::from_vec(1, 1, vec![s]), Op::SumAll(a), rg)
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let v = self.value(a);
        let s = v.data().iter().sum::<f64>() / v.data().len() as f64;
        let rg = self.rg(a);
        self.push(Matrix::from_vec(1, 1, vec![s]), Op::MeanAll(a), rg)
    }

    /// Per-row mean over columns, shape `rows×1`.
    pub fn row_mean(&mut self, a: Var) -> Var {
        let v = self.value(a);
        let n = v.cols() as f64;
        let data = (0..v.rows()).map(|r| v.row(r).iter().sum::<f64>() / n).collect();
        let value = Matrix::from_vec(v.rows(), 1, data);
        let rg = self.rg(a);
        self.push(value, Op::RowMean(a), rg)
    }

    /// Row `r` of the result is row `r` of `sources[choice[r]]`.
    pub fn select_rows(&mut self, sources: &[Var], choice: &[usize]) -> Var {
        let shape = self.shape(sources[0]);
        assert_eq!(choice.len(), shape.0, "select_rows choice length");
        let mut value = Matrix::zeros(shape.0, shape.1);
        for (r, &k) in choice.iter().enumerate() {
            let src = self.value(sources[k]);
            assert_eq!(src.shape(), shape, "select_rows source shape");
            value.row_mut(r).copy_from_slice(src.row(r));
        }
        let rg = sources.iter().any(|&p| self.rg(p));
        self.push(value, Op::Select(sources.to_vec(), choice.to_vec()), rg)
    }

    /// Back-propagates from the scalar node `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let (rows, cols) = self.shape(loss);
        if (rows, cols) != (1, 1) {
            return Err(Error::NonScalarLoss { rows, cols });
        }
        let mut grads: Vec<Option<Matrix>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(Matrix::filled(1, 1, 1.0));
        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            self.propagate(node, &g, &mut grads);
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn accumulate(&self, grads: &mut [Option<Matrix>], v: Var, g: Matrix) {
        if !self.rg(v) {
            return;
        }
        match &mut grads[v.0] {
            Some(existing) => existing.add_assign(&g),
            slot => *slot = Some(g),
        }
    }

    fn propagate(&self, node: &Node, g: &Matrix, grads: &mut [Option<Matrix>]) {
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if self.rg(*a) {
                    self.accumulate(grads, *a, g.matmul_t(self.value(*b)));
                }
                if self.rg(*b) {
                    self.accumulate(grads, *b, self.value(*a).t_matmul(g));
                }
            }
            Op::AddRow(a, b) => {
                self.accumulate(grads, *a, g.clone());
                if self.rg(*b) {
                    let mut gb = Matrix::zeros(1, g.cols());
                    for r in 0..g.rows() {
                        for (o, &x) in gb.data_mut().iter_mut().zip(g.row(r)) {
                            *o += x;
                        }
                    }
                    self.accumulate(grads, *b, gb);
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
                if self.rg(*a) {
                    self.accumulate(grads, *a, hadamard(g, vb));
                }
                if self.rg(*b) {
                    self.accumulate(grads, *b, hadamard(g, va));
                }
            }
            Op::Scale(a, c) => self.accumulate(grads, *a, g.map(|x| x * c)),
            Op::Offset(a) => self.accumulate(grads, *a, g.clone()),
            Op::ColAffine(a, scale) => {
                let mut ga = g.clone();
                for r in 0..ga.rows() {
                    for (x, s) in ga.row_mut(r).iter_mut().zip(scale) {
                        *x *= s;
                    }
                }
                self.accumulate(grads, *a, ga);
            }
            Op::RowScale(a, w) => {
                let (va, vw) = (self.value(*a), self.value(*w));
                if self.rg(*a) {
                    let mut ga = g.clone();
                    for r in 0..ga.rows() {
                        let s = vw.data()[r];
                        ga.row_mut(r).iter_mut().for_each(|x| *x *= s);
                    }
                    self.accumulate(grads, *a, ga);
                }
                if self.rg(*w) {
                    let data = (0..g.rows())
                        .map(|r| g.row(r).iter().zip(va.row(r)).map(|(x, y)| x * y).sum())
                        .collect();
                    self.accumulate(grads, *w, Matrix::from_vec(g.rows(), 1, data));
                }
            }
            Op::Clamp(a, lo, hi) => {
                let va = self.value(*a);
                let data = g
                    .data()
                    .iter()
                    .zip(va.data())
                    .map(|(&x, &y)| if y >= *lo && y <= *hi { x } else { 0.0 })
                    .collect();
                self.accumulate(grads, *a, Matrix::from_vec(g.rows(), g.cols(), data));
            }
            Op::Relu(a) => {
                let va = self.value(*a);
                let data = g
                    .data()
                    .iter()
                    .zip(va.data())
                    .map(|(&x, &y)| if y > 0.0 { x } else { 0.0 })
                    .collect();
                self.accumulate(grads, *a, Matrix::from_vec(g.rows(), g.cols(), data));
            }
            Op::Tanh(a) => {
                let y = &node.value;
                let data = g.data().iter().zip(y.data()).map(|(&x, &t)| x * (1.0 - t * t)).collect();
                self.accumulate(grads, *a, Matrix::from_vec(g.rows(), g.cols(), data));
            }
            Op::Square(a) => {
                let va = self.value(*a);
                let data = g.data().iter().zip(va.data()).map(|(&x, &y)| 2.0 * x * y).collect();
                self.accumulate(grads, *a, Matrix::from_vec(g.rows(), g.cols(), data));
            }
            Op::Concat(parts) => {
                let mut c0 = 0;
                for &p in parts {
                    let w = self.value(p).cols();
                    if self.rg(p) {
                        let mut gp = Matrix::zeros(g.rows(), w);
                        for r in 0..g.rows() {
                            gp.row_mut(r).copy_from_slice(&g.row(r)[c0..c0 + w]);
                        }
                        self.accumulate(grads, p, gp);
                    }
                    c0 += w;
                }
            }
            Op::Slice(a, start) => {
                let (rows, cols) = self.shape(*a);
                let mut ga = Matrix::zeros(rows, cols);
                for r in 0..rows {
                    ga.row_mut(r)[*start..*start + g.cols()].copy_from_slice(g.row(r));
                }
                self.accumulate(grads, *a, ga);
            }
            Op::SumAll(a) => {
                let (rows, cols) = self.shape(*a);
                self.accumulate(grads, *a, Matrix::filled(rows, cols, g.data()[0]));
            }
            Op::MeanAll(a) => {
                let (rows, cols) = self.shape(*a);
                let n = (rows * cols) as f64;
                self.accumulate(grads, *a, Matrix::filled(rows, cols, g.data()[0] / n));
            }
            Op::RowMean(a) => {
                let (rows, cols) = self.shape(*a);
                let mut ga = Matrix::zeros(rows, cols);
                for r in 0..rows {
                    let v = g.data()[r] / cols as f64;
                    ga.row_mut(r).iter_mut().for_each(|x| *x = v);
                }
                self.accumulate(grads, *a, ga);
            }
            Op::Select(sources, choice) => {
                for (k, &src) in sources.iter().enumerate() {
                    if !self.rg(src) || !choice.contains(&k) {
                        continue;
                    }
                    let mut gs = Matrix::zeros(g.rows(), g.cols());
                    for (r, &c) in choice.iter().enumerate() {
                        if c == k {
                            gs.row_mut(r).copy_from_slice(g.row(r));
                        }
                    }
                    self.accumulate(grads, src, gs);
                }
            }
        }
    }
}

fn hadamard(a: &Matrix, b: &Matrix) -> Matrix {
    let data = a.data().iter().zip(b.data()).map(|(x, y)| x * y).collect();
    Matrix::from_vec(a.rows(), a.cols(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_derivative() {
        let mut t = Tape::new();
        let p = t.param(Matrix::filled(1, 1, 3.0));
        let y = t.square(p);
        let g = t.backward(y).unwrap();
        assert_eq!(g.get(p).unwrap().data(), &[6.0]);
    }

    #[test]
    fn clamp_blocks_gradient_outside_interval() {
        let mut t = Tape::new();
        let p = t.param(Matrix::from_vec(1, 3, vec![-2.0, 0.5, 3.0]));
        let c = t.clamp(p, -1.0, 1.0);
        assert_eq!(t.value(c).data(), &[-1.0, 0.5, 1.0]);
        let y = t.sum(c);
        let g = t.backward(y).unwrap();
        assert_eq!(g.get(p).unwrap().data(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn constant_loss_gives_zero_gradient() {
        let mut t = Tape::new();
        let p = t.param(Matrix::filled(1, 1, 3.0));
        let c = t.constant(Matrix::filled(1, 1, 5.0));
        let _unused = t.scale(p, 2.0);
        let y = t.square(c);
        let g = t.backward(y).unwrap();
        assert_eq!(g.wrt(p, (1, 1)).data(), &[0.0]);
    }

    #[test]
    fn non_scalar_loss_is_rejected() {
        let mut t = Tape::new();
        let p = t.param(Matrix::zeros(2, 1));
        assert_eq!(
            t.backward(p).err(),
            Some(Error::NonScalarLoss { rows: 2, cols: 1 })
        );
    }

    #[test]
    fn select_routes_gradient_to_chosen_rows() {
        let mut t = Tape::new();
        let a = t.param(Matrix::from_rows(&[[1.0], [2.0]]));
        let b = t.param(Matrix::from_rows(&[[10.0], [20.0]]));
        let s = t.select_rows(&[a, b], &[1, 0]);
        assert_eq!(t.value(s).data(), &[10.0, 2.0]);
        let l = t.sum(s);
        let g = t.backward(l).unwrap();
        assert_eq!(g.get(a).unwrap().data(), &[0.0, 1.0]);
        assert_eq!(g.get(b).unwrap().data(), &[1.0, 0.0]);
    }

    #[test]
    fn shared_node_accumulates() {
        // y = x * x + 3x at x = 2 → dy/dx = 2x + 3 = 7
        let mut t = Tape::new();
        let x = t.param(Matrix::filled(1, 1, 2.0));
        let xx = t.mul(x, x);
        let x3 = t.scale(x, 3.0);
        let y = t.add(xx, x3);
        let g = t.backward(y).unwrap();
        assert_eq!(g.get(x).unwrap().data(), &[7.0]);
    }
}
