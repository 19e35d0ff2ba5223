use crate::nn::params::{ParamId, ParamSet};
use crate::nn::tensor::{mm_nn_acc, mm_nt_acc, mm_tn_acc, Tensor};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

enum Op {
    /// Value with no gradient (inputs, targets, masks).
    Constant,
    /// Trainable tensor; backward accumulates into the owning `ParamSet`.
    Param(ParamId),
    /// a @ b
    MatMul(Var, Var),
    /// a @ b^T
    MatMulNT(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    /// Broadcast-add a [1,n] row to every row of a [m,n] matrix.
    AddRow(Var, Var),
    Scale(Var, f64),
    LeakyRelu(Var, f64),
    /// Row-wise softmax with max subtraction.
    SoftmaxRows(Var),
    /// Elementwise p*ln(p), defined as 0 (with zero slope) at p <= 0.
    PLogP(Var),
    Exp(Var),
    Sum(Var),
    Mean(Var),
    Reshape(Var),
    /// Contiguous row slice [start, start+count).
    Rows(Var, usize, usize),
    /// out[i,0] = a[i, idx[i]]
    PickPerRow(Var, Vec<usize>),
    ConcatRows(Vec<Var>),
    ConcatCols(Vec<Var>),
}

struct Node {
    op: Op,
    value: Tensor,
}

/// Record of one forward computation. Nodes only ever reference
/// earlier nodes, so a single reverse sweep is a topological order for
/// backpropagation. A tape is built per forward pass and dropped after
/// `backward`.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Tape {
        Tape::default()
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

    fn push(&mut self, op: Op, value: Tensor) -> Var {
        self.nodes.push(Node { op, value });
        Var(self.nodes.len() - 1)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(Op::Constant, value)
    }

    pub fn scalar(&mut self, v: f64) -> Var {
        self.constant(Tensor::scalar(v))
    }

    /// Bring a parameter onto the tape (its current value is copied).
    pub fn param(&mut self, params: &ParamSet, id: ParamId) -> Var {
        self.push(Op::Param(id), params.value(id).clone())
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let value = crate::nn::tensor::matmul(self.value(a), self.value(b));
        self.push(Op::MatMul(a, b), value)
    }

    /// a @ b^T without materializing the transpose.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Var {
        let (m, k) = (self.value(a).rows(), self.value(a).cols());
        let n = self.value(b).rows();
        assert_eq!(k, self.value(b).cols(), "matmul_nt inner dims");
        let mut out = Tensor::zeros(&[m, n]);
        mm_nt_acc(self.value(a).data(), self.value(b).data(), out.data_mut(), m, k, n);
        self.push(Op::MatMulNT(a, b), out)
    }

    fn zip_elementwise(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Tensor {
        let (ta, tb) = (self.value(a), self.value(b));
        assert_eq!(ta.shape(), tb.shape(), "elementwise shape mismatch");
        let data = ta.data().iter().zip(tb.data()).map(|(&x, &y)| f(x, y)).collect();
        Tensor::new(ta.shape(), data)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let value = self.zip_elementwise(a, b, |x, y| x + y);
        self.push(Op::Add(a, b), value)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let value = self.zip_elementwise(a, b, |x, y| x - y);
        self.push(Op::Sub(a, b), value)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let value = self.zip_elementwise(a, b, |x, y| x * y);
        self.push(Op::Mul(a, b), value)
    }

    pub fn add_row(&mut self, m: Var, row: Var) -> Var {
        let (tm, tr) = (self.value(m), self.value(row));
        assert_eq!(tr.rows(), 1, "add_row expects a [1,n] row");
        assert_eq!(tm.cols(), tr.cols(), "add_row width mismatch");
        let n = tm.cols();
        let mut out = tm.clone();
        for r in 0..tm.rows() {
            for c in 0..n {
                out.data_mut()[r * n + c] += tr.data()[c];
            }
        }
        self.push(Op::AddRow(m, row), out)
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        let ta = self.value(a);
        let value = Tensor::new(ta.shape(), ta.data().iter().map(|&x| k * x).collect());
        self.push(Op::Scale(a, k), value)
    }

    pub fn leaky_relu(&mut self, a: Var, slope: f64) -> Var {
        let ta = self.value(a);
        let data = ta.data().iter().map(|&x| if x > 0.0 { x } else { slope * x }).collect();
        let value = Tensor::new(ta.shape(), data);
        self.push(Op::LeakyRelu(a, slope), value)
    }

    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let ta = self.value(a);
        let (r, c) = (ta.rows(), ta.cols());
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            let row = ta.row_slice(i);
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let orow = &mut out[i * c..(i + 1) * c];
            let mut total = 0.0;
            for (o, &x) in orow.iter_mut().zip(row) {
                *o = (x - max).exp();
                total += *o;
            }
            for o in orow.iter_mut() {
                *o /= total;
            }
        }
        self.push(Op::SoftmaxRows(a), Tensor::new(&[r, c], out))
    }

    pub fn plogp(&mut self, a: Var) -> Var {
        let ta = self.value(a);
        let data = ta
            .data()
            .iter()
            .map(|&p| if p > 0.0 { p * p.ln() } else { 0.0 })
            .collect();
        let value = Tensor::new(ta.shape(), data);
        self.push(Op::PLogP(a), value)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let ta = self.value(a);
        let value = Tensor::new(ta.shape(), ta.data().iter().map(|&x| x.exp()).collect());
        self.push(Op::Exp(a), value)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let total: f64 = self.value(a).data().iter().sum();
        self.push(Op::Sum(a), Tensor::scalar(total))
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let ta = self.value(a);
        let total: f64 = ta.data().iter().sum();
        let value = Tensor::scalar(total / ta.len() as f64);
        self.push(Op::Mean(a), value)
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Var {
        let value = self.value(a).reshaped(shape);
        self.push(Op::Reshape(a), value)
    }

    pub fn rows(&mut self, a: Var, start: usize, count: usize) -> Var {
        let ta = self.value(a);
        let c = ta.cols();
        assert!(start + count <= ta.rows(), "row slice out of range");
        let data = ta.data()[start * c..(start + count) * c].to_vec();
        let value = Tensor::new(&[count, c], data);
        self.push(Op::Rows(a, start, count), value)
    }

    /// For a [m,n] input and m indices, produce the [m,1] column of picked
    /// entries: out[i] = a[i, idx[i]]. Backs Q(s, a) selection over a batch.
    pub fn pick_per_row(&mut self, a: Var, indices: Vec<usize>) -> Var {
        let ta = self.value(a);
        let (m, n) = (ta.rows(), ta.cols());
        assert_eq!(indices.len(), m, "one index per row");
        assert!(indices.iter().all(|&j| j < n), "pick index out of range");
        let data = indices.iter().enumerate().map(|(i, &j)| ta.at2(i, j)).collect();
        let value = Tensor::new(&[m, 1], data);
        self.push(Op::PickPerRow(a, indices), value)
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty());
        let c = self.value(parts[0]).cols();
        let mut rows = 0;
        let mut data = Vec::new();
        for &p in parts {
            let tp = self.value(p);
            assert_eq!(tp.cols(), c, "concat_rows width mismatch");
            rows += tp.rows();
            data.extend_from_slice(tp.data());
        }
        self.push(Op::ConcatRows(parts.to_vec()), Tensor::new(&[rows, c], data))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty());
        let r = self.value(parts[0]).rows();
        let total: usize = parts.iter().map(|&p| self.value(p).cols()).collect::<Vec<_>>().iter().sum();
        let mut data = vec![0.0; r * total];
        let mut offset = 0;
        for &p in parts {
            let tp = self.value(p);
            assert_eq!(tp.rows(), r, "concat_cols height mismatch");
            let w = tp.cols();
            for i in 0..r {
                data[i * total + offset..i * total + offset + w].copy_from_slice(tp.row_slice(i));
            }
            offset += w;
        }
        self.push(Op::ConcatCols(parts.to_vec()), Tensor::new(&[r, total], data))
    }

    /// Reverse sweep from a scalar root. Parameter gradients are *added*
    /// into `params`, so callers control when accumulators are cleared.
    pub fn backward(&mut self, root: Var, params: &mut ParamSet) {
        assert_eq!(self.value(root).len(), 1, "backward root must be scalar");
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[root.0] = Some(Tensor::new(self.value(root).shape(), vec![1.0]));

        for i in (0..self.nodes.len()).rev() {
            let g = match grads[i].take() {
                Some(g) => g,
                None => continue,
            };
            match &self.nodes[i].op {
                Op::Constant => {}
                Op::Param(id) => {
                    let acc = params.grad_mut(*id);
                    for (dst, src) in acc.data_mut().iter_mut().zip(g.data()) {
                        *dst += src;
                    }
                }
                Op::MatMul(a, b) => {
                    let (a, b) = (*a, *b);
                    let (m, k) = (self.value(a).rows(), self.value(a).cols());
                    let n = self.value(b).cols();
                    {
                        let ga = Self::slot(&mut grads, a.0, self.nodes[a.0].value.shape());
                        mm_nt_acc(g.data(), self.value(b).data(), ga.data_mut(), m, n, k);
                    }
                    {
                        let gb = Self::slot(&mut grads, b.0, self.nodes[b.0].value.shape());
                        mm_tn_acc(self.value(a).data(), g.data(), gb.data_mut(), k, m, n);
                    }
                }
                Op::MatMulNT(a, b) => {
                    let (a, b) = (*a, *b);
                    let (m, k) = (self.value(a).rows(), self.value(a).cols());
                    let n = self.value(b).rows();
                    {
                        let ga = Self::slot(&mut grads, a.0, self.nodes[a.0].value.shape());
                        mm_nn_acc(g.data(), self.value(b).data(), ga.data_mut(), m, n, k);
                    }
                    {
                        let gb = Self::slot(&mut grads, b.0, self.nodes[b.0].value.shape());
                        mm_tn_acc(g.data(), self.value(a).data(), gb.data_mut(), n, m, k);
                    }
                }
                Op::Add(a, b) => {
                    let (a, b) = (*a, *b);
                    Self::acc_scaled(&mut grads, &self.nodes, a, g.data(), 1.0);
                    Self::acc_scaled(&mut grads, &self.nodes, b, g.data(), 1.0);
                }
                Op::Sub(a, b) => {
                    let (a, b) = (*a, *b);
                    Self::acc_scaled(&mut grads, &self.nodes, a, g.data(), 1.0);
                    Self::acc_scaled(&mut grads, &self.nodes, b, g.data(), -1.0);
                }
                Op::Mul(a, b) => {
                    let (a, b) = (*a, *b);
                    let prod_b: Vec<f64> =
                        g.data().iter().zip(self.value(b).data()).map(|(&gv, &bv)| gv * bv).collect();
                    Self::acc_scaled(&mut grads, &self.nodes, a, &prod_b, 1.0);
                    let prod_a: Vec<f64> =
                        g.data().iter().zip(self.value(a).data()).map(|(&gv, &av)| gv * av).collect();
                    Self::acc_scaled(&mut grads, &self.nodes, b, &prod_a, 1.0);
                }
                Op::AddRow(m, row) => {
                    let (m, row) = (*m, *row);
                    Self::acc_scaled(&mut grads, &self.nodes, m, g.data(), 1.0);
                    let n = self.value(row).cols();
                    let mut col_sums = vec![0.0; n];
                    for chunk in g.data().chunks(n) {
                        for (s, &v) in col_sums.iter_mut().zip(chunk) {
                            *s += v;
                        }
                    }
                    Self::acc_scaled(&mut grads, &self.nodes, row, &col_sums, 1.0);
                }
                Op::Scale(a, kf) => {
                    let (a, kf) = (*a, *kf);
                    Self::acc_scaled(&mut grads, &self.nodes, a, g.data(), kf);
                }
                Op::LeakyRelu(a, slope) => {
                    let (a, slope) = (*a, *slope);
                    let d: Vec<f64> = g
                        .data()
                        .iter()
                        .zip(self.value(a).data())
                        .map(|(&gv, &x)| gv * if x > 0.0 { 1.0 } else { slope })
                        .collect();
                    Self::acc_scaled(&mut grads, &self.nodes, a, &d, 1.0);
                }
                Op::SoftmaxRows(a) => {
                    let a = *a;
                    let y = &self.nodes[i].value;
                    let (r, c) = (y.rows(), y.cols());
                    let mut d = vec![0.0; r * c];
                    for row in 0..r {
                        let yr = y.row_slice(row);
                        let gr = &g.data()[row * c..(row + 1) * c];
                        let dot: f64 = yr.iter().zip(gr).map(|(&yv, &gv)| yv * gv).sum();
                        for j in 0..c {
                            d[row * c + j] = yr[j] * (gr[j] - dot);
                        }
                    }
                    Self::acc_scaled(&mut grads, &self.nodes, a, &d, 1.0);
                }
                Op::PLogP(a) => {
                    let a = *a;
                    let d: Vec<f64> = g
                        .data()
                        .iter()
                        .zip(self.value(a).data())
                        .map(|(&gv, &p)| if p > 0.0 { gv * (p.ln() + 1.0) } else { 0.0 })
                        .collect();
                    Self::acc_scaled(&mut grads, &self.nodes, a, &d, 1.0);
                }
                Op::Exp(a) => {
                    let a = *a;
                    let d: Vec<f64> = g
                        .data()
                        .iter()
                        .zip(self.nodes[i].value.data())
                        .map(|(&gv, &ex)| gv * ex)
                        .collect();
                    Self::acc_scaled(&mut grads, &self.nodes, a, &d, 1.0);
                }
                Op::Sum(a) => {
                    let a = *a;
                    let gv = g.data()[0];
                    let d = vec![gv; self.value(a).len()];
                    Self::acc_scaled(&mut grads, &self.nodes, a, &d, 1.0);
                }
                Op::Mean(a) => {
                    let a = *a;
                    let n = self.value(a).len();
                    let gv = g.data()[0] / n as f64;
                    let d = vec![gv; n];
                    Self::acc_scaled(&mut grads, &self.nodes, a, &d, 1.0);
                }
                Op::Reshape(a) => {
                    let a = *a;
                    Self::acc_scaled(&mut grads, &self.nodes, a, g.data(), 1.0);
                }
                Op::Rows(a, start, count) => {
                    let (a, start, count) = (*a, *start, *count);
                    let c = self.value(a).cols();
                    let ga = Self::slot(&mut grads, a.0, self.nodes[a.0].value.shape());
                    let dst = &mut ga.data_mut()[start * c..(start + count) * c];
                    for (d, s) in dst.iter_mut().zip(g.data()) {
                        *d += s;
                    }
                }
                Op::PickPerRow(a, indices) => {
                    let a = *a;
                    let indices = indices.clone();
                    let n = self.value(a).cols();
                    let ga = Self::slot(&mut grads, a.0, self.nodes[a.0].value.shape());
                    for (i_row, &j) in indices.iter().enumerate() {
                        ga.data_mut()[i_row * n + j] += g.data()[i_row];
                    }
                }
                Op::ConcatRows(parts) => {
                    let parts = parts.clone();
                    let mut offset = 0;
                    for p in parts {
                        let len = self.value(p).len();
                        let piece = &g.data()[offset..offset + len];
                        Self::acc_scaled(&mut grads, &self.nodes, p, piece, 1.0);
                        offset += len;
                    }
                }
                Op::ConcatCols(parts) => {
                    let parts = parts.clone();
                    let r = self.value(parts[0]).rows();
                    let total = self.nodes[i].value.cols();
                    let mut offset = 0;
                    for p in parts {
                        let w = self.value(p).cols();
                        let mut piece = vec![0.0; r * w];
                        for row in 0..r {
                            piece[row * w..(row + 1) * w]
                                .copy_from_slice(&g.data()[row * total + offset..row * total + offset + w]);
                        }
                        Self::acc_scaled(&mut grads, &self.nodes, p, &piece, 1.0);
                        offset += w;
                    }
                }
            }
        }
    }

    fn slot<'g>(grads: &'g mut [Option<Tensor>], idx: usize, shape: &[usize]) -> &'g mut Tensor {
        grads[idx].get_or_insert_with(|| Tensor::zeros(shape))
    }

    fn acc_scaled(grads: &mut [Option<Tensor>], nodes: &[Node], target: Var, delta: &[f64], k: f64) {
        let slot = Self::slot(grads, target.0, nodes[target.0].value.shape());
        for (dst, &src) in slot.data_mut().iter_mut().zip(delta) {
            *dst += k * src;
        }
    }
}
