//! Tape-based reverse-mode automatic differentiation over dense matrices.
//!
//! Every operation evaluates eagerly and appends a node to the tape; the
//! tape is a topological order by construction, so [`Tape::backward`]
//! walks it once in reverse. Vectors are 1×n matrices and scalars are 1×1.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::params::ParameterStore;
use super::tensor::{round_in_place, Tensor};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    MatMulNT(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    MulRow(Var, Var),
    AddOuter(Var, Var),
    Scale(Var, f64),
    Tanh(Var),
    Sigmoid(Var),
    Elu(Var),
    LeakyRelu(Var, f64),
    Gelu(Var),
    Softmax(Var),
    LogSoftmax(Var),
    Normalize(Var, f64),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    SliceCols(Var, usize, usize),
    SliceRows(Var, usize),
    Gather(Var, Vec<usize>),
    Transpose(Var),
    Sum(Var),
    Nll(Var, Vec<Option<usize>>),
    BceLogits(Var, Vec<f64>),
}

struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Reverse-mode gradients indexed by [`Var`].
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&[f64]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }
}

pub struct Tape {
    nodes: Vec<Node>,
    params: HashMap<String, Var>,
    training: bool,
    rng: ChaCha8Rng,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

/// `c = a·b (+ beta·c)` on strided row-major views.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_strides: (usize, usize),
    b: &[f64],
    b_strides: (usize, usize),
    c: &mut [f64],
    beta: f64,
) {
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        if beta == 0.0 {
            c.iter_mut().for_each(|v| *v = 0.0);
        }
        return;
    }
    assert!(c.len() >= m * n);
    // SAFETY: the strides describe in-bounds views of `a`, `b` and `c`,
    // which callers size from the operand shapes.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            a_strides.0 as isize,
            a_strides.1 as isize,
            b.as_ptr(),
            b_strides.0 as isize,
            b_strides.1 as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + 0.044715 * x * x * x)).tanh())
}

fn gelu_grad(x: f64) -> f64 {
    let inner = GELU_C * (x + 0.044715 * x * x * x);
    let t = inner.tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * 0.044715 * x * x)
}

/// Parameter gradients keyed by parameter name.
pub type ParamGrads = Vec<(String, Vec<f64>)>;

/// Row-wise softmax with max subtraction. Rows that are entirely `-inf`
/// produce zeros.
pub fn softmax_rows(values: &[f64], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    if cols == 0 {
        return out;
    }
    for (row, dst) in values.chunks(cols).zip(out.chunks_mut(cols)) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            continue;
        }
        let mut total = 0.0;
        for (d, &x) in dst.iter_mut().zip(row) {
            *d = (x - max).exp();
            total += *d;
        }
        dst.iter_mut().for_each(|d| *d /= total);
    }
    out
}

impl Tape {
    /// An evaluation-mode tape: dropout is disabled.
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            params: HashMap::new(),
            training: false,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    /// A training-mode tape whose dropout masks derive from `seed`.
    pub fn training(seed: u64) -> Self {
        Self {
            training: true,
            rng: ChaCha8Rng::seed_from_u64(seed),
            ..Self::new()
        }
    }

    pub fn is_training(&self) -> bool {
        self.training
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, mut value: Tensor, op: Op, requires_grad: bool) -> Var {
        round_in_place(value.data_mut());
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn op(&mut self, value: Tensor, op: Op, inputs: &[Var]) -> Var {
        let rg = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        self.push(value, op, rg)
    }

    fn as_matrix(t: Tensor) -> Tensor {
        let (r, c) = (t.rows(), t.cols());
        Tensor::matrix(r, c, t.into_data())
    }

    /// A constant input; no gradient flows into it.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(Self::as_matrix(value), Op::Leaf, false)
    }

    /// A differentiable input.
    pub fn variable(&mut self, value: Tensor) -> Var {
        self.push(Self::as_matrix(value), Op::Leaf, true)
    }

    /// Leaf bound to a named parameter; repeated calls return the same node.
    pub fn param(&mut self, store: &ParameterStore, name: &str) -> Var {
        if let Some(&v) = self.params.get(name) {
            return v;
        }
        let value = store
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter `{name}`"))
            .clone();
        let mut value = Self::as_matrix(value);
        value.clear_grad();
        let v = self.push(value, Op::Leaf, true);
        self.params.insert(name.to_string(), v);
        v
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn dims(&self, v: Var) -> (usize, usize) {
        let t = &self.nodes[v.0].value;
        (t.rows(), t.cols())
    }

    fn data(&self, v: Var) -> &[f64] {
        self.nodes[v.0].value.data()
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let (m, k) = self.dims(a);
        let (k2, n) = self.dims(b);
        assert_eq!(k, k2, "matmul {m}x{k} by {k2}x{n}");
        let mut out = vec![0.0; m * n];
        gemm(m, k, n, self.data(a), (k, 1), self.data(b), (n, 1), &mut out, 0.0);
        self.op(Tensor::matrix(m, n, out), Op::MatMul(a, b), &[a, b])
    }

    /// `a · bᵀ`.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Var {
        let (m, d) = self.dims(a);
        let (n, d2) = self.dims(b);
        assert_eq!(d, d2, "matmul_nt {m}x{d} by ({n}x{d2})ᵀ");
        let mut out = vec![0.0; m * n];
        gemm(m, d, n, self.data(a), (d, 1), self.data(b), (1, d), &mut out, 0.0);
        self.op(Tensor::matrix(m, n, out), Op::MatMulNT(a, b), &[a, b])
    }

    fn zip_same(&mut self, a: Var, b: Var, op: Op, f: impl Fn(f64, f64) -> f64) -> Var {
        assert_eq!(self.dims(a), self.dims(b), "elementwise shape mismatch");
        let (r, c) = self.dims(a);
        let out = self
            .data(a)
            .iter()
            .zip(self.data(b))
            .map(|(&x, &y)| f(x, y))
            .collect();
        self.op(Tensor::matrix(r, c, out), op, &[a, b])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.zip_same(a, b, Op::Add(a, b), |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.zip_same(a, b, Op::Sub(a, b), |x, y| x - y)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.zip_same(a, b, Op::Mul(a, b), |x, y| x * y)
    }

    /// Adds a 1×n row to every row of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Var {
        let (r, c) = self.dims(a);
        assert_eq!(self.dims(row), (1, c), "add_row width");
        let rv = self.data(row);
        let out = self
            .data(a)
            .iter()
            .enumerate()
            .map(|(i, &x)| x + rv[i % c])
            .collect();
        self.op(Tensor::matrix(r, c, out), Op::AddRow(a, row), &[a, row])
    }

    /// Multiplies every row of `a` elementwise by a 1×n row.
    pub fn mul_row(&mut self, a: Var, row: Var) -> Var {
        let (r, c) = self.dims(a);
        assert_eq!(self.dims(row), (1, c), "mul_row width");
        let rv = self.data(row);
        let out = self
            .data(a)
            .iter()
            .enumerate()
            .map(|(i, &x)| x * rv[i % c])
            .collect();
        self.op(Tensor::matrix(r, c, out), Op::MulRow(a, row), &[a, row])
    }

    /// `out[i][j] = f[i] + g[j]` for column vectors `f` (n×1) and `g` (m×1).
    pub fn add_outer(&mut self, f: Var, g: Var) -> Var {
        let (n, one) = self.dims(f);
        let (m, one2) = self.dims(g);
        assert!(one == 1 && one2 == 1, "add_outer expects column vectors");
        let (fv, gv) = (self.data(f), self.data(g));
        let mut out = Vec::with_capacity(n * m);
        for &x in fv {
            out.extend(gv.iter().map(|&y| x + y));
        }
        self.op(Tensor::matrix(n, m, out), Op::AddOuter(f, g), &[f, g])
    }

    fn map(&mut self, a: Var, op: Op, f: impl Fn(f64) -> f64) -> Var {
        let (r, c) = self.dims(a);
        let out = self.data(a).iter().map(|&x| f(x)).collect();
        self.op(Tensor::matrix(r, c, out), op, &[a])
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        self.map(a, Op::Scale(a, factor), |x| x * factor)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.map(a, Op::Tanh(a), f64::tanh)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.map(a, Op::Sigmoid(a), sigmoid)
    }

    /// ELU with unit slope for negative inputs.
    pub fn elu(&mut self, a: Var) -> Var {
        self.map(a, Op::Elu(a), |x| if x > 0.0 { x } else { x.exp_m1() })
    }

    pub fn leaky_relu(&mut self, a: Var, slope: f64) -> Var {
        self.map(
            a,
            Op::LeakyRelu(a, slope),
            |x| if x > 0.0 { x } else { slope * x },
        )
    }

    pub fn gelu(&mut self, a: Var) -> Var {
        self.map(a, Op::Gelu(a), gelu)
    }

    pub fn softmax(&mut self, a: Var) -> Var {
        let (r, c) = self.dims(a);
        let out = softmax_rows(self.data(a), c);
        self.op(Tensor::matrix(r, c, out), Op::Softmax(a), &[a])
    }

    pub fn log_softmax(&mut self, a: Var) -> Var {
        let (r, c) = self.dims(a);
        let mut out = vec![0.0; r * c];
        for (row, dst) in self.data(a).chunks(c.max(1)).zip(out.chunks_mut(c.max(1))) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
            for (d, &x) in dst.iter_mut().zip(row) {
                *d = x - lse;
            }
        }
        self.op(Tensor::matrix(r, c, out), Op::LogSoftmax(a), &[a])
    }

    /// Row standardization `(x - mean) / sqrt(var + eps)`.
    pub fn normalize(&mut self, a: Var, eps: f64) -> Var {
        let (r, c) = self.dims(a);
        let mut out = vec![0.0; r * c];
        for (row, dst) in self.data(a).chunks(c).zip(out.chunks_mut(c)) {
            let (mean, inv_std) = row_moments(row, eps);
            for (d, &x) in dst.iter_mut().zip(row) {
                *d = (x - mean) * inv_std;
            }
        }
        self.op(Tensor::matrix(r, c, out), Op::Normalize(a, eps), &[a])
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty());
        let r = self.dims(parts[0]).0;
        let widths: Vec<usize> = parts
            .iter()
            .map(|&p| {
                assert_eq!(self.dims(p).0, r, "concat_cols row mismatch");
                self.dims(p).1
            })
            .collect();
        let total: usize = widths.iter().sum();
        let mut out = Vec::with_capacity(r * total);
        for i in 0..r {
            for (&p, &w) in parts.iter().zip(&widths) {
                out.extend_from_slice(&self.data(p)[i * w..(i + 1) * w]);
            }
        }
        self.op(
            Tensor::matrix(r, total, out),
            Op::ConcatCols(parts.to_vec()),
            parts,
        )
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty());
        let c = self.dims(parts[0]).1;
        let mut out = Vec::new();
        let mut rows = 0;
        for &p in parts {
            assert_eq!(self.dims(p).1, c, "concat_rows width mismatch");
            out.extend_from_slice(self.data(p));
            rows += self.dims(p).0;
        }
        self.op(
            Tensor::matrix(rows, c, out),
            Op::ConcatRows(parts.to_vec()),
            parts,
        )
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, end: usize) -> Var {
        let (r, c) = self.dims(a);
        assert!(start <= end && end <= c, "slice_cols {start}..{end} of {c}");
        let w = end - start;
        let mut out = Vec::with_capacity(r * w);
        for row in self.data(a).chunks(c.max(1)).take(r) {
            out.extend_from_slice(&row[start..end]);
        }
        self.op(Tensor::matrix(r, w, out), Op::SliceCols(a, start, end), &[a])
    }

    pub fn slice_rows(&mut self, a: Var, start: usize, end: usize) -> Var {
        let (r, c) = self.dims(a);
        assert!(start <= end && end <= r, "slice_rows {start}..{end} of {r}");
        let out = self.data(a)[start * c..end * c].to_vec();
        self.op(Tensor::matrix(end - start, c, out), Op::SliceRows(a, start), &[a])
    }

    /// Stacks rows `ids` of `table` (embedding lookup).
    pub fn gather_rows(&mut self, table: Var, ids: &[usize]) -> Var {
        let (r, c) = self.dims(table);
        let mut out = Vec::with_capacity(ids.len() * c);
        for &id in ids {
            assert!(id < r, "gather row {id} of {r}");
            out.extend_from_slice(&self.data(table)[id * c..(id + 1) * c]);
        }
        self.op(
            Tensor::matrix(ids.len(), c, out),
            Op::Gather(table, ids.to_vec()),
            &[table],
        )
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let (r, c) = self.dims(a);
        let src = self.data(a);
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                out[j * r + i] = src[i * c + j];
            }
        }
        self.op(Tensor::matrix(c, r, out), Op::Transpose(a), &[a])
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.data(a).iter().sum();
        self.op(Tensor::scalar(s), Op::Sum(a), &[a])
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let n = self.value(a).len().max(1);
        let s = self.sum(a);
        self.scale(s, 1.0 / n as f64)
    }

    /// Mean negative log-likelihood over rows with a target; `None` rows
    /// (padding) are excluded from the mean.
    pub fn nll(&mut self, log_probs: Var, targets: &[Option<usize>]) -> Var {
        let (r, c) = self.dims(log_probs);
        assert_eq!(r, targets.len(), "one target per row");
        let lp = self.data(log_probs);
        let (mut total, mut count) = (0.0, 0usize);
        for (i, t) in targets.iter().enumerate() {
            if let Some(t) = *t {
                assert!(t < c, "target {t} out of {c}");
                total -= lp[i * c + t];
                count += 1;
            }
        }
        let loss = if count == 0 { 0.0 } else { total / count as f64 };
        self.op(
            Tensor::scalar(loss),
            Op::Nll(log_probs, targets.to_vec()),
            &[log_probs],
        )
    }

    /// Mean binary cross-entropy of logits (n×1) against labels in {0, 1}.
    pub fn bce_with_logits(&mut self, logits: Var, labels: &[f64]) -> Var {
        let z = self.data(logits);
        assert_eq!(z.len(), labels.len());
        let n = labels.len().max(1) as f64;
        let loss = z
            .iter()
            .zip(labels)
            .map(|(&z, &y)| z.max(0.0) - z * y + (-z.abs()).exp().ln_1p())
            .sum::<f64>()
            / n;
        self.op(
            Tensor::scalar(loss),
            Op::BceLogits(logits, labels.to_vec()),
            &[logits],
        )
    }

    /// Inverted dropout; identity outside training mode.
    pub fn dropout(&mut self, a: Var, rate: f64) -> Var {
        if !self.training || rate <= 0.0 {
            return a;
        }
        let (r, c) = self.dims(a);
        let keep = 1.0 - rate;
        let mask: Vec<f64> = (0..r * c)
            .map(|_| {
                if self.rng.gen::<f64>() < keep {
                    1.0 / keep
                } else {
                    0.0
                }
            })
            .collect();
        let m = self.constant(Tensor::matrix(r, c, mask));
        self.mul(a, m)
    }

    /// Reverse pass from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Gradients {
        assert_eq!(self.dims(loss), (1, 1), "backward from a non-scalar");
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);
        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            let Some(mut g) = grads[i].take() else {
                continue;
            };
            round_in_place(&mut g);
            self.backprop(node, &g, &mut grads);
            grads[i] = Some(g);
        }
        Gradients { grads }
    }

    fn backprop(&self, node: &Node, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let nodes = &self.nodes;
        let out = &node.value;
        let mut acc = |v: Var, f: &mut dyn FnMut(&mut [f64])| {
            if nodes[v.0].requires_grad {
                let len = nodes[v.0].value.len();
                f(grads[v.0].get_or_insert_with(|| vec![0.0; len]));
            }
        };
        let dims = |v: Var| (nodes[v.0].value.rows(), nodes[v.0].value.cols());
        let val = |v: Var| nodes[v.0].value.data();
        match &node.op {
            Op::Leaf => {}
            &Op::MatMul(a, b) => {
                let ((m, k), (_, n)) = (dims(a), dims(b));
                acc(a, &mut |ga| gemm(m, n, k, g, (n, 1), val(b), (1, n), ga, 1.0));
                acc(b, &mut |gb| gemm(k, m, n, val(a), (1, k), g, (n, 1), gb, 1.0));
            }
            &Op::MatMulNT(a, b) => {
                let ((m, d), (n, _)) = (dims(a), dims(b));
                acc(a, &mut |ga| gemm(m, n, d, g, (n, 1), val(b), (d, 1), ga, 1.0));
                acc(b, &mut |gb| gemm(n, m, d, g, (1, n), val(a), (d, 1), gb, 1.0));
            }
            &Op::Add(a, b) => {
                acc(a, &mut |ga| add_into(ga, g));
                acc(b, &mut |gb| add_into(gb, g));
            }
            &Op::Sub(a, b) => {
                acc(a, &mut |ga| add_into(ga, g));
                acc(b, &mut |gb| gb.iter_mut().zip(g).for_each(|(x, y)| *x -= y));
            }
            &Op::Mul(a, b) => {
                acc(a, &mut |ga| {
                    for ((x, &y), &w) in ga.iter_mut().zip(g).zip(val(b)) {
                        *x += y * w;
                    }
                });
                acc(b, &mut |gb| {
                    for ((x, &y), &w) in gb.iter_mut().zip(g).zip(val(a)) {
                        *x += y * w;
                    }
                });
            }
            &Op::AddRow(a, row) => {
                let c = dims(a).1;
                acc(a, &mut |ga| add_into(ga, g));
                acc(row, &mut |gr| {
                    for (i, &y) in g.iter().enumerate() {
                        gr[i % c] += y;
                    }
                });
            }
            &Op::MulRow(a, row) => {
                let c = dims(a).1;
                let (av, rv) = (val(a), val(row));
                acc(a, &mut |ga| {
                    for (i, (x, &y)) in ga.iter_mut().zip(g).enumerate() {
                        *x += y * rv[i % c];
                    }
                });
                acc(row, &mut |gr| {
                    for (i, (&y, &x)) in g.iter().zip(av).enumerate() {
                        gr[i % c] += y * x;
                    }
                });
            }
            &Op::AddOuter(f, h) => {
                let m = dims(h).0;
                acc(f, &mut |gf| {
                    for (i, row) in g.chunks(m.max(1)).enumerate().take(gf.len()) {
                        gf[i] += row.iter().sum::<f64>();
                    }
                });
                acc(h, &mut |gh| {
                    for row in g.chunks(m.max(1)) {
                        add_into(gh, row);
                    }
                });
            }
            &Op::Scale(a, factor) => acc(a, &mut |ga| {
                ga.iter_mut().zip(g).for_each(|(x, &y)| *x += y * factor)
            }),
            &Op::Tanh(a) => acc(a, &mut |ga| {
                for ((x, &y), &o) in ga.iter_mut().zip(g).zip(out.data()) {
                    *x += y * (1.0 - o * o);
                }
            }),
            &Op::Sigmoid(a) => acc(a, &mut |ga| {
                for ((x, &y), &o) in ga.iter_mut().zip(g).zip(out.data()) {
                    *x += y * o * (1.0 - o);
                }
            }),
            &Op::Elu(a) => acc(a, &mut |ga| {
                for (((x, &y), &o), &i) in ga.iter_mut().zip(g).zip(out.data()).zip(val(a)) {
                    *x += if i > 0.0 { y } else { y * (o + 1.0) };
                }
            }),
            &Op::LeakyRelu(a, slope) => acc(a, &mut |ga| {
                for ((x, &y), &i) in ga.iter_mut().zip(g).zip(val(a)) {
                    *x += if i > 0.0 { y } else { y * slope };
                }
            }),
            &Op::Gelu(a) => acc(a, &mut |ga| {
                for ((x, &y), &i) in ga.iter_mut().zip(g).zip(val(a)) {
                    *x += y * gelu_grad(i);
                }
            }),
            &Op::Softmax(a) => {
                let c = dims(a).1.max(1);
                acc(a, &mut |ga| {
                    for ((dst, gr), yr) in ga.chunks_mut(c).zip(g.chunks(c)).zip(out.data().chunks(c)) {
                        let dot: f64 = gr.iter().zip(yr).map(|(a, b)| a * b).sum();
                        for ((x, &gy), &y) in dst.iter_mut().zip(gr).zip(yr) {
                            *x += y * (gy - dot);
                        }
                    }
                });
            }
            &Op::LogSoftmax(a) => {
                let c = dims(a).1.max(1);
                acc(a, &mut |ga| {
                    for ((dst, gr), yr) in ga.chunks_mut(c).zip(g.chunks(c)).zip(out.data().chunks(c)) {
                        let total: f64 = gr.iter().sum();
                        for ((x, &gy), &y) in dst.iter_mut().zip(gr).zip(yr) {
                            *x += gy - y.exp() * total;
                        }
                    }
                });
            }
            &Op::Normalize(a, eps) => {
                let c = dims(a).1.max(1);
                acc(a, &mut |ga| {
                    let rows = val(a).chunks(c).zip(out.data().chunks(c)).zip(g.chunks(c));
                    for (dst, ((xr, yr), gr)) in ga.chunks_mut(c).zip(rows) {
                        let (_, inv_std) = row_moments(xr, eps);
                        let n = c as f64;
                        let mean_g = gr.iter().sum::<f64>() / n;
                        let mean_gy = gr.iter().zip(yr).map(|(a, b)| a * b).sum::<f64>() / n;
                        for ((x, &gy), &y) in dst.iter_mut().zip(gr).zip(yr) {
                            *x += inv_std * (gy - mean_g - y * mean_gy);
                        }
                    }
                });
            }
            Op::ConcatCols(parts) => {
                let total = out.cols();
                let mut offset = 0;
                for &p in parts {
                    let w = dims(p).1;
                    acc(p, &mut |gp| {
                        for (dst, src) in gp.chunks_mut(w.max(1)).zip(g.chunks(total.max(1))) {
                            add_into(dst, &src[offset..offset + w]);
                        }
                    });
                    offset += w;
                }
            }
            Op::ConcatRows(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let n = nodes[p.0].value.len();
                    acc(p, &mut |gp| add_into(gp, &g[offset..offset + n]));
                    offset += n;
                }
            }
            &Op::SliceCols(a, start, end) => {
                let c = dims(a).1;
                let w = end - start;
                acc(a, &mut |ga| {
                    for (dst, src) in ga.chunks_mut(c.max(1)).zip(g.chunks(w.max(1))) {
                        add_into(&mut dst[start..end], src);
                    }
                });
            }
            &Op::SliceRows(a, start) => {
                let c = dims(a).1;
                acc(a, &mut |ga| add_into(&mut ga[start * c..start * c + g.len()], g));
            }
            Op::Gather(table, ids) => {
                let c = dims(*table).1;
                acc(*table, &mut |gt| {
                    for (row, &id) in g.chunks(c.max(1)).zip(ids) {
                        add_into(&mut gt[id * c..(id + 1) * c], row);
                    }
                });
            }
            &Op::Transpose(a) => {
                let (r, c) = dims(a);
                acc(a, &mut |ga| {
                    for i in 0..r {
                        for j in 0..c {
                            ga[i * c + j] += g[j * r + i];
                        }
                    }
                });
            }
            &Op::Sum(a) => acc(a, &mut |ga| ga.iter_mut().for_each(|x| *x += g[0])),
            Op::Nll(lp, targets) => {
                let c = dims(*lp).1;
                let count = targets.iter().filter(|t| t.is_some()).count();
                if count > 0 {
                    let w = g[0] / count as f64;
                    acc(*lp, &mut |gl| {
                        for (i, t) in targets.iter().enumerate() {
                            if let Some(t) = *t {
                                gl[i * c + t] -= w;
                            }
                        }
                    });
                }
            }
            Op::BceLogits(z, labels) => {
                let n = labels.len().max(1) as f64;
                acc(*z, &mut |gz| {
                    for ((x, &zv), &y) in gz.iter_mut().zip(val(*z)).zip(labels) {
                        *x += g[0] * (sigmoid(zv) - y) / n;
                    }
                });
            }
        }
    }

    /// Adds the gradient of every parameter leaf into the store.
    pub fn accumulate_param_grads(&self, grads: &Gradients, store: &mut ParameterStore) {
        for (name, g) in self.param_grads(grads) {
            store.accumulate_grad(&name, &g);
        }
    }

    /// Gradients of the parameter leaves, sorted by name.
    pub fn param_grads(&self, grads: &Gradients) -> ParamGrads {
        let mut out: ParamGrads = self
            .params
            .iter()
            .filter_map(|(name, &v)| grads.get(v).map(|g| (name.clone(), g.to_vec())))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (a, b) in dst.iter_mut().zip(src) {
        *a += b;
    }
}

fn row_moments(row: &[f64], eps: f64) -> (f64, f64) {
    let n = row.len() as f64;
    let mean = row.iter().sum::<f64>() / n;
    let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, 1.0 / (var + eps).sqrt())
}
