//! Differentiable building blocks. Each layer has an `init_*` function that
//! registers its parameters under a name prefix and a forward function that
//! reads them back from the store through the tape.

use crate::error::{Error, Result};

use super::params::ParameterStore;
use super::tape::{Tape, Var};
use super::tensor::Tensor;

const LN_EPS: f64 = 1e-5;

pub fn init_linear(store: &mut ParameterStore, prefix: &str, input: usize, output: usize) {
    store.add_xavier(&format!("{prefix}.weight"), input, output);
    store.add_zeros(&format!("{prefix}.bias"), vec![output]);
}

/// `x · W + b`.
pub fn linear(tape: &mut Tape, store: &ParameterStore, prefix: &str, x: Var) -> Var {
    let w = tape.param(store, &format!("{prefix}.weight"));
    let b = tape.param(store, &format!("{prefix}.bias"));
    let xw = tape.matmul(x, w);
    tape.add_row(xw, b)
}

pub fn init_layer_norm(store: &mut ParameterStore, prefix: &str, dim: usize) {
    store.add_ones(&format!("{prefix}.gain"), vec![dim]);
    store.add_zeros(&format!("{prefix}.bias"), vec![dim]);
}

pub fn layer_norm(tape: &mut Tape, store: &ParameterStore, prefix: &str, x: Var) -> Var {
    let gain = tape.param(store, &format!("{prefix}.gain"));
    let bias = tape.param(store, &format!("{prefix}.bias"));
    let n = tape.normalize(x, LN_EPS);
    let scaled = tape.mul_row(n, gain);
    tape.add_row(scaled, bias)
}

pub fn init_feed_forward(store: &mut ParameterStore, prefix: &str, dim: usize, hidden: usize) {
    init_linear(store, &format!("{prefix}.in"), dim, hidden);
    init_linear(store, &format!("{prefix}.out"), hidden, dim);
}

/// Position-wise `W₂ · gelu(W₁ · x)`.
pub fn feed_forward(tape: &mut Tape, store: &ParameterStore, prefix: &str, x: Var, dropout: f64) -> Var {
    let h = linear(tape, store, &format!("{prefix}.in"), x);
    let h = tape.gelu(h);
    let h = tape.dropout(h, dropout);
    linear(tape, store, &format!("{prefix}.out"), h)
}

/// Additive mask that hides future positions: `0` on and below the
/// diagonal, `-inf` above it.
pub fn causal_mask(n: usize) -> Tensor {
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            data[i * n + j] = f64::NEG_INFINITY;
        }
    }
    Tensor::matrix(n, n, data)
}

/// `softmax(scale · q·kᵀ + mask) · v`, returning context and weights.
pub fn scaled_dot_product(
    tape: &mut Tape,
    q: Var,
    k: Var,
    v: Var,
    scale: f64,
    mask: Option<&Tensor>,
) -> (Var, Var) {
    let scores = tape.matmul_nt(q, k);
    let mut scores = tape.scale(scores, scale);
    if let Some(mask) = mask {
        let m = tape.constant(mask.clone());
        scores = tape.add(scores, m);
    }
    let weights = tape.softmax(scores);
    (tape.matmul(weights, v), weights)
}

pub fn init_attention(store: &mut ParameterStore, prefix: &str, dim: usize) {
    for proj in ["q", "k", "v", "o"] {
        init_linear(store, &format!("{prefix}.{proj}"), dim, dim);
    }
}

pub struct Attention {
    pub context: Var,
    /// Per-head attention weights (queries × keys).
    pub weights: Vec<Var>,
}

/// Multi-head scaled dot-product attention with input and output
/// projections. `mask` is added to every head's scores before softmax.
#[allow(clippy::too_many_arguments)]
pub fn multi_head_attention(
    tape: &mut Tape,
    store: &ParameterStore,
    prefix: &str,
    queries: Var,
    keys: Var,
    values: Var,
    heads: usize,
    mask: Option<&Tensor>,
    dropout: f64,
) -> Result<Attention> {
    let (nq, dim) = tape.dims(queries);
    let (nk, kdim) = tape.dims(keys);
    if heads == 0 || dim % heads != 0 || kdim != dim || tape.dims(values) != (nk, dim) {
        return Err(Error::ShapeMismatch(format!(
            "attention over q {nq}x{dim}, k {nk}x{kdim}, v {:?} with {heads} heads",
            tape.dims(values)
        )));
    }
    if let Some(m) = mask {
        if (m.rows(), m.cols()) != (nq, nk) {
            return Err(Error::ShapeMismatch(format!(
                "mask {}x{} for scores {nq}x{nk}",
                m.rows(),
                m.cols()
            )));
        }
    }
    let q = linear(tape, store, &format!("{prefix}.q"), queries);
    let k = linear(tape, store, &format!("{prefix}.k"), keys);
    let v = linear(tape, store, &format!("{prefix}.v"), values);
    let dh = dim / heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let mut contexts = Vec::with_capacity(heads);
    let mut weights = Vec::with_capacity(heads);
    for h in 0..heads {
        let (qh, kh, vh) = if heads == 1 {
            (q, k, v)
        } else {
            (
                tape.slice_cols(q, h * dh, (h + 1) * dh),
                tape.slice_cols(k, h * dh, (h + 1) * dh),
                tape.slice_cols(v, h * dh, (h + 1) * dh),
            )
        };
        let scores = tape.matmul_nt(qh, kh);
        let mut scores = tape.scale(scores, scale);
        if let Some(mask) = mask {
            let m = tape.constant(mask.clone());
            scores = tape.add(scores, m);
        }
        let w = tape.softmax(scores);
        let wd = tape.dropout(w, dropout);
        contexts.push(tape.matmul(wd, vh));
        weights.push(w);
    }
    let joined = if heads == 1 {
        contexts[0]
    } else {
        tape.concat_cols(&contexts)
    };
    Ok(Attention {
        context: linear(tape, store, &format!("{prefix}.o"), joined),
        weights,
    })
}

/// Single-head, unscaled attention of decoder states over graph nodes:
/// `β = S·Eᵀ`, `α = softmax_j(β)`, `u = α·E`. Without nodes the context
/// is all zeros.
pub fn kg_cross_attention(tape: &mut Tape, states: Var, nodes: Option<Var>) -> Var {
    let (t, d) = tape.dims(states);
    match nodes {
        Some(e) if tape.dims(e).0 > 0 => {
            assert_eq!(tape.dims(e).1, d, "node embeddings must match state width");
            let beta = tape.matmul_nt(states, e);
            let alpha = tape.softmax(beta);
            tape.matmul(alpha, e)
        }
        _ => tape.constant(Tensor::zeros(vec![t, d])),
    }
}

pub fn init_lstm(store: &mut ParameterStore, prefix: &str, input: usize, hidden: usize) {
    store.add_xavier(&format!("{prefix}.w_ih"), input, 4 * hidden);
    store.add_xavier(&format!("{prefix}.w_hh"), hidden, 4 * hidden);
    store.add_zeros(&format!("{prefix}.bias"), vec![4 * hidden]);
}

pub fn init_bilstm(store: &mut ParameterStore, prefix: &str, input: usize, hidden: usize) {
    init_lstm(store, &format!("{prefix}.fwd"), input, hidden);
    init_lstm(store, &format!("{prefix}.bwd"), input, hidden);
}

/// Runs an LSTM over `steps` (each batch×input) and returns the final
/// hidden state (batch×hidden). `masks[t]` (batch×hidden of 0/1) freezes
/// the state of rows whose sequence has already ended.
fn lstm_final(
    tape: &mut Tape,
    store: &ParameterStore,
    prefix: &str,
    steps: &[Var],
    masks: &[Option<Tensor>],
) -> Var {
    let w_ih = tape.param(store, &format!("{prefix}.w_ih"));
    let w_hh = tape.param(store, &format!("{prefix}.w_hh"));
    let bias = tape.param(store, &format!("{prefix}.bias"));
    let hidden = tape.dims(w_hh).0;
    let batch = tape.dims(steps[0]).0;
    let mut h = tape.constant(Tensor::zeros(vec![batch, hidden]));
    let mut c = tape.constant(Tensor::zeros(vec![batch, hidden]));
    for (&x, mask) in steps.iter().zip(masks) {
        let zx = tape.matmul(x, w_ih);
        let zh = tape.matmul(h, w_hh);
        let z = tape.add(zx, zh);
        let z = tape.add_row(z, bias);
        let i = tape.slice_cols(z, 0, hidden);
        let i = tape.sigmoid(i);
        let f = tape.slice_cols(z, hidden, 2 * hidden);
        let f = tape.sigmoid(f);
        let g = tape.slice_cols(z, 2 * hidden, 3 * hidden);
        let g = tape.tanh(g);
        let o = tape.slice_cols(z, 3 * hidden, 4 * hidden);
        let o = tape.sigmoid(o);
        let fc = tape.mul(f, c);
        let ig = tape.mul(i, g);
        let c_new = tape.add(fc, ig);
        let tc = tape.tanh(c_new);
        let h_new = tape.mul(o, tc);
        match mask {
            None => {
                h = h_new;
                c = c_new;
            }
            Some(m) => {
                let keep = tape.constant(m.clone());
                let hold = tape.constant(
                    Tensor::new(m.shape().to_vec(), m.data().iter().map(|v| 1.0 - v).collect())
                        .expect("same shape"),
                );
                let a = tape.mul(keep, h_new);
                let b = tape.mul(hold, h);
                h = tape.add(a, b);
                let a = tape.mul(keep, c_new);
                let b = tape.mul(hold, c);
                c = tape.add(a, b);
            }
        }
    }
    h
}

/// Concatenation of the forward LSTM's state after the last token and the
/// backward LSTM's state after reading back to the first token (1×2h).
pub fn bilstm_final(tape: &mut Tape, store: &ParameterStore, prefix: &str, x: Var) -> Result<Var> {
    let (len, _) = tape.dims(x);
    if len == 0 {
        return Err(Error::EmptySequence);
    }
    let rows: Vec<Var> = (0..len).map(|t| tape.slice_rows(x, t, t + 1)).collect();
    let reversed: Vec<Var> = rows.iter().rev().copied().collect();
    let none = vec![None; len];
    let f = lstm_final(tape, store, &format!("{prefix}.fwd"), &rows, &none);
    let b = lstm_final(tape, store, &format!("{prefix}.bwd"), &reversed, &none);
    Ok(tape.concat_cols(&[f, b]))
}

/// Batched [`bilstm_final`] over id sequences looked up in `table`; one
/// output row per sequence.
pub fn bilstm_final_batch(
    tape: &mut Tape,
    store: &ParameterStore,
    prefix: &str,
    table: Var,
    seqs: &[Vec<usize>],
) -> Result<Var> {
    if seqs.is_empty() || seqs.iter().any(Vec::is_empty) {
        return Err(Error::EmptySequence);
    }
    let hidden = store
        .get(&format!("{prefix}.fwd.w_hh"))
        .map(Tensor::rows)
        .ok_or_else(|| Error::ShapeMismatch(format!("no LSTM under `{prefix}`")))?;
    let max_len = seqs.iter().map(Vec::len).max().unwrap_or(0);
    let uniform = seqs.iter().all(|s| s.len() == max_len);
    let mut fwd_steps = Vec::with_capacity(max_len);
    let mut bwd_steps = Vec::with_capacity(max_len);
    let mut masks = Vec::with_capacity(max_len);
    for t in 0..max_len {
        let ids: Vec<usize> = seqs.iter().map(|s| s.get(t).copied().unwrap_or(0)).collect();
        let rev: Vec<usize> = seqs
            .iter()
            .map(|s| if t < s.len() { s[s.len() - 1 - t] } else { 0 })
            .collect();
        fwd_steps.push(tape.gather_rows(table, &ids));
        bwd_steps.push(tape.gather_rows(table, &rev));
        masks.push(if uniform {
            None
        } else {
            let data = seqs
                .iter()
                .flat_map(|s| std::iter::repeat_n(if t < s.len() { 1.0 } else { 0.0 }, hidden))
                .collect();
            Some(Tensor::matrix(seqs.len(), hidden, data))
        });
    }
    let f = lstm_final(tape, store, &format!("{prefix}.fwd"), &fwd_steps, &masks);
    let b = lstm_final(tape, store, &format!("{prefix}.bwd"), &bwd_steps, &masks);
    Ok(tape.concat_cols(&[f, b]))
}

pub fn init_gat(store: &mut ParameterStore, prefix: &str, input: usize, heads: usize, hidden: usize) {
    store.add_xavier(&format!("{prefix}.weight"), input, heads * hidden);
    store.add_xavier(&format!("{prefix}.attn_src"), heads, hidden);
    store.add_xavier(&format!("{prefix}.attn_dst"), heads, hidden);
}

const GAT_SLOPE: f64 = 0.2;

/// Additive mask over each node's closed neighborhood (the node itself
/// plus its neighbors).
pub fn neighborhood_mask(adjacency: &[Vec<usize>]) -> Tensor {
    let n = adjacency.len();
    let mut data = vec![f64::NEG_INFINITY; n * n];
    for (i, nbrs) in adjacency.iter().enumerate() {
        data[i * n + i] = 0.0;
        for &j in nbrs {
            data[i * n + j] = 0.0;
        }
    }
    Tensor::matrix(n, n, data)
}

/// Graph attention layer. Per head, node `i` scores each `j` in its closed
/// neighborhood with `leaky_relu(a_srcᵀ W h_i + a_dstᵀ W h_j)`, normalizes
/// with softmax and aggregates `W h_j`. Heads are concatenated, or averaged
/// when `average_heads` is set, and ELU is applied to the result.
#[allow(clippy::too_many_arguments)]
pub fn gat_layer(
    tape: &mut Tape,
    store: &ParameterStore,
    prefix: &str,
    node_feats: Var,
    adjacency: &[Vec<usize>],
    heads: usize,
    average_heads: bool,
    dropout: f64,
) -> Result<Var> {
    let (n, width) = tape.dims(node_feats);
    let weight = store
        .get(&format!("{prefix}.weight"))
        .ok_or_else(|| Error::ShapeMismatch(format!("no GAT under `{prefix}`")))?;
    if weight.rows() != width || adjacency.len() != n || heads == 0 || weight.cols() % heads != 0 {
        return Err(Error::ShapeMismatch(format!(
            "GAT `{prefix}`: features {n}x{width}, weight {}x{}, {} adjacency rows, {heads} heads",
            weight.rows(),
            weight.cols(),
            adjacency.len()
        )));
    }
    let hidden = weight.cols() / heads;
    let w = tape.param(store, &format!("{prefix}.weight"));
    let a_src = tape.param(store, &format!("{prefix}.attn_src"));
    let a_dst = tape.param(store, &format!("{prefix}.attn_dst"));
    let wh = tape.matmul(node_feats, w);
    let mask = tape.constant(neighborhood_mask(adjacency));
    let mut outs = Vec::with_capacity(heads);
    for h in 0..heads {
        let wh_h = tape.slice_cols(wh, h * hidden, (h + 1) * hidden);
        let src = tape.slice_rows(a_src, h, h + 1);
        let dst = tape.slice_rows(a_dst, h, h + 1);
        let f = tape.matmul_nt(wh_h, src);
        let g = tape.matmul_nt(wh_h, dst);
        let e = tape.add_outer(f, g);
        let e = tape.leaky_relu(e, GAT_SLOPE);
        let e = tape.add(e, mask);
        let alpha = tape.softmax(e);
        let alpha = tape.dropout(alpha, dropout);
        outs.push(tape.matmul(alpha, wh_h));
    }
    let joined = if average_heads {
        let mut acc = outs[0];
        for &o in &outs[1..] {
            acc = tape.add(acc, o);
        }
        tape.scale(acc, 1.0 / heads as f64)
    } else if heads == 1 {
        outs[0]
    } else {
        tape.concat_cols(&outs)
    };
    Ok(tape.elu(joined))
}
