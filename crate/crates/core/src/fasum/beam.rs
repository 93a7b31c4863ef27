use std::cmp::Ordering;

use crate::error::Result;
use crate::neuro::{Tape, Tensor};
use crate::textkit::{BOS, EOS, PAD, SEP, UNK};

use super::model::{argmax, FasumModel, GraphInput};

/// Decoding limits and options.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeOptions {
    pub beam_width: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub trigram_block: bool,
}

impl DecodeOptions {
    pub fn from_config(config: &super::FasumConfig) -> Self {
        Self {
            beam_width: config.beam_width,
            min_len: config.min_summary_len,
            max_len: config.max_summary_len,
            trigram_block: config.trigram_block,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationResult {
    /// Generated ids, EOS excluded.
    pub ids: Vec<u32>,
    pub text: String,
    /// Log-probability of every emitted token, the closing EOS included.
    pub log_probs: Vec<f64>,
    /// Length-normalized sum of `log_probs`.
    pub score: f64,
}

/// Encoder memory and graph embeddings computed once per document.
pub struct Context {
    memory: Tensor,
    nodes: Option<Tensor>,
}

impl Context {
    pub fn new(model: &FasumModel, source: &[u32], graph: &GraphInput) -> Result<Self> {
        let mut tape = Tape::new();
        let source = &source[..source.len().min(model.config.max_article_len)];
        let m = model.encode(&mut tape, source)?;
        let nodes = model.embed_graph(&mut tape, graph)?;
        Ok(Self {
            memory: tape.value(m).clone(),
            nodes: nodes.map(|n| tape.value(n).clone()),
        })
    }

    /// Next-token log-probabilities after BOS ⊕ `prefix`.
    pub fn next_log_probs(&self, model: &FasumModel, prefix: &[u32]) -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let memory = tape.constant(self.memory.clone());
        let nodes = self.nodes.clone().map(|n| tape.constant(n));
        let mut input = Vec::with_capacity(prefix.len() + 1);
        input.push(BOS);
        input.extend_from_slice(prefix);
        let states = model.decode_states(&mut tape, &input, memory, nodes)?;
        let n = input.len();
        let last = tape.slice_rows(states, n - 1, n);
        let lp = model.log_probs(&mut tape, last);
        Ok(tape.value(lp).data().to_vec())
    }
}

fn repeats_trigram(ids: &[u32], next: u32) -> bool {
    let n = ids.len();
    if n < 2 {
        return false;
    }
    let (a, b) = (ids[n - 2], ids[n - 1]);
    ids.windows(3).any(|w| w == [a, b, next])
}

/// Applies the decoding masks in place: special ids never appear, EOS is
/// barred before `min_len` and forced at `max_len`, and with trigram
/// blocking any repeated trigram is barred.
fn mask_step(lp: &mut [f64], ids: &[u32], opts: &DecodeOptions) {
    for special in [PAD, BOS, SEP, UNK] {
        if let Some(v) = lp.get_mut(special as usize) {
            *v = f64::NEG_INFINITY;
        }
    }
    if ids.len() >= opts.max_len {
        for (i, v) in lp.iter_mut().enumerate() {
            if i != EOS as usize {
                *v = f64::NEG_INFINITY;
            }
        }
        return;
    }
    if ids.len() < opts.min_len {
        lp[EOS as usize] = f64::NEG_INFINITY;
    }
    if opts.trigram_block {
        for (i, v) in lp.iter_mut().enumerate() {
            if i != EOS as usize && *v > f64::NEG_INFINITY && repeats_trigram(ids, i as u32) {
                *v = f64::NEG_INFINITY;
            }
        }
    }
}

#[derive(Clone)]
struct Hypothesis {
    ids: Vec<u32>,
    log_probs: Vec<f64>,
    total: f64,
}

impl Hypothesis {
    fn score(&self) -> f64 {
        self.total / self.log_probs.len().max(1) as f64
    }
}

fn finish(h: Hypothesis, detok: &dyn Fn(&[u32]) -> String) -> GenerationResult {
    GenerationResult {
        text: detok(&h.ids),
        score: h.score(),
        ids: h.ids,
        log_probs: h.log_probs,
    }
}

/// Beam search with length-normalized scores. Each step ranks every
/// finite extension of every live hypothesis by `sum / length`, breaking
/// ties by lower token id and then by earlier hypothesis, and keeps the
/// best `beam_width`; extensions ending in EOS move to the finished pool.
/// Search stops once `beam_width` hypotheses have finished.
pub fn beam_search(
    model: &FasumModel,
    ctx: &Context,
    opts: &DecodeOptions,
    detok: &dyn Fn(&[u32]) -> String,
) -> Result<GenerationResult> {
    let width = opts.beam_width.max(1);
    let mut alive = vec![Hypothesis {
        ids: Vec::new(),
        log_probs: Vec::new(),
        total: 0.0,
    }];
    let mut finished: Vec<Hypothesis> = Vec::new();
    while !alive.is_empty() && finished.len() < width {
        let mut cands: Vec<(f64, u32, usize, f64)> = Vec::new();
        for (hi, h) in alive.iter().enumerate() {
            let mut lp = ctx.next_log_probs(model, &h.ids)?;
            mask_step(&mut lp, &h.ids, opts);
            let len = (h.log_probs.len() + 1) as f64;
            for (tok, &v) in lp.iter().enumerate() {
                if v > f64::NEG_INFINITY {
                    cands.push(((h.total + v) / len, tok as u32, hi, v));
                }
            }
        }
        cands.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(Ordering::Equal)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let mut next = Vec::with_capacity(width);
        for &(_, tok, hi, v) in cands.iter().take(width) {
            let mut h = alive[hi].clone();
            h.log_probs.push(v);
            h.total += v;
            if tok == EOS {
                finished.push(h);
            } else {
                h.ids.push(tok);
                next.push(h);
            }
        }
        alive = next;
    }
    // Every live hypothesis eventually hits the forced EOS, so the pool is
    // non-empty unless the vocabulary is all special ids.
    let best = finished
        .into_iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            a.score()
                .partial_cmp(&b.score())
                .unwrap_or(Ordering::Equal)
                .then(ib.cmp(ia))
        })
        .map(|(_, h)| h)
        .or_else(|| alive.into_iter().next())
        .unwrap_or(Hypothesis {
            ids: Vec::new(),
            log_probs: Vec::new(),
            total: 0.0,
        });
    Ok(finish(best, detok))
}

/// Argmax decoding under the same masks as [`beam_search`].
pub fn greedy_decode(
    model: &FasumModel,
    ctx: &Context,
    opts: &DecodeOptions,
    detok: &dyn Fn(&[u32]) -> String,
) -> Result<GenerationResult> {
    let mut h = Hypothesis {
        ids: Vec::new(),
        log_probs: Vec::new(),
        total: 0.0,
    };
    loop {
        let mut lp = ctx.next_log_probs(model, &h.ids)?;
        mask_step(&mut lp, &h.ids, opts);
        let tok = argmax(&lp);
        if lp[tok] == f64::NEG_INFINITY {
            break;
        }
        h.log_probs.push(lp[tok]);
        h.total += lp[tok];
        if tok as u32 == EOS {
            break;
        }
        h.ids.push(tok as u32);
    }
    Ok(finish(h, detok))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trigram_detection() {
        assert!(repeats_trigram(&[7, 8, 9, 7, 8], 9));
        assert!(!repeats_trigram(&[7, 8, 9, 7, 8], 10));
        assert!(!repeats_trigram(&[7], 7));
    }

    #[test]
    fn masks_follow_length_bounds() {
        let opts = DecodeOptions {
            beam_width: 2,
            min_len: 2,
            max_len: 3,
            trigram_block: false,
        };
        let mut lp = vec![0.0; 8];
        mask_step(&mut lp, &[6], &opts);
        assert_eq!(lp[EOS as usize], f64::NEG_INFINITY);
        assert_eq!(lp[PAD as usize], f64::NEG_INFINITY);
        assert_eq!(lp[6], 0.0);
        let mut lp = vec![0.0; 8];
        mask_step(&mut lp, &[6, 6, 6], &opts);
        let live: Vec<usize> = (0..8).filter(|&i| lp[i] == 0.0).collect();
        assert_eq!(live, vec![EOS as usize]);
    }
}
