use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::match_tokens;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RougeVariant {
    R1,
    R2,
    RL,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScores {
    pub rouge1: f64,
    pub rouge2: f64,
    #[serde(rename = "rougeL")]
    pub rouge_l: f64,
}

fn f1(overlap: usize, cand: usize, refr: usize) -> f64 {
    if overlap == 0 || cand == 0 || refr == 0 {
        return 0.0;
    }
    let p = overlap as f64 / cand as f64;
    let r = overlap as f64 / refr as f64;
    2.0 * p * r / (p + r)
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

fn ngram_f1(cand: &[String], refr: &[String], n: usize) -> f64 {
    if cand.len() < n || refr.len() < n {
        return 0.0;
    }
    let c = ngram_counts(cand, n);
    let r = ngram_counts(refr, n);
    let overlap = c
        .iter()
        .map(|(g, &k)| k.min(r.get(g).copied().unwrap_or(0)))
        .sum();
    f1(overlap, cand.len() + 1 - n, refr.len() + 1 - n)
}

pub(crate) fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE F1 of `candidate` against `reference`.
pub fn rouge_f1(candidate: &str, reference: &str, variant: RougeVariant) -> f64 {
    let c = match_tokens(candidate);
    let r = match_tokens(reference);
    match variant {
        RougeVariant::R1 => ngram_f1(&c, &r, 1),
        RougeVariant::R2 => ngram_f1(&c, &r, 2),
        RougeVariant::RL => f1(lcs_len(&c, &r), c.len(), r.len()),
    }
}

pub fn rouge_scores(candidate: &str, reference: &str) -> RougeScores {
    let c = match_tokens(candidate);
    let r = match_tokens(reference);
    RougeScores {
        rouge1: ngram_f1(&c, &r, 1),
        rouge2: ngram_f1(&c, &r, 2),
        rouge_l: f1(lcs_len(&c, &r), c.len(), r.len()),
    }
}
