//! Factual corrector: synthetic corruptions of reference summaries and a
//! sequence-to-sequence model trained to undo them.

mod diff;
mod forge;

pub use diff::{token_diff, DiffReport, Edit};
pub use forge::{
    forge, forge_entity_swap, forge_negation, forge_pronoun_swap, paraphrase_sample, CorruptionSample,
    IdentityParaphraser, Paraphraser, Transform,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::DocumentPair;
use crate::error::Result;
use crate::fasum::{DecodeOptions, Example, FasumConfig, GraphInput, Summarizer, TrainOutcome};
use crate::textkit::{SubwordVocab, BOS, EOS, SEP};

/// Counts behind a forged dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ForgeStats {
    pub requested: usize,
    pub corrupted: usize,
    pub skipped: usize,
    pub identity: usize,
}

/// For each pair with a summary, tries `per_pair` corruptions cycling
/// through `transforms` (skips are dropped, not retried) and then adds one
/// identity sample produced by `paraphraser`.
pub fn make_fc_dataset(
    pairs: &[DocumentPair],
    per_pair: usize,
    transforms: &[Transform],
    paraphraser: &dyn Paraphraser,
    seed: u64,
) -> (Vec<CorruptionSample>, ForgeStats) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut stats = ForgeStats::default();
    let corrupting: Vec<Transform> = transforms
        .iter()
        .copied()
        .filter(|t| *t != Transform::ParaphraseStub)
        .collect();
    for pair in pairs {
        let Some(summary) = pair.summary.as_deref() else {
            continue;
        };
        if !corrupting.is_empty() {
            for k in 0..per_pair {
                stats.requested += 1;
                match forge(
                    corrupting[k % corrupting.len()],
                    summary,
                    &pair.article,
                    paraphraser,
                    &mut rng,
                ) {
                    Some(s) => {
                        stats.corrupted += 1;
                        out.push(s);
                    }
                    None => stats.skipped += 1,
                }
            }
        }
        out.push(paraphrase_sample(summary, &pair.article, paraphraser));
        stats.identity += 1;
    }
    (out, stats)
}

/// `BOS ⊕ summary ⊕ SEP ⊕ article ⊕ EOS`, at most `max_len` ids. The
/// article is cut first; the summary only when it alone overflows.
pub fn correction_input(summary: &[u32], article: &[u32], max_len: usize) -> Vec<u32> {
    let room = max_len.saturating_sub(3);
    let s = &summary[..summary.len().min(room)];
    let a = &article[..article.len().min(room - s.len())];
    let mut ids = Vec::with_capacity(s.len() + a.len() + 3);
    ids.push(BOS);
    ids.extend_from_slice(s);
    ids.push(SEP);
    ids.extend_from_slice(a);
    ids.push(EOS);
    ids
}

/// Summarizer settings adapted to correction: no graph pathway, beam width
/// 2 with trigram blocking, warmup over a fifth of the steps.
pub fn fc_config(base: &FasumConfig) -> FasumConfig {
    FasumConfig {
        use_kg: false,
        beam_width: 2,
        trigram_block: true,
        warmup_fraction: 0.2,
        min_summary_len: 1,
        ..base.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correction {
    pub corrected: String,
    pub diff: DiffReport,
}

/// The correction model: a summarizer without graph attention that reads a
/// candidate summary together with its article.
#[derive(Debug, Clone, PartialEq)]
pub struct Corrector {
    pub inner: Summarizer,
}

impl Corrector {
    /// `config` is used as given; see [`fc_config`] for the usual setup.
    pub fn new(vocab: SubwordVocab, config: FasumConfig) -> Result<Self> {
        Ok(Self {
            inner: Summarizer::new(vocab, config)?,
        })
    }

    pub fn input(&self, summary: &str, article: &str) -> Vec<u32> {
        let s = self.inner.encode_text(summary);
        let a = self.inner.encode_text(article);
        correction_input(&s, &a, self.inner.config().max_article_len)
    }

    pub fn example(&self, sample: &CorruptionSample) -> Example {
        Example {
            source: self.input(&sample.corrupted_summary, &sample.article),
            target: self.inner.encode_text(&sample.clean_summary),
            graph: GraphInput::empty(),
        }
    }

    pub fn fit(&mut self, train: &[CorruptionSample], valid: &[CorruptionSample]) -> Result<TrainOutcome> {
        let t: Vec<Example> = train.iter().map(|s| self.example(s)).collect();
        let v: Vec<Example> = valid.iter().map(|s| self.example(s)).collect();
        self.inner.fit(&t, &v)
    }

    pub fn decode_options(&self) -> DecodeOptions {
        self.inner.decode_options()
    }

    pub fn correct(&self, summary: &str, article: &str) -> Result<Correction> {
        let ex = Example {
            source: self.input(summary, article),
            target: Vec::new(),
            graph: GraphInput::empty(),
        };
        let out = self.inner.generate(&ex, &self.decode_options())?;
        Ok(Correction {
            diff: token_diff(summary, &out.text),
            corrected: out.text,
        })
    }

    /// Corrects many inputs in parallel, preserving order.
    pub fn correct_all(&self, inputs: &[(String, String)]) -> Result<Vec<Correction>> {
        inputs
            .par_iter()
            .map(|(s, a)| self.correct(s, a))
            .collect::<Vec<_>>()
            .into_iter()
            .collect()
    }

    pub fn to_checkpoint(&self) -> Vec<u8> {
        self.inner.to_checkpoint()
    }

    pub fn from_checkpoint(bytes: &[u8]) -> Result<Self> {
        Ok(Self {
            inner: Summarizer::from_checkpoint(bytes)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(article: &str, summary: &str) -> DocumentPair {
        DocumentPair {
            id: "d".into(),
            article: article.into(),
            summary: Some(summary.into()),
        }
    }

    #[test]
    fn one_pair_two_swaps_plus_identity() {
        let p = pair("Gareth Bale and Cristiano Ronaldo played.", "Gareth Bale scored.");
        let (samples, stats) = make_fc_dataset(&[p], 2, &[Transform::EntitySwap], &IdentityParaphraser, 3);
        assert_eq!(samples.len(), 3);
        assert_eq!(stats.corrupted, 2);
        assert_eq!(samples[2].transform, Transform::ParaphraseStub);
        assert_eq!(samples[2].corrupted_summary, samples[2].clean_summary);
    }

    #[test]
    fn skips_are_counted() {
        let p = pair("The match ended.", "The team scored.");
        let (samples, stats) = make_fc_dataset(&[p], 3, &Transform::CORRUPTING, &IdentityParaphraser, 3);
        assert_eq!(samples.len(), 1);
        assert_eq!((stats.requested, stats.skipped), (3, 3));
        assert!(
            make_fc_dataset(&[], 2, &Transform::CORRUPTING, &IdentityParaphraser, 0)
                .0
                .is_empty()
        );
    }

    #[test]
    fn input_layout_and_truncation() {
        let ids = correction_input(&[10, 11], &[20, 21, 22, 23], 7);
        assert_eq!(ids, vec![BOS, 10, 11, SEP, 20, 21, EOS]);
        let ids = correction_input(&[10, 11, 12, 13, 14], &[20], 6);
        assert_eq!(ids, vec![BOS, 10, 11, 12, SEP, EOS]);
        assert_eq!(ids.iter().filter(|&&i| i == SEP).count(), 1);
    }
}
