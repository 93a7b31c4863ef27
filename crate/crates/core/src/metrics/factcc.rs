use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DocumentPair;
use crate::error::{Error, Result};
use crate::fasum::{embed_tokens, encoder_stack, init_encoder, sum_parts};
use crate::fc::{forge, Paraphraser, Transform};
use crate::neuro::layers::init_linear;
use crate::neuro::{
    adam_step, checkpoint, linear, precision, with_precision, OptimizerState, ParamGrads, ParameterStore,
    Tape, Var,
};
use crate::textkit::{split_sentences, SubwordVocab, BOS, SEP};

/// Probability that a claim is supported by an article.
pub trait ClaimClassifier: Sync {
    fn claim_probability(&self, article: &str, claim: &str) -> Result<f64>;
}

/// Returns the same probability for every claim.
#[derive(Debug, Clone, Copy)]
pub struct ConstantClassifier(pub f64);

impl ClaimClassifier for ConstantClassifier {
    fn claim_probability(&self, _: &str, _: &str) -> Result<f64> {
        Ok(self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimScore {
    pub claim: String,
    pub score: f64,
}

/// Mean claim probability over the summary's sentences, with the
/// per-sentence scores.
pub fn factual_score(
    article: &str,
    summary: &str,
    classifier: &dyn ClaimClassifier,
) -> Result<(f64, Vec<ClaimScore>)> {
    let claims: Vec<&str> = split_sentences(summary)
        .iter()
        .map(|s| s.slice(summary))
        .filter(|s| !s.trim().is_empty())
        .collect();
    if claims.is_empty() {
        return Err(Error::EmptySummary);
    }
    let mut scores = Vec::with_capacity(claims.len());
    for claim in claims {
        let score = classifier.claim_probability(article, claim)?;
        scores.push(ClaimScore {
            claim: claim.to_string(),
            score,
        });
    }
    let mean = scores.iter().map(|c| c.score).sum::<f64>() / scores.len() as f64;
    Ok((mean, scores))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimExample {
    pub article: String,
    pub claim: String,
    pub label: bool,
}

/// Labeled claims: every reference summary sentence (through the
/// paraphraser) is a positive, every forge transform that applies to a
/// sentence yields a negative. The larger class is subsampled to the size
/// of the smaller one; surviving examples keep their original order.
pub fn make_factcc_data(
    pairs: &[DocumentPair],
    paraphraser: &dyn Paraphraser,
    seed: u64,
) -> Vec<ClaimExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all = Vec::new();
    for pair in pairs {
        let Some(summary) = pair.summary.as_deref() else {
            continue;
        };
        for span in split_sentences(summary) {
            let sentence = span.slice(summary);
            all.push(ClaimExample {
                article: pair.article.clone(),
                claim: paraphraser.paraphrase(sentence),
                label: true,
            });
            for t in Transform::CORRUPTING {
                if let Some(s) = forge(t, sentence, &pair.article, paraphraser, &mut rng) {
                    all.push(ClaimExample {
                        article: pair.article.clone(),
                        claim: s.corrupted_summary,
                        label: false,
                    });
                }
            }
        }
    }
    let pos: Vec<usize> = (0..all.len()).filter(|&i| all[i].label).collect();
    let neg: Vec<usize> = (0..all.len()).filter(|&i| !all[i].label).collect();
    let (small, large) = if pos.len() <= neg.len() {
        (pos, neg)
    } else {
        (neg, pos)
    };
    let mut keep: Vec<usize> = index::sample(&mut rng, large.len(), small.len())
        .into_iter()
        .map(|i| large[i])
        .chain(small)
        .collect();
    keep.sort_unstable();
    keep.into_iter().map(|i| all[i].clone()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactccConfig {
    pub layers: usize,
    pub heads: usize,
    pub model_dim: usize,
    pub ff_dim: usize,
    pub dropout: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub max_len: usize,
    /// Fraction of examples held out for accuracy and AUC.
    pub holdout: f64,
    pub seed: u64,
}

impl Default for FactccConfig {
    fn default() -> Self {
        Self {
            layers: 2,
            heads: 4,
            model_dim: 64,
            ff_dim: 128,
            dropout: 0.1,
            lr: 1e-3,
            epochs: 15,
            batch_size: 8,
            max_len: 96,
            holdout: 0.2,
            seed: 0,
        }
    }
}

impl FactccConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.heads == 0 || !self.model_dim.is_multiple_of(self.heads) {
            return Err(Error::ConfigInvalid("classifier dims".into()));
        }
        if self.batch_size == 0 || self.max_len < 4 || !(0.0..1.0).contains(&self.holdout) {
            return Err(Error::ConfigInvalid("classifier training settings".into()));
        }
        Ok(())
    }

    fn to_text(&self) -> String {
        format!(
            "layers = {}\nheads = {}\nmodel_dim = {}\nff_dim = {}\ndropout = {}\nlr = {}\n\
             epochs = {}\nbatch_size = {}\nmax_len = {}\nholdout = {}\nseed = {}\n",
            self.layers,
            self.heads,
            self.model_dim,
            self.ff_dim,
            self.dropout,
            self.lr,
            self.epochs,
            self.batch_size,
            self.max_len,
            self.holdout,
            self.seed
        )
    }

    /// Applies one `key = value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::ConfigInvalid(format!("bad value `{value}` for `{key}`")))
        }
        match key {
            "layers" => self.layers = parse(key, value)?,
            "heads" => self.heads = parse(key, value)?,
            "model_dim" => self.model_dim = parse(key, value)?,
            "ff_dim" => self.ff_dim = parse(key, value)?,
            "dropout" => self.dropout = parse(key, value)?,
            "lr" => self.lr = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "max_len" => self.max_len = parse(key, value)?,
            "holdout" => self.holdout = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            _ => return Err(Error::ConfigInvalid(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (k, v) in crate::fasum::parse_pairs(text)? {
            c.set(&k, &v)?;
        }
        Ok(c)
    }
}

/// Transformer encoder over `BOS ⊕ claim ⊕ SEP ⊕ article` with a sigmoid
/// head on the BOS position.
#[derive(Debug, Clone, PartialEq)]
pub struct FactccClassifier {
    pub vocab: SubwordVocab,
    pub config: FactccConfig,
    pub params: ParameterStore,
}

const VOCAB_MARKER: &str = "[vocab]\n";

impl FactccClassifier {
    pub fn new(vocab: SubwordVocab, config: FactccConfig) -> Result<Self> {
        config.validate()?;
        let mut params = ParameterStore::new(config.seed);
        params.add_xavier("tok_emb", vocab.len(), config.model_dim);
        params.add_xavier("pos_emb", config.max_len, config.model_dim);
        init_encoder(&mut params, "enc", config.layers, config.model_dim, config.ff_dim);
        init_linear(&mut params, "head", config.model_dim, 1);
        Ok(Self {
            vocab,
            config,
            params,
        })
    }

    pub fn input_ids(&self, article: &str, claim: &str) -> Vec<u32> {
        let room = self.config.max_len - 2;
        let c = self.vocab.encode(claim);
        let a = self.vocab.encode(article);
        let c = &c[..c.len().min(room)];
        let a = &a[..a.len().min(room - c.len())];
        let mut ids = Vec::with_capacity(c.len() + a.len() + 2);
        ids.push(BOS);
        ids.extend_from_slice(c);
        ids.push(SEP);
        ids.extend_from_slice(a);
        ids
    }

    fn logit(&self, tape: &mut Tape, ids: &[u32]) -> Result<Var> {
        let c = &self.config;
        let x = embed_tokens(tape, &self.params, ids, c.dropout)?;
        let h = encoder_stack(tape, &self.params, "enc", x, c.layers, c.heads, c.dropout)?;
        let first = tape.slice_rows(h, 0, 1);
        Ok(linear(tape, &self.params, "head", first))
    }

    fn loss_and_grads(&self, ex: &ClaimExample, seed: u64) -> Result<(f64, ParamGrads)> {
        let mut tape = Tape::training(seed);
        let z = self.logit(&mut tape, &self.input_ids(&ex.article, &ex.claim))?;
        let loss = tape.bce_with_logits(z, &[if ex.label { 1.0 } else { 0.0 }]);
        let grads = tape.backward(loss);
        Ok((tape.value(loss).item(), tape.param_grads(&grads)))
    }

    /// Held-out style evaluation: accuracy at 0.5 and ROC AUC.
    pub fn evaluate(&self, data: &[ClaimExample]) -> Result<(f64, f64)> {
        let scores: Vec<f64> = data
            .par_iter()
            .map(|e| self.claim_probability(&e.article, &e.claim))
            .collect::<Result<Vec<_>>>()?;
        let labels: Vec<bool> = data.iter().map(|e| e.label).collect();
        let correct = scores
            .iter()
            .zip(&labels)
            .filter(|(s, l)| (**s >= 0.5) == **l)
            .count();
        let acc = if data.is_empty() {
            0.0
        } else {
            correct as f64 / data.len() as f64
        };
        Ok((acc, roc_auc(&scores, &labels)))
    }

    pub fn to_checkpoint(&self) -> Vec<u8> {
        let header = format!("{}{VOCAB_MARKER}{}", self.config.to_text(), self.vocab.to_text());
        checkpoint::encode(&self.params, &header)
    }

    pub fn from_checkpoint(bytes: &[u8]) -> Result<Self> {
        let (header, _) = checkpoint::decode(bytes)?;
        let (cfg, vocab) = header
            .split_once(VOCAB_MARKER)
            .ok_or_else(|| Error::Checkpoint("missing vocabulary section".into()))?;
        let mut model = Self::new(SubwordVocab::from_text(vocab)?, FactccConfig::from_text(cfg)?)?;
        checkpoint::load_into(bytes, &mut model.params)?;
        Ok(model)
    }
}

impl ClaimClassifier for FactccClassifier {
    fn claim_probability(&self, article: &str, claim: &str) -> Result<f64> {
        let mut tape = Tape::new();
        let z = self.logit(&mut tape, &self.input_ids(article, claim))?;
        let z = tape.value(z).item();
        Ok(1.0 / (1.0 + (-z).exp()))
    }
}

/// Probability that a random positive outranks a random negative; ties
/// count one half. 0.5 when a class is missing.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let pos: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(&s, _)| s)
        .collect();
    let neg: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &l)| !l)
        .map(|(&s, _)| s)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return 0.5;
    }
    let mut wins = 0.0;
    for p in &pos {
        for n in &neg {
            wins += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactccReport {
    pub train_examples: usize,
    pub heldout_examples: usize,
    pub untrained_auc: f64,
    pub accuracy: f64,
    pub auc: f64,
    pub loss_curve: Vec<f64>,
}

/// Seeded split of `data` into (train, held-out).
pub fn split_holdout(
    data: &[ClaimExample],
    fraction: f64,
    seed: u64,
) -> (Vec<ClaimExample>, Vec<ClaimExample>) {
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
    let held = ((data.len() as f64) * fraction).round() as usize;
    let (h, t) = idx.split_at(held);
    let pick = |ix: &[usize]| {
        let mut ix = ix.to_vec();
        ix.sort_unstable();
        ix.into_iter().map(|i| data[i].clone()).collect::<Vec<_>>()
    };
    (pick(t), pick(h))
}

/// Trains the claim classifier with binary cross-entropy and reports
/// held-out accuracy and AUC.
pub fn train_factcc(
    data: &[ClaimExample],
    vocab: &SubwordVocab,
    config: &FactccConfig,
) -> Result<(FactccClassifier, FactccReport)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.iter().all(|e| e.label) || data.iter().all(|e| !e.label) {
        return Err(Error::SingleClassDataset);
    }
    let mut model = FactccClassifier::new(vocab.clone(), config.clone())?;
    let (train, held) = split_holdout(data, config.holdout, config.seed);
    let eval_set = if held.is_empty() { &train } else { &held };
    let (_, untrained_auc) = model.evaluate(eval_set)?;
    let mut opt = OptimizerState::adam(config.lr);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut curve = Vec::with_capacity(config.epochs);
    let prec = precision();
    let mut step = 0u64;
    for epoch in 0..config.epochs {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(
            config.seed.wrapping_add(epoch as u64),
        ));
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let base = config.seed.wrapping_mul(31).wrapping_add(step * 7919);
            let parts: Vec<_> = chunk
                .par_iter()
                .enumerate()
                .map(|(k, &i)| with_precision(prec, || model.loss_and_grads(&train[i], base + k as u64)))
                .collect();
            let (loss, grads) = sum_parts(parts, chunk.len())?;
            total += loss * chunk.len() as f64;
            model.params.zero_grads();
            for (name, g) in &grads {
                model.params.accumulate_grad(name, g);
            }
            adam_step(&mut model.params, &mut opt)?;
            step += 1;
        }
        curve.push(total / train.len().max(1) as f64);
    }
    let (accuracy, auc) = model.evaluate(eval_set)?;
    let report = FactccReport {
        train_examples: train.len(),
        heldout_examples: held.len(),
        untrained_auc,
        accuracy,
        auc,
        loss_curve: curve,
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fc::IdentityParaphraser;

    #[test]
    fn mean_of_sentence_scores() {
        struct ByLength;
        impl ClaimClassifier for ByLength {
            fn claim_probability(&self, _: &str, claim: &str) -> Result<f64> {
                Ok(if claim.contains("won") { 0.8 } else { 0.6 })
            }
        }
        let (s, parts) = factual_score("a", "Bale won. Kane lost.", &ByLength).unwrap();
        assert!((s - 0.7).abs() < 1e-15);
        assert_eq!(parts.len(), 2);
        let (one, _) = factual_score("a", "Bale won.", &ByLength).unwrap();
        assert_eq!(one, 0.8);
        assert_eq!(
            factual_score("x", "Anything. At all.", &ConstantClassifier(1.0))
                .unwrap()
                .0,
            1.0
        );
        assert!(matches!(
            factual_score("a", "  ", &ByLength),
            Err(Error::EmptySummary)
        ));
    }

    #[test]
    fn auc_counts_ties_as_half() {
        assert_eq!(roc_auc(&[0.9, 0.1], &[true, false]), 1.0);
        assert_eq!(roc_auc(&[0.5, 0.5], &[true, false]), 0.5);
        assert_eq!(roc_auc(&[0.1, 0.9], &[true, false]), 0.0);
    }

    #[test]
    fn claim_data_emission_and_balance() {
        let pair = DocumentPair::new(
            "d",
            "Gareth Bale and Cristiano Ronaldo played. He has scored.",
            "Gareth Bale signed. He has scored.",
        );
        // Sentence one offers an entity swap, sentence two all three
        // transforms: 2 positives, 3 negatives, balanced to 2 + 2.
        let data = make_factcc_data(std::slice::from_ref(&pair), &IdentityParaphraser, 1);
        assert_eq!(data.iter().filter(|e| e.label).count(), 2);
        assert_eq!(data.iter().filter(|e| !e.label).count(), 2);
        assert_eq!(data, make_factcc_data(&[pair], &IdentityParaphraser, 1));
        assert!(make_factcc_data(&[], &IdentityParaphraser, 1).is_empty());
    }

    #[test]
    fn training_rejects_degenerate_data() {
        let v = crate::textkit::train_bpe(&["a b"], 10).unwrap();
        let cfg = FactccConfig::default();
        assert!(matches!(train_factcc(&[], &v, &cfg), Err(Error::EmptyDataset)));
        let one = ClaimExample {
            article: "a".into(),
            claim: "b".into(),
            label: true,
        };
        assert!(matches!(
            train_factcc(&[one], &v, &cfg),
            Err(Error::SingleClassDataset)
        ));
    }
}
