//! Fact-aware summarizer: a transformer encoder–decoder whose decoder also
//! attends over embeddings of a knowledge graph extracted from the article.

mod beam;
mod config;
mod model;
mod train;

pub use beam::{beam_search, greedy_decode, Context, DecodeOptions, GenerationResult};
pub use config::{parse_pairs, FasumConfig, PRESETS};
pub use model::{Example, FasumModel, GraphInput};
pub use train::{batch_gradients, scheduled_lr, train, EpochInfo, TrainOutcome, ValidationHook};

pub(crate) use model::{embed_tokens, encoder_stack, init_encoder};
pub(crate) use train::sum_parts;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kgraph::{build_graph, KnowledgeGraph};
use crate::metrics::{rouge_f1, RougeVariant};
use crate::neuro::checkpoint;
use crate::openie::extract_document;
use crate::textkit::SubwordVocab;

const VOCAB_MARKER: &str = "[vocab]\n";

/// A model bundled with the vocabulary it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct Summarizer {
    pub vocab: SubwordVocab,
    pub model: FasumModel,
}

impl Summarizer {
    /// Fresh model; `vocab_size` follows the vocabulary.
    pub fn new(vocab: SubwordVocab, mut config: FasumConfig) -> Result<Self> {
        config.vocab_size = vocab.len();
        let model = FasumModel::new(config)?;
        Ok(Self { vocab, model })
    }

    pub fn config(&self) -> &FasumConfig {
        &self.model.config
    }

    fn case(&self, text: &str) -> String {
        if self.config().lowercase {
            text.to_lowercase()
        } else {
            text.to_string()
        }
    }

    pub fn encode_text(&self, text: &str) -> Vec<u32> {
        self.vocab.encode(&self.case(text))
    }

    pub fn detokenize(&self, ids: &[u32]) -> String {
        self.vocab.decode(ids).unwrap_or_default().trim().to_string()
    }

    /// Graph input for a knowledge graph, empty when the model has no graph
    /// pathway.
    pub fn graph_input(&self, graph: &KnowledgeGraph) -> GraphInput {
        if self.config().use_kg {
            GraphInput::from_graph(graph, &self.vocab, self.config().lowercase)
        } else {
            GraphInput::empty()
        }
    }

    /// Extracts the article's graph and encodes both texts.
    pub fn prepare(&self, article: &str, summary: &str) -> Example {
        let graph = if self.config().use_kg {
            build_graph(&extract_document(article))
        } else {
            KnowledgeGraph::default()
        };
        self.prepare_with_graph(article, summary, &graph)
    }

    pub fn prepare_with_graph(&self, article: &str, summary: &str, graph: &KnowledgeGraph) -> Example {
        let mut source = self.encode_text(article);
        source.truncate(self.config().max_article_len);
        Example {
            source,
            target: self.encode_text(summary),
            graph: self.graph_input(graph),
        }
    }

    pub fn context(&self, ex: &Example) -> Result<Context> {
        Context::new(&self.model, &ex.source, &ex.graph)
    }

    pub fn decode_options(&self) -> DecodeOptions {
        DecodeOptions::from_config(self.config())
    }

    /// Beam search over the example's source and graph.
    pub fn generate(&self, ex: &Example, opts: &DecodeOptions) -> Result<GenerationResult> {
        let ctx = self.context(ex)?;
        beam_search(&self.model, &ctx, opts, &|ids| self.detokenize(ids))
    }

    pub fn summarize(&self, article: &str) -> Result<GenerationResult> {
        let ex = self.prepare(article, "");
        self.generate(&ex, &self.decode_options())
    }

    /// Mean ROUGE-L F1 of beam outputs against the examples' targets.
    pub fn rouge_l(&self, data: &[Example]) -> Result<f64> {
        if data.is_empty() {
            return Ok(0.0);
        }
        let opts = self.decode_options();
        let scores: Vec<Result<f64>> = data
            .par_iter()
            .map(|ex| {
                let out = self.generate(ex, &opts)?;
                Ok(rouge_f1(
                    &out.text,
                    &self.detokenize(&ex.target),
                    RougeVariant::RL,
                ))
            })
            .collect();
        let mut total = 0.0;
        for s in scores {
            total += s?;
        }
        Ok(total / data.len() as f64)
    }

    /// Teacher-forced token accuracy over `data`.
    pub fn token_accuracy(&self, data: &[Example]) -> Result<f64> {
        let parts: Vec<Result<(usize, usize)>> =
            data.par_iter().map(|ex| self.model.token_accuracy(ex)).collect();
        let (mut hit, mut all) = (0, 0);
        for p in parts {
            let (h, n) = p?;
            hit += h;
            all += n;
        }
        Ok(if all == 0 { 0.0 } else { hit as f64 / all as f64 })
    }

    /// Trains on `data`, picking the checkpoint with the best ROUGE-L on
    /// `valid` (when given). The returned outcome's `best` parameters are
    /// installed in the model.
    pub fn fit(&mut self, data: &[Example], valid: &[Example]) -> Result<TrainOutcome> {
        let vocab = self.vocab.clone();
        let mut hook = |info: &EpochInfo| {
            let s = Summarizer {
                vocab: vocab.clone(),
                model: info.model.clone(),
            };
            s.rouge_l(valid)
        };
        let validate: Option<ValidationHook> = if valid.is_empty() { None } else { Some(&mut hook) };
        let outcome = train(&mut self.model, data, validate)?;
        self.model.params = outcome.best.clone();
        Ok(outcome)
    }

    /// Checkpoint bytes: parameters plus the echoed config and vocabulary.
    pub fn to_checkpoint(&self) -> Vec<u8> {
        let header = format!(
            "{}{VOCAB_MARKER}{}",
            self.config().to_text(),
            self.vocab.to_text()
        );
        checkpoint::encode(&self.model.params, &header)
    }

    pub fn from_checkpoint(bytes: &[u8]) -> Result<Self> {
        let (header, _) = checkpoint::decode(bytes)?;
        let (cfg, vocab) = header
            .split_once(VOCAB_MARKER)
            .ok_or_else(|| Error::Checkpoint("missing vocabulary section".into()))?;
        let config = FasumConfig::from_text(cfg)?;
        let vocab = SubwordVocab::from_text(vocab)?;
        // Loading into a freshly built model checks every name and shape.
        let mut template = FasumModel::new(config.clone())?.params;
        checkpoint::load_into(bytes, &mut template)?;
        Ok(Self {
            vocab,
            model: FasumModel::with_params(config, template),
        })
    }
}
