use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Hyperparameters of the summarizer, its training loop and its decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct FasumConfig {
    pub layers: usize,
    pub heads: usize,
    pub model_dim: usize,
    pub ff_dim: usize,
    pub vocab_size: usize,
    pub gat_layers: usize,
    pub gat_heads: usize,
    pub gat_hidden: usize,
    pub bilstm_hidden: usize,
    pub dropout_gat: f64,
    pub dropout: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub max_article_len: usize,
    pub max_summary_len: usize,
    pub min_summary_len: usize,
    pub beam_width: usize,
    pub lowercase: bool,
    pub seed: u64,
    pub epochs: usize,
    /// Run validation every this many epochs; 0 disables it.
    pub validate_every: usize,
    /// Fraction of steps spent in linear warmup. When positive the rate
    /// decays linearly to zero afterwards; at 0 it stays constant.
    pub warmup_fraction: f64,
    /// Adds the graph cross-attention sublayer to every decoder block.
    pub use_kg: bool,
    pub trigram_block: bool,
}

impl Default for FasumConfig {
    fn default() -> Self {
        Self::desk()
    }
}

pub const PRESETS: [&str; 3] = ["desk", "paper-cnndm", "paper-xsum"];

impl FasumConfig {
    /// Small CPU-trainable configuration.
    pub fn desk() -> Self {
        Self {
            layers: 2,
            heads: 4,
            model_dim: 128,
            ff_dim: 256,
            vocab_size: 400,
            gat_layers: 2,
            gat_heads: 8,
            gat_hidden: 50,
            bilstm_hidden: 64,
            dropout_gat: 0.6,
            dropout: 0.1,
            lr: 2e-4,
            batch_size: 4,
            max_article_len: 128,
            max_summary_len: 48,
            min_summary_len: 4,
            beam_width: 4,
            lowercase: false,
            seed: 0,
            epochs: 300,
            validate_every: 25,
            warmup_fraction: 0.0,
            use_kg: true,
            trigram_block: false,
        }
    }

    /// Full-size settings for CNN/DailyMail.
    pub fn paper_cnndm() -> Self {
        Self {
            layers: 10,
            heads: 10,
            model_dim: 720,
            ff_dim: 2880,
            vocab_size: 32000,
            lr: 2e-4,
            batch_size: 48,
            max_article_len: 1024,
            max_summary_len: 142,
            min_summary_len: 56,
            beam_width: 4,
            epochs: 10,
            validate_every: 1,
            ..Self::desk()
        }
    }

    /// Full-size settings for XSum.
    pub fn paper_xsum() -> Self {
        Self {
            max_summary_len: 62,
            min_summary_len: 11,
            beam_width: 6,
            ..Self::paper_cnndm()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "paper-cnndm" => Ok(Self::paper_cnndm()),
            "paper-xsum" => Ok(Self::paper_xsum()),
            _ => Err(Error::ConfigInvalid(format!(
                "unknown preset `{name}` (expected one of {})",
                PRESETS.join(", ")
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("layers", self.layers),
            ("heads", self.heads),
            ("model_dim", self.model_dim),
            ("ff_dim", self.ff_dim),
            ("vocab_size", self.vocab_size),
            ("gat_layers", self.gat_layers),
            ("gat_heads", self.gat_heads),
            ("gat_hidden", self.gat_hidden),
            ("bilstm_hidden", self.bilstm_hidden),
            ("batch_size", self.batch_size),
            ("max_article_len", self.max_article_len),
            ("max_summary_len", self.max_summary_len),
            ("min_summary_len", self.min_summary_len),
            ("beam_width", self.beam_width),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::ConfigInvalid(format!("{name} must be positive")));
        }
        if !self.model_dim.is_multiple_of(self.heads) {
            return Err(Error::ConfigInvalid(format!(
                "model_dim {} is not divisible by heads {}",
                self.model_dim, self.heads
            )));
        }
        if self.min_summary_len >= self.max_summary_len {
            return Err(Error::ConfigInvalid(format!(
                "min_summary_len {} must be below max_summary_len {}",
                self.min_summary_len, self.max_summary_len
            )));
        }
        for (name, p) in [("dropout", self.dropout), ("dropout_gat", self.dropout_gat)] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::ConfigInvalid(format!("{name} must lie in [0, 1)")));
            }
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::ConfigInvalid("lr must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.warmup_fraction) {
            return Err(Error::ConfigInvalid("warmup_fraction must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Applies one `key = value` override. Unknown keys are rejected.
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
            "vocab_size" => self.vocab_size = parse(key, value)?,
            "gat_layers" => self.gat_layers = parse(key, value)?,
            "gat_heads" => self.gat_heads = parse(key, value)?,
            "gat_hidden" => self.gat_hidden = parse(key, value)?,
            "bilstm_hidden" => self.bilstm_hidden = parse(key, value)?,
            "dropout_gat" => self.dropout_gat = parse(key, value)?,
            "dropout" => self.dropout = parse(key, value)?,
            "lr" => self.lr = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "max_article_len" => self.max_article_len = parse(key, value)?,
            "max_summary_len" => self.max_summary_len = parse(key, value)?,
            "min_summary_len" => self.min_summary_len = parse(key, value)?,
            "beam_width" => self.beam_width = parse(key, value)?,
            "lowercase" => self.lowercase = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "validate_every" => self.validate_every = parse(key, value)?,
            "warmup_fraction" => self.warmup_fraction = parse(key, value)?,
            "use_kg" => self.use_kg = parse(key, value)?,
            "trigram_block" => self.trigram_block = parse(key, value)?,
            _ => return Err(Error::ConfigInvalid(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// `key = value` lines that [`FasumConfig::from_text`] reads back.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let fields: [(&str, String); 24] = [
            ("layers", self.layers.to_string()),
            ("heads", self.heads.to_string()),
            ("model_dim", self.model_dim.to_string()),
            ("ff_dim", self.ff_dim.to_string()),
            ("vocab_size", self.vocab_size.to_string()),
            ("gat_layers", self.gat_layers.to_string()),
            ("gat_heads", self.gat_heads.to_string()),
            ("gat_hidden", self.gat_hidden.to_string()),
            ("bilstm_hidden", self.bilstm_hidden.to_string()),
            ("dropout_gat", self.dropout_gat.to_string()),
            ("dropout", self.dropout.to_string()),
            ("lr", self.lr.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("max_article_len", self.max_article_len.to_string()),
            ("max_summary_len", self.max_summary_len.to_string()),
            ("min_summary_len", self.min_summary_len.to_string()),
            ("beam_width", self.beam_width.to_string()),
            ("lowercase", self.lowercase.to_string()),
            ("seed", self.seed.to_string()),
            ("epochs", self.epochs.to_string()),
            ("validate_every", self.validate_every.to_string()),
            ("warmup_fraction", self.warmup_fraction.to_string()),
            ("use_kg", self.use_kg.to_string()),
            ("trigram_block", self.trigram_block.to_string()),
        ];
        for (k, v) in fields {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Parses `key = value` lines over the desk defaults; `#` starts a
    /// comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::desk();
        for (key, value) in parse_pairs(text)? {
            cfg.set(&key, &value)?;
        }
        Ok(cfg)
    }
}

/// Splits `key = value` lines, dropping blanks and `#` comments.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::ConfigInvalid(format!("line {}: expected `key = value`", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::ConfigInvalid(format!("line {}: empty key", i + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}
