//! Fact-aware abstractive summarization at toy scale: rule-based relation
//! extraction, knowledge graphs, a graph-attending transformer summarizer,
//! a denoising fact corrector and factual-consistency metrics, all on a
//! small reverse-mode autodiff engine.

pub mod cli;
pub mod data;
pub mod error;
pub mod fasum;
pub mod fc;
pub mod kgraph;
pub mod metrics;
pub mod neuro;
pub mod openie;
pub mod textkit;
pub mod toy;

pub use error::{Error, Result};
