//! Tokenization, sentence splitting, subword vocabularies and rule-based
//! entity tagging. Everything here preserves case; matching code lowercases
//! on its own side.

mod bpe;
pub(crate) mod entity;
mod sentence;
mod token;

pub use bpe::{train_bpe, SubwordVocab, BOS, EOS, PAD, SEP, SPECIAL_COUNT, UNK};
pub use entity::{tag_entities, EntitySpan, EntityType};
pub use sentence::split_sentences;
pub use token::{tokenize, Span, Token, TokenKind};

/// Lowercases and collapses internal whitespace runs to a single space.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

pub(crate) use entity::{is_numeral, join_tokens};
