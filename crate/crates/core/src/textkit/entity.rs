use serde::{Deserialize, Serialize};

use super::{Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityType {
    Name,
    Number,
    Date,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntitySpan {
    pub text: String,
    /// Half-open token index range.
    pub token_span: (usize, usize),
    pub etype: EntityType,
}

const MONTHS: &[&str] = &[
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

const WEEKDAYS: &[&str] = &[
    "monday",
    "tuesday",
    "wednesday",
    "thursday",
    "friday",
    "saturday",
    "sunday",
];

const NUMERALS: &[&str] = &[
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
    "twenty",
    "thirty",
    "forty",
    "fifty",
    "sixty",
    "seventy",
    "eighty",
    "ninety",
    "hundred",
    "thousand",
    "million",
    "billion",
    "dozen",
    "twice",
    "thrice",
];

/// Function words that are capitalized only because they open a sentence.
const STOPWORDS: &[&str] = &[
    "the",
    "a",
    "an",
    "this",
    "that",
    "these",
    "those",
    "he",
    "she",
    "it",
    "they",
    "we",
    "i",
    "you",
    "his",
    "her",
    "its",
    "their",
    "our",
    "my",
    "your",
    "him",
    "them",
    "in",
    "on",
    "at",
    "after",
    "before",
    "but",
    "and",
    "or",
    "if",
    "when",
    "while",
    "as",
    "for",
    "with",
    "by",
    "from",
    "to",
    "of",
    "there",
    "here",
    "then",
    "yet",
    "so",
    "not",
    "no",
    "what",
    "who",
    "which",
    "where",
    "why",
    "how",
    "however",
    "meanwhile",
    "also",
    "all",
    "some",
    "many",
    "both",
    "each",
    "every",
    "during",
    "since",
    "until",
    "despite",
    "although",
    "now",
    "later",
];

pub(crate) fn is_date_word(lower: &str) -> bool {
    MONTHS.contains(&lower) || WEEKDAYS.contains(&lower)
}

pub(crate) fn is_numeral(lower: &str) -> bool {
    NUMERALS.contains(&lower)
}

pub(crate) fn is_stopword(lower: &str) -> bool {
    STOPWORDS.contains(&lower)
}

fn is_date_token(tok: &Token) -> bool {
    tok.is_word() && is_date_word(&tok.lower())
}

fn is_number_token(tok: &Token) -> bool {
    tok.kind == TokenKind::Number || (tok.is_word() && is_numeral(&tok.lower()))
}

fn is_name_token(tok: &Token) -> bool {
    if !tok.is_word() || !tok.is_capitalized() {
        return false;
    }
    let lower = tok.lower();
    !is_stopword(&lower) && !is_date_word(&lower) && !is_numeral(&lower)
}

/// Joins token texts, inserting a space wherever the source had a gap.
pub(crate) fn join_tokens(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 && tokens[i - 1].span.end < tok.span.start {
            out.push(' ');
        }
        out.push_str(&tok.text);
    }
    out
}

/// Tags NAME, NUMBER and DATE spans with deterministic longest-match rules.
///
/// At each position a DATE (optional number, month or weekday, optional
/// number) is tried first, then a NAME (maximal run of capitalized words
/// that are not function words, dates or numerals), then a single NUMBER
/// (digit token or spelled numeral).
pub fn tag_entities(tokens: &[Token]) -> Vec<EntitySpan> {
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let (end, etype) = if let Some(end) = match_date(tokens, i) {
            (end, EntityType::Date)
        } else if is_name_token(&tokens[i]) {
            let mut end = i + 1;
            while end < tokens.len() && is_name_token(&tokens[end]) {
                end += 1;
            }
            (end, EntityType::Name)
        } else if is_number_token(&tokens[i]) {
            (i + 1, EntityType::Number)
        } else {
            i += 1;
            continue;
        };
        spans.push(EntitySpan {
            text: join_tokens(&tokens[i..end]),
            token_span: (i, end),
            etype,
        });
        i = end;
    }
    spans
}

fn match_date(tokens: &[Token], i: usize) -> Option<usize> {
    let numeric = |j: usize| tokens.get(j).is_some_and(|t| t.kind == TokenKind::Number);
    let (anchor, lead) = if is_date_token(&tokens[i]) {
        (i, false)
    } else if numeric(i) && tokens.get(i + 1).is_some_and(is_date_token) {
        (i + 1, true)
    } else {
        return None;
    };
    let end = if !lead && numeric(anchor + 1) {
        anchor + 2
    } else {
        anchor + 1
    };
    Some(end)
}
