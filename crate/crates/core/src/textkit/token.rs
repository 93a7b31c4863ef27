use serde::{Deserialize, Serialize};

/// Half-open byte range into a source string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn slice<'a>(&self, source: &'a str) -> &'a str {
        &source[self.start..self.end]
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Number,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub span: Span,
    pub kind: TokenKind,
}

impl Token {
    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }

    pub fn is_capitalized(&self) -> bool {
        self.text.chars().next().is_some_and(char::is_uppercase)
    }

    pub fn lower(&self) -> String {
        self.text.to_lowercase()
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits text into WORD, NUMBER and single-character PUNCT tokens.
///
/// Words are alphanumeric runs that may carry internal apostrophes
/// (`didn't`). Numbers are ASCII digit runs with optional internal `,` or
/// `.` followed by another digit (`1,500`, `3.5`). Every other
/// non-whitespace character becomes its own PUNCT token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = if c.is_ascii_digit() {
            i += 1;
            while i < chars.len() {
                let d = chars[i].1;
                if d.is_ascii_digit() {
                    i += 1;
                } else if (d == ',' || d == '.') && chars.get(i + 1).is_some_and(|&(_, n)| n.is_ascii_digit())
                {
                    i += 2;
                } else {
                    break;
                }
            }
            TokenKind::Number
        } else if c.is_alphanumeric() {
            i += 1;
            while i < chars.len() {
                let d = chars[i].1;
                if d.is_alphanumeric() {
                    i += 1;
                } else if is_apostrophe(d) && chars.get(i + 1).is_some_and(|&(_, n)| n.is_alphabetic()) {
                    i += 2;
                } else {
                    break;
                }
            }
            TokenKind::Word
        } else {
            i += 1;
            TokenKind::Punct
        };
        let span = Span::new(byte_at(start), byte_at(i));
        tokens.push(Token {
            text: span.slice(text).to_string(),
            span,
            kind,
        });
    }
    tokens
}
