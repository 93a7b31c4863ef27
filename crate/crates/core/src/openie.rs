//! Pattern-based extraction of (subject, relation, object) tuples.
//!
//! A sentence is scanned left to right for a finite-verb group: optional
//! auxiliaries, optional negation, an optional main verb and an optional
//! trailing preposition. The subject is the noun-phrase run immediately
//! left of the group and the object the run immediately right of it. A
//! bare copula or auxiliary followed by a complement (`is a winger`) keeps
//! the auxiliary group as the relation. After each hit the scan resumes
//! behind the object.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::textkit::{self, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationTuple {
    #[serde(rename = "s")]
    pub subject: String,
    #[serde(rename = "r")]
    pub relation: String,
    #[serde(rename = "o")]
    pub object: String,
    #[serde(rename = "sent")]
    pub sentence_index: usize,
    #[serde(skip, default = "full_confidence")]
    pub confidence: f64,
    /// Token offset of the subject inside its sentence.
    #[serde(skip)]
    pub subject_start: usize,
}

fn full_confidence() -> f64 {
    1.0
}

impl RelationTuple {
    pub fn new(subject: &str, relation: &str, object: &str) -> Self {
        Self {
            subject: subject.to_string(),
            relation: relation.to_string(),
            object: object.to_string(),
            sentence_index: 0,
            confidence: 1.0,
            subject_start: 0,
        }
    }

    /// Lowercased, whitespace-collapsed (s, r, o) used for equality tests.
    pub fn key(&self) -> (String, String, String) {
        (
            textkit::normalize(&self.subject),
            textkit::normalize(&self.relation),
            textkit::normalize(&self.object),
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TupleSet {
    #[serde(rename = "id")]
    pub doc_id: String,
    pub tuples: Vec<RelationTuple>,
}

impl TupleSet {
    pub fn new(doc_id: impl Into<String>, tuples: Vec<RelationTuple>) -> Self {
        let mut set = Self {
            doc_id: doc_id.into(),
            tuples,
        };
        set.normalize_order();
        set
    }

    pub fn with_id(mut self, doc_id: impl Into<String>) -> Self {
        self.doc_id = doc_id.into();
        self
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Sorts by (sentence, subject offset) and drops normalized duplicates,
    /// keeping the first occurrence.
    fn normalize_order(&mut self) {
        self.tuples.sort_by_key(|t| (t.sentence_index, t.subject_start));
        let mut seen = HashSet::new();
        self.tuples.retain(|t| seen.insert(t.key()));
    }
}

const AUXILIARIES: &[&str] = &[
    "is", "are", "was", "were", "am", "be", "been", "being", "has", "have", "had", "do", "does", "did",
    "will", "would", "shall", "should", "can", "could", "may", "might", "must",
];

const COPULAS: &[&str] = &["is", "are", "was", "were", "am", "be", "been", "being"];

const NEGATIONS: &[&str] = &["not", "never"];

const PREPOSITIONS: &[&str] = &[
    "in", "on", "at", "for", "with", "against", "to", "from", "by", "of", "into", "over", "under", "after",
    "before", "during", "about", "as", "near", "past", "through", "across", "behind", "between", "off",
    "onto", "toward", "towards", "since", "until", "within", "without", "like", "than", "per", "amid",
    "despite",
];

const CONJUNCTIONS: &[&str] = &[
    "and", "or", "but", "so", "because", "while", "when", "although", "though", "if", "that", "which", "who",
    "whom", "whose", "where", "whether", "then", "yet", "nor",
];

const FUNCTION_WORDS: &[&str] = &[
    "the", "a", "an", "this", "these", "those", "his", "her", "its", "their", "our", "my", "your", "some",
    "any", "each", "every", "no", "all", "both", "he", "she", "it", "they", "we", "i", "you", "him", "them",
    "us", "me", "very", "also", "just", "only", "still",
];

/// Common verb forms without an `-ed` ending.
const VERBS: &[&str] = &[
    "say",
    "says",
    "said",
    "win",
    "wins",
    "won",
    "lose",
    "loses",
    "lost",
    "beat",
    "beats",
    "take",
    "takes",
    "took",
    "make",
    "makes",
    "made",
    "get",
    "gets",
    "got",
    "go",
    "goes",
    "went",
    "come",
    "comes",
    "came",
    "become",
    "becomes",
    "became",
    "give",
    "gives",
    "gave",
    "see",
    "sees",
    "saw",
    "tell",
    "tells",
    "told",
    "meet",
    "meets",
    "met",
    "leave",
    "leaves",
    "left",
    "hit",
    "hits",
    "lead",
    "leads",
    "led",
    "run",
    "runs",
    "ran",
    "hold",
    "holds",
    "held",
    "keep",
    "keeps",
    "kept",
    "score",
    "scores",
    "play",
    "plays",
    "visit",
    "visits",
    "find",
    "finds",
    "found",
    "think",
    "thinks",
    "thought",
    "know",
    "knows",
    "knew",
    "bring",
    "brings",
    "brought",
    "buy",
    "buys",
    "bought",
    "build",
    "builds",
    "built",
    "sell",
    "sells",
    "sold",
    "send",
    "sends",
    "sent",
    "spend",
    "spends",
    "spent",
    "write",
    "writes",
    "wrote",
    "drive",
    "drives",
    "drove",
    "fall",
    "falls",
    "fell",
    "feel",
    "feels",
    "felt",
    "hear",
    "hears",
    "heard",
    "pay",
    "pays",
    "paid",
    "rise",
    "rises",
    "rose",
    "speak",
    "speaks",
    "spoke",
    "strike",
    "strikes",
    "struck",
    "teach",
    "teaches",
    "taught",
    "throw",
    "throws",
    "threw",
    "break",
    "breaks",
    "broke",
    "begin",
    "begins",
    "began",
    "choose",
    "chooses",
    "chose",
    "draw",
    "draws",
    "drew",
    "grow",
    "grows",
    "grew",
    "put",
    "puts",
    "read",
    "reads",
    "shoot",
    "shoots",
    "shot",
    "help",
    "helps",
    "need",
    "needs",
    "want",
    "wants",
    "like",
    "likes",
    "own",
    "owns",
    "remain",
    "remains",
    "serve",
    "serves",
    "include",
    "includes",
    "join",
    "joins",
    "sign",
    "signs",
    "face",
    "faces",
    "open",
    "opens",
    "close",
    "closes",
    "reach",
    "reaches",
    "return",
    "returns",
    "move",
    "moves",
    "live",
    "lives",
    "claim",
    "claims",
    "announce",
    "announces",
    "ban",
    "bans",
    "host",
    "hosts",
    "coach",
    "coaches",
    "manage",
    "manages",
    "defeat",
    "defeats",
    "earn",
    "earns",
    "love",
    "loves",
];

const NOT_VERBS_ED: &[&str] = &[
    "red", "bed", "shed", "sled", "hundred", "speed", "seed", "breed", "creed", "greed", "need", "feed",
    "weed", "deed", "indeed", "embed", "wed",
];

fn lower(tok: &Token) -> String {
    tok.lower()
}

fn is_negated_aux(word: &str) -> bool {
    word.ends_with("n't") || word.ends_with("n\u{2019}t")
}

fn is_aux(tok: &Token) -> bool {
    if !tok.is_word() {
        return false;
    }
    let w = lower(tok);
    AUXILIARIES.contains(&w.as_str()) || is_negated_aux(&w)
}

fn is_negation(tok: &Token) -> bool {
    tok.is_word() && NEGATIONS.contains(&lower(tok).as_str())
}

fn is_preposition(tok: &Token) -> bool {
    tok.is_word() && PREPOSITIONS.contains(&lower(tok).as_str())
}

fn is_closed_class(word: &str) -> bool {
    AUXILIARIES.contains(&word)
        || NEGATIONS.contains(&word)
        || PREPOSITIONS.contains(&word)
        || CONJUNCTIONS.contains(&word)
        || FUNCTION_WORDS.contains(&word)
        || textkit::is_numeral(word)
}

/// A lowercase word that reads as an inflected main verb.
fn is_main_verb(tok: &Token) -> bool {
    if !tok.is_word() || tok.is_capitalized() {
        return false;
    }
    let w = lower(tok);
    if VERBS.contains(&w.as_str()) {
        return true;
    }
    w.chars().count() > 3
        && (w.ends_with("ed") || w.ends_with("ing"))
        && !NOT_VERBS_ED.contains(&w.as_str())
        && !is_closed_class(&w)
}

/// Lowercase open-class word usable as a bare verb after an auxiliary
/// (`did not score`).
fn is_verb_after_aux(tok: &Token) -> bool {
    tok.is_word() && !tok.is_capitalized() && !is_closed_class(&lower(tok))
}

fn starts_verb_group(tok: &Token) -> bool {
    is_aux(tok) || is_main_verb(tok)
}

fn is_np_token(tok: &Token) -> bool {
    match tok.kind {
        TokenKind::Number => true,
        TokenKind::Punct => false,
        TokenKind::Word => {
            let w = lower(tok);
            let w = w.as_str();
            !(AUXILIARIES.contains(&w)
                || NEGATIONS.contains(&w)
                || PREPOSITIONS.contains(&w)
                || CONJUNCTIONS.contains(&w)
                || is_negated_aux(w))
        }
    }
}

/// Returns the end (exclusive) of the verb group starting at `start`.
fn verb_group_end(tokens: &[Token], start: usize) -> usize {
    let mut i = start;
    if is_aux(&tokens[i]) {
        let mut copula_only = true;
        while i < tokens.len() && (is_aux(&tokens[i]) || is_negation(&tokens[i])) {
            let w = lower(&tokens[i]);
            copula_only &= COPULAS.contains(&w.as_str()) || NEGATIONS.contains(&w.as_str());
            i += 1;
        }
        let takes_verb = |t: &Token| {
            if copula_only {
                is_main_verb(t)
            } else {
                is_main_verb(t) || is_verb_after_aux(t)
            }
        };
        if i < tokens.len() && takes_verb(&tokens[i]) {
            i += 1;
        }
    } else {
        i += 1;
    }
    if i < tokens.len() && is_preposition(&tokens[i]) {
        i += 1;
    }
    i
}

/// Extracts tuples from one tokenized sentence.
pub fn extract_sentence(tokens: &[Token], sentence_index: usize) -> Vec<RelationTuple> {
    let mut out = Vec::new();
    let mut scan = 0;
    let mut i = 0;
    while i < tokens.len() {
        if !starts_verb_group(&tokens[i]) {
            i += 1;
            continue;
        }
        let verb_start = i;
        let verb_end = verb_group_end(tokens, i);
        let mut subject_start = verb_start;
        while subject_start > scan && is_np_token(&tokens[subject_start - 1]) {
            subject_start -= 1;
        }
        let mut object_end = verb_end;
        while object_end < tokens.len()
            && is_np_token(&tokens[object_end])
            && !starts_verb_group(&tokens[object_end])
        {
            object_end += 1;
        }
        if subject_start < verb_start && verb_end < object_end {
            out.push(RelationTuple {
                subject: textkit::join_tokens(&tokens[subject_start..verb_start]),
                relation: textkit::join_tokens(&tokens[verb_start..verb_end]),
                object: textkit::join_tokens(&tokens[verb_end..object_end]),
                sentence_index,
                confidence: 1.0,
                subject_start,
            });
            scan = object_end;
            i = object_end;
        } else {
            i = verb_end;
        }
    }
    out
}

/// Sentence split, tokenize and extract, then dedupe on normalized slots.
pub fn extract_document(text: &str) -> TupleSet {
    let tuples = textkit::split_sentences(text)
        .iter()
        .enumerate()
        .flat_map(|(idx, span)| extract_sentence(&textkit::tokenize(span.slice(text)), idx))
        .collect();
    TupleSet::new(String::new(), tuples)
}
