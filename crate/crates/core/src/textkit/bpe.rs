use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const PAD: u32 = 0;
pub const BOS: u32 = 1;
pub const EOS: u32 = 2;
pub const SEP: u32 = 3;
pub const UNK: u32 = 4;
pub const SPECIAL_COUNT: usize = 5;

const SPECIAL_PIECES: [&str; SPECIAL_COUNT] = ["<pad>", "<s>", "</s>", "<sep>", "<unk>"];
const HEADER: &str = "BPEv1";

/// Byte-pair-encoding vocabulary: five special pieces followed by the
/// training alphabet and one piece per productive merge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubwordVocab {
    pieces: Vec<String>,
    merges: Vec<(String, String)>,
    index: HashMap<String, u32>,
    max_piece_chars: usize,
}

/// Pre-tokenization shared by training and encoding. A chunk is an optional
/// single leading space followed by either an alphanumeric run or one other
/// non-whitespace character; any remaining whitespace character is a chunk
/// of its own. Merges never cross chunk boundaries.
fn chunks(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut i = 0;
    while i < chars.len() {
        let start = i;
        let c = chars[i].1;
        let leading_space = c == ' ' && chars.get(i + 1).is_some_and(|&(_, n)| !n.is_whitespace());
        if c.is_whitespace() && !leading_space {
            i += 1;
        } else {
            if leading_space {
                i += 1;
            }
            if chars[i].1.is_alphanumeric() {
                while i < chars.len() && chars[i].1.is_alphanumeric() {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        out.push(&text[byte_at(start)..byte_at(i)]);
    }
    out
}

/// Trains a BPE vocabulary over chunk frequencies.
///
/// The most frequent adjacent pair is merged at each step; ties go to the
/// lexicographically smallest pair. Training stops at `target_size` pieces
/// or when no pair remains.
pub fn train_bpe<S: AsRef<str>>(corpus: &[S], target_size: usize) -> Result<SubwordVocab> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for text in corpus {
        for chunk in chunks(text.as_ref()) {
            *counts.entry(chunk).or_default() += 1;
        }
    }
    if counts.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let alphabet: BTreeSet<char> = counts.keys().flat_map(|w| w.chars()).collect();
    if target_size < alphabet.len() + SPECIAL_COUNT {
        return Err(Error::InvalidArgument(format!(
            "target size {target_size} is below alphabet size {} plus {SPECIAL_COUNT} specials",
            alphabet.len()
        )));
    }

    let mut pieces: Vec<String> = SPECIAL_PIECES.iter().map(|s| s.to_string()).collect();
    pieces.extend(alphabet.iter().map(|c| c.to_string()));
    let mut known: BTreeSet<String> = pieces.iter().cloned().collect();
    let mut words: Vec<(Vec<String>, usize)> = counts
        .iter()
        .map(|(w, &n)| (w.chars().map(String::from).collect(), n))
        .collect();
    let mut merges = Vec::new();

    while pieces.len() < target_size {
        let mut pair_counts: BTreeMap<(&str, &str), usize> = BTreeMap::new();
        for (symbols, n) in &words {
            for pair in symbols.windows(2) {
                *pair_counts.entry((&pair[0], &pair[1])).or_default() += n;
            }
        }
        // BTreeMap iterates pairs in lexicographic order, so keeping the
        // first maximum breaks ties toward the smallest pair.
        let Some(((left, right), _)) = pair_counts
            .iter()
            .fold(
                None,
                |best: Option<(&(&str, &str), usize)>, (pair, &n)| match best {
                    Some((_, m)) if m >= n => best,
                    _ => Some((pair, n)),
                },
            )
            .map(|(p, n)| ((p.0.to_string(), p.1.to_string()), n))
        else {
            break;
        };
        let merged = format!("{left}{right}");
        for (symbols, _) in &mut words {
            let mut i = 0;
            while i + 1 < symbols.len() {
                if symbols[i] == left && symbols[i + 1] == right {
                    symbols[i] = merged.clone();
                    symbols.remove(i + 1);
                }
                i += 1;
            }
        }
        if known.insert(merged.clone()) {
            pieces.push(merged);
        }
        merges.push((left, right));
    }
    SubwordVocab::from_parts(pieces, merges)
}

impl SubwordVocab {
    fn from_parts(pieces: Vec<String>, merges: Vec<(String, String)>) -> Result<Self> {
        if pieces.len() < SPECIAL_COUNT
            || pieces[..SPECIAL_COUNT]
                .iter()
                .zip(SPECIAL_PIECES)
                .any(|(a, b)| a != b)
        {
            return Err(Error::VocabFormat("special pieces missing".into()));
        }
        let mut index = HashMap::with_capacity(pieces.len());
        for (i, p) in pieces.iter().enumerate() {
            if index.insert(p.clone(), i as u32).is_some() {
                return Err(Error::VocabFormat(format!("duplicate piece {p:?}")));
            }
        }
        for (l, r) in &merges {
            if !index.contains_key(&format!("{l}{r}")) {
                return Err(Error::VocabFormat(format!(
                    "merge result {l}{r:?} is not a piece"
                )));
            }
        }
        let max_piece_chars = pieces[SPECIAL_COUNT..]
            .iter()
            .map(|p| p.chars().count())
            .max()
            .unwrap_or(1);
        Ok(Self {
            pieces,
            merges,
            index,
            max_piece_chars,
        })
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn pieces(&self) -> &[String] {
        &self.pieces
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn piece(&self, id: u32) -> Result<&str> {
        self.pieces
            .get(id as usize)
            .map(String::as_str)
            .ok_or(Error::IdOutOfRange(id, self.pieces.len()))
    }

    pub fn id(&self, piece: &str) -> Option<u32> {
        self.index.get(piece).copied()
    }

    /// Greedy longest-match segmentation of each chunk; characters outside
    /// the alphabet become `UNK`.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        let mut ids = Vec::new();
        for chunk in chunks(text) {
            let bounds: Vec<usize> = chunk
                .char_indices()
                .map(|(b, _)| b)
                .chain(std::iter::once(chunk.len()))
                .collect();
            let n = bounds.len() - 1;
            let mut i = 0;
            while i < n {
                let longest = (1..=self.max_piece_chars.min(n - i)).rev().find_map(|len| {
                    self.index
                        .get(&chunk[bounds[i]..bounds[i + len]])
                        .filter(|&&id| id as usize >= SPECIAL_COUNT)
                        .map(|&id| (id, len))
                });
                match longest {
                    Some((id, len)) => {
                        ids.push(id);
                        i += len;
                    }
                    None => {
                        ids.push(UNK);
                        i += 1;
                    }
                }
            }
        }
        ids
    }

    /// Concatenates piece texts, dropping special ids.
    pub fn decode(&self, ids: &[u32]) -> Result<String> {
        let mut out = String::new();
        for &id in ids {
            let piece = self.piece(id)?;
            if id as usize >= SPECIAL_COUNT {
                out.push_str(piece);
            }
        }
        Ok(out)
    }

    /// Serializes as `BPEv1 <count>`, one escaped piece per line, then
    /// `M <left> <right>` merge lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER} {}\n", self.pieces.len());
        for p in &self.pieces {
            out.push_str(&escape(p));
            out.push('\n');
        }
        for (l, r) in &self.merges {
            let _ = writeln!(out, "M {} {}", escape(l), escape(r));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::VocabFormat("missing header".into()))?;
        let count: usize = header
            .strip_prefix(HEADER)
            .and_then(|rest| rest.trim().parse().ok())
            .ok_or_else(|| Error::VocabFormat(format!("bad header {header:?}")))?;
        let mut pieces = Vec::with_capacity(count);
        for _ in 0..count {
            let line = lines
                .next()
                .ok_or_else(|| Error::VocabFormat("truncated piece list".into()))?;
            pieces.push(unescape(line)?);
        }
        let mut merges = Vec::new();
        for line in lines {
            let mut parts = line.split(' ');
            match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some("M"), Some(l), Some(r), None) => merges.push((unescape(l)?, unescape(r)?)),
                _ if line.is_empty() => {}
                _ => return Err(Error::VocabFormat(format!("bad merge line {line:?}"))),
            }
        }
        Self::from_parts(pieces, merges)
    }
}

fn escape(piece: &str) -> String {
    let mut out = String::with_capacity(piece.len());
    for c in piece.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            ' ' => out.push_str("\\s"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(line: &str) -> Result<String> {
    let mut out = String::with_capacity(line.len());
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        out.push(match chars.next() {
            Some('\\') => '\\',
            Some('s') => ' ',
            Some('n') => '\n',
            Some('r') => '\r',
            Some('t') => '\t',
            other => return Err(Error::VocabFormat(format!("bad escape \\{other:?}"))),
        });
    }
    Ok(out)
}
