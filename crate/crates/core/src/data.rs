//! JSON Lines datasets of article/summary pairs.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textkit::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentPair {
    pub id: String,
    pub article: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
}

impl DocumentPair {
    pub fn new(id: &str, article: &str, summary: &str) -> Self {
        Self {
            id: id.to_string(),
            article: article.to_string(),
            summary: Some(summary.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct DatasetStats {
    pub pairs: usize,
    /// Article token counts bucketed by 50 (bucket start → count).
    pub article_lengths: BTreeMap<usize, usize>,
    /// Summary token counts bucketed by 10.
    pub summary_lengths: BTreeMap<usize, usize>,
}

impl DatasetStats {
    pub fn of(pairs: &[DocumentPair]) -> Self {
        let mut stats = Self {
            pairs: pairs.len(),
            ..Self::default()
        };
        for p in pairs {
            let a = tokenize(&p.article).len();
            *stats.article_lengths.entry(a / 50 * 50).or_insert(0) += 1;
            if let Some(s) = &p.summary {
                let n = tokenize(s).len();
                *stats.summary_lengths.entry(n / 10 * 10).or_insert(0) += 1;
            }
        }
        stats
    }
}

#[derive(Deserialize)]
struct RawPair {
    id: Option<serde_json::Value>,
    article: Option<String>,
    summary: Option<String>,
}

/// Parses JSON Lines text; `line` numbers in errors are 1-based. Blank
/// lines are skipped.
pub fn parse_dataset(text: &str) -> Result<Vec<DocumentPair>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| Error::MalformedLine {
            line: line_no,
            reason,
        };
        let raw: RawPair = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        let id = match raw.id {
            Some(serde_json::Value::String(s)) => s,
            Some(serde_json::Value::Number(n)) => n.to_string(),
            _ => return Err(bad("missing or non-scalar \"id\"".into())),
        };
        let article = raw.article.ok_or_else(|| bad("missing \"article\"".into()))?;
        if article.trim().is_empty() {
            return Err(bad("empty \"article\"".into()));
        }
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        out.push(DocumentPair {
            id,
            article,
            summary: raw.summary,
        });
    }
    Ok(out)
}

pub fn load_dataset(path: &Path) -> Result<(Vec<DocumentPair>, DatasetStats)> {
    if !path.is_file() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let pairs = parse_dataset(&std::fs::read_to_string(path)?)?;
    let stats = DatasetStats::of(&pairs);
    Ok((pairs, stats))
}

/// One JSON object per line.
pub fn to_jsonl<T: Serialize>(items: &[T]) -> Result<String> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item)?);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_single() {
        assert!(parse_dataset("").unwrap().is_empty());
        assert_eq!(DatasetStats::of(&[]).pairs, 0);
        let p = parse_dataset(r#"{"id":"a","article":"Bale won.","summary":"Won."}"#).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(DatasetStats::of(&p).pairs, 1);
    }

    #[test]
    fn missing_article_reports_line() {
        let text = "{\"id\":\"a\",\"article\":\"x\"}\n\n{\"id\":\"b\",\"summary\":\"y\"}\n";
        match parse_dataset(text) {
            Err(Error::MalformedLine { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicates_and_missing_files() {
        let text = "{\"id\":\"a\",\"article\":\"x\"}\n{\"id\":\"a\",\"article\":\"y\"}\n";
        assert!(matches!(parse_dataset(text), Err(Error::DuplicateId(id)) if id == "a"));
        assert!(matches!(
            load_dataset(Path::new("/nonexistent/data.jsonl")),
            Err(Error::FileNotFound(_))
        ));
    }
}
