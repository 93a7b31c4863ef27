use serde::Serialize;

use crate::textkit::tokenize;

/// A contiguous replacement: `before` tokens in the input became `after`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edit {
    pub position: usize,
    pub before: Vec<String>,
    pub after: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct DiffReport {
    pub edits: Vec<Edit>,
    /// Sum over edits of the longer side's token count.
    pub changed_tokens: usize,
}

impl DiffReport {
    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }
}

/// Token-level diff of `input` against `output` from a longest common
/// subsequence alignment. Case matters.
pub fn token_diff(input: &str, output: &str) -> DiffReport {
    let a: Vec<String> = tokenize(input).into_iter().map(|t| t.text).collect();
    let b: Vec<String> = tokenize(output).into_iter().map(|t| t.text).collect();
    let (n, m) = (a.len(), b.len());
    // Suffix LCS table so the walk can go forwards.
    let mut lcs = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if a[i] == b[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }
    let mut report = DiffReport::default();
    let (mut i, mut j) = (0, 0);
    let mut pending: Option<Edit> = None;
    let flush = |pending: &mut Option<Edit>, report: &mut DiffReport| {
        if let Some(e) = pending.take() {
            report.changed_tokens += e.before.len().max(e.after.len());
            report.edits.push(e);
        }
    };
    while i < n || j < m {
        if i < n && j < m && a[i] == b[j] {
            flush(&mut pending, &mut report);
            i += 1;
            j += 1;
            continue;
        }
        let e = pending.get_or_insert_with(|| Edit {
            position: i,
            before: Vec::new(),
            after: Vec::new(),
        });
        if j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j]) {
            e.after.push(b[j].clone());
            j += 1;
        } else {
            e.before.push(a[i].clone());
            i += 1;
        }
    }
    flush(&mut pending, &mut report);
    report
}
