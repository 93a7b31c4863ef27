use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::openie::RelationTuple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hit {
    Correct,
    Wrong,
    Miss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HitCounts {
    #[serde(rename = "C")]
    pub correct: usize,
    #[serde(rename = "W")]
    pub wrong: usize,
    #[serde(rename = "M")]
    pub miss: usize,
}

impl HitCounts {
    pub fn total(&self) -> usize {
        self.correct + self.wrong + self.miss
    }

    /// `100·C/(C+W)`, absent when no tuple hit.
    pub fn rmr1(&self) -> Option<f64> {
        let d = self.correct + self.wrong;
        (d > 0).then(|| 100.0 * self.correct as f64 / d as f64)
    }

    /// `100·C/(C+W+M)`, absent when there are no tuples.
    pub fn rmr2(&self) -> Option<f64> {
        let d = self.total();
        (d > 0).then(|| 100.0 * self.correct as f64 / d as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmrResult {
    pub rmr1: Option<f64>,
    pub rmr2: Option<f64>,
    pub hits: HitCounts,
}

type Key = (String, String, String);

fn classify_key(t: &Key, article: &HashSet<Key>) -> Hit {
    if article.contains(t) {
        return Hit::Correct;
    }
    let wrong = article
        .iter()
        .any(|(s, r, o)| (s == &t.0 && r == &t.1 && o != &t.2) || (s != &t.0 && r == &t.1 && o == &t.2));
    if wrong {
        Hit::Wrong
    } else {
        Hit::Miss
    }
}

/// Places a summary tuple into one of the three hit categories, comparing
/// normalized strings.
pub fn classify_tuple(t: &RelationTuple, article: &[RelationTuple]) -> Hit {
    let set: HashSet<Key> = article.iter().map(RelationTuple::key).collect();
    classify_key(&t.key(), &set)
}

/// Relation matching rates of summary tuples against article tuples.
/// Summary tuples are deduplicated by normalized key first.
pub fn rmr(summary: &[RelationTuple], article: &[RelationTuple]) -> RmrResult {
    let article: HashSet<Key> = article.iter().map(RelationTuple::key).collect();
    let mut seen = HashSet::new();
    let mut hits = HitCounts::default();
    for t in summary {
        let key = t.key();
        if !seen.insert(key.clone()) {
            continue;
        }
        match classify_key(&key, &article) {
            Hit::Correct => hits.correct += 1,
            Hit::Wrong => hits.wrong += 1,
            Hit::Miss => hits.miss += 1,
        }
    }
    RmrResult {
        rmr1: hits.rmr1(),
        rmr2: hits.rmr2(),
        hits,
    }
}
