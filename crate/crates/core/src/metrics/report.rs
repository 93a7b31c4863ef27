use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::openie::extract_document;

use super::factcc::{factual_score, ClaimClassifier};
use super::novel::novel_ngram_ratio;
use super::rmr::rmr;
use super::rouge::rouge_scores;

/// Mean hit counts; per document these are whole numbers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HitRates {
    #[serde(rename = "C")]
    pub correct: f64,
    #[serde(rename = "W")]
    pub wrong: f64,
    #[serde(rename = "M")]
    pub miss: f64,
}

/// Metrics for one summary, or their mean over many. Absent values
/// serialize as `null`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub rouge1: Option<f64>,
    pub rouge2: Option<f64>,
    #[serde(rename = "rougeL")]
    pub rouge_l: Option<f64>,
    pub rmr1: Option<f64>,
    pub rmr2: Option<f64>,
    pub hits: HitRates,
    pub novel_ngrams: BTreeMap<String, Option<f64>>,
    pub factual_score: Option<f64>,
}

impl EvalReport {
    /// Scores `prediction` against its article and, when given, the
    /// reference summary and a claim classifier.
    pub fn compute(
        prediction: &str,
        article: &str,
        reference: Option<&str>,
        classifier: Option<&dyn ClaimClassifier>,
    ) -> Result<Self> {
        let rouge = reference.map(|r| rouge_scores(prediction, r));
        let rates = rmr(
            &extract_document(prediction).tuples,
            &extract_document(article).tuples,
        );
        let factual_score = match classifier {
            Some(c) if !prediction.trim().is_empty() => Some(factual_score(article, prediction, c)?.0),
            _ => None,
        };
        Ok(Self {
            rouge1: rouge.map(|r| r.rouge1),
            rouge2: rouge.map(|r| r.rouge2),
            rouge_l: rouge.map(|r| r.rouge_l),
            rmr1: rates.rmr1,
            rmr2: rates.rmr2,
            hits: HitRates {
                correct: rates.hits.correct as f64,
                wrong: rates.hits.wrong as f64,
                miss: rates.hits.miss as f64,
            },
            novel_ngrams: (1..=4)
                .map(|n| (n.to_string(), novel_ngram_ratio(prediction, article, n)))
                .collect(),
            factual_score,
        })
    }
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values.flatten() {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Field-wise arithmetic mean. Optional fields average over the documents
/// where they are present and stay absent when none has them.
pub fn mean_report(reports: &[EvalReport]) -> EvalReport {
    let n = reports.len().max(1) as f64;
    let mut novel = BTreeMap::new();
    for key in reports.iter().flat_map(|r| r.novel_ngrams.keys()) {
        if !novel.contains_key(key) {
            let m = mean_of(reports.iter().map(|r| r.novel_ngrams.get(key).copied().flatten()));
            novel.insert(key.clone(), m);
        }
    }
    EvalReport {
        rouge1: mean_of(reports.iter().map(|r| r.rouge1)),
        rouge2: mean_of(reports.iter().map(|r| r.rouge2)),
        rouge_l: mean_of(reports.iter().map(|r| r.rouge_l)),
        rmr1: mean_of(reports.iter().map(|r| r.rmr1)),
        rmr2: mean_of(reports.iter().map(|r| r.rmr2)),
        hits: HitRates {
            correct: reports.iter().map(|r| r.hits.correct).sum::<f64>() / n,
            wrong: reports.iter().map(|r| r.hits.wrong).sum::<f64>() / n,
            miss: reports.iter().map(|r| r.hits.miss).sum::<f64>() / n,
        },
        novel_ngrams: novel,
        factual_score: mean_of(reports.iter().map(|r| r.factual_score)),
    }
}
