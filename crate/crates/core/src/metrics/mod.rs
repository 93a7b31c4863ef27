//! Quality and factual-consistency metrics.
//!
//! All text comparisons run over lowercased word and number tokens;
//! punctuation is dropped and nothing is stemmed.

mod factcc;
mod novel;
mod report;
mod rmr;
mod rouge;

pub use factcc::{
    factual_score, make_factcc_data, roc_auc, split_holdout, train_factcc, ClaimClassifier, ClaimExample,
    ClaimScore, ConstantClassifier, FactccClassifier, FactccConfig, FactccReport,
};
pub use novel::novel_ngram_ratio;
pub use report::{mean_report, EvalReport, HitRates};
pub use rmr::{classify_tuple, rmr, Hit, HitCounts, RmrResult};
pub use rouge::{rouge_f1, rouge_scores, RougeScores, RougeVariant};

use crate::textkit::{tokenize, TokenKind};

/// Lowercased word and number tokens of `text`.
pub fn match_tokens(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| t.kind != TokenKind::Punct)
        .map(|t| t.lower())
        .collect()
}
