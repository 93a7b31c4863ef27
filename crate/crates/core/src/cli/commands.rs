use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{write_atomic, RunConfig};
use crate::data::{load_dataset, to_jsonl, DocumentPair};
use crate::error::{Error, Result};
use crate::fasum::Summarizer;
use crate::fc::{make_fc_dataset, Corrector, CorruptionSample, IdentityParaphraser};
use crate::kgraph::{build_graph, graph_stats};
use crate::metrics::{
    make_factcc_data, mean_report, train_factcc, ClaimClassifier, EvalReport, FactccClassifier,
};
use crate::openie::{extract_document, TupleSet};
use crate::textkit::{train_bpe, SubwordVocab};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Prediction {
    id: String,
    summary: String,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn read_file(path: &Path) -> Result<String> {
    if !path.is_file() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    Ok(std::fs::read_to_string(path)?)
}

/// Parses JSON Lines into `T`, skipping blank lines.
fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = read_file(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| Error::MalformedLine {
            line: i + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}

fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let preds: Vec<Prediction> = read_jsonl(path)?;
    let mut seen = std::collections::HashSet::new();
    for p in &preds {
        if !seen.insert(p.id.as_str()) {
            return Err(Error::DuplicateId(p.id.clone()));
        }
    }
    Ok(preds)
}

fn summary_of(pair: &DocumentPair) -> Result<&str> {
    pair.summary
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument(format!("document `{}` has no summary", pair.id)))
}

fn vocab_for(texts: &[&str], size: usize) -> Result<SubwordVocab> {
    train_bpe(texts, size)
}

pub fn extract(data: &Path, out: &Path) -> Result<()> {
    let (pairs, stats) = load_dataset(data)?;
    let sets: Vec<TupleSet> = pairs
        .par_iter()
        .map(|p| extract_document(&p.article).with_id(p.id.clone()))
        .collect();
    write_atomic(&out.join("tuples.jsonl"), to_jsonl(&sets)?.as_bytes())?;
    let tuples: usize = sets.iter().map(TupleSet::len).sum();
    write_json(
        &out.join("report.json"),
        &json!({ "documents": sets.len(), "tuples": tuples, "dataset": stats }),
    )
}

pub fn graph(tuples: &Path, out: &Path) -> Result<()> {
    let sets: Vec<TupleSet> = read_jsonl(tuples)?;
    let mut lines = String::new();
    let (mut nodes, mut edges) = (0, 0);
    for set in &sets {
        let g = build_graph(set);
        let s = graph_stats(&g);
        nodes += s.node_count;
        edges += s.edge_count;
        let mut dump = g.to_json();
        dump["id"] = json!(set.doc_id);
        dump["stats"] = json!({
            "nodes": s.node_count,
            "edges": s.edge_count,
            "max_degree": s.max_degree,
            "components": s.component_count,
        });
        lines.push_str(&serde_json::to_string(&dump)?);
        lines.push('\n');
    }
    write_atomic(&out.join("graphs.jsonl"), lines.as_bytes())?;
    write_json(
        &out.join("report.json"),
        &json!({ "documents": sets.len(), "nodes": nodes, "edges": edges }),
    )
}

pub fn train_summarizer(cfg: &RunConfig, data: &Path, valid: Option<&Path>, out: &Path) -> Result<()> {
    let (pairs, stats) = load_dataset(data)?;
    let valid_pairs = match valid {
        Some(v) => load_dataset(v)?.0,
        None => Vec::new(),
    };
    let mut texts = Vec::new();
    for p in &pairs {
        texts.push(p.article.as_str());
        texts.push(summary_of(p)?);
    }
    let vocab = vocab_for(&texts, cfg.fasum.vocab_size)?;
    let mut model = Summarizer::new(vocab, cfg.fasum.clone())?;
    let prepare = |ps: &[DocumentPair]| -> Result<Vec<_>> {
        ps.iter()
            .map(|p| Ok(model.prepare(&p.article, summary_of(p)?)))
            .collect()
    };
    let train_set = prepare(&pairs)?;
    let valid_set = prepare(&valid_pairs)?;
    let outcome = model.fit(&train_set, &valid_set)?;
    let accuracy = model.token_accuracy(&train_set)?;
    write_atomic(&out.join("model.ckpt"), &model.to_checkpoint())?;
    write_json(
        &out.join("report.json"),
        &json!({
            "kind": "summarizer",
            "dataset": stats,
            "vocab_size": model.vocab.len(),
            "loss_curve": outcome.loss_curve,
            "validation": outcome.validation,
            "best_epoch": outcome.best_epoch,
            "train_token_accuracy": accuracy,
        }),
    )
}

pub fn train_corrector(cfg: &RunConfig, data: &Path, valid: Option<&Path>, out: &Path) -> Result<()> {
    let samples: Vec<CorruptionSample> = read_jsonl(data)?;
    let valid: Vec<CorruptionSample> = match valid {
        Some(v) => read_jsonl(v)?,
        None => Vec::new(),
    };
    let mut texts = Vec::new();
    for s in &samples {
        texts.extend([s.article.as_str(), &s.clean_summary, &s.corrupted_summary]);
    }
    let vocab = vocab_for(&texts, cfg.corrector.vocab_size)?;
    let mut corrector = Corrector::new(vocab, cfg.corrector.clone())?;
    let outcome = corrector.fit(&samples, &valid)?;
    let examples: Vec<_> = samples.iter().map(|s| corrector.example(s)).collect();
    let accuracy = corrector.inner.token_accuracy(&examples)?;
    write_atomic(&out.join("model.ckpt"), &corrector.to_checkpoint())?;
    write_json(
        &out.join("report.json"),
        &json!({
            "kind": "corrector",
            "samples": samples.len(),
            "vocab_size": corrector.inner.vocab.len(),
            "loss_curve": outcome.loss_curve,
            "validation": outcome.validation,
            "best_epoch": outcome.best_epoch,
            "train_token_accuracy": accuracy,
        }),
    )
}

pub fn summarize(model: &Path, data: &Path, out: &Path) -> Result<()> {
    let model =
        Summarizer::from_checkpoint(&std::fs::read(model).map_err(|_| Error::FileNotFound(model.into()))?)?;
    let (pairs, _) = load_dataset(data)?;
    let preds: Vec<Result<Prediction>> = pairs
        .par_iter()
        .map(|p| {
            Ok(Prediction {
                id: p.id.clone(),
                summary: model.summarize(&p.article)?.text,
            })
        })
        .collect();
    let preds: Vec<Prediction> = preds.into_iter().collect::<Result<_>>()?;
    write_atomic(&out.join("predictions.jsonl"), to_jsonl(&preds)?.as_bytes())?;
    write_json(&out.join("report.json"), &json!({ "documents": preds.len() }))
}

pub fn correct(model: &Path, data: &Path, predictions: Option<&Path>, out: &Path) -> Result<()> {
    let corrector =
        Corrector::from_checkpoint(&std::fs::read(model).map_err(|_| Error::FileNotFound(model.into()))?)?;
    let (pairs, _) = load_dataset(data)?;
    let articles: HashMap<&str, &str> = pairs
        .iter()
        .map(|p| (p.id.as_str(), p.article.as_str()))
        .collect();
    let inputs: Vec<Prediction> = match predictions {
        Some(path) => read_predictions(path)?,
        None => pairs
            .iter()
            .map(|p| {
                Ok(Prediction {
                    id: p.id.clone(),
                    summary: summary_of(p)?.to_string(),
                })
            })
            .collect::<Result<_>>()?,
    };
    let mut jobs = Vec::with_capacity(inputs.len());
    for p in &inputs {
        let article = articles
            .get(p.id.as_str())
            .ok_or_else(|| Error::InvalidArgument(format!("prediction `{}` has no document", p.id)))?;
        jobs.push((p.summary.clone(), article.to_string()));
    }
    let corrections = corrector.correct_all(&jobs)?;
    let rows: Vec<_> = inputs
        .iter()
        .zip(&corrections)
        .map(|(p, c)| json!({ "id": p.id, "input": p.summary, "corrected": c.corrected, "diff": c.diff }))
        .collect();
    write_atomic(&out.join("corrections.jsonl"), to_jsonl(&rows)?.as_bytes())?;
    let changed = corrections.iter().filter(|c| !c.diff.is_empty()).count();
    write_json(
        &out.join("report.json"),
        &json!({ "documents": rows.len(), "changed": changed }),
    )
}

pub fn forge(cfg: &RunConfig, data: &Path, out: &Path) -> Result<()> {
    let (pairs, _) = load_dataset(data)?;
    let (samples, stats) = make_fc_dataset(
        &pairs,
        cfg.per_pair,
        &cfg.transforms,
        &IdentityParaphraser,
        cfg.seed,
    );
    write_atomic(&out.join("forge.jsonl"), to_jsonl(&samples)?.as_bytes())?;
    let mut by_transform: BTreeMap<String, usize> = BTreeMap::new();
    for s in &samples {
        *by_transform
            .entry(
                serde_json::to_value(s.transform)?
                    .as_str()
                    .unwrap_or("")
                    .to_string(),
            )
            .or_default() += 1;
    }
    write_json(
        &out.join("report.json"),
        &json!({ "stats": stats, "samples": samples.len(), "by_transform": by_transform }),
    )
}

pub fn factcc_train(cfg: &RunConfig, data: &Path, out: &Path) -> Result<()> {
    let (pairs, _) = load_dataset(data)?;
    let examples = make_factcc_data(&pairs, &IdentityParaphraser, cfg.seed);
    let mut texts: Vec<&str> = pairs.iter().map(|p| p.article.as_str()).collect();
    texts.extend(examples.iter().map(|e| e.claim.as_str()));
    let vocab = vocab_for(&texts, cfg.fasum.vocab_size)?;
    let (classifier, report) = train_factcc(&examples, &vocab, &cfg.factcc)?;
    write_atomic(&out.join("factcc.ckpt"), &classifier.to_checkpoint())?;
    write_json(&out.join("report.json"), &report)
}

#[derive(Serialize)]
struct DocumentReport {
    id: String,
    #[serde(flatten)]
    report: EvalReport,
}

pub fn evaluate(data: &Path, predictions: &Path, factcc: Option<&Path>, out: &Path) -> Result<()> {
    let (pairs, _) = load_dataset(data)?;
    let preds = read_predictions(predictions)?;
    let classifier = match factcc {
        Some(path) => Some(FactccClassifier::from_checkpoint(
            &std::fs::read(path).map_err(|_| Error::FileNotFound(path.into()))?,
        )?),
        None => None,
    };
    let docs: HashMap<&str, &DocumentPair> = pairs.iter().map(|p| (p.id.as_str(), p)).collect();
    let mut jobs = Vec::with_capacity(preds.len());
    for p in &preds {
        let doc = docs
            .get(p.id.as_str())
            .ok_or_else(|| Error::InvalidArgument(format!("prediction `{}` has no document", p.id)))?;
        jobs.push((p, *doc));
    }
    let reports: Vec<Result<DocumentReport>> = jobs
        .par_iter()
        .map(|(p, doc)| {
            let classifier = classifier.as_ref().map(|c| c as &dyn ClaimClassifier);
            Ok(DocumentReport {
                id: p.id.clone(),
                report: EvalReport::compute(&p.summary, &doc.article, doc.summary.as_deref(), classifier)?,
            })
        })
        .collect();
    let reports: Vec<DocumentReport> = reports.into_iter().collect::<Result<_>>()?;
    let each: Vec<EvalReport> = reports.iter().map(|r| r.report.clone()).collect();
    write_json(
        &out.join("report.json"),
        &json!({ "documents": reports, "aggregate": mean_report(&each) }),
    )
}
