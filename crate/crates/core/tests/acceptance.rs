//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines come out in order; exits non-zero when any
//! criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use factsum::fasum::{
    beam_search, greedy_decode, Context, DecodeOptions, Example, FasumConfig, FasumModel, GraphInput,
    Summarizer,
};
use factsum::fc::{fc_config, make_fc_dataset, token_diff, Corrector, IdentityParaphraser, Transform};
use factsum::kgraph::{build_graph, graph_stats, KnowledgeGraph, NodeKind};
use factsum::metrics::{
    factual_score, make_factcc_data, rmr, rouge_scores, train_factcc, ClaimClassifier, FactccConfig,
};
use factsum::neuro::layers::{init_attention, init_bilstm, init_gat, init_linear};
use factsum::neuro::{
    bilstm_final, finite_diff_check, finite_diff_check_sampled, gat_layer, kg_cross_attention, linear,
    multi_head_attention, ParameterStore, Tape, Tensor, DEFAULT_STEP,
};
use factsum::openie::{extract_document, RelationTuple, TupleSet};
use factsum::toy::{toy_corpus, toy_vocab};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: factsum::Error) -> String {
    e.to_string()
}

// ---------------------------------------------------------------- gradients

const GRAD_SEEDS: u64 = 50;
const GRAD_TOL: f64 = 1e-4;

fn grad_store(seed: u64) -> (ParameterStore, usize, usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (t, n, d) = (rng.gen_range(1..5), rng.gen_range(1..5), 2 * rng.gen_range(1..4));
    let mut p = ParameterStore::new(seed);
    p.add_uniform("x", vec![t, d], 1.0);
    p.add_uniform("nodes", vec![n, d], 1.0);
    init_linear(&mut p, "lin", d, 5);
    init_attention(&mut p, "att", d);
    init_bilstm(&mut p, "lstm", d, 3);
    init_gat(&mut p, "gat", d, 2, 3);
    (p, t, n, d)
}

fn random_adjacency(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.5) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    adj
}

fn micro_config() -> FasumConfig {
    FasumConfig {
        layers: 1,
        heads: 2,
        model_dim: 8,
        ff_dim: 12,
        vocab_size: 20,
        gat_layers: 2,
        gat_heads: 2,
        gat_hidden: 3,
        bilstm_hidden: 4,
        max_article_len: 12,
        max_summary_len: 6,
        min_summary_len: 1,
        ..FasumConfig::desk()
    }
}

fn gradient_suite() -> Outcome {
    let start = Instant::now();
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let mut note = |name, e: f64| {
        let w = worst.entry(name).or_insert(0.0);
        *w = w.max(e);
    };
    for seed in 0..GRAD_SEEDS {
        let (p, _, n, _) = grad_store(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
        let adjacency = random_adjacency(n, &mut rng);
        note(
            "linear",
            finite_diff_check(&p, DEFAULT_STEP, |t: &mut Tape, s| {
                let x = t.param(s, "x");
                let y = linear(t, s, "lin", x);
                let y = t.tanh(y);
                t.sum(y)
            }),
        );
        note(
            "lstm",
            finite_diff_check(&p, DEFAULT_STEP, |t: &mut Tape, s| {
                let x = t.param(s, "x");
                let h = bilstm_final(t, s, "lstm", x).expect("non-empty");
                let y = t.mul(h, h);
                t.sum(y)
            }),
        );
        note(
            "attention",
            finite_diff_check(&p, DEFAULT_STEP, |t: &mut Tape, s| {
                let x = t.param(s, "x");
                let m = t.param(s, "nodes");
                let a = multi_head_attention(t, s, "att", x, m, m, 2, None, 0.0).expect("shapes");
                let y = t.tanh(a.context);
                t.sum(y)
            }),
        );
        note(
            "kg-attention",
            finite_diff_check(&p, DEFAULT_STEP, |t: &mut Tape, s| {
                let x = t.param(s, "x");
                let m = t.param(s, "nodes");
                let u = kg_cross_attention(t, x, Some(m));
                let y = t.tanh(u);
                t.sum(y)
            }),
        );
        let average = seed % 2 == 0;
        note(
            "gat",
            finite_diff_check(&p, DEFAULT_STEP, |t: &mut Tape, s| {
                let m = t.param(s, "nodes");
                let g = gat_layer(t, s, "gat", m, &adjacency, 2, average, 0.0).expect("shapes");
                let y = t.tanh(g);
                t.sum(y)
            }),
        );
        let cfg = FasumConfig {
            seed,
            ..micro_config()
        };
        let model = FasumModel::new(cfg.clone()).map_err(err)?;
        let src: Vec<u32> = (0..rng.gen_range(2..8)).map(|_| rng.gen_range(5..20)).collect();
        let tgt: Vec<u32> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(5..20)).collect();
        let nodes = rng.gen_range(1..4);
        let ex = Example {
            source: src,
            target: tgt,
            graph: GraphInput {
                node_ids: (0..nodes)
                    .map(|_| (0..rng.gen_range(1..3)).map(|_| rng.gen_range(5..20)).collect())
                    .collect(),
                adjacency: random_adjacency(nodes, &mut rng),
            },
        };
        note(
            "full-model",
            finite_diff_check_sampled(&model.params, DEFAULT_STEP, 60, seed, |t: &mut Tape, s| {
                let m = FasumModel::with_params(cfg.clone(), s.clone());
                m.loss(t, &ex).expect("valid example")
            }),
        );
    }
    let elapsed = start.elapsed();
    let detail = worst
        .iter()
        .map(|(k, v)| format!("{k} {v:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(worst.values().all(|&e| e < GRAD_TOL), || {
        format!("max relative error: {detail}")
    })?;
    ensure(elapsed < Duration::from_secs(120), || {
        format!("took {elapsed:.1?}")
    })?;
    Ok(format!("{GRAD_SEEDS} seeds, max rel err {detail}; {elapsed:.1?}"))
}

// ---------------------------------------------------------- kg attention

fn kg_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let cases = 120;
    for _ in 0..cases {
        let (t, n, d) = (rng.gen_range(1..7), rng.gen_range(1..9), rng.gen_range(1..10));
        let s: Vec<f64> = (0..t * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let e: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut tape = Tape::new();
        let sv = tape.constant(Tensor::matrix(t, d, s.clone()));
        let ev = tape.constant(Tensor::matrix(n, d, e.clone()));
        let u = kg_cross_attention(&mut tape, sv, Some(ev));
        let got = tape.value(u).data().to_vec();
        for i in 0..t {
            let beta: Vec<f64> = (0..n)
                .map(|j| (0..d).map(|k| s[i * d + k] * e[j * d + k]).sum())
                .collect();
            let z: f64 = beta.iter().map(|b| b.exp()).sum();
            for k in 0..d {
                let want: f64 = (0..n).map(|j| beta[j].exp() / z * e[j * d + k]).sum();
                worst = worst.max((got[i * d + k] - want).abs());
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max abs error {worst:.2e}"))?;
    Ok(format!("{cases} cases, max abs error {worst:.1e}"))
}

// ------------------------------------------------------------ levi graph

fn random_tuples(rng: &mut ChaCha8Rng) -> Vec<RelationTuple> {
    let atoms = [
        "Bale", "bale", "Madrid", "Ronaldo", "Spurs", "Wales", "the club", "The Club",
    ];
    let rels = ["signed for", "left", "plays for", "is"];
    (0..rng.gen_range(0..=20))
        .map(|_| {
            RelationTuple::new(
                atoms[rng.gen_range(0..atoms.len())],
                rels[rng.gen_range(0..rels.len())],
                atoms[rng.gen_range(0..atoms.len())],
            )
        })
        .collect()
}

/// Isomorphism invariant: the entity label multiset plus, per relation
/// node, its (subject, relation, object) labels.
fn signature(g: &KnowledgeGraph) -> (Vec<String>, Vec<(String, String, String)>) {
    let norm = |s: &str| s.to_lowercase();
    let mut entities: Vec<String> = g
        .nodes
        .iter()
        .filter(|n| n.kind == NodeKind::Entity)
        .map(|n| norm(&n.text))
        .collect();
    entities.sort();
    let mut rels = Vec::new();
    for n in g.nodes.iter().filter(|n| n.kind == NodeKind::Relation) {
        let subj = g
            .edges
            .iter()
            .find(|e| e.1 == n.id)
            .map(|e| norm(&g.nodes[e.0].text));
        let obj = g
            .edges
            .iter()
            .find(|e| e.0 == n.id)
            .map(|e| norm(&g.nodes[e.1].text));
        rels.push((subj.unwrap_or_default(), norm(&n.text), obj.unwrap_or_default()));
    }
    rels.sort();
    (entities, rels)
}

fn levi_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let cases = 250;
    for case in 0..cases {
        let tuples = random_tuples(&mut rng);
        let distinct = tuples
            .iter()
            .map(RelationTuple::key)
            .collect::<HashSet<_>>()
            .len();
        let g = build_graph(&TupleSet::new("d", tuples.clone()));
        let stats = graph_stats(&g);
        ensure(stats.node_count <= 3 * distinct, || {
            format!("case {case}: |V| {} > 3T", stats.node_count)
        })?;
        ensure(stats.edge_count <= 2 * distinct, || {
            format!("case {case}: |E| {} > 2T", stats.edge_count)
        })?;
        for &(a, b) in &g.edges {
            ensure(g.nodes[a].kind != g.nodes[b].kind, || {
                format!("case {case}: edge {a}-{b} not bipartite")
            })?;
        }
        let mut shuffled = tuples;
        shuffled.shuffle(&mut rng);
        let h = build_graph(&TupleSet {
            doc_id: "d".into(),
            tuples: shuffled,
        });
        ensure(graph_stats(&h) == stats, || {
            format!("case {case}: stats differ after permutation")
        })?;
        ensure(signature(&h) == signature(&g), || {
            format!("case {case}: not isomorphic after permutation")
        })?;
    }
    Ok(format!("{cases} random tuple sets"))
}

// ------------------------------------------------------------------- rmr

fn rmr_oracle() -> Outcome {
    let word = |i: usize| format!("w{i}");
    let to_tuple = |&(s, r, o): &(usize, usize, usize)| RelationTuple::new(&word(s), &word(r), &word(o));
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let cases = 600;
    for case in 0..cases {
        let draw = |rng: &mut ChaCha8Rng| -> Vec<(usize, usize, usize)> {
            (0..rng.gen_range(0..6))
                .map(|_| (rng.gen_range(0..3), rng.gen_range(0..2), rng.gen_range(0..3)))
                .collect()
        };
        let article = draw(&mut rng);
        let summary = draw(&mut rng);
        let (mut c, mut w, mut m) = (0usize, 0usize, 0usize);
        let unique: BTreeSet<_> = summary.iter().copied().collect();
        for &(s, r, o) in &unique {
            if article.contains(&(s, r, o)) {
                c += 1;
            } else if article
                .iter()
                .any(|&(s2, r2, o2)| (s2 == s && r2 == r && o2 != o) || (s2 != s && r2 == r && o2 == o))
            {
                w += 1;
            } else {
                m += 1;
            }
        }
        let want1 = (c + w > 0).then(|| 100.0 * c as f64 / (c + w) as f64);
        let want2 = (c + w + m > 0).then(|| 100.0 * c as f64 / (c + w + m) as f64);
        let got = rmr(
            &summary.iter().map(to_tuple).collect::<Vec<_>>(),
            &article.iter().map(to_tuple).collect::<Vec<_>>(),
        );
        let close = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (None, None) => true,
            (Some(x), Some(y)) => (x - y).abs() <= 1e-9,
            _ => false,
        };
        ensure(
            (got.hits.correct, got.hits.wrong, got.hits.miss) == (c, w, m)
                && close(got.rmr1, want1)
                && close(got.rmr2, want2),
            || format!("case {case}: got {got:?}, want C{c} W{w} M{m}"),
        )?;
    }
    let t = |s: &str, r: &str, o: &str| RelationTuple::new(s, r, o);
    let article = [t("Bale", "signed for", "Madrid"), t("Ronaldo", "scored", "five")];
    let summary = [
        t("Bale", "signed for", "Madrid"),
        t("Bale", "scored", "five"),
        t("Spurs", "sold", "Bale"),
        t("Wales", "won", "twice"),
    ];
    let hand = rmr(&summary, &article);
    ensure(hand.rmr1 == Some(50.0) && hand.rmr2 == Some(25.0), || {
        format!("hand case gave {:?}/{:?}", hand.rmr1, hand.rmr2)
    })?;
    Ok(format!(
        "{cases} random cases match brute force; hand case (50.0, 25.0)"
    ))
}

// ----------------------------------------------------------------- rouge

fn rouge_curated() -> Outcome {
    // (candidate, reference, R1, R2, RL), each worked out by hand.
    let cases: [(&str, &str, f64, f64, f64); 10] = [
        ("the cat sat", "the cat", 0.8, 2.0 / 3.0, 0.8),
        ("a b c d", "a b c d", 1.0, 1.0, 1.0),
        ("x y", "a b", 0.0, 0.0, 0.0),
        ("the the the", "the", 0.5, 0.0, 0.5),
        ("a b c", "c b a", 1.0, 0.0, 1.0 / 3.0),
        (
            "police killed the gunman",
            "the gunman was killed by police",
            0.8,
            0.25,
            0.4,
        ),
        ("", "a b", 0.0, 0.0, 0.0),
        ("The Cat, sat.", "the cat sat", 1.0, 1.0, 1.0),
        ("a b a b", "a b", 2.0 / 3.0, 0.5, 2.0 / 3.0),
        ("a b c d e", "a c e g", 2.0 / 3.0, 0.0, 2.0 / 3.0),
    ];
    for (cand, reference, r1, r2, rl) in cases {
        let s = rouge_scores(cand, reference);
        let ok = [(s.rouge1, r1), (s.rouge2, r2), (s.rouge_l, rl)]
            .iter()
            .all(|(got, want)| (got - want).abs() < 1e-12);
        ensure(ok, || {
            format!("{cand:?} vs {reference:?}: got {s:?}, want ({r1}, {r2}, {rl})")
        })?;
    }
    Ok("10 curated pairs".into())
}

// --------------------------------------------------------------- overfit

struct Overfit {
    model: Summarizer,
    data: Vec<Example>,
    articles: Vec<String>,
}

fn overfit_pipeline(slot: &mut Option<Overfit>) -> Outcome {
    let start = Instant::now();
    let pairs = toy_corpus(8, 0);
    let vocab = toy_vocab(&pairs, 300).map_err(err)?;
    let config = FasumConfig::desk();
    let max_epochs = config.epochs;
    let mut model = Summarizer::new(vocab, config).map_err(err)?;
    let data: Vec<Example> = pairs
        .iter()
        .map(|p| model.prepare(&p.article, p.summary.as_deref().unwrap_or("")))
        .collect();
    let outcome = model.fit(&data, &data).map_err(err)?;
    let epochs = outcome.best_epoch.unwrap_or(outcome.loss_curve.len());
    let accuracy = model.token_accuracy(&data).map_err(err)?;
    let mut exact = 0;
    for (p, ex) in pairs.iter().zip(&data) {
        let out = model.generate(ex, &model.decode_options()).map_err(err)?;
        exact += usize::from(Some(out.text.as_str()) == p.summary.as_deref());
    }
    let elapsed = start.elapsed();
    *slot = Some(Overfit {
        model,
        data,
        articles: pairs.iter().map(|p| p.article.clone()).collect(),
    });
    let detail =
        format!("token accuracy {accuracy:.4}, {exact}/8 exact, epoch {epochs}/{max_epochs}, {elapsed:.1?}");
    ensure(accuracy >= 0.99 && exact == 8 && epochs <= max_epochs, || {
        detail.clone()
    })?;
    ensure(elapsed < Duration::from_secs(300), || detail.clone())?;
    Ok(detail)
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn graph_liveness(slot: &Option<Overfit>) -> Outcome {
    let o = slot.as_ref().ok_or("overfit model unavailable")?;
    let s = &o.model;
    let ex = &o.data[0];
    let graph = build_graph(&extract_document(&o.articles[0]));
    ensure(!graph.is_empty(), || "first article has no graph".into())?;
    let step1 = |model: &FasumModel, g: &GraphInput| -> Result<Vec<f64>, String> {
        Context::new(model, &ex.source, g)
            .and_then(|c| c.next_log_probs(model, &[]))
            .map_err(err)
    };
    let base = step1(&s.model, &s.graph_input(&graph))?;
    let edited = s.graph_input(&graph.with_node_text(0, "Paul Zane"));
    let changed = linf(&base, &step1(&s.model, &edited)?);
    ensure(changed > 1e-6, || {
        format!("node edit moved step-1 log-probs by only {changed:.2e}")
    })?;

    let mut zeroed = s.model.clone();
    for (name, t) in zeroed.params.iter_mut() {
        if name.starts_with("kg.proj.") {
            t.data_mut().iter_mut().for_each(|v| *v = 0.0);
        }
    }
    let with_graph = step1(&zeroed, &s.graph_input(&graph))?;
    let without = step1(&zeroed, &GraphInput::empty())?;
    let gap = linf(&with_graph, &without);
    ensure(gap <= 1e-6, || {
        format!("zeroed projection differs from no-graph baseline by {gap:.2e}")
    })?;
    Ok(format!(
        "node edit L∞ {changed:.2e}; zeroed projection vs no graph L∞ {gap:.1e}"
    ))
}

// ------------------------------------------------------------- corrector

fn fc_round_trip() -> Outcome {
    let start = Instant::now();
    let pairs = toy_corpus(8, 0);
    let vocab = toy_vocab(&pairs, 300).map_err(err)?;
    let (samples, _) = make_fc_dataset(&pairs, 3, &Transform::CORRUPTING, &IdentityParaphraser, 0);
    ensure(samples.len() == 32, || {
        format!("forged {} samples", samples.len())
    })?;
    let mut corrector = Corrector::new(vocab, fc_config(&FasumConfig::desk())).map_err(err)?;
    corrector.fit(&samples, &samples).map_err(err)?;
    let (mut exact, mut corrupted, mut kept, mut identity, mut worst) = (0, 0, 0, 0, 0);
    for s in &samples {
        let c = corrector.correct(&s.corrupted_summary, &s.article).map_err(err)?;
        worst = worst.max(token_diff(&s.corrupted_summary, &c.corrected).changed_tokens);
        if s.transform == Transform::ParaphraseStub {
            identity += 1;
            kept += usize::from(c.corrected == s.corrupted_summary);
        } else {
            corrupted += 1;
            exact += usize::from(c.corrected == s.clean_summary);
        }
    }
    let exact_rate = exact as f64 / corrupted as f64;
    let kept_rate = kept as f64 / identity as f64;
    let detail = format!(
        "recovered {exact}/{corrupted}, identity kept {kept}/{identity}, max changed tokens {worst}; {:.1?}",
        start.elapsed()
    );
    ensure(exact_rate >= 0.9 && kept_rate >= 0.95 && worst <= 3, || {
        detail.clone()
    })?;
    Ok(detail)
}

// ---------------------------------------------------------------- factcc

fn factcc_classifier() -> Outcome {
    let start = Instant::now();
    let pairs = toy_corpus(96, 1);
    let vocab = toy_vocab(&pairs, 300).map_err(err)?;
    let data = make_factcc_data(&pairs, &IdentityParaphraser, 1);
    let (classifier, report) = train_factcc(&data, &vocab, &FactccConfig::default()).map_err(err)?;
    let detail = format!(
        "held-out AUC {:.3} (untrained {:.3}) on {} claims",
        report.auc, report.untrained_auc, report.heldout_examples
    );
    ensure(report.auc > 0.9, || detail.clone())?;
    ensure((report.untrained_auc - 0.5).abs() <= 0.1, || detail.clone())?;

    let summary = "Alan Hart signed for Rovers. He has not joined from Leeds. She has joined from Derby.";
    let article = &pairs[0].article;
    let (score, claims) = factual_score(article, summary, &classifier).map_err(err)?;
    let sentences = [
        "Alan Hart signed for Rovers.",
        "He has not joined from Leeds.",
        "She has joined from Derby.",
    ];
    let mut total = 0.0;
    for s in sentences {
        total += classifier.claim_probability(article, s).map_err(err)?;
    }
    let mean = total / sentences.len() as f64;
    ensure(claims.len() == 3 && score == mean, || {
        format!("aggregate {score} vs mean {mean}")
    })?;
    Ok(format!(
        "{detail}; aggregate equals sentence mean; {:.1?}",
        start.elapsed()
    ))
}

// -------------------------------------------------------------- decoding

fn repeated_trigram(ids: &[u32]) -> bool {
    let mut seen = HashSet::new();
    ids.windows(3).any(|w| !seen.insert(w.to_vec()))
}

fn decoding_contracts() -> Outcome {
    let pairs = toy_corpus(25, 5);
    let vocab = toy_vocab(&pairs, 150).map_err(err)?;
    let mut generated = 0;
    for seed in 0..4 {
        let config = FasumConfig {
            layers: 1,
            heads: 2,
            model_dim: 16,
            ff_dim: 32,
            gat_layers: 1,
            gat_heads: 2,
            gat_hidden: 8,
            bilstm_hidden: 8,
            max_summary_len: 12 + seed as usize,
            min_summary_len: 4 + seed as usize,
            beam_width: 3,
            trigram_block: true,
            seed,
            ..FasumConfig::desk()
        };
        let model = Summarizer::new(vocab.clone(), config).map_err(err)?;
        let opts = model.decode_options();
        for p in &pairs {
            let out = model.summarize(&p.article).map_err(err)?;
            generated += 1;
            ensure(!repeated_trigram(&out.ids), || {
                format!("repeated trigram in {:?}", out.ids)
            })?;
            ensure(
                out.ids.len() >= opts.min_len && out.ids.len() <= opts.max_len,
                || {
                    format!(
                        "length {} outside [{}, {}]",
                        out.ids.len(),
                        opts.min_len,
                        opts.max_len
                    )
                },
            )?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let cfg = micro_config();
    let model = FasumModel::new(cfg.clone()).map_err(err)?;
    let detok = |ids: &[u32]| format!("{ids:?}");
    let inputs = 50;
    for case in 0..inputs {
        let source: Vec<u32> = (0..rng.gen_range(1..12)).map(|_| rng.gen_range(5..20)).collect();
        let n = rng.gen_range(0..4);
        let graph = GraphInput {
            node_ids: (0..n).map(|_| vec![rng.gen_range(5..20)]).collect(),
            adjacency: random_adjacency(n, &mut rng),
        };
        let ctx = Context::new(&model, &source, &graph).map_err(err)?;
        let opts = DecodeOptions {
            beam_width: 1,
            min_len: rng.gen_range(0..3),
            max_len: rng.gen_range(3..8),
            trigram_block: case % 2 == 0,
        };
        let beam = beam_search(&model, &ctx, &opts, &detok).map_err(err)?;
        let greedy = greedy_decode(&model, &ctx, &opts, &detok).map_err(err)?;
        ensure(beam.ids == greedy.ids, || {
            format!("case {case}: beam {:?} vs greedy {:?}", beam.ids, greedy.ids)
        })?;
    }
    Ok(format!("{generated} summaries without repeated trigrams within length bounds; beam 1 = greedy on {inputs} inputs"))
}

// ----------------------------------------------------------- determinism

fn pipeline_run(dir: &Path, data: &Path, big: &Path) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let cfg = dir.join("run.cfg");
    std::fs::write(
        &cfg,
        "epochs = 3\nvalidate_every = 2\nfc.epochs = 2\nfactcc.epochs = 1\nper_pair = 2\n",
    )
    .map_err(|e| e.to_string())?;
    let p = |x: &str| dir.join(x).display().to_string();
    let d = data.display().to_string();
    let b = big.display().to_string();
    let c = cfg.display().to_string();
    let steps: Vec<Vec<String>> = vec![
        vec![
            "extract".into(),
            "--data".into(),
            d.clone(),
            "--out".into(),
            p("ex"),
        ],
        vec![
            "graph".into(),
            "--tuples".into(),
            p("ex/tuples.jsonl"),
            "--out".into(),
            p("gr"),
        ],
        vec![
            "train".into(),
            "--data".into(),
            d.clone(),
            "--valid".into(),
            d.clone(),
            "--out".into(),
            p("tr"),
        ],
        vec![
            "summarize".into(),
            "--model".into(),
            p("tr/model.ckpt"),
            "--data".into(),
            d.clone(),
            "--out".into(),
            p("su"),
        ],
        vec![
            "forge".into(),
            "--data".into(),
            d.clone(),
            "--out".into(),
            p("fo"),
        ],
        vec![
            "train".into(),
            "--kind".into(),
            "corrector".into(),
            "--data".into(),
            p("fo/forge.jsonl"),
            "--out".into(),
            p("fc"),
        ],
        vec![
            "correct".into(),
            "--model".into(),
            p("fc/model.ckpt"),
            "--data".into(),
            d.clone(),
            "--predictions".into(),
            p("su/predictions.jsonl"),
            "--out".into(),
            p("co"),
        ],
        vec!["factcc-train".into(), "--data".into(), b, "--out".into(), p("cc")],
        vec![
            "evaluate".into(),
            "--data".into(),
            d,
            "--predictions".into(),
            p("su/predictions.jsonl"),
            "--factcc".into(),
            p("cc/factcc.ckpt"),
            "--out".into(),
            p("ev"),
        ],
    ];
    for step in steps {
        let mut argv = vec![
            "factsum".to_string(),
            "--config".into(),
            c.clone(),
            "--seed".into(),
            "7".into(),
        ];
        argv.extend(step.iter().cloned());
        let code = factsum::cli::run(argv);
        ensure(code == 0, || format!("`{}` exited {code}", step[0]))?;
    }
    Ok(())
}

fn collect_outputs(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).expect("readable").flatten() {
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).expect("under root").display().to_string();
                out.insert(rel, std::fs::read(&path).expect("readable"));
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = tmp.path().join("toy.jsonl");
    let big = tmp.path().join("big.jsonl");
    let jsonl = |pairs: Vec<factsum::data::DocumentPair>| factsum::data::to_jsonl(&pairs).map_err(err);
    std::fs::write(&data, jsonl(toy_corpus(8, 0))?).map_err(|e| e.to_string())?;
    std::fs::write(&big, jsonl(toy_corpus(24, 1))?).map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    pipeline_run(&a, &data, &big)?;
    pipeline_run(&b, &data, &big)?;
    let (fa, fb) = (collect_outputs(&a), collect_outputs(&b));
    ensure(fa.keys().eq(fb.keys()), || "runs wrote different files".into())?;
    let differing: Vec<&String> = fa.iter().filter(|(k, v)| fb[*k] != **v).map(|(k, _)| k).collect();
    ensure(differing.is_empty(), || format!("files differ: {differing:?}"))?;
    ensure(fa.keys().any(|k| k.ends_with(".ckpt")), || {
        "no checkpoints written".into()
    })?;
    Ok(format!(
        "{} output files byte-identical across two runs",
        fa.len()
    ))
}

// ------------------------------------------------------------------ main

fn main() {
    let start = Instant::now();
    let mut failures = 0;
    let mut report = |name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("PASS {name}: {detail}"),
        Err(detail) => {
            failures += 1;
            println!("FAIL {name}: {detail}");
        }
    };
    report("gradient suite", gradient_suite());
    report("kg attention oracle", kg_oracle());
    report("levi invariants", levi_invariants());
    report("rmr oracle", rmr_oracle());
    report("rouge curated pairs", rouge_curated());
    let mut overfit = None;
    report("overfit pipeline", overfit_pipeline(&mut overfit));
    report("graph pathway liveness", graph_liveness(&overfit));
    report("fc round trip", fc_round_trip());
    report("factcc classifier", factcc_classifier());
    report("decoding contracts", decoding_contracts());
    report("determinism", determinism());
    println!("acceptance finished in {:.1?}", start.elapsed());
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
