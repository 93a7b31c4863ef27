use proptest::prelude::*;

use factsum::fasum::{Context, Example, FasumConfig, FasumModel, GraphInput, Summarizer};
use factsum::neuro::{finite_diff_check_sampled, softmax_rows, Tape, Tensor, DEFAULT_STEP};
use factsum::toy::{toy_corpus, toy_vocab};

fn micro(seed: u64) -> FasumConfig {
    FasumConfig {
        layers: 2,
        heads: 2,
        model_dim: 16,
        ff_dim: 24,
        vocab_size: 24,
        gat_layers: 2,
        gat_heads: 2,
        gat_hidden: 4,
        bilstm_hidden: 4,
        max_article_len: 16,
        max_summary_len: 8,
        min_summary_len: 1,
        seed,
        ..FasumConfig::desk()
    }
}

fn graph_strategy() -> impl Strategy<Value = GraphInput> {
    (1usize..6).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::vec(5usize..24, 1..3), n),
            prop::collection::vec(any::<bool>(), n * n),
        )
            .prop_map(move |(node_ids, bits)| {
                let mut adjacency = vec![Vec::new(); n];
                for i in 0..n {
                    for j in i + 1..n {
                        if bits[i * n + j] {
                            adjacency[i].push(j);
                            adjacency[j].push(i);
                        }
                    }
                }
                GraphInput { node_ids, adjacency }
            })
    })
}

fn permute(g: &GraphInput, perm: &[usize]) -> GraphInput {
    // Node `i` moves to position `perm[i]`.
    let n = g.len();
    let mut node_ids = vec![Vec::new(); n];
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        node_ids[perm[i]] = g.node_ids[i].clone();
        adjacency[perm[i]] = g.adjacency[i].iter().map(|&j| perm[j]).collect();
        adjacency[perm[i]].sort_unstable();
    }
    GraphInput { node_ids, adjacency }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn softmax_rows_are_normalized(values in prop::collection::vec(-1e4f64..1e4, 1..40), cols in 1usize..8) {
        let cols = cols.min(values.len());
        let rows = values.len() / cols;
        let values = &values[..rows * cols];
        let out = softmax_rows(values, cols);
        for row in out.chunks(cols) {
            prop_assert!(row.iter().all(|v| v.is_finite()));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::matrix(rows, cols, values.to_vec()));
        let s = tape.softmax(x);
        prop_assert_eq!(tape.value(s).data(), out.as_slice());
    }

    #[test]
    fn node_order_does_not_change_the_next_token_distribution(
        graph in graph_strategy(),
        seed in 0u64..4,
        source in prop::collection::vec(5u32..24, 1..10),
        shuffle_seed in any::<u64>(),
    ) {
        use rand::{seq::SliceRandom, SeedableRng};
        let model = FasumModel::new(micro(seed)).unwrap();
        let mut perm: Vec<usize> = (0..graph.len()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(shuffle_seed));
        let permuted = permute(&graph, &perm);

        let mut tape = Tape::new();
        let a = model.embed_graph(&mut tape, &graph).unwrap().unwrap();
        let b = model.embed_graph(&mut tape, &permuted).unwrap().unwrap();
        let (a, b) = (tape.value(a), tape.value(b));
        for (i, &to) in perm.iter().enumerate() {
            for (x, y) in a.row(i).iter().zip(b.row(to)) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        let p = Context::new(&model, &source, &graph).unwrap().next_log_probs(&model, &[]).unwrap();
        let q = Context::new(&model, &source, &permuted).unwrap().next_log_probs(&model, &[]).unwrap();
        for (x, y) in p.iter().zip(&q) {
            prop_assert!((x.exp() - y.exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn decoding_respects_length_bounds(
        seed in 0u64..4,
        source in prop::collection::vec(5u32..24, 1..10),
        min_len in 0usize..4,
        extra in 1usize..6,
        beam in 1usize..4,
        block in any::<bool>(),
    ) {
        let model = FasumModel::new(micro(seed)).unwrap();
        let ctx = Context::new(&model, &source, &GraphInput::empty()).unwrap();
        let opts = factsum::fasum::DecodeOptions { beam_width: beam, min_len, max_len: min_len + extra, trigram_block: block };
        let out = factsum::fasum::beam_search(&model, &ctx, &opts, &|ids| format!("{ids:?}")).unwrap();
        prop_assert!(out.ids.len() >= min_len && out.ids.len() <= min_len + extra, "{:?}", out.ids);
    }
}

#[test]
fn full_model_gradients_on_two_layer_micro_config() {
    for seed in 0..5 {
        let cfg = micro(seed);
        let model = FasumModel::new(cfg.clone()).unwrap();
        let ex = Example {
            source: vec![5, 9, 11, 7, 20, 6],
            target: vec![12, 8, 15],
            graph: GraphInput {
                node_ids: vec![vec![5, 9], vec![13], vec![7, 20]],
                adjacency: vec![vec![1], vec![0, 2], vec![1]],
            },
        };
        let worst = finite_diff_check_sampled(&model.params, DEFAULT_STEP, 80, seed, |t: &mut Tape, s| {
            FasumModel::with_params(cfg.clone(), s.clone())
                .loss(t, &ex)
                .unwrap()
        });
        assert!(worst < 1e-4, "seed {seed}: {worst:e}");
    }
}

#[test]
fn initialization_is_seeded() {
    let a = FasumModel::new(micro(3)).unwrap();
    let b = FasumModel::new(micro(3)).unwrap();
    let c = FasumModel::new(micro(4)).unwrap();
    assert_eq!(a.params.max_abs_diff(&b.params), 0.0);
    assert!(a.params.max_abs_diff(&c.params) > 0.0);
}

fn toy_setup(epochs: usize) -> (Summarizer, Vec<Example>) {
    let pairs = toy_corpus(4, 2);
    let vocab = toy_vocab(&pairs, 150).unwrap();
    let config = FasumConfig {
        layers: 1,
        model_dim: 32,
        ff_dim: 64,
        gat_layers: 1,
        gat_hidden: 8,
        bilstm_hidden: 16,
        epochs,
        lr: 1e-3,
        ..FasumConfig::desk()
    };
    let model = Summarizer::new(vocab, config).unwrap();
    let data = pairs
        .iter()
        .map(|p| model.prepare(&p.article, p.summary.as_deref().unwrap()))
        .collect();
    (model, data)
}

#[test]
fn untrained_loss_is_near_uniform() {
    let (model, data) = toy_setup(1);
    let ln_v = (model.vocab.len() as f64).ln();
    for ex in &data {
        let mut tape = Tape::new();
        let loss = model.model.loss(&mut tape, ex).unwrap();
        let loss = tape.value(loss).item();
        assert!((loss - ln_v).abs() <= 0.1 * ln_v, "loss {loss} vs ln V {ln_v}");
    }
}

#[test]
fn zero_epochs_leave_parameters_at_init() {
    let (mut model, data) = toy_setup(0);
    let init = model.model.params.clone();
    let outcome = model.fit(&data, &[]).unwrap();
    assert!(outcome.loss_curve.is_empty());
    assert_eq!(model.model.params.max_abs_diff(&init), 0.0);
}

#[test]
fn training_lowers_loss_and_is_reproducible() {
    let (mut a, data) = toy_setup(5);
    let (mut b, _) = toy_setup(5);
    let ca = a.fit(&data, &[]).unwrap().loss_curve;
    let cb = b.fit(&data, &[]).unwrap().loss_curve;
    assert_eq!(ca.len(), 5);
    assert!(ca[4] < ca[0], "{ca:?}");
    assert_eq!(ca, cb);
    assert_eq!(a.model.params.max_abs_diff(&b.model.params), 0.0);
}
