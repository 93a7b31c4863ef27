use crate::error::{Error, Result};
use crate::kgraph::KnowledgeGraph;
use crate::neuro::layers::{
    init_attention, init_bilstm, init_feed_forward, init_gat, init_layer_norm, init_linear,
};
use crate::neuro::{
    bilstm_final_batch, causal_mask, feed_forward, gat_layer, kg_cross_attention, layer_norm, linear,
    multi_head_attention, ParameterStore, Tape, Tensor, Var,
};
use crate::textkit::{SubwordVocab, BOS, EOS, UNK};

use super::config::FasumConfig;

/// A graph ready for the model: node texts as subword ids plus adjacency.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GraphInput {
    pub node_ids: Vec<Vec<usize>>,
    pub adjacency: Vec<Vec<usize>>,
}

impl GraphInput {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_graph(graph: &KnowledgeGraph, vocab: &SubwordVocab, lowercase: bool) -> Self {
        let node_ids = graph
            .nodes
            .iter()
            .map(|n| {
                let text = if lowercase {
                    n.text.to_lowercase()
                } else {
                    n.text.clone()
                };
                let ids: Vec<usize> = vocab.encode(&text).into_iter().map(|i| i as usize).collect();
                if ids.is_empty() {
                    vec![UNK as usize]
                } else {
                    ids
                }
            })
            .collect();
        let adjacency = (0..graph.len()).map(|i| graph.neighbors(i).to_vec()).collect();
        Self { node_ids, adjacency }
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }
}

/// One training or inference instance in subword ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub source: Vec<u32>,
    pub target: Vec<u32>,
    pub graph: GraphInput,
}

pub(crate) fn init_encoder(store: &mut ParameterStore, prefix: &str, layers: usize, dim: usize, ff: usize) {
    for l in 0..layers {
        init_attention(store, &format!("{prefix}.{l}.attn"), dim);
        init_layer_norm(store, &format!("{prefix}.{l}.ln1"), dim);
        init_feed_forward(store, &format!("{prefix}.{l}.ff"), dim, ff);
        init_layer_norm(store, &format!("{prefix}.{l}.ln2"), dim);
    }
}

/// Post-norm residual wrapper: `LN(x + dropout(sub))`.
fn residual(tape: &mut Tape, store: &ParameterStore, ln: &str, x: Var, sub: Var, dropout: f64) -> Var {
    let sub = tape.dropout(sub, dropout);
    let sum = tape.add(x, sub);
    layer_norm(tape, store, ln, sum)
}

pub(crate) fn encoder_stack(
    tape: &mut Tape,
    store: &ParameterStore,
    prefix: &str,
    mut x: Var,
    layers: usize,
    heads: usize,
    dropout: f64,
) -> Result<Var> {
    for l in 0..layers {
        let p = format!("{prefix}.{l}");
        let a = multi_head_attention(tape, store, &format!("{p}.attn"), x, x, x, heads, None, dropout)?;
        x = residual(tape, store, &format!("{p}.ln1"), x, a.context, dropout);
        let f = feed_forward(tape, store, &format!("{p}.ff"), x, dropout);
        x = residual(tape, store, &format!("{p}.ln2"), x, f, dropout);
    }
    Ok(x)
}

/// Token plus learned positional embedding.
pub(crate) fn embed_tokens(
    tape: &mut Tape,
    store: &ParameterStore,
    ids: &[u32],
    dropout: f64,
) -> Result<Var> {
    let vocab = store.get("tok_emb").map(Tensor::rows).unwrap_or(0);
    let positions = store.get("pos_emb").map(Tensor::rows).unwrap_or(0);
    if let Some(&bad) = ids.iter().find(|&&i| i as usize >= vocab) {
        return Err(Error::IdOutOfRange(bad, vocab));
    }
    if ids.len() > positions {
        return Err(Error::ShapeMismatch(format!(
            "{} positions requested, {positions} available",
            ids.len()
        )));
    }
    let table = tape.param(store, "tok_emb");
    let pos = tape.param(store, "pos_emb");
    let idx: Vec<usize> = ids.iter().map(|&i| i as usize).collect();
    let tok = tape.gather_rows(table, &idx);
    let pos_idx: Vec<usize> = (0..ids.len()).collect();
    let p = tape.gather_rows(pos, &pos_idx);
    let x = tape.add(tok, p);
    Ok(tape.dropout(x, dropout))
}

/// Transformer encoder–decoder whose decoder blocks also attend over
/// knowledge-graph node embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct FasumModel {
    pub config: FasumConfig,
    pub params: ParameterStore,
}

impl FasumModel {
    pub fn new(config: FasumConfig) -> Result<Self> {
        config.validate()?;
        let c = &config;
        let d = c.model_dim;
        let mut store = ParameterStore::new(c.seed);
        store.add_xavier("tok_emb", c.vocab_size, d);
        store.add_xavier("pos_emb", c.max_article_len.max(c.max_summary_len + 1), d);
        init_encoder(&mut store, "enc", c.layers, d, c.ff_dim);
        for l in 0..c.layers {
            let p = format!("dec.{l}");
            init_attention(&mut store, &format!("{p}.self"), d);
            init_layer_norm(&mut store, &format!("{p}.ln1"), d);
            init_attention(&mut store, &format!("{p}.cross"), d);
            init_layer_norm(&mut store, &format!("{p}.ln2"), d);
            if c.use_kg {
                init_layer_norm(&mut store, &format!("{p}.ln_kg"), d);
            }
            init_feed_forward(&mut store, &format!("{p}.ff"), d, c.ff_dim);
            init_layer_norm(&mut store, &format!("{p}.ln3"), d);
        }
        if c.use_kg {
            init_bilstm(&mut store, "kg.lstm", d, c.bilstm_hidden);
            let mut width = 2 * c.bilstm_hidden;
            for g in 0..c.gat_layers {
                init_gat(
                    &mut store,
                    &format!("kg.gat.{g}"),
                    width,
                    c.gat_heads,
                    c.gat_hidden,
                );
                width = c.gat_heads * c.gat_hidden;
            }
            init_linear(&mut store, "kg.proj", c.gat_hidden, d);
        }
        init_linear(&mut store, "out", d, c.vocab_size);
        Ok(Self {
            config,
            params: store,
        })
    }

    pub fn with_params(config: FasumConfig, params: ParameterStore) -> Self {
        Self { config, params }
    }

    /// Node embeddings `e_1..e_|V|` (|V|×model_dim). `None` when the model
    /// has no graph pathway; an empty graph gives a 0×model_dim matrix.
    pub fn embed_graph(&self, tape: &mut Tape, graph: &GraphInput) -> Result<Option<Var>> {
        let c = &self.config;
        if !c.use_kg {
            return Ok(None);
        }
        if graph.is_empty() {
            return Ok(Some(tape.constant(Tensor::zeros(vec![0, c.model_dim]))));
        }
        let vocab = c.vocab_size;
        if let Some(bad) = graph.node_ids.iter().flatten().find(|&&i| i >= vocab) {
            return Err(Error::IdOutOfRange(*bad as u32, vocab));
        }
        let table = tape.param(&self.params, "tok_emb");
        let mut h = bilstm_final_batch(tape, &self.params, "kg.lstm", table, &graph.node_ids)?;
        for g in 0..c.gat_layers {
            let last = g + 1 == c.gat_layers;
            h = gat_layer(
                tape,
                &self.params,
                &format!("kg.gat.{g}"),
                h,
                &graph.adjacency,
                c.gat_heads,
                last,
                c.dropout_gat,
            )?;
        }
        Ok(Some(linear(tape, &self.params, "kg.proj", h)))
    }

    /// Encoder states for an article (len×model_dim).
    pub fn encode(&self, tape: &mut Tape, source: &[u32]) -> Result<Var> {
        if source.is_empty() {
            return Err(Error::EmptyArticle);
        }
        let c = &self.config;
        let x = embed_tokens(tape, &self.params, source, c.dropout)?;
        encoder_stack(tape, &self.params, "enc", x, c.layers, c.heads, c.dropout)
    }

    /// Final decoder states `z_1..z_t` for decoder inputs `prefix`.
    pub fn decode_states(
        &self,
        tape: &mut Tape,
        prefix: &[u32],
        memory: Var,
        nodes: Option<Var>,
    ) -> Result<Var> {
        let c = &self.config;
        let p = &self.params;
        let mask = causal_mask(prefix.len());
        let mut x = embed_tokens(tape, p, prefix, c.dropout)?;
        for l in 0..c.layers {
            let b = format!("dec.{l}");
            let a = multi_head_attention(
                tape,
                p,
                &format!("{b}.self"),
                x,
                x,
                x,
                c.heads,
                Some(&mask),
                c.dropout,
            )?;
            x = residual(tape, p, &format!("{b}.ln1"), x, a.context, c.dropout);
            let a = multi_head_attention(
                tape,
                p,
                &format!("{b}.cross"),
                x,
                memory,
                memory,
                c.heads,
                None,
                c.dropout,
            )?;
            x = residual(tape, p, &format!("{b}.ln2"), x, a.context, c.dropout);
            if c.use_kg {
                let u = kg_cross_attention(tape, x, nodes);
                x = residual(tape, p, &format!("{b}.ln_kg"), x, u, c.dropout);
            }
            let f = feed_forward(tape, p, &format!("{b}.ff"), x, c.dropout);
            x = residual(tape, p, &format!("{b}.ln3"), x, f, c.dropout);
        }
        Ok(x)
    }

    /// `log softmax(W z)` for each row of `states`.
    pub fn log_probs(&self, tape: &mut Tape, states: Var) -> Var {
        let logits = linear(tape, &self.params, "out", states);
        tape.log_softmax(logits)
    }

    /// Decoder inputs (BOS ⊕ target) and shifted targets (target ⊕ EOS).
    pub fn teacher_forcing(&self, target: &[u32]) -> (Vec<u32>, Vec<u32>) {
        let t = &target[..target.len().min(self.config.max_summary_len)];
        let mut input = Vec::with_capacity(t.len() + 1);
        input.push(BOS);
        input.extend_from_slice(t);
        let mut gold = t.to_vec();
        gold.push(EOS);
        (input, gold)
    }

    /// Teacher-forced per-position log-probabilities and gold ids.
    pub fn forward(&self, tape: &mut Tape, ex: &Example) -> Result<(Var, Vec<u32>)> {
        if ex.source.is_empty() {
            return Err(Error::EmptyArticle);
        }
        if ex.target.is_empty() {
            return Err(Error::EmptySummary);
        }
        let source = &ex.source[..ex.source.len().min(self.config.max_article_len)];
        let memory = self.encode(tape, source)?;
        let nodes = self.embed_graph(tape, &ex.graph)?;
        let (input, gold) = self.teacher_forcing(&ex.target);
        let states = self.decode_states(tape, &input, memory, nodes)?;
        Ok((self.log_probs(tape, states), gold))
    }

    /// Mean token cross-entropy under teacher forcing.
    pub fn loss(&self, tape: &mut Tape, ex: &Example) -> Result<Var> {
        let (lp, gold) = self.forward(tape, ex)?;
        let targets: Vec<Option<usize>> = gold.iter().map(|&g| Some(g as usize)).collect();
        Ok(tape.nll(lp, &targets))
    }

    /// Teacher-forced argmax hits and position count (EOS included).
    pub fn token_accuracy(&self, ex: &Example) -> Result<(usize, usize)> {
        let mut tape = Tape::new();
        let (lp, gold) = self.forward(&mut tape, ex)?;
        let lp = tape.value(lp);
        let hits = gold
            .iter()
            .enumerate()
            .filter(|&(i, &g)| argmax(lp.row(i)) == g as usize)
            .count();
        Ok((hits, gold.len()))
    }
}

/// Index of the largest value; the lowest index wins ties.
pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn micro() -> FasumConfig {
        FasumConfig {
            layers: 1,
            heads: 2,
            model_dim: 8,
            ff_dim: 12,
            vocab_size: 20,
            gat_heads: 2,
            gat_hidden: 3,
            bilstm_hidden: 4,
            max_article_len: 12,
            max_summary_len: 6,
            min_summary_len: 1,
            ..FasumConfig::desk()
        }
    }

    fn example() -> Example {
        Example {
            source: vec![5, 6, 7, 8, 9],
            target: vec![10, 11, 12],
            graph: GraphInput {
                node_ids: vec![vec![5, 6], vec![13], vec![7]],
                adjacency: vec![vec![1], vec![0, 2], vec![1]],
            },
        }
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let m = FasumModel::new(micro()).unwrap();
        let mut ex = example();
        ex.target.clear();
        assert!(matches!(m.loss(&mut Tape::new(), &ex), Err(Error::EmptySummary)));
        ex.source.clear();
        assert!(matches!(m.loss(&mut Tape::new(), &ex), Err(Error::EmptyArticle)));
    }

    #[test]
    fn loss_is_deterministic() {
        let a = FasumModel::new(micro()).unwrap();
        let b = FasumModel::new(micro()).unwrap();
        let mut t1 = Tape::new();
        let mut t2 = Tape::new();
        let l1 = a.loss(&mut t1, &example()).unwrap();
        let l2 = b.loss(&mut t2, &example()).unwrap();
        assert_eq!(t1.value(l1).item(), t2.value(l2).item());
    }

    #[test]
    fn empty_graph_gives_empty_embedding() {
        let m = FasumModel::new(micro()).unwrap();
        let mut tape = Tape::new();
        let e = m.embed_graph(&mut tape, &GraphInput::empty()).unwrap().unwrap();
        assert_eq!(tape.dims(e), (0, 8));
    }

    #[test]
    fn long_articles_are_truncated() {
        let m = FasumModel::new(micro()).unwrap();
        let mut ex = example();
        ex.source = (5..19).cycle().take(40).collect();
        assert!(m.loss(&mut Tape::new(), &ex).is_ok());
    }
}
