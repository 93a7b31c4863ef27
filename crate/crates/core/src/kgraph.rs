//! Levi-transformed knowledge graphs built per document.
//!
//! Each tuple (s, r, o) contributes entity nodes for `s` and `o`, a relation
//! node for `r`, and the undirected edges s–r and r–o. Entity nodes are
//! shared across tuples when their normalized text matches; relation nodes
//! are tuple-local.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::openie::TupleSet;
use crate::textkit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Entity,
    Relation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub text: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<(usize, usize)>,
    #[serde(skip)]
    adjacency: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub max_degree: usize,
    pub component_count: usize,
}

impl KnowledgeGraph {
    /// Assembles a graph from explicit nodes and edges, dropping self-loops
    /// and duplicate edges. Node ids are reassigned densely in input order.
    pub fn from_parts(nodes: Vec<(String, NodeKind)>, edges: &[(usize, usize)]) -> Self {
        let nodes: Vec<Node> = nodes
            .into_iter()
            .enumerate()
            .map(|(id, (text, kind))| Node { id, text, kind })
            .collect();
        let mut seen = BTreeSet::new();
        let mut kept = Vec::new();
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for &(a, b) in edges {
            assert!(a < nodes.len() && b < nodes.len(), "edge ({a}, {b}) out of range");
            if a == b || !seen.insert((a.min(b), a.max(b))) {
                continue;
            }
            kept.push((a, b));
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        Self {
            nodes,
            edges: kept,
            adjacency,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn texts(&self) -> Vec<&str> {
        self.nodes.iter().map(|n| n.text.as_str()).collect()
    }

    /// Returns a copy whose node `i` is this graph's node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.nodes.len());
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let nodes = perm
            .iter()
            .map(|&old| (self.nodes[old].text.clone(), self.nodes[old].kind))
            .collect();
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(a, b)| (inverse[a], inverse[b]))
            .collect();
        Self::from_parts(nodes, &edges)
    }

    /// Replaces the text of one node, keeping structure.
    pub fn with_node_text(&self, node: usize, text: &str) -> Self {
        let mut g = self.clone();
        g.nodes[node].text = text.to_string();
        g
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "nodes": self.nodes,
            "edges": self.edges.iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> crate::Result<Self> {
        #[derive(Deserialize)]
        struct Dump {
            nodes: Vec<Node>,
            edges: Vec<(usize, usize)>,
        }
        let dump: Dump = serde_json::from_value(value.clone())?;
        let nodes = dump.nodes.into_iter().map(|n| (n.text, n.kind)).collect();
        Ok(Self::from_parts(nodes, &dump.edges))
    }
}

/// Builds the Levi graph of a tuple set.
pub fn build_graph(tuples: &TupleSet) -> KnowledgeGraph {
    let mut nodes: Vec<(String, NodeKind)> = Vec::new();
    let mut entities: HashMap<String, usize> = HashMap::new();
    let mut relations: HashMap<(String, String, String), usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut entity = |text: &str, nodes: &mut Vec<(String, NodeKind)>| -> usize {
        *entities.entry(textkit::normalize(text)).or_insert_with(|| {
            nodes.push((text.to_string(), NodeKind::Entity));
            nodes.len() - 1
        })
    };
    for t in &tuples.tuples {
        let s = entity(&t.subject, &mut nodes);
        let o = entity(&t.object, &mut nodes);
        let r = *relations.entry(t.key()).or_insert_with(|| {
            nodes.push((t.relation.clone(), NodeKind::Relation));
            nodes.len() - 1
        });
        edges.push((s, r));
        edges.push((r, o));
    }
    KnowledgeGraph::from_parts(nodes, &edges)
}

pub fn graph_stats(g: &KnowledgeGraph) -> GraphStats {
    let n = g.nodes.len();
    let mut seen = vec![false; n];
    let mut components = 0;
    let mut stack = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        components += 1;
        seen[root] = true;
        stack.push(root);
        while let Some(v) = stack.pop() {
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    GraphStats {
        node_count: n,
        edge_count: g.edges.len(),
        max_degree: (0..n).map(|v| g.neighbors(v).len()).max().unwrap_or(0),
        component_count: components,
    }
}
