//! Turns extracted tuples into a Levi graph and dumps it as JSON.

use factsum::kgraph::{build_graph, graph_stats};
use factsum::openie::extract_document;

fn main() -> factsum::Result<()> {
    let text = "Bale signed for Madrid. Bale joined from Tottenham. Modric signed for Madrid.";
    let tuples = extract_document(text);
    let graph = build_graph(&tuples);
    let stats = graph_stats(&graph);
    println!(
        "{} tuples -> {} nodes, {} edges, max degree {}, {} components",
        tuples.len(),
        stats.node_count,
        stats.edge_count,
        stats.max_degree,
        stats.component_count
    );
    for node in &graph.nodes {
        let neighbors: Vec<&str> = graph
            .neighbors(node.id)
            .iter()
            .map(|&j| graph.nodes[j].text.as_str())
            .collect();
        println!(
            "{:>2} {:?} {:<12} -> {:?}",
            node.id, node.kind, node.text, neighbors
        );
    }
    println!("{}", serde_json::to_string_pretty(&graph.to_json())?);
    Ok(())
}
