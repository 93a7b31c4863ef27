//! Extracts relation tuples from a few sentences and prints them with
//! their sentence index.

use factsum::openie::extract_document;

fn main() {
    let text = std::env::args().nth(1).unwrap_or_else(|| {
        "Gareth Bale signed for Real Madrid on Monday. He has joined from Tottenham. \
         The winger is a Wales international. Ancelotti did not comment."
            .to_string()
    });
    let set = extract_document(&text);
    println!("{} tuples", set.len());
    for t in &set.tuples {
        println!(
            "[{}] ({} | {} | {})",
            t.sentence_index, t.subject, t.relation, t.object
        );
    }
}
