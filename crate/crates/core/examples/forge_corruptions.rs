//! Forges entity, pronoun and negation corruptions of toy summaries and
//! shows the token diff of each.

use factsum::fc::{make_fc_dataset, token_diff, IdentityParaphraser, Transform};
use factsum::toy::toy_corpus;

fn main() {
    let pairs = toy_corpus(4, 7);
    let (samples, stats) = make_fc_dataset(&pairs, 3, &Transform::CORRUPTING, &IdentityParaphraser, 7);
    println!("{stats:?}");
    for s in &samples {
        let diff = token_diff(&s.clean_summary, &s.corrupted_summary);
        println!("{:?} ({} changed)", s.transform, diff.changed_tokens);
        println!("    clean     {}", s.clean_summary);
        println!("    corrupted {}", s.corrupted_summary);
        if let Some((from, to)) = &s.swap_record {
            println!("    swap      {from} -> {to}");
        }
    }
}
