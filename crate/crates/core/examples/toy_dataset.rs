//! Writes the synthetic corpus as a JSON Lines dataset for the CLI.
//!
//! `cargo run --example toy_dataset -- 8 0 > toy.jsonl`

use factsum::data::to_jsonl;
use factsum::toy::toy_corpus;

fn main() -> factsum::Result<()> {
    let mut args = std::env::args().skip(1);
    let n = args.next().and_then(|a| a.parse().ok()).unwrap_or(8);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(0);
    print!("{}", to_jsonl(&toy_corpus(n, seed))?);
    Ok(())
}
