//! Deterministic synthetic news corpus for demos and tests.
//!
//! Every slot of the templates draws from its own pool: people who sign,
//! people who score, clubs and towns never share a name, and every player
//! is referred to as "he". A forged entity or pronoun swap therefore
//! always produces a combination that never occurs in clean text.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::DocumentPair;
use crate::error::Result;
use crate::textkit::{train_bpe, SubwordVocab};

pub const SIGNERS: [&str; 8] = [
    "Alan Hart",
    "Ben Cole",
    "Carl Dunn",
    "Dean Ford",
    "Eric Hale",
    "Frank Lowe",
    "Gary Mills",
    "Harry Nash",
];
pub const SCORERS: [&str; 8] = [
    "Ian Price",
    "Jack Reed",
    "Kyle Shaw",
    "Liam Todd",
    "Mark Vane",
    "Neil Wade",
    "Owen Yates",
    "Paul Zane",
];
pub const CLUBS: [&str; 8] = [
    "Rovers",
    "United",
    "Athletic",
    "Wanderers",
    "Rangers",
    "Albion",
    "Villa",
    "County",
];
pub const TOWNS: [&str; 8] = [
    "Leeds", "Derby", "Bristol", "Norwich", "Exeter", "Carlisle", "Preston", "Reading",
];
const DAYS: [&str; 5] = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday"];

/// `n` article/summary pairs. Signer, club and town are drawn from shuffled
/// pools so the first eight documents never repeat a signer.
pub fn toy_corpus(n: usize, seed: u64) -> Vec<DocumentPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut signers = SIGNERS;
    signers.shuffle(&mut rng);
    (0..n)
        .map(|i| {
            let signer = signers[i % SIGNERS.len()];
            let scorer = SCORERS[rng.gen_range(0..SCORERS.len())];
            let club = CLUBS[rng.gen_range(0..CLUBS.len())];
            let town = TOWNS[rng.gen_range(0..TOWNS.len())];
            let day = DAYS[rng.gen_range(0..DAYS.len())];
            let article = format!(
                "{signer} signed for {club} on {day}. He has joined from {town}. \
                 {scorer} scored twice as {club} won at home."
            );
            let summary = format!("{signer} signed for {club}. He has joined from {town}.");
            DocumentPair::new(&format!("toy-{i:03}"), &article, &summary)
        })
        .collect()
}

/// Subword vocabulary over every article and summary of `pairs`.
pub fn toy_vocab(pairs: &[DocumentPair], target_size: usize) -> Result<SubwordVocab> {
    let mut texts: Vec<&str> = Vec::new();
    for p in pairs {
        texts.push(&p.article);
        if let Some(s) = &p.summary {
            texts.push(s);
        }
    }
    // Pools not drawn for these pairs still get covered, so swaps and
    // paraphrases of held-out text encode without unknown pieces.
    let pools = [
        SIGNERS.join(" "),
        SCORERS.join(" "),
        CLUBS.join(" "),
        TOWNS.join(" "),
        DAYS.join(" "),
    ];
    texts.extend(pools.iter().map(String::as_str));
    texts.push("She her his him they their not");
    train_bpe(&texts, target_size)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic() {
        assert_eq!(toy_corpus(5, 1), toy_corpus(5, 1));
        assert_ne!(toy_corpus(5, 1), toy_corpus(5, 2));
    }

    #[test]
    fn first_eight_signers_are_distinct() {
        let c = toy_corpus(8, 4);
        let mut s: Vec<&str> = c.iter().map(|p| p.summary.as_deref().unwrap()).collect();
        s.sort();
        s.dedup();
        assert_eq!(s.len(), 8);
    }

    #[test]
    fn vocab_round_trips_corpus() {
        let c = toy_corpus(6, 0);
        let v = toy_vocab(&c, 200).unwrap();
        for p in &c {
            assert_eq!(v.decode(&v.encode(&p.article)).unwrap(), p.article);
        }
    }
}
