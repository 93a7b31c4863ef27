//! Overfits the desk summarizer on eight synthetic documents and decodes
//! them back.

use std::time::Instant;

use factsum::fasum::{FasumConfig, Summarizer};
use factsum::toy::{toy_corpus, toy_vocab};

fn main() -> factsum::Result<()> {
    let pairs = toy_corpus(8, 0);
    let vocab = toy_vocab(&pairs, 300)?;
    let mut config = FasumConfig::desk();
    if let Some(e) = std::env::args().nth(1) {
        config.epochs = e.parse().expect("epochs");
    }
    if let Some(lr) = std::env::args().nth(2) {
        config.lr = lr.parse().expect("lr");
    }
    let mut model = Summarizer::new(vocab, config)?;
    let data: Vec<_> = pairs
        .iter()
        .map(|p| model.prepare(&p.article, p.summary.as_deref().unwrap_or("")))
        .collect();
    println!(
        "vocab {} pieces, {} parameters",
        model.vocab.len(),
        model.model.params.value_count()
    );
    let start = Instant::now();
    let outcome = model.fit(&data, &data)?;
    println!(
        "trained {} epochs in {:.1?}",
        outcome.loss_curve.len(),
        start.elapsed()
    );
    for (e, l) in outcome.loss_curve.iter().enumerate().step_by(10) {
        println!("epoch {:>3}  loss {l:.4}", e + 1);
    }
    println!("validation ROUGE-L: {:?}", outcome.validation);
    println!("token accuracy {:.4}", model.token_accuracy(&data)?);
    for (p, ex) in pairs.iter().zip(&data) {
        let out = model.generate(ex, &model.decode_options())?;
        let gold = p.summary.as_deref().unwrap_or("");
        println!(
            "{} {}",
            if out.text == gold { "exact" } else { "DIFF " },
            out.text
        );
    }
    Ok(())
}
