//! Trains the fact corrector on forged corruptions of synthetic summaries
//! and repairs a few of them.

use std::time::Instant;

use factsum::fasum::FasumConfig;
use factsum::fc::{fc_config, make_fc_dataset, Corrector, IdentityParaphraser, Transform};
use factsum::toy::{toy_corpus, toy_vocab};

fn main() -> factsum::Result<()> {
    let pairs = toy_corpus(8, 0);
    let vocab = toy_vocab(&pairs, 300)?;
    let (samples, stats) = make_fc_dataset(&pairs, 3, &Transform::CORRUPTING, &IdentityParaphraser, 0);
    println!("{} samples: {stats:?}", samples.len());

    let mut config = fc_config(&FasumConfig::desk());
    if let Some(e) = std::env::args().nth(1) {
        config.epochs = e.parse().expect("epochs");
    }
    let mut corrector = Corrector::new(vocab, config)?;
    let start = Instant::now();
    let outcome = corrector.fit(&samples, &samples)?;
    println!(
        "trained {} epochs in {:.1?}",
        outcome.loss_curve.len(),
        start.elapsed()
    );
    println!("validation ROUGE-L: {:?}", outcome.validation);

    let mut exact = 0;
    for s in &samples {
        let c = corrector.correct(&s.corrupted_summary, &s.article)?;
        let ok = c.corrected == s.clean_summary;
        exact += ok as usize;
        println!(
            "{:?} {} | {} -> {} ({} changed)",
            s.transform,
            if ok { "ok " } else { "BAD" },
            s.corrupted_summary,
            c.corrected,
            c.diff.changed_tokens
        );
    }
    println!("exact recovery {exact}/{}", samples.len());
    Ok(())
}
