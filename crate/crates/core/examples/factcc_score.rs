//! Trains the claim classifier on forged claims and scores summaries with
//! the sentence-averaged factual score.

use std::time::Instant;

use factsum::fc::IdentityParaphraser;
use factsum::metrics::{factual_score, make_factcc_data, train_factcc, FactccConfig};
use factsum::toy::{toy_corpus, toy_vocab};

fn main() -> factsum::Result<()> {
    let pairs = toy_corpus(96, 1);
    let vocab = toy_vocab(&pairs, 300)?;
    let data = make_factcc_data(&pairs, &IdentityParaphraser, 1);
    println!(
        "{} claims, {} positive",
        data.len(),
        data.iter().filter(|e| e.label).count()
    );
    let mut config = FactccConfig::default();
    if let Some(e) = std::env::args().nth(1) {
        config.epochs = e.parse().expect("epochs");
    }
    let start = Instant::now();
    let (classifier, report) = train_factcc(&data, &vocab, &config)?;
    println!("trained in {:.1?}", start.elapsed());
    println!(
        "held-out accuracy {:.3}, AUC {:.3} (untrained AUC {:.3})",
        report.accuracy, report.auc, report.untrained_auc
    );
    println!("loss curve {:.3?}", report.loss_curve);

    let article = &pairs[0].article;
    let clean = pairs[0].summary.as_deref().unwrap_or("");
    let broken = clean.replacen("He has", "She has not", 1);
    for summary in [clean, broken.as_str()] {
        let (score, claims) = factual_score(article, summary, &classifier)?;
        println!("{score:.3}  {summary}");
        for c in claims {
            println!("    {:.3}  {}", c.score, c.claim);
        }
    }
    Ok(())
}
