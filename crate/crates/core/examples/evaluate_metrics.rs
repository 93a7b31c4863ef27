//! ROUGE, relation matching rate and novel n-grams for a faithful and an
//! unfaithful summary of the same article.

use factsum::metrics::{novel_ngram_ratio, EvalReport};
use factsum::openie::extract_document;

fn main() -> factsum::Result<()> {
    let article = "Alan Hart signed for Rovers on Monday. He has joined from Leeds. \
                   Ian Price scored twice as Rovers won at home.";
    let reference = "Alan Hart signed for Rovers. He has joined from Leeds.";
    let candidates = [
        reference,
        "Alan Hart signed for United. He has joined from Leeds.",
        "Ian Price signed for Rovers. He has not joined from Leeds.",
    ];
    println!("article tuples:");
    for t in &extract_document(article).tuples {
        println!("    ({} | {} | {})", t.subject, t.relation, t.object);
    }
    for c in candidates {
        let r = EvalReport::compute(c, article, Some(reference), None)?;
        println!("{c}");
        println!(
            "    R1 {:.3?}  R2 {:.3?}  RL {:.3?}  RMR1 {:?}  RMR2 {:?}  hits {:?}  novel-2 {:?}",
            r.rouge1,
            r.rouge2,
            r.rouge_l,
            r.rmr1,
            r.rmr2,
            r.hits,
            novel_ngram_ratio(c, article, 2)
        );
    }
    Ok(())
}
