use std::collections::HashSet;

use super::match_tokens;

/// Percentage of summary n-gram positions whose n-gram never occurs in the
/// article. `None` when the summary has fewer than `n` tokens or `n` is 0.
pub fn novel_ngram_ratio(summary: &str, article: &str, n: usize) -> Option<f64> {
    if n == 0 {
        return None;
    }
    let s = match_tokens(summary);
    if s.len() < n {
        return None;
    }
    let a = match_tokens(article);
    let seen: HashSet<&[String]> = a.windows(n).collect();
    let grams: Vec<&[String]> = s.windows(n).collect();
    let novel = grams.iter().filter(|g| !seen.contains(*g)).count();
    Some(100.0 * novel as f64 / grams.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_enumerated_bigrams() {
        assert_eq!(novel_ngram_ratio("a b c", "a b d", 2), Some(50.0));
    }

    #[test]
    fn copies_and_disjoint_text() {
        let article = "Bale scored twice as Madrid won the final.";
        assert_eq!(novel_ngram_ratio("Madrid won the final", article, 2), Some(0.0));
        assert_eq!(novel_ngram_ratio("Ronaldo missed", article, 1), Some(100.0));
    }

    #[test]
    fn short_summaries_are_absent() {
        assert_eq!(novel_ngram_ratio("one two", "one two three", 3), None);
        assert_eq!(novel_ngram_ratio("", "x", 1), None);
    }

    #[test]
    fn repeated_novel_grams_count_per_position() {
        assert_eq!(novel_ngram_ratio("x x a", "a", 1), Some(100.0 * 2.0 / 3.0));
    }
}
