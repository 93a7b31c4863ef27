use super::Span;

/// Abbreviations whose trailing period never ends a sentence.
const ABBREVIATIONS: &[&str] = &[
    "Mr.", "Mrs.", "Ms.", "Dr.", "St.", "Jr.", "Sr.", "Prof.", "Gen.", "Gov.", "Sen.", "Rep.", "Col.",
    "Capt.", "Lt.", "Sgt.", "Rev.", "Mt.", "No.", "Inc.", "Ltd.", "Co.", "Corp.", "U.S.", "U.K.", "U.N.",
    "E.U.", "vs.", "etc.", "e.g.", "i.e.", "Jan.", "Feb.", "Aug.", "Sept.", "Oct.", "Nov.", "Dec.",
];

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201D}' | '\u{2019}')
}

/// Splits text into sentence spans.
///
/// A sentence ends after a run of `.`, `!` or `?` (plus any closing quotes
/// or brackets) when the next non-whitespace character is uppercase, or
/// when only whitespace remains. Periods closing a known abbreviation never
/// split. Returned spans are trimmed of surrounding whitespace.
pub fn split_sentences(text: &str) -> Vec<Span> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut spans = Vec::new();
    let mut sentence_start: Option<usize> = None;
    let mut i = 0;
    while i < chars.len() {
        let (byte, c) = chars[i];
        if sentence_start.is_none() && !c.is_whitespace() {
            sentence_start = Some(byte);
        }
        if !is_terminal(c) {
            i += 1;
            continue;
        }
        let mut end = i + 1;
        while end < chars.len() && is_terminal(chars[end].1) {
            end += 1;
        }
        while end < chars.len() && is_closer(chars[end].1) {
            end += 1;
        }
        let mut next = end;
        while next < chars.len() && chars[next].1.is_whitespace() {
            next += 1;
        }
        let boundary = if next == chars.len() {
            true
        } else {
            next > end && chars[next].1.is_uppercase()
        };
        let abbreviated = c == '.' && end == i + 1 && ends_with_abbreviation(text, byte);
        if boundary && !abbreviated {
            if let Some(start) = sentence_start.take() {
                spans.push(Span::new(start, byte_at(end)));
            }
        }
        i = end;
    }
    if let Some(start) = sentence_start {
        let rest = text[start..].trim_end();
        if !rest.is_empty() {
            spans.push(Span::new(start, start + rest.len()));
        }
    }
    spans
}

/// Whether the whitespace-delimited word ending with the period at `dot`
/// is a listed abbreviation.
fn ends_with_abbreviation(text: &str, dot: usize) -> bool {
    let head = &text[..=dot];
    let word_start = head
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace() || matches!(c, '(' | '"' | '\u{201C}'))
        .map_or(0, |(b, c)| b + c.len_utf8());
    ABBREVIATIONS.contains(&&head[word_start..])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentences(text: &str) -> Vec<&str> {
        split_sentences(text).iter().map(|s| s.slice(text)).collect()
    }

    #[test]
    fn two_terminal_marks() {
        assert_eq!(sentences("A win. B lost!"), ["A win.", "B lost!"]);
    }

    #[test]
    fn empty_text() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   ").is_empty());
    }

    #[test]
    fn abbreviation_does_not_split() {
        assert_eq!(
            sentences("Dr. Smith scored. He won."),
            ["Dr. Smith scored.", "He won."]
        );
        assert_eq!(
            sentences("The U.S. Open ended. Fans left."),
            ["The U.S. Open ended.", "Fans left."]
        );
    }

    #[test]
    fn lowercase_continuation_and_trailing_fragment() {
        assert_eq!(
            sentences("It rose 3.5 percent. then fell"),
            ["It rose 3.5 percent. then fell"]
        );
        assert_eq!(
            sentences("Done? Yes \"really.\" And no"),
            ["Done?", "Yes \"really.\"", "And no"]
        );
    }

    #[test]
    fn spans_cover_all_non_whitespace() {
        let text = "  One. Two!  Three?\nfour. Five";
        let spans = split_sentences(text);
        let mut covered = vec![false; text.len()];
        for w in spans.windows(2) {
            assert!(w[0].end <= w[1].start);
        }
        for s in &spans {
            covered[s.start..s.end].iter_mut().for_each(|c| *c = true);
        }
        for (b, c) in text.char_indices() {
            if !c.is_whitespace() {
                assert!(covered[b], "byte {b} uncovered");
            }
        }
    }
}
