use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::textkit::{tag_entities, tokenize, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Transform {
    EntitySwap,
    PronounSwap,
    Negation,
    ParaphraseStub,
}

impl Transform {
    pub const CORRUPTING: [Transform; 3] =
        [Transform::EntitySwap, Transform::PronounSwap, Transform::Negation];

    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "entityswap" | "entity" => Some(Self::EntitySwap),
            "pronounswap" | "pronoun" => Some(Self::PronounSwap),
            "negation" => Some(Self::Negation),
            "paraphrasestub" | "paraphrase" => Some(Self::ParaphraseStub),
            _ => None,
        }
    }
}

/// A clean summary, its corruption and how it was produced. Serializes to
/// `{"article","clean","corrupted","transform","swap":[orig,repl]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSample {
    pub article: String,
    #[serde(rename = "clean")]
    pub clean_summary: String,
    #[serde(rename = "corrupted")]
    pub corrupted_summary: String,
    pub transform: Transform,
    #[serde(rename = "swap", default)]
    pub swap_record: Option<(String, String)>,
}

/// Stand-in for back-translation: any text-to-text rewrite that should
/// preserve meaning.
pub trait Paraphraser {
    fn paraphrase(&self, text: &str) -> String;
}

/// Returns the text unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityParaphraser;

impl Paraphraser for IdentityParaphraser {
    fn paraphrase(&self, text: &str) -> String {
        text.to_string()
    }
}

pub fn paraphrase_sample(summary: &str, article: &str, p: &dyn Paraphraser) -> CorruptionSample {
    CorruptionSample {
        article: article.to_string(),
        clean_summary: summary.to_string(),
        corrupted_summary: p.paraphrase(summary),
        transform: Transform::ParaphraseStub,
        swap_record: None,
    }
}

fn splice(text: &str, start: usize, end: usize, with: &str) -> String {
    format!("{}{}{}", &text[..start], with, &text[end..])
}

/// Replaces one summary entity with a different same-type entity from the
/// article. `None` when no summary entity has an alternative.
pub fn forge_entity_swap<R: Rng + ?Sized>(
    summary: &str,
    article: &str,
    rng: &mut R,
) -> Option<CorruptionSample> {
    let s_tokens = tokenize(summary);
    let a_tokens = tokenize(article);
    let a_entities = tag_entities(&a_tokens);
    let mut eligible = Vec::new();
    for e in tag_entities(&s_tokens) {
        let key = crate::textkit::normalize(&e.text);
        let mut alts: Vec<&str> = a_entities
            .iter()
            .filter(|a| a.etype == e.etype && crate::textkit::normalize(&a.text) != key)
            .map(|a| a.text.as_str())
            .collect();
        alts.sort_unstable();
        alts.dedup();
        if !alts.is_empty() {
            eligible.push((e, alts));
        }
    }
    let (entity, alts) = eligible.choose(rng)?;
    let replacement = *alts.choose(rng)?;
    let start = s_tokens[entity.token_span.0].span.start;
    let end = s_tokens[entity.token_span.1 - 1].span.end;
    Some(CorruptionSample {
        article: article.to_string(),
        clean_summary: summary.to_string(),
        corrupted_summary: splice(summary, start, end, replacement),
        transform: Transform::EntitySwap,
        swap_record: Some((summary[start..end].to_string(), replacement.to_string())),
    })
}

const PRONOUN_SWAPS: [(&str, &str); 7] = [
    ("he", "she"),
    ("she", "he"),
    ("his", "her"),
    ("her", "his"),
    ("him", "her"),
    ("they", "he"),
    ("their", "his"),
];

fn match_case(template: &str, word: &str) -> String {
    let mut chars = template.chars();
    let first_upper = chars.next().is_some_and(char::is_uppercase);
    let all_upper = template.chars().count() > 1 && template.chars().all(char::is_uppercase);
    if all_upper {
        word.to_uppercase()
    } else if first_upper {
        let mut c = word.chars();
        c.next()
            .map(|f| f.to_uppercase().chain(c).collect())
            .unwrap_or_default()
    } else {
        word.to_string()
    }
}

/// Swaps one pronoun through the closed table he→she, she→he, his→her,
/// her→his, him→her, they→he, their→his, keeping its capitalization.
pub fn forge_pronoun_swap<R: Rng + ?Sized>(summary: &str, rng: &mut R) -> Option<CorruptionSample> {
    let tokens = tokenize(summary);
    let sites: Vec<(&Token, &str)> = tokens
        .iter()
        .filter(|t| t.is_word())
        .filter_map(|t| {
            let lower = t.lower();
            PRONOUN_SWAPS
                .iter()
                .find(|(from, _)| *from == lower)
                .map(|&(_, to)| (t, to))
        })
        .collect();
    let &(tok, to) = sites.choose(rng)?;
    let replacement = match_case(&tok.text, to);
    Some(CorruptionSample {
        article: String::new(),
        clean_summary: summary.to_string(),
        corrupted_summary: splice(summary, tok.span.start, tok.span.end, &replacement),
        transform: Transform::PronounSwap,
        swap_record: Some((tok.text.clone(), replacement)),
    })
}

const NEGATABLE: [&str; 9] = ["is", "are", "was", "were", "has", "have", "had", "will", "can"];

/// Positive form of a negated contraction of a listed auxiliary.
fn uncontract(lower: &str) -> Option<&'static str> {
    Some(match lower {
        "isn't" => "is",
        "aren't" => "are",
        "wasn't" => "was",
        "weren't" => "were",
        "hasn't" => "has",
        "haven't" => "have",
        "hadn't" => "had",
        "won't" => "will",
        "can't" | "cannot" => "can",
        _ => return None,
    })
}

/// Toggles negation at the first site: a listed auxiliary gains `not`, an
/// auxiliary already followed by `not` loses it, and a contraction such
/// as `isn't` becomes `is`.
pub fn forge_negation<R: Rng + ?Sized>(summary: &str, _rng: &mut R) -> Option<CorruptionSample> {
    let tokens = tokenize(summary);
    for (i, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::Word {
            continue;
        }
        let lower = tok.lower();
        let corrupted = if let Some(base) = uncontract(&lower) {
            splice(
                summary,
                tok.span.start,
                tok.span.end,
                &match_case(&tok.text, base),
            )
        } else if NEGATABLE.contains(&lower.as_str()) {
            match tokens.get(i + 1) {
                Some(next) if next.lower() == "not" => splice(summary, tok.span.end, next.span.end, ""),
                _ => splice(summary, tok.span.end, tok.span.end, " not"),
            }
        } else {
            continue;
        };
        return Some(CorruptionSample {
            article: String::new(),
            clean_summary: summary.to_string(),
            corrupted_summary: corrupted,
            transform: Transform::Negation,
            swap_record: None,
        });
    }
    None
}

/// Runs one transform; the article is attached to the sample.
pub fn forge<R: Rng + ?Sized>(
    transform: Transform,
    summary: &str,
    article: &str,
    paraphraser: &dyn Paraphraser,
    rng: &mut R,
) -> Option<CorruptionSample> {
    let sample = match transform {
        Transform::EntitySwap => forge_entity_swap(summary, article, rng),
        Transform::PronounSwap => forge_pronoun_swap(summary, rng),
        Transform::Negation => forge_negation(summary, rng),
        Transform::ParaphraseStub => Some(paraphrase_sample(summary, article, paraphraser)),
    }?;
    Some(CorruptionSample {
        article: article.to_string(),
        ..sample
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn entity_swap_uses_article_alternative() {
        let s = forge_entity_swap(
            "Gareth Bale scored.",
            "Gareth Bale and Cristiano Ronaldo played.",
            &mut rng(),
        )
        .unwrap();
        assert_eq!(s.corrupted_summary, "Cristiano Ronaldo scored.");
        assert_eq!(
            s.swap_record,
            Some(("Gareth Bale".to_string(), "Cristiano Ronaldo".to_string()))
        );
    }

    #[test]
    fn entity_swap_skips() {
        assert!(forge_entity_swap("the team won.", "Bale played.", &mut rng()).is_none());
        assert!(forge_entity_swap("Bale won.", "Bale played.", &mut rng()).is_none());
    }

    #[test]
    fn pronoun_swap_table() {
        let s = forge_pronoun_swap("He scored twice", &mut rng()).unwrap();
        assert_eq!(s.corrupted_summary, "She scored twice");
        assert!(forge_pronoun_swap("The team scored", &mut rng()).is_none());
        let a = forge_pronoun_swap("he saw his brother and her", &mut ChaCha8Rng::seed_from_u64(1));
        let b = forge_pronoun_swap("he saw his brother and her", &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
    }

    #[test]
    fn negation_toggles() {
        let n = |s: &str| forge_negation(s, &mut rng()).map(|c| c.corrupted_summary);
        assert_eq!(n("Bale is a winger").as_deref(), Some("Bale is not a winger"));
        assert_eq!(n("Bale is not a winger").as_deref(), Some("Bale is a winger"));
        assert_eq!(n("Bale isn't a winger").as_deref(), Some("Bale is a winger"));
        assert_eq!(n("Bale won't play").as_deref(), Some("Bale will play"));
        assert_eq!(n("Bale scored"), None);
    }

    #[test]
    fn samples_serialize_with_short_keys() {
        let s = forge_entity_swap("Bale won.", "Bale and Kane played.", &mut rng()).unwrap();
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["transform"], "ENTITY_SWAP");
        assert_eq!(v["swap"], serde_json::json!(["Bale", "Kane"]));
        assert_eq!(v["clean"], "Bale won.");
    }
}
