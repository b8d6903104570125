//! Language tags and the keyword tables used to interpret short spoken
//! answers. Only English and Spanish carry word tables; every other
//! language falls back to digits.

use serde::{Deserialize, Serialize};

/// A BCP-47 style language tag such as `es-PE` or `en-US`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LanguageTag(String);

impl LanguageTag {
    pub fn new(tag: impl Into<String>) -> Self {
        Self(tag.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Word tables selected by the primary subtag.
    pub fn family(&self) -> Family {
        let primary = self.0.split(['-', '_']).next().unwrap_or("");
        match primary.to_ascii_lowercase().as_str() {
            "en" => Family::English,
            "es" => Family::Spanish,
            _ => Family::Other,
        }
    }
}

impl From<&str> for LanguageTag {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    English,
    Spanish,
    Other,
}

const EN_NUMBERS: [&str; 11] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
];
const ES_NUMBERS: [&str; 11] = [
    "cero", "uno", "dos", "tres", "cuatro", "cinco", "seis", "siete", "ocho", "nueve", "diez",
];

const EN_YES: &[&str] = &[
    "yes", "yeah", "yep", "yup", "sure", "of course", "correct", "right", "absolutely", "definitely",
    "i have", "i do", "i did", "certainly",
];
const EN_NO: &[&str] = &[
    "no", "nope", "nah", "not", "never", "i haven't", "i have not", "i don't", "i didn't",
    "negative",
];
const ES_YES: &[&str] = &[
    "sí", "si", "claro", "por supuesto", "correcto", "afirmativo", "así es", "exacto", "efectivamente",
    "de acuerdo",
];
const ES_NO: &[&str] = &["no", "nunca", "negativo", "tampoco", "jamás", "para nada"];

/// Extra consent-only affirmations ("go ahead" style answers to
/// "do you have fifteen minutes?").
const EN_CONSENT_YES: &[&str] = &["ok", "okay", "go ahead", "alright", "all right", "fine"];
const ES_CONSENT_YES: &[&str] = &["ok", "okey", "vale", "dale", "bueno", "adelante", "listo", "ya"];
/// Phrases that contain a negation token but are affirmative.
const EN_NEGATION_IDIOMS: &[&str] = &["no problem", "not a problem", "why not"];
const ES_NEGATION_IDIOMS: &[&str] = &["no hay problema", "no hay drama", "por qué no", "porque no"];

/// Lower-cases the utterance and splits it into word tokens, dropping
/// punctuation (including the Spanish inverted marks). Apostrophes inside
/// words are kept so "haven't" survives.
pub fn tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '-'))
        .map(|t| t.trim_matches(|c| c == '\'' || c == '-'))
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

fn contains_phrase(tokens: &[String], phrase: &str) -> bool {
    let words: Vec<&str> = phrase.split(' ').collect();
    tokens
        .windows(words.len())
        .any(|w| w.iter().zip(&words).all(|(a, b)| a == b))
}

fn strip_phrases(tokens: &[String], phrases: &[&str]) -> Vec<String> {
    let mut out = tokens.to_vec();
    for phrase in phrases {
        let words: Vec<&str> = phrase.split(' ').collect();
        let mut i = 0;
        while i + words.len() <= out.len() {
            if out[i..i + words.len()].iter().zip(&words).all(|(a, b)| a == b) {
                out.drain(i..i + words.len());
            } else {
                i += 1;
            }
        }
    }
    out
}

fn tables(family: Family) -> (&'static [&'static str], &'static [&'static str]) {
    match family {
        Family::English => (EN_YES, EN_NO),
        Family::Spanish => (ES_YES, ES_NO),
        Family::Other => (&[], &[]),
    }
}

/// Polarity of a short yes/no style utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Yes,
    No,
    Mixed,
    Neither,
}

fn polarity_with(tokens: &[String], family: Family, extra_yes: &[&str]) -> Polarity {
    let idioms = match family {
        Family::English => EN_NEGATION_IDIOMS,
        Family::Spanish => ES_NEGATION_IDIOMS,
        Family::Other => &[],
    };
    let idiom_hit = idioms.iter().any(|p| contains_phrase(tokens, p));
    let rest = strip_phrases(tokens, idioms);
    let (yes, no) = tables(family);
    let mut negations: Vec<&str> = no.to_vec();
    negations.sort_by_key(|p| std::cmp::Reverse(p.len()));
    let has_no = negations.iter().any(|p| contains_phrase(&rest, p));
    // "I have not" must not also read as "I have".
    let rest = strip_phrases(&rest, &negations);
    let has_yes = idiom_hit || yes.iter().chain(extra_yes).any(|p| contains_phrase(&rest, p));
    match (has_yes, has_no) {
        (true, true) => Polarity::Mixed,
        (true, false) => Polarity::Yes,
        (false, true) => Polarity::No,
        (false, false) => Polarity::Neither,
    }
}

/// Classifies an answer to a yes/no question.
pub fn yes_no_polarity(text: &str, family: Family) -> Polarity {
    polarity_with(&tokens(text), family, &[])
}

/// Classifies an answer to the consent prompt; accepts the broader
/// go-ahead vocabulary on top of the yes/no tables.
pub fn consent_polarity(text: &str, family: Family) -> Polarity {
    let extra = match family {
        Family::English => EN_CONSENT_YES,
        Family::Spanish => ES_CONSENT_YES,
        Family::Other => &[],
    };
    polarity_with(&tokens(text), family, extra)
}

/// Every integer mentioned in the utterance, as digits or as a number word
/// from the 0..=10 table.
pub fn numbers(text: &str, family: Family) -> Vec<i64> {
    let words: &[&str] = match family {
        Family::English => &EN_NUMBERS,
        Family::Spanish => &ES_NUMBERS,
        Family::Other => &[],
    };
    let mut out = Vec::new();
    for tok in tokens(text) {
        if let Ok(n) = tok.parse::<i64>() {
            out.push(n);
        } else if let Some(n) = words.iter().position(|w| *w == tok) {
            out.push(n as i64);
        }
    }
    out
}

/// The accepted yes and no forms for a language, exposed for tests and for
/// building simulated replies.
pub fn yes_no_forms(family: Family) -> (&'static [&'static str], &'static [&'static str]) {
    tables(family)
}

/// Number word for `n` in 0..=10, if the language has a table.
pub fn number_word(n: u8, family: Family) -> Option<&'static str> {
    let idx = usize::from(n);
    match family {
        Family::English => EN_NUMBERS.get(idx).copied(),
        Family::Spanish => ES_NUMBERS.get(idx).copied(),
        Family::Other => None,
    }
}
