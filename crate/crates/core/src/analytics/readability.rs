//! Flesch Reading Ease with a vowel-group syllable heuristic.
//!
//! Sentences end at a run of `.`, `!` or `?` followed by whitespace or end
//! of text; trailing words without a terminator form one more sentence.
//! Abbreviations are not special-cased.

use thiserror::Error;

use crate::lang::Family;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReadabilityError {
    #[error("no words")]
    NoWords,
}

/// Raw counts behind a readability score. Counts add across texts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TextCounts {
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
    /// Sentences whose terminator run contains `?`.
    pub questions: usize,
}

impl std::ops::AddAssign for TextCounts {
    fn add_assign(&mut self, o: Self) {
        self.words += o.words;
        self.sentences += o.sentences;
        self.syllables += o.syllables;
        self.questions += o.questions;
    }
}

fn is_vowel(c: char, family: Family) -> bool {
    match family {
        Family::Spanish => matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'á' | 'é' | 'í' | 'ó' | 'ú' | 'ü'),
        _ => matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y'),
    }
}

/// Syllables in one word: vowel groups, less a silent final `e` in
/// English (but not `-le` after a consonant), at least one.
pub fn syllables(word: &str, family: Family) -> usize {
    let letters: Vec<char> = word.to_lowercase().chars().filter(|c| c.is_alphabetic()).collect();
    let mut groups = 0;
    let mut prev_vowel = false;
    for &c in &letters {
        let v = is_vowel(c, family);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    if family != Family::Spanish && groups > 1 {
        if let [.., a, b, 'e'] = letters[..] {
            let le_syllable = b == 'l' && !is_vowel(a, family);
            if !le_syllable && !is_vowel(b, family) {
                groups -= 1;
            }
        }
    }
    groups.max(1)
}

pub fn counts(text: &str, family: Family) -> TextCounts {
    let words: Vec<&str> = text.split_whitespace().collect();
    let syllables = words.iter().map(|w| syllables(w, family)).sum();
    let (sentences, questions) = sentences(text);
    TextCounts { words: words.len(), sentences, syllables, questions }
}

/// (sentences, question sentences).
fn sentences(text: &str) -> (usize, usize) {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = 0;
    let mut questions = 0;
    let mut pending_words = false;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let start = i;
            while i < chars.len() && matches!(chars[i], '.' | '!' | '?') {
                i += 1;
            }
            if i == chars.len() || chars[i].is_whitespace() {
                sentences += 1;
                if chars[start..i].contains(&'?') {
                    questions += 1;
                }
                pending_words = false;
            } else {
                pending_words = true;
            }
            continue;
        }
        if !c.is_whitespace() {
            pending_words = true;
        }
        i += 1;
    }
    if pending_words {
        sentences += 1;
    }
    (sentences, questions)
}

pub fn score_from_counts<T: Scalar>(c: &TextCounts) -> Result<T, ReadabilityError> {
    if c.words == 0 || c.sentences == 0 {
        return Err(ReadabilityError::NoWords);
    }
    let w = T::from_count(c.words);
    let asl = w / T::from_count(c.sentences);
    let asw = T::from_count(c.syllables) / w;
    Ok(T::lit(206.835) - T::lit(1.015) * asl - T::lit(84.6) * asw)
}

/// 206.835 − 1.015·(words/sentences) − 84.6·(syllables/words).
pub fn flesch_reading_ease<T: Scalar>(text: &str, family: Family) -> Result<T, ReadabilityError> {
    score_from_counts(&counts(text, family))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn hand_counted() {
        let en = Family::English;
        assert!(close(flesch_reading_ease::<f64>("The cat sat.", en).unwrap(), 119.19));
        assert!(close(flesch_reading_ease::<f64>("It is.", en).unwrap(), 120.205));
        assert_eq!(flesch_reading_ease::<f64>("", en), Err(ReadabilityError::NoWords));
        assert_eq!(flesch_reading_ease::<f64>("   ", en), Err(ReadabilityError::NoWords));
    }

    #[test]
    fn syllable_heuristic() {
        let en = Family::English;
        for (w, n) in [("the", 1), ("cake", 1), ("table", 2), ("reading", 2), ("survey", 2), ("queue", 1), ("rhythm", 1), ("a", 1), ("9", 1)] {
            assert_eq!(syllables(w, en), n, "{w}");
        }
        let es = Family::Spanish;
        for (w, n) in [("hola", 2), ("encuesta", 3), ("recomendarías", 5), ("muy", 1), ("que", 1)] {
            assert_eq!(syllables(w, es), n, "{w}");
        }
    }

    #[test]
    fn segmentation() {
        assert_eq!(sentences("Hi there. How are you? Fine"), (3, 1));
        assert_eq!(sentences("Wait... what?!"), (2, 1));
        assert_eq!(sentences("3.5 is a number."), (1, 0));
        assert_eq!(sentences("¿Tienes quince minutos?"), (1, 1));
        assert_eq!(sentences(""), (0, 0));
    }

    #[test]
    fn f32_agrees() {
        let a = flesch_reading_ease::<f32>("The cat sat.", Family::English).unwrap();
        assert!((f64::from(a) - 119.19).abs() < 1e-3);
    }
}
