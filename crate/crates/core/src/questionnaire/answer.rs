use crate::lang::{self, Family, LanguageTag, Polarity};

use super::{AnswerValue, QuestionKind, QuestionNode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseResult {
    Parsed(AnswerValue),
    OutOfRange(String),
    Ambiguous(String),
}

/// Interprets one finalized participant turn against a node. Pure; the
/// dialog engine decides whether to re-prompt.
pub fn parse_answer(node: &QuestionNode, utterance: &str, language: &LanguageTag) -> ParseResult {
    let text = utterance.trim();
    if text.is_empty() {
        return ParseResult::Ambiguous("empty".into());
    }
    let family = language.family();
    match node.kind {
        QuestionKind::OpenEnded | QuestionKind::Statement => {
            ParseResult::Parsed(AnswerValue::FreeText(text.to_owned()))
        }
        QuestionKind::YesNo => match lang::yes_no_polarity(text, family) {
            Polarity::Yes => ParseResult::Parsed(AnswerValue::YesNo(true)),
            Polarity::No => ParseResult::Parsed(AnswerValue::YesNo(false)),
            Polarity::Mixed => ParseResult::Ambiguous("both yes and no".into()),
            Polarity::Neither => ParseResult::Ambiguous("no yes/no keyword".into()),
        },
        QuestionKind::Nps => rating(text, family, 0, 10, AnswerValue::Rating),
        QuestionKind::Likert { point_count } => {
            rating(text, family, 1, point_count, AnswerValue::LikertIndex)
        }
    }
}

fn rating(
    text: &str,
    family: Family,
    lo: u8,
    hi: u8,
    wrap: fn(u8) -> AnswerValue,
) -> ParseResult {
    let mut found = scale_free_numbers(text, family, hi);
    found.sort_unstable();
    found.dedup();
    match found.as_slice() {
        [] => ParseResult::Ambiguous("no number".into()),
        [n] if (i64::from(lo)..=i64::from(hi)).contains(n) => {
            ParseResult::Parsed(wrap(u8::try_from(*n).expect("range checked")))
        }
        [n] => ParseResult::OutOfRange(format!("{n} is outside {lo}..={hi}")),
        many => ParseResult::Ambiguous(format!("several numbers: {many:?}")),
    }
}

/// Numbers in the utterance, dropping a trailing scale mention such as
/// "out of 10", "de 10" or "sobre 10".
fn scale_free_numbers(text: &str, family: Family, scale_max: u8) -> Vec<i64> {
    let toks = lang::tokens(text);
    let mut keep = Vec::new();
    for (i, tok) in toks.iter().enumerate() {
        let Some(n) = lang::numbers(tok, family).first().copied() else {
            continue;
        };
        let prev = i.checked_sub(1).map(|j| toks[j].as_str());
        let scale_word = match prev {
            Some("de" | "sobre") => true,
            Some("of") => i >= 2 && toks[i - 2] == "out",
            _ => false,
        };
        let is_scale = n == i64::from(scale_max) && scale_word && !keep.is_empty();
        if !is_scale {
            keep.push(n);
        }
    }
    keep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::yes_no_forms;
    use crate::questionnaire::NodeId;

    fn node(kind: QuestionKind) -> QuestionNode {
        QuestionNode {
            id: NodeId::new("n"),
            kind,
            prompt: String::new(),
            branches: vec![],
            default_next: "END".into(),
            counts_toward_progress: true,
        }
    }

    fn es() -> LanguageTag {
        LanguageTag::new("es-PE")
    }

    #[test]
    fn nps_digits() {
        let n = node(QuestionKind::Nps);
        assert!(matches!(parse_answer(&n, "11", &es()), ParseResult::OutOfRange(_)));
        assert_eq!(parse_answer(&n, "7", &es()), ParseResult::Parsed(AnswerValue::Rating(7)));
        assert_eq!(parse_answer(&n, "Le doy un ocho", &es()), ParseResult::Parsed(AnswerValue::Rating(8)));
        assert_eq!(
            parse_answer(&n, "I'd rate it 9 out of 10", &"en".into()),
            ParseResult::Parsed(AnswerValue::Rating(9))
        );
        assert_eq!(parse_answer(&n, "un 9 de 10", &es()), ParseResult::Parsed(AnswerValue::Rating(9)));
        assert_eq!(parse_answer(&n, "10", &es()), ParseResult::Parsed(AnswerValue::Rating(10)));
        assert!(matches!(parse_answer(&n, "entre 7 y 8", &es()), ParseResult::Ambiguous(_)));
        assert!(matches!(parse_answer(&n, "   ", &es()), ParseResult::Ambiguous(d) if d == "empty"));
    }

    #[test]
    fn likert_range() {
        let n = node(QuestionKind::Likert { point_count: 5 });
        assert!(matches!(parse_answer(&n, "0", &es()), ParseResult::OutOfRange(_)));
        assert_eq!(parse_answer(&n, "cinco", &es()), ParseResult::Parsed(AnswerValue::LikertIndex(5)));
        assert!(matches!(parse_answer(&n, "seis", &es()), ParseResult::OutOfRange(_)));
    }

    /// Keyword-table oracle: every listed form classifies as its own
    /// polarity, and a hedge word belongs to neither table.
    #[test]
    fn yes_no_keyword_tables() {
        let n = node(QuestionKind::YesNo);
        for family_tag in ["es-PE", "en-US"] {
            let tag = LanguageTag::new(family_tag);
            let (yes, no) = yes_no_forms(tag.family());
            for form in yes {
                assert_eq!(parse_answer(&n, form, &tag), ParseResult::Parsed(AnswerValue::YesNo(true)), "{form}");
            }
            for form in no {
                assert_eq!(parse_answer(&n, form, &tag), ParseResult::Parsed(AnswerValue::YesNo(false)), "{form}");
            }
        }
        assert!(matches!(parse_answer(&n, "quizás", &es()), ParseResult::Ambiguous(_)));
        assert!(matches!(parse_answer(&n, "sí pero no", &es()), ParseResult::Ambiguous(_)));
    }

    #[test]
    fn open_ended_trims() {
        let n = node(QuestionKind::OpenEnded);
        assert_eq!(
            parse_answer(&n, "  muy rápido  ", &es()),
            ParseResult::Parsed(AnswerValue::FreeText("muy rápido".into()))
        );
    }

    #[test]
    fn other_languages_use_digits_only() {
        let n = node(QuestionKind::Nps);
        assert_eq!(parse_answer(&n, "8", &"qu-PE".into()), ParseResult::Parsed(AnswerValue::Rating(8)));
        assert!(matches!(parse_answer(&n, "ocho", &"qu-PE".into()), ParseResult::Ambiguous(_)));
    }
}
