//! Per-conversation dialog metrics.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use super::readability::{counts, score_from_counts, TextCounts};
use super::transcript::{Speaker, Transcript};
use crate::lang::Family;
use crate::questionnaire::NodeId;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("transcript {0} has no agent turns")]
    NoAgentTurns(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConversationMetrics<T> {
    pub total_turns: usize,
    pub duration_ms: u64,
    pub user_ai_turn_ratio: T,
    pub flesch_reading_ease: T,
    pub ai_turns: usize,
    pub ai_sentences: usize,
    pub ai_questions: usize,
    pub words_per_ai_turn: T,
    pub participant_turns: usize,
    pub participant_sentences: usize,
    pub participant_questions: usize,
    pub words_per_participant_turn_overall: T,
    pub words_per_participant_turn_open_ended: T,
}

fn ratio<T: Scalar>(num: usize, den: usize) -> T {
    if den == 0 {
        T::zero()
    } else {
        T::from_count(num) / T::from_count(den)
    }
}

/// Metrics over one transcript. Every agent utterance is a turn, idle
/// prompts and clarifications included. Readability pools the counts of
/// both speakers.
pub fn conversation_metrics<T: Scalar>(
    t: &Transcript,
    open_ended: &BTreeSet<NodeId>,
    family: Family,
) -> Result<ConversationMetrics<T>, MetricsError> {
    let mut ai = TextCounts::default();
    let mut user = TextCounts::default();
    let mut ai_turns = 0;
    let mut user_turns = 0;
    let mut open_words = 0;
    let mut open_turns = 0;
    for turn in &t.turns {
        let c = counts(&turn.text, family);
        match turn.speaker {
            Speaker::Agent => {
                ai_turns += 1;
                ai += c;
            }
            Speaker::Participant => {
                user_turns += 1;
                user += c;
                if turn.node.as_ref().is_some_and(|n| open_ended.contains(n)) {
                    open_turns += 1;
                    open_words += c.words;
                }
            }
        }
    }
    if ai_turns == 0 {
        return Err(MetricsError::NoAgentTurns(t.session_id.clone()));
    }
    let mut all = ai;
    all += user;
    Ok(ConversationMetrics {
        total_turns: ai_turns + user_turns,
        duration_ms: t.duration_ms(),
        user_ai_turn_ratio: ratio(user_turns, ai_turns),
        flesch_reading_ease: score_from_counts(&all).unwrap_or_else(|_| T::zero()),
        ai_turns,
        ai_sentences: ai.sentences,
        ai_questions: ai.questions,
        words_per_ai_turn: ratio(ai.words, ai_turns),
        participant_turns: user_turns,
        participant_sentences: user.sentences,
        participant_questions: user.questions,
        words_per_participant_turn_overall: ratio(user.words, user_turns),
        words_per_participant_turn_open_ended: ratio(open_words, open_turns),
    })
}

/// Row labels of the conversation summary table, in order.
pub const METRIC_ROWS: [&str; 13] = [
    "Total turns per conversation",
    "Duration of conversation",
    "User-AI turn ratio",
    "Overall Flesch Reading Ease",
    "Number of AI conversational turns",
    "Total AI sentences",
    "Number of AI questions",
    "Words per AI turn",
    "Number of participant conversational turns",
    "Total participant sentences",
    "Number of participant questions",
    "Words per participant turn (overall)",
    "Words per participant turn (open-ended)",
];

impl<T: Scalar> ConversationMetrics<T> {
    /// Values in [`METRIC_ROWS`] order; duration in seconds.
    pub fn row_values(&self) -> [T; 13] {
        let c = |n: usize| T::from_count(n);
        [
            c(self.total_turns),
            T::from_u64(self.duration_ms).expect("duration fits") / T::lit(1000.0),
            self.user_ai_turn_ratio,
            self.flesch_reading_ease,
            c(self.ai_turns),
            c(self.ai_sentences),
            c(self.ai_questions),
            self.words_per_ai_turn,
            c(self.participant_turns),
            c(self.participant_sentences),
            c(self.participant_questions),
            self.words_per_participant_turn_overall,
            self.words_per_participant_turn_open_ended,
        ]
    }
}
