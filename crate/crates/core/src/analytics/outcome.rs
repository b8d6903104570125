//! Final classification of one outreach attempt.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::transcript::Transcript;
use crate::dialog::Channel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProgressBucket {
    #[serde(rename = "11-25")]
    P11To25,
    #[serde(rename = "26-50")]
    P26To50,
    #[serde(rename = "51-75")]
    P51To75,
    #[serde(rename = "76-99")]
    P76To99,
}

impl ProgressBucket {
    /// Bucket for a fraction in (0.10, 1.0).
    pub fn of(progress: f64) -> Option<Self> {
        match progress {
            p if p <= 0.10 || p >= 1.0 => None,
            p if p <= 0.25 => Some(Self::P11To25),
            p if p <= 0.50 => Some(Self::P26To50),
            p if p <= 0.75 => Some(Self::P51To75),
            _ => Some(Self::P76To99),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::P11To25 => "11-25",
            Self::P26To50 => "26-50",
            Self::P51To75 => "51-75",
            Self::P76To99 => "76-99",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CallOutcome {
    NotPickedUp,
    NotClickedThrough,
    HungUpAtAiReveal,
    ExplicitRefusal,
    /// Connected and not refused, but ended at or below 10% for another
    /// reason (silence, safety stop, hangup right after consenting).
    EarlyBreakOff,
    ProgressBucket(ProgressBucket),
    FullyCompleted,
}

impl CallOutcome {
    pub fn reached_76(&self) -> bool {
        matches!(self, Self::FullyCompleted | Self::ProgressBucket(ProgressBucket::P76To99))
    }

    pub fn label(&self) -> String {
        match self {
            Self::NotPickedUp => "not_picked_up".into(),
            Self::NotClickedThrough => "not_clicked_through".into(),
            Self::HungUpAtAiReveal => "hung_up_at_ai_reveal".into(),
            Self::ExplicitRefusal => "explicit_refusal".into(),
            Self::EarlyBreakOff => "early_break_off".into(),
            Self::ProgressBucket(b) => format!("progress_{}", b.label().replace('-', "_")),
            Self::FullyCompleted => "fully_completed".into(),
        }
    }

    pub fn parse(label: &str) -> Option<Self> {
        Some(match label {
            "not_picked_up" => Self::NotPickedUp,
            "not_clicked_through" => Self::NotClickedThrough,
            "hung_up_at_ai_reveal" => Self::HungUpAtAiReveal,
            "explicit_refusal" => Self::ExplicitRefusal,
            "early_break_off" => Self::EarlyBreakOff,
            "progress_11_25" => Self::ProgressBucket(ProgressBucket::P11To25),
            "progress_26_50" => Self::ProgressBucket(ProgressBucket::P26To50),
            "progress_51_75" => Self::ProgressBucket(ProgressBucket::P51To75),
            "progress_76_99" => Self::ProgressBucket(ProgressBucket::P76To99),
            "fully_completed" => Self::FullyCompleted,
            _ => return None,
        })
    }
}

impl fmt::Display for CallOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("session {0} has not ended")]
pub struct NotTerminal(pub String);

/// Classifies an attempt. `None` means no session was ever opened.
pub fn classify_outcome(session: Option<&Transcript>, channel: Channel) -> Result<CallOutcome, NotTerminal> {
    let unreached = match channel {
        Channel::Phone => CallOutcome::NotPickedUp,
        Channel::Web => CallOutcome::NotClickedThrough,
    };
    let Some(t) = session else { return Ok(unreached) };
    if !t.is_terminal() {
        return Err(NotTerminal(t.session_id.clone()));
    }
    if t.answered_at.is_none() {
        return Ok(unreached);
    }
    if t.is_completed() {
        return Ok(CallOutcome::FullyCompleted);
    }
    if let Some(b) = ProgressBucket::of(t.progress) {
        return Ok(CallOutcome::ProgressBucket(b));
    }
    Ok(match t.end_reason.as_deref() {
        Some("consent_declined") => CallOutcome::ExplicitRefusal,
        Some("participant_hangup") if !t.consented => CallOutcome::HungUpAtAiReveal,
        _ => CallOutcome::EarlyBreakOff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(reason: &str, consented: bool, progress: f64) -> Transcript {
        Transcript {
            session_id: "s".into(),
            contact_id: "c".into(),
            channel: Channel::Phone,
            opened_at: 0,
            answered_at: Some(0),
            end_reason: Some(reason.into()),
            call_end_ms: Some(10),
            consented,
            progress,
            turns: vec![],
        }
    }

    #[test]
    fn classes() {
        assert_eq!(classify_outcome(None, Channel::Phone), Ok(CallOutcome::NotPickedUp));
        assert_eq!(classify_outcome(None, Channel::Web), Ok(CallOutcome::NotClickedThrough));
        let hang = t("participant_hangup", false, 0.0);
        assert_eq!(classify_outcome(Some(&hang), Channel::Phone), Ok(CallOutcome::HungUpAtAiReveal));
        let refuse = t("consent_declined", false, 0.0);
        assert_eq!(classify_outcome(Some(&refuse), Channel::Phone), Ok(CallOutcome::ExplicitRefusal));
        let mid = t("participant_hangup", true, 0.60);
        assert_eq!(
            classify_outcome(Some(&mid), Channel::Phone),
            Ok(CallOutcome::ProgressBucket(ProgressBucket::P51To75))
        );
        let early = t("silence_timeout", true, 0.05);
        assert_eq!(classify_outcome(Some(&early), Channel::Phone), Ok(CallOutcome::EarlyBreakOff));
        let done = t("completed", true, 1.0);
        assert_eq!(classify_outcome(Some(&done), Channel::Phone), Ok(CallOutcome::FullyCompleted));
        let mut open = t("x", true, 0.5);
        open.end_reason = None;
        assert!(classify_outcome(Some(&open), Channel::Phone).is_err());
    }

    #[test]
    fn bucket_edges() {
        assert_eq!(ProgressBucket::of(0.10), None);
        assert_eq!(ProgressBucket::of(0.11), Some(ProgressBucket::P11To25));
        assert_eq!(ProgressBucket::of(0.25), Some(ProgressBucket::P11To25));
        assert_eq!(ProgressBucket::of(0.26), Some(ProgressBucket::P26To50));
        assert_eq!(ProgressBucket::of(0.76), Some(ProgressBucket::P76To99));
        assert_eq!(ProgressBucket::of(1.0), None);
    }

    #[test]
    fn labels_round_trip() {
        for label in [
            "not_picked_up", "not_clicked_through", "hung_up_at_ai_reveal", "explicit_refusal",
            "early_break_off", "progress_11_25", "progress_26_50", "progress_51_75", "progress_76_99",
            "fully_completed",
        ] {
            assert_eq!(CallOutcome::parse(label).unwrap().label(), label);
        }
    }
}
