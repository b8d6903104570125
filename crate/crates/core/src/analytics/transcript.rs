//! A session's utterances, rebuilt from its log records.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialog::Channel;
use crate::log::{is_agent_speech, is_participant_speech, Direction, LogRecord};
use crate::questionnaire::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    Agent,
    Participant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: Speaker,
    pub text: String,
    pub ts_ms: u64,
    /// Node being asked (agent) or answered (participant), if any.
    pub node: Option<NodeId>,
    /// Agent turns only: why the agent spoke.
    pub purpose: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub session_id: String,
    pub contact_id: String,
    pub channel: Channel,
    pub opened_at: u64,
    /// When the participant picked up or opened the call.
    pub answered_at: Option<u64>,
    pub end_reason: Option<String>,
    /// When the line dropped, after any final agent speech.
    pub call_end_ms: Option<u64>,
    pub consented: bool,
    pub progress: f64,
    pub turns: Vec<Turn>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranscriptError {
    #[error("log has no open record")]
    MissingOpen,
    #[error("log mixes sessions {0} and {1}")]
    MixedSessions(String, String),
}

fn str_field(r: &LogRecord, key: &str) -> Option<String> {
    r.payload.get(key).and_then(|v| v.as_str()).map(str::to_owned)
}

impl Transcript {
    pub fn from_records(records: &[LogRecord]) -> Result<Self, TranscriptError> {
        let open = records
            .iter()
            .find(|r| r.direction == Direction::In && r.kind == "open")
            .ok_or(TranscriptError::MissingOpen)?;
        let channel = match open.payload.get("channel").and_then(|v| v.as_str()) {
            Some("web") => Channel::Web,
            _ => Channel::Phone,
        };
        let contact_id = open
            .payload
            .pointer("/contact/contact_id")
            .and_then(|v| v.as_str())
            .unwrap_or_default()
            .to_owned();
        let mut t = Transcript {
            session_id: open.session_id.clone(),
            contact_id,
            channel,
            opened_at: open.ts_ms,
            answered_at: None,
            end_reason: None,
            call_end_ms: None,
            consented: false,
            progress: 0.0,
            turns: Vec::new(),
        };
        for r in records {
            if r.session_id != t.session_id {
                return Err(TranscriptError::MixedSessions(t.session_id, r.session_id.clone()));
            }
            if r.direction == Direction::In && r.kind == "connect" && t.answered_at.is_none() {
                t.answered_at = Some(r.ts_ms);
            }
            if is_agent_speech(r) {
                let purpose = str_field(r, "purpose");
                if purpose.as_deref() == Some("disclosure") {
                    t.consented = true;
                }
                t.turns.push(Turn {
                    speaker: Speaker::Agent,
                    text: str_field(r, "text").unwrap_or_default(),
                    ts_ms: r.ts_ms,
                    node: str_field(r, "node").map(NodeId::new),
                    purpose,
                });
            } else if is_participant_speech(r) {
                t.turns.push(Turn {
                    speaker: Speaker::Participant,
                    text: str_field(r, "text").unwrap_or_default(),
                    ts_ms: r.ts_ms,
                    node: str_field(r, "node").map(NodeId::new),
                    purpose: None,
                });
            } else if r.direction == Direction::Out && r.kind == "progress" {
                if let Some(f) = r.payload.get("fraction").and_then(|v| v.as_f64()) {
                    t.progress = t.progress.max(f);
                }
            } else if r.direction == Direction::Out && r.kind == "end" && t.end_reason.is_none() {
                t.end_reason = str_field(r, "reason");
                t.call_end_ms = Some(r.payload.get("call_end_ms").and_then(|v| v.as_u64()).unwrap_or(r.ts_ms));
            }
        }
        if t.is_completed() {
            t.progress = 1.0;
        }
        Ok(t)
    }

    pub fn is_terminal(&self) -> bool {
        self.end_reason.is_some()
    }

    pub fn is_completed(&self) -> bool {
        self.end_reason.as_deref() == Some("completed")
    }

    /// Call length from pickup to line drop; zero if never answered.
    pub fn duration_ms(&self) -> u64 {
        match (self.answered_at, self.call_end_ms) {
            (Some(a), Some(e)) => e.saturating_sub(a),
            _ => 0,
        }
    }

    pub fn turns_by(&self, speaker: Speaker) -> impl Iterator<Item = &Turn> {
        self.turns.iter().filter(move |t| t.speaker == speaker)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no calls to choose from")]
pub struct NoCalls;

/// The longest call, ties going to the earliest start.
pub fn select_longest_call(calls: &[Transcript]) -> Result<&Transcript, NoCalls> {
    calls
        .iter()
        .min_by(|a, b| b.duration_ms().cmp(&a.duration_ms()).then(a.opened_at.cmp(&b.opened_at)))
        .ok_or(NoCalls)
}
