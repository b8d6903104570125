//! Append-only session records, one JSON object per line.
//!
//! Inbound records are the replayable inputs of a session; outbound records
//! are the frames the agent produced. A session's log is therefore both its
//! event-sourcing journal and its transcript.

use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub ts_ms: u64,
    pub session_id: String,
    pub direction: Direction,
    pub kind: String,
    pub payload: Value,
}

impl LogRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("log records always serialize")
    }
}

/// Outbound record kinds that carry agent speech.
pub const AGENT_SPEECH_KINDS: [&str; 5] =
    ["hello", "consent_prompt", "agent_say", "idle_prompt", "encouragement"];

pub fn is_agent_speech(r: &LogRecord) -> bool {
    r.direction == Direction::Out && AGENT_SPEECH_KINDS.contains(&r.kind.as_str())
}

pub fn is_participant_speech(r: &LogRecord) -> bool {
    r.direction == Direction::In && r.kind == "user_text"
}

pub fn to_ndjson(records: &[LogRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out
}

/// Parses NDJSON. A malformed final line without a terminating newline is
/// treated as a torn write and dropped; any other malformed line is an error.
pub fn parse_ndjson(text: &str) -> Result<Vec<LogRecord>, serde_json::Error> {
    let complete = text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            Err(_) if i + 1 == lines.len() && !complete => {
                tracing::warn!(line = i + 1, "dropping truncated trailing log line");
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

pub fn read_log(path: &Path) -> io::Result<Vec<LogRecord>> {
    let text = std::fs::read_to_string(path)?;
    parse_ndjson(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

/// Appends and flushes to the OS before returning.
pub fn append_records(path: &Path, records: &[LogRecord]) -> io::Result<()> {
    if records.is_empty() {
        return Ok(());
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(to_ndjson(records).as_bytes())?;
    f.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn rec(ts: u64) -> LogRecord {
        LogRecord {
            ts_ms: ts,
            session_id: "s1".into(),
            direction: Direction::In,
            kind: "user_text".into(),
            payload: json!({"text": "sí"}),
        }
    }

    #[test]
    fn wire_shape() {
        let line = rec(5).to_line();
        assert_eq!(
            line,
            r#"{"ts_ms":5,"session_id":"s1","direction":"in","kind":"user_text","payload":{"text":"sí"}}"#
        );
    }

    #[test]
    fn round_trip_and_torn_tail() {
        let text = to_ndjson(&[rec(1), rec(2)]);
        assert_eq!(parse_ndjson(&text).unwrap(), vec![rec(1), rec(2)]);
        let torn = format!("{text}{{\"ts_ms\":3,\"sess");
        assert_eq!(parse_ndjson(&torn).unwrap().len(), 2);
        let corrupt_middle = format!("garbage\n{text}");
        assert!(parse_ndjson(&corrupt_middle).is_err());
    }

    #[test]
    fn append_creates_and_extends() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s1.jsonl");
        append_records(&p, &[rec(1)]).unwrap();
        append_records(&p, &[rec(2)]).unwrap();
        assert_eq!(read_log(&p).unwrap(), vec![rec(1), rec(2)]);
    }
}
