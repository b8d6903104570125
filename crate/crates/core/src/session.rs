//! Drives one interview: feeds timestamped inputs through floor control and
//! the dialog engine, voices the resulting speech through the ports and
//! produces log records.
//!
//! Only inbound records are needed to rebuild a session; outbound records
//! are regenerated on replay and must match byte-for-byte.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::adapters::{
    GenPort, HistoryTurn, MockTts, RuleSafety, SafetyPort, SafetyVerdict, SayPurpose, ScriptedGen,
    TtsPort,
};
use crate::dialog::{AgentAction, Channel, ContactRef, DialogEngine, SessionEvent, SessionState};
use crate::log::{Direction, LogRecord};
use crate::questionnaire::{NodeId, QuestionKind};
use crate::turn::{self, FloorEffect, FloorEvent, FloorState, TurnTakingConfig};

/// The model ports a session speaks through.
#[derive(Clone)]
pub struct Ports {
    pub gen: Arc<dyn GenPort>,
    pub tts: Arc<dyn TtsPort>,
    pub safety: Arc<dyn SafetyPort>,
}

impl Default for Ports {
    fn default() -> Self {
        Self {
            gen: Arc::new(ScriptedGen),
            tts: Arc::new(MockTts::default()),
            safety: Arc::new(RuleSafety::default()),
        }
    }
}

impl std::fmt::Debug for Ports {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Ports")
    }
}

/// A replayable input. `UserText` records the safety verdict and the node
/// being answered once the session has resolved them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SessionInput {
    Open { contact: ContactRef, channel: Channel },
    Connect,
    UserWord { word: String },
    UserText {
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        verdict: Option<SafetyVerdict>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        node: Option<NodeId>,
    },
    Tick,
    Hangup,
}

impl SessionInput {
    pub fn user_text(text: impl Into<String>) -> Self {
        SessionInput::UserText { text: text.into(), verdict: None, node: None }
    }

    pub fn to_record(&self, session_id: &str, ts_ms: u64) -> LogRecord {
        let Value::Object(mut obj) = serde_json::to_value(self).expect("inputs serialize") else {
            unreachable!("tagged enum serializes to an object")
        };
        let kind = match obj.remove("kind") {
            Some(Value::String(k)) => k,
            _ => unreachable!("tag is a string"),
        };
        LogRecord {
            ts_ms,
            session_id: session_id.to_owned(),
            direction: Direction::In,
            kind,
            payload: Value::Object(obj),
        }
    }

    pub fn from_record(r: &LogRecord) -> Result<Self, SessionError> {
        let mut obj = match &r.payload {
            Value::Object(m) => m.clone(),
            Value::Null => Map::new(),
            _ => return Err(SessionError::Malformed(format!("payload of {} is not an object", r.kind))),
        };
        obj.insert("kind".into(), Value::String(r.kind.clone()));
        serde_json::from_value(Value::Object(obj)).map_err(|e| SessionError::Malformed(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("log does not start with an open record")]
    MissingOpen,
    #[error("record belongs to session {0}")]
    ForeignRecord(String),
}

/// Records produced by one input. `inbound` is `None` when the input has
/// no lasting effect and need not be persisted.
#[derive(Debug, Clone, PartialEq)]
pub struct Processed {
    pub inbound: Option<LogRecord>,
    pub outbound: Vec<LogRecord>,
}

impl Processed {
    pub fn records(&self) -> impl Iterator<Item = &LogRecord> {
        self.inbound.iter().chain(self.outbound.iter())
    }
}

/// Comparable session state, used to check replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub state: SessionState,
    pub floor: FloorState,
    pub speaking_until: Option<u64>,
    pub ended: bool,
}

/// What the participant is currently expected to answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pending {
    Consent,
    Question(NodeId, QuestionKind),
    Nothing,
}

#[derive(Debug, Clone)]
pub struct Session {
    engine: Arc<DialogEngine>,
    turn: TurnTakingConfig,
    ports: Ports,
    state: SessionState,
    floor: FloorState,
    speaking_until: Option<u64>,
    history: Vec<HistoryTurn>,
    ended: bool,
    last_ts: u64,
}

impl Session {
    /// Creates a session and its opening record.
    pub fn open(
        engine: Arc<DialogEngine>,
        turn: TurnTakingConfig,
        ports: Ports,
        session_id: impl Into<String>,
        contact: ContactRef,
        channel: Channel,
        now: u64,
    ) -> (Self, LogRecord) {
        let session_id = session_id.into();
        let record = SessionInput::Open { contact: contact.clone(), channel }.to_record(&session_id, now);
        let s = Self {
            engine,
            turn,
            ports,
            state: SessionState::new(session_id, contact, channel, now),
            floor: FloorState::new(now),
            speaking_until: None,
            history: Vec::new(),
            ended: false,
            last_ts: now,
        };
        (s, record)
    }

    /// Rebuilds a session from its inbound records; outbound ones are
    /// skipped. Returns the session and the regenerated records.
    pub fn replay(
        engine: Arc<DialogEngine>,
        turn: TurnTakingConfig,
        ports: Ports,
        records: &[LogRecord],
    ) -> Result<(Self, Vec<LogRecord>), SessionError> {
        let mut inputs = records.iter().filter(|r| r.direction == Direction::In);
        let first = inputs.next().ok_or(SessionError::MissingOpen)?;
        let SessionInput::Open { contact, channel } = SessionInput::from_record(first)? else {
            return Err(SessionError::MissingOpen);
        };
        let (mut s, open) = Session::open(engine, turn, ports, &first.session_id, contact, channel, first.ts_ms);
        let mut out = vec![open];
        for r in inputs {
            if r.session_id != s.state.session_id {
                return Err(SessionError::ForeignRecord(r.session_id.clone()));
            }
            let input = SessionInput::from_record(r)?;
            let p = s.handle(input, r.ts_ms);
            out.extend(p.records().cloned());
        }
        Ok((s, out))
    }

    pub fn id(&self) -> &str {
        &self.state.session_id
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn floor(&self) -> &FloorState {
        &self.floor
    }

    pub fn is_ended(&self) -> bool {
        self.ended
    }

    /// When the agent's queued speech finishes, if it is talking.
    pub fn speaking_until(&self) -> Option<u64> {
        self.speaking_until
    }

    pub fn last_ts(&self) -> u64 {
        self.last_ts
    }

    pub fn turn_config(&self) -> &TurnTakingConfig {
        &self.turn
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            state: self.state.clone(),
            floor: self.floor.clone(),
            speaking_until: self.speaking_until,
            ended: self.ended,
        }
    }

    pub fn pending(&self) -> Pending {
        use crate::dialog::Phase;
        match &self.state.phase {
            Phase::Consent => Pending::Consent,
            Phase::Asking { node } | Phase::Clarifying { node, .. } => {
                match self.engine.questionnaire().node(node) {
                    Some(n) => Pending::Question(node.clone(), n.kind),
                    None => Pending::Nothing,
                }
            }
            _ => Pending::Nothing,
        }
    }

    /// The most recent agent utterance.
    pub fn last_agent_text(&self) -> Option<&str> {
        self.history.iter().rev().find(|t| t.from_agent).map(|t| t.text.as_str())
    }

    /// The closing frame of an ended session, re-sent on repeated input.
    fn end_frame(&self) -> LogRecord {
        let reason = match &self.state.phase {
            crate::dialog::Phase::Terminated { reason } => reason.as_str(),
            _ => "completed",
        };
        self.out(self.last_ts, "end", json!({ "reason": reason }))
    }

    fn out(&self, ts_ms: u64, kind: &str, payload: Value) -> LogRecord {
        LogRecord {
            ts_ms,
            session_id: self.state.session_id.clone(),
            direction: Direction::Out,
            kind: kind.to_owned(),
            payload,
        }
    }

    fn floor_step(&mut self, ev: FloorEvent) -> Vec<FloorEffect> {
        match turn::step(&self.floor, ev, &self.turn) {
            Ok((f, effects)) => {
                self.floor = f;
                effects
            }
            // timestamps are clamped in `handle`, so this cannot happen
            Err(e) => unreachable!("{e}"),
        }
    }

    fn finish_speech_before(&mut self, now: u64) {
        if let Some(t) = self.speaking_until {
            if t <= now {
                self.floor_step(FloorEvent::AiSpeechEnd(t));
                self.speaking_until = None;
            }
        }
    }

    /// Applies one input at `now` (clamped to be monotonic).
    pub fn handle(&mut self, input: SessionInput, now: u64) -> Processed {
        let now = now.max(self.last_ts);
        if self.ended {
            return Processed { inbound: None, outbound: vec![self.end_frame()] };
        }
        self.last_ts = now;
        self.finish_speech_before(now);
        let mut outbound = Vec::new();
        let mut logged = input.clone();
        let mut events = Vec::new();
        match input {
            SessionInput::Open { .. } => {
                return Processed {
                    inbound: None,
                    outbound: vec![self.out(now, "error", json!({ "message": "session already open" }))],
                };
            }
            SessionInput::Connect => events.push(SessionEvent::Connected),
            SessionInput::Hangup => events.push(SessionEvent::Hangup),
            SessionInput::UserWord { .. } => {
                for e in self.floor_step(FloorEvent::UserWord(now)) {
                    if e == FloorEffect::InterruptAi {
                        self.speaking_until = None;
                        outbound.push(self.out(now, "interrupt", json!({})));
                    }
                    events.push(SessionEvent::TurnEffect(e));
                }
            }
            SessionInput::UserText { text, verdict, .. } => {
                // a finalized answer takes the floor from the agent
                if self.speaking_until.take().is_some() {
                    self.floor_step(FloorEvent::AiSpeechEnd(now));
                }
                self.floor_step(FloorEvent::UserWord(now));
                self.floor = turn::participant_turn_done(&self.floor);
                let verdict = verdict.unwrap_or_else(|| self.ports.safety.classify(&text));
                let node = self.state.phase.pending_node().cloned();
                self.history.push(HistoryTurn { from_agent: false, text: text.clone() });
                events.push(match verdict {
                    SafetyVerdict::Safe => SessionEvent::ParticipantUtterance(text.clone()),
                    flagged => SessionEvent::SafetyVerdict(flagged),
                });
                logged = SessionInput::UserText { text, verdict: Some(verdict), node };
            }
            SessionInput::Tick => {
                for e in self.floor_step(FloorEvent::SilenceTick(now)) {
                    events.push(SessionEvent::TurnEffect(e));
                }
            }
        }
        for ev in events {
            let milestones_before = self.state.milestones_emitted.clone();
            let (next, actions) = self.engine.advance(&self.state, &ev, now);
            self.state = next;
            let fresh: Vec<u8> =
                self.state.milestones_emitted.difference(&milestones_before).copied().collect();
            let mut new_milestones = fresh.into_iter();
            for a in actions {
                self.voice(a, now, &mut new_milestones, &mut outbound);
            }
            if self.ended {
                break;
            }
        }
        let inbound = match (&logged, outbound.is_empty()) {
            (SessionInput::Tick, true) => None,
            _ => Some(logged.to_record(&self.state.session_id, now)),
        };
        Processed { inbound, outbound }
    }

    fn voice(
        &mut self,
        action: AgentAction,
        now: u64,
        milestones: &mut impl Iterator<Item = u8>,
        out: &mut Vec<LogRecord>,
    ) {
        match action {
            AgentAction::Say { text, purpose, node } => {
                let text = self.ports.gen.generate(&self.history, purpose, &text);
                let synth = self.ports.tts.synthesize(&text);
                let start = match self.speaking_until {
                    Some(t) => t,
                    None => {
                        self.floor_step(FloorEvent::AiSpeechStart(now));
                        now
                    }
                };
                self.speaking_until = Some(start + synth.duration_ms);
                self.history.push(HistoryTurn { from_agent: true, text: text.clone() });
                let mut payload = json!({
                    "text": text,
                    "purpose": purpose.as_str(),
                    "duration_ms": synth.duration_ms,
                });
                if let Some(n) = node {
                    payload["node"] = json!(n);
                }
                let kind = match purpose {
                    SayPurpose::Greeting => "hello",
                    SayPurpose::ConsentReask => "consent_prompt",
                    SayPurpose::Idle => "idle_prompt",
                    SayPurpose::Encouragement => {
                        if let Some(m) = milestones.next() {
                            payload["milestone"] = json!(m);
                        }
                        "encouragement"
                    }
                    _ => "agent_say",
                };
                out.push(self.out(now, kind, payload));
            }
            AgentAction::RecordAnswer { node, answer, progress } => {
                out.push(self.out(now, "progress", json!({ "node": node, "answer": answer, "fraction": progress })));
            }
            AgentAction::EndCall(reason) => self.close(now, reason.as_str(), out),
            AgentAction::Complete => self.close(now, "completed", out),
            AgentAction::Ignored(why) => out.push(self.out(now, "warning", json!({ "message": why }))),
        }
    }

    fn close(&mut self, now: u64, reason: &str, out: &mut Vec<LogRecord>) {
        // the line drops once any farewell finishes; a hangup cuts it short
        let call_end = if reason == "participant_hangup" {
            now
        } else {
            self.speaking_until.unwrap_or(now).max(now)
        };
        self.ended = true;
        out.push(self.out(now, "end", json!({ "reason": reason, "call_end_ms": call_end })));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialog::{DialogConfig, Phase};
    use crate::questionnaire::Questionnaire;

    fn engine() -> Arc<DialogEngine> {
        Arc::new(DialogEngine::new(Arc::new(Questionnaire::fixture_en()), DialogConfig::default()))
    }

    fn open(channel: Channel) -> (Session, Vec<LogRecord>) {
        let contact = ContactRef { contact_id: "c1".into(), first_name: "Ana".into() };
        let (s, r) = Session::open(engine(), TurnTakingConfig::default(), Ports::default(), "s1", contact, channel, 1_000);
        (s, vec![r])
    }

    fn feed(s: &mut Session, log: &mut Vec<LogRecord>, input: SessionInput, ts: u64) -> Vec<LogRecord> {
        let p = s.handle(input, ts);
        log.extend(p.records().cloned());
        p.outbound
    }

    #[test]
    fn decline_produces_ack_and_end() {
        let (mut s, mut log) = open(Channel::Phone);
        let out = feed(&mut s, &mut log, SessionInput::Connect, 1_000);
        assert_eq!(out[0].kind, "hello");
        assert!(out[0].payload["text"].as_str().unwrap().contains("Ana"));
        let out = feed(&mut s, &mut log, SessionInput::user_text("No"), 20_000);
        let kinds: Vec<_> = out.iter().map(|r| r.kind.as_str()).collect();
        assert_eq!(kinds, ["agent_say", "end"]);
        assert_eq!(out[1].payload["reason"], "consent_declined");
        // idempotent close
        let again = s.handle(SessionInput::user_text("wait"), 21_000);
        assert!(again.inbound.is_none());
        assert_eq!(again.outbound[0].kind, "end");
    }

    #[test]
    fn barge_in_interrupts_agent() {
        let (mut s, mut log) = open(Channel::Phone);
        feed(&mut s, &mut log, SessionInput::Connect, 1_000);
        assert!(s.speaking_until().is_some());
        for (i, w) in ["yes", "go", "ahead"].iter().enumerate() {
            let out = feed(&mut s, &mut log, SessionInput::UserWord { word: (*w).into() }, 2_000 + i as u64);
            assert_eq!(out.iter().any(|r| r.kind == "interrupt"), i == 2);
        }
        assert_eq!(s.speaking_until(), None);
    }

    #[test]
    fn silence_runs_idle_then_timeout() {
        let (mut s, mut log) = open(Channel::Phone);
        feed(&mut s, &mut log, SessionInput::Connect, 1_000);
        let end = s.speaking_until().unwrap();
        let out = feed(&mut s, &mut log, SessionInput::Tick, end + 6_000);
        assert_eq!(out[0].kind, "idle_prompt");
        let out = feed(&mut s, &mut log, SessionInput::Tick, end + 30_000);
        assert_eq!(out.last().unwrap().payload["reason"], "silence_timeout");
        assert!(s.is_ended());
    }

    #[test]
    fn replay_reproduces_records_and_state() {
        let (mut s, mut log) = open(Channel::Web);
        feed(&mut s, &mut log, SessionInput::Connect, 1_000);
        let mut t = 20_000;
        feed(&mut s, &mut log, SessionInput::user_text("yes"), t);
        while let Pending::Question(_, kind) = s.pending() {
            t += 15_000;
            let reply = match kind {
                QuestionKind::YesNo => "yes",
                QuestionKind::Nps => "8",
                QuestionKind::Likert { .. } => "4",
                _ => "it works well for me",
            };
            feed(&mut s, &mut log, SessionInput::user_text(reply), t);
        }
        assert_eq!(s.state().phase, Phase::Completed);
        assert_eq!(log.iter().filter(|r| r.kind == "encouragement").count(), 3);
        let (r, regenerated) = Session::replay(engine(), TurnTakingConfig::default(), Ports::default(), &log).unwrap();
        assert_eq!(r.snapshot(), s.snapshot());
        assert_eq!(crate::log::to_ndjson(&regenerated), crate::log::to_ndjson(&log));
    }

    #[test]
    fn input_records_round_trip() {
        let i = SessionInput::UserText { text: "hola".into(), verdict: Some(SafetyVerdict::Safe), node: Some("q1".into()) };
        let r = i.to_record("s", 3);
        assert_eq!(r.kind, "user_text");
        assert_eq!(SessionInput::from_record(&r).unwrap(), i);
        let r = SessionInput::Tick.to_record("s", 3);
        assert_eq!(r.payload, json!({}));
        assert_eq!(SessionInput::from_record(&r).unwrap(), SessionInput::Tick);
    }
}
