//! The per-session interview state machine.
//!
//! [`DialogEngine::advance`] is a deterministic function of the engine's
//! script and templates, the current [`SessionState`] and one
//! [`SessionEvent`]. It never performs I/O; the session driver turns the
//! returned [`AgentAction`]s into speech, log records and wire frames.

mod templates;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::adapters::{SafetyVerdict, SayPurpose};
use crate::lang::{self, LanguageTag, Polarity};
use crate::questionnaire::{
    next_node, parse_answer, progress, AnswerValue, Next, NodeId, ParseResult, QuestionKind,
    Questionnaire,
};
use crate::turn::FloorEffect;

pub use templates::{minutes_in_words, render, unresolved_slots, PromptTemplates, Slots};

pub const MILESTONES: [u8; 3] = [25, 50, 75];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Web,
    Phone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    ConsentDeclined,
    SilenceTimeout,
    SafetyStop,
    ParticipantHangup,
    SystemError,
}

impl TerminationReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminationReason::ConsentDeclined => "consent_declined",
            TerminationReason::SilenceTimeout => "silence_timeout",
            TerminationReason::SafetyStop => "safety_stop",
            TerminationReason::ParticipantHangup => "participant_hangup",
            TerminationReason::SystemError => "system_error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum Phase {
    Greeting,
    Consent,
    Disclosure,
    Asking { node: NodeId },
    Clarifying { node: NodeId, attempt: u8 },
    Completed,
    Terminated { reason: TerminationReason },
}

impl Phase {
    pub fn is_absorbing(&self) -> bool {
        matches!(self, Phase::Completed | Phase::Terminated { .. })
    }

    /// The node currently awaiting an answer.
    pub fn pending_node(&self) -> Option<&NodeId> {
        match self {
            Phase::Asking { node } | Phase::Clarifying { node, .. } => Some(node),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactRef {
    pub contact_id: String,
    pub first_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub contact: ContactRef,
    pub channel: Channel,
    pub phase: Phase,
    pub answers: BTreeMap<NodeId, AnswerValue>,
    pub started_at: u64,
    pub answered_at: Option<u64>,
    pub first_question_at: Option<u64>,
    pub ended_at: Option<u64>,
    pub milestones_emitted: BTreeSet<u8>,
    pub consent_reasks: u8,
    pub consented: bool,
    pub safety_flags: u32,
    pub progress: f64,
}

impl SessionState {
    pub fn new(session_id: impl Into<String>, contact: ContactRef, channel: Channel, now: u64) -> Self {
        Self {
            session_id: session_id.into(),
            contact,
            channel,
            phase: Phase::Greeting,
            answers: BTreeMap::new(),
            started_at: now,
            answered_at: None,
            first_question_at: None,
            ended_at: None,
            milestones_emitted: BTreeSet::new(),
            consent_reasks: 0,
            consented: false,
            safety_flags: 0,
            progress: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SessionEvent {
    /// The participant picked up or opened the web call.
    Connected,
    ParticipantUtterance(String),
    TurnEffect(FloorEffect),
    Hangup,
    SafetyVerdict(SafetyVerdict),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AgentAction {
    Say { text: String, purpose: SayPurpose, node: Option<NodeId> },
    RecordAnswer { node: NodeId, answer: AnswerValue, progress: f64 },
    EndCall(TerminationReason),
    /// The script reached its end with every path question answered.
    Complete,
    /// The event could not apply in the current phase; state is unchanged.
    Ignored(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConsentDecision {
    Consented,
    Declined,
    Unclear,
}

/// Keyword-table consent classification; any form of "no" declines.
pub fn handle_consent(utterance: &str, language: &LanguageTag) -> ConsentDecision {
    match lang::consent_polarity(utterance, language.family()) {
        Polarity::Yes => ConsentDecision::Consented,
        Polarity::No | Polarity::Mixed => ConsentDecision::Declined,
        Polarity::Neither => ConsentDecision::Unclear,
    }
}

/// Lowest milestone not yet emitted that lies in `(before, after]`. Only web
/// sessions show encouragement.
pub fn encouragement_check(
    progress_before: f64,
    progress_after: f64,
    channel: Channel,
    emitted: &BTreeSet<u8>,
) -> Option<u8> {
    if channel != Channel::Web {
        return None;
    }
    MILESTONES.into_iter().find(|m| {
        let f = f64::from(*m) / 100.0;
        !emitted.contains(m) && progress_before < f && f <= progress_after
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SafetyOutcome {
    Proceed,
    Steer(String),
    EndCall(TerminationReason),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DialogConfig {
    pub assistant_name: String,
    pub max_clarify_attempts: u8,
    /// Flags tolerated before the call is ended; the next one ends it.
    pub safety_steer_limit: u32,
    pub callback_number: String,
}

impl Default for DialogConfig {
    fn default() -> Self {
        Self {
            assistant_name: "Sofía".into(),
            max_clarify_attempts: 2,
            safety_steer_limit: 1,
            callback_number: String::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DialogEngine {
    questionnaire: Arc<Questionnaire>,
    templates: PromptTemplates,
    config: DialogConfig,
}

impl DialogEngine {
    pub fn new(questionnaire: Arc<Questionnaire>, config: DialogConfig) -> Self {
        let templates = PromptTemplates::for_language(&questionnaire.language);
        Self { questionnaire, templates, config }
    }

    pub fn with_templates(mut self, templates: PromptTemplates) -> Self {
        self.templates = templates;
        self
    }

    pub fn questionnaire(&self) -> &Arc<Questionnaire> {
        &self.questionnaire
    }

    pub fn templates(&self) -> &PromptTemplates {
        &self.templates
    }

    pub fn config(&self) -> &DialogConfig {
        &self.config
    }

    fn slots<'a>(&'a self, first_name: &'a str) -> Slots<'a> {
        let q = &self.questionnaire;
        Slots {
            first_name,
            assistant_name: &self.config.assistant_name,
            client_name: &q.client_name,
            service_name: &q.service_name,
            duration: minutes_in_words(q.expected_duration_min, q.language.family()),
            points: None,
            callback_number: &self.config.callback_number,
        }
    }

    /// Renders a template for a contact.
    pub fn render_for(&self, template: &str, first_name: &str) -> String {
        render(template, &self.slots(first_name))
    }

    /// Voicemail left when a direct call goes unanswered.
    pub fn voicemail_text(&self, first_name: &str) -> String {
        self.render_for(&self.templates.voicemail, first_name)
    }

    pub fn apply_safety(&self, verdict: SafetyVerdict, state: &SessionState) -> SafetyOutcome {
        match verdict {
            SafetyVerdict::Safe => SafetyOutcome::Proceed,
            SafetyVerdict::Flagged(_) if state.safety_flags < self.config.safety_steer_limit => {
                SafetyOutcome::Steer(self.render_for(&self.templates.safety_redirect, &state.contact.first_name))
            }
            SafetyVerdict::Flagged(_) => SafetyOutcome::EndCall(TerminationReason::SafetyStop),
        }
    }

    /// One transition. Events on a finished session are ignored.
    pub fn advance(
        &self,
        state: &SessionState,
        event: &SessionEvent,
        now: u64,
    ) -> (SessionState, Vec<AgentAction>) {
        if state.phase.is_absorbing() {
            return (state.clone(), vec![AgentAction::Ignored("session already ended".into())]);
        }
        let mut s = state.clone();
        let mut out = Vec::new();
        match event {
            SessionEvent::Connected => {
                if s.phase == Phase::Greeting {
                    s.answered_at = Some(now);
                    self.say(&s, &mut out, &self.templates.greeting, SayPurpose::Greeting, None);
                    s.phase = Phase::Consent;
                } else {
                    out.push(AgentAction::Ignored("already connected".into()));
                }
            }
            SessionEvent::Hangup => {
                self.terminate(&mut s, &mut out, TerminationReason::ParticipantHangup, now);
            }
            SessionEvent::TurnEffect(effect) => self.on_floor(&mut s, &mut out, *effect, now),
            SessionEvent::SafetyVerdict(verdict) => {
                if matches!(s.phase, Phase::Greeting) {
                    out.push(AgentAction::Ignored("not connected".into()));
                } else {
                    self.on_safety(&mut s, &mut out, *verdict, now);
                }
            }
            SessionEvent::ParticipantUtterance(text) => self.on_utterance(&mut s, &mut out, text, now),
        }
        (s, out)
    }

    fn say(
        &self,
        s: &SessionState,
        out: &mut Vec<AgentAction>,
        template: &str,
        purpose: SayPurpose,
        node: Option<NodeId>,
    ) {
        let text = self.render_for(template, &s.contact.first_name);
        out.push(AgentAction::Say { text, purpose, node });
    }

    fn terminate(
        &self,
        s: &mut SessionState,
        out: &mut Vec<AgentAction>,
        reason: TerminationReason,
        now: u64,
    ) {
        s.phase = Phase::Terminated { reason };
        s.ended_at = Some(now);
        out.push(AgentAction::EndCall(reason));
    }

    fn on_floor(&self, s: &mut SessionState, out: &mut Vec<AgentAction>, effect: FloorEffect, now: u64) {
        match effect {
            // barge-in only cuts the agent's audio; the dialog waits for the
            // finalized utterance
            FloorEffect::InterruptAi => {}
            FloorEffect::EmitIdlePrompt => match s.phase {
                Phase::Consent | Phase::Asking { .. } | Phase::Clarifying { .. } => {
                    self.say(s, out, &self.templates.idle_message, SayPurpose::Idle, None);
                }
                _ => out.push(AgentAction::Ignored("no pending prompt".into())),
            },
            FloorEffect::EndCallSilence => {
                self.say(s, out, &self.templates.silence_farewell, SayPurpose::Farewell, None);
                self.terminate(s, out, TerminationReason::SilenceTimeout, now);
            }
        }
    }

    fn on_safety(&self, s: &mut SessionState, out: &mut Vec<AgentAction>, verdict: SafetyVerdict, now: u64) {
        match self.apply_safety(verdict, s) {
            SafetyOutcome::Proceed => {}
            SafetyOutcome::Steer(text) => {
                s.safety_flags += 1;
                out.push(AgentAction::Say { text, purpose: SayPurpose::SafetyRedirect, node: None });
                self.repeat_pending(s, out);
            }
            SafetyOutcome::EndCall(reason) => {
                s.safety_flags += 1;
                self.say(s, out, &self.templates.safety_farewell, SayPurpose::Farewell, None);
                self.terminate(s, out, reason, now);
            }
        }
    }

    /// Re-issues whatever the participant was expected to answer.
    fn repeat_pending(&self, s: &SessionState, out: &mut Vec<AgentAction>) {
        match &s.phase {
            Phase::Consent => {
                self.say(s, out, &self.templates.consent_reask, SayPurpose::ConsentReask, None)
            }
            Phase::Asking { node } | Phase::Clarifying { node, .. } => {
                if let Some(n) = self.questionnaire.node(node) {
                    self.say(s, out, &n.prompt, SayPurpose::Question, Some(node.clone()));
                }
            }
            _ => {}
        }
    }

    fn on_utterance(&self, s: &mut SessionState, out: &mut Vec<AgentAction>, text: &str, now: u64) {
        match s.phase.clone() {
            Phase::Greeting => out.push(AgentAction::Ignored("not connected".into())),
            Phase::Consent => match handle_consent(text, &self.questionnaire.language) {
                ConsentDecision::Consented => self.start_survey(s, out, now),
                ConsentDecision::Unclear if s.consent_reasks == 0 => {
                    s.consent_reasks += 1;
                    self.say(s, out, &self.templates.consent_reask, SayPurpose::ConsentReask, None);
                }
                ConsentDecision::Declined | ConsentDecision::Unclear => {
                    self.say(s, out, &self.templates.consent_ack_decline, SayPurpose::DeclineAck, None);
                    self.terminate(s, out, TerminationReason::ConsentDeclined, now);
                }
            },
            Phase::Disclosure => self.start_survey(s, out, now),
            Phase::Asking { node } => self.on_answer(s, out, &node, 0, text, now),
            Phase::Clarifying { node, attempt } => self.on_answer(s, out, &node, attempt, text, now),
            Phase::Completed | Phase::Terminated { .. } => unreachable!("checked by advance"),
        }
    }

    fn start_survey(&self, s: &mut SessionState, out: &mut Vec<AgentAction>, now: u64) {
        s.consented = true;
        s.phase = Phase::Disclosure;
        self.say(s, out, &self.templates.disclosure, SayPurpose::Disclosure, None);
        let entry = Next::Node(self.questionnaire.entry_node.clone());
        self.enter(s, out, entry, now);
    }

    fn on_answer(
        &self,
        s: &mut SessionState,
        out: &mut Vec<AgentAction>,
        node_id: &NodeId,
        attempt: u8,
        text: &str,
        now: u64,
    ) {
        let Some(node) = self.questionnaire.node(node_id) else {
            self.terminate(s, out, TerminationReason::SystemError, now);
            return;
        };
        let answer = match parse_answer(node, text, &self.questionnaire.language) {
            ParseResult::Parsed(v) => v,
            ParseResult::OutOfRange(_) | ParseResult::Ambiguous(_)
                if attempt < self.config.max_clarify_attempts =>
            {
                s.phase = Phase::Clarifying { node: node_id.clone(), attempt: attempt + 1 };
                let mut slots = self.slots(&s.contact.first_name);
                if let QuestionKind::Likert { point_count } = node.kind {
                    slots.points = Some(point_count);
                }
                out.push(AgentAction::Say {
                    text: render(self.templates.clarification(&node.kind), &slots),
                    purpose: SayPurpose::Clarification,
                    node: Some(node_id.clone()),
                });
                return;
            }
            // clarification budget spent: keep the words and move on
            ParseResult::OutOfRange(_) | ParseResult::Ambiguous(_) => {
                let verbatim = text.trim();
                AnswerValue::FreeText(if verbatim.is_empty() { "(no response)".into() } else { verbatim.into() })
            }
        };
        self.record(s, out, node_id, answer, now);
    }

    fn record(
        &self,
        s: &mut SessionState,
        out: &mut Vec<AgentAction>,
        node_id: &NodeId,
        answer: AnswerValue,
        now: u64,
    ) {
        let q = &self.questionnaire;
        let next = match next_node(q, node_id, &answer) {
            Ok(n) => n,
            Err(_) => {
                self.terminate(s, out, TerminationReason::SystemError, now);
                return;
            }
        };
        s.answers.insert(node_id.clone(), answer.clone());
        let before = s.progress;
        let after = match progress(q, &s.answers, &next) {
            Ok(p) => p,
            Err(_) => {
                self.terminate(s, out, TerminationReason::SystemError, now);
                return;
            }
        };
        s.progress = after;
        out.push(AgentAction::RecordAnswer { node: node_id.clone(), answer, progress: after });
        if let Some(m) = encouragement_check(before, after, s.channel, &s.milestones_emitted) {
            s.milestones_emitted.insert(m);
            if let Some(t) = self.templates.encouragement.get(&m) {
                self.say(s, out, t, SayPurpose::Encouragement, None);
            }
        }
        self.enter(s, out, next, now);
    }

    /// Moves to `next`, speaking statements on the way, until a question
    /// is asked or the script ends.
    fn enter(&self, s: &mut SessionState, out: &mut Vec<AgentAction>, mut next: Next, now: u64) {
        for _ in 0..=self.questionnaire.nodes.len() {
            let id = match next {
                Next::End => {
                    self.say(s, out, &self.templates.closing, SayPurpose::Closing, None);
                    s.phase = Phase::Completed;
                    s.progress = 1.0;
                    s.ended_at = Some(now);
                    out.push(AgentAction::Complete);
                    return;
                }
                Next::Node(id) => id,
            };
            let Some(node) = self.questionnaire.node(&id) else { break };
            if node.kind == QuestionKind::Statement {
                self.say(s, out, &node.prompt, SayPurpose::Statement, Some(id.clone()));
                next = node.default_next.clone();
                continue;
            }
            self.say(s, out, &node.prompt, SayPurpose::Question, Some(id.clone()));
            s.first_question_at.get_or_insert(now);
            s.phase = Phase::Asking { node: id };
            return;
        }
        self.terminate(s, out, TerminationReason::SystemError, now);
    }
}
