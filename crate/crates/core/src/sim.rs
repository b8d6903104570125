//! Seeded campaign simulation. Every attempt runs end-to-end through the
//! session driver, dialog engine and floor control against a stochastic
//! respondent, with mock model ports.
//!
//! Each attempt draws from its own ChaCha stream keyed by (seed, attempt
//! index), so attempts run in parallel and results do not depend on
//! scheduling.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, Duration, Utc};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Geometric;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapters::{mock_tts_duration, DEFAULT_SPEAKING_RATE_WPM};
use crate::analytics::funnel::{sankey_flow, Funnel, FunnelError};
use crate::analytics::outcome::{classify_outcome, CallOutcome};
use crate::analytics::transcript::Transcript;
use crate::dialog::{Channel, ContactRef, DialogConfig, DialogEngine};
use crate::lang::{number_word, Family};
use crate::log::{to_ndjson, LogRecord};
use crate::outreach::{
    generate_invites, handle_no_answer, outbox_jsonl, plan_dial_queue, sms_primers, Campaign, Contact,
    ContactMethod, Disposition, OutboxMessage, OutreachAttempt,
};
use crate::questionnaire::{validate, QuestionKind, Questionnaire};
use crate::session::{Pending, Ports, Session, SessionInput};
use crate::turn::TurnTakingConfig;

/// Behaviour of a simulated respondent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RespondentPersona {
    /// Picks up a direct call / clicks a web link.
    pub answer_prob: f64,
    /// Hangs up while the greeting reveals the AI agent.
    pub ai_reveal_hangup_prob: f64,
    /// Declines the consent prompt.
    pub refusal_prob: f64,
    /// Hangs up after each answered question.
    pub per_question_dropout_hazard: f64,
    /// Gives an out-of-range or ambiguous closed-ended reply.
    pub invalid_answer_prob: f64,
    /// Mean words per open-ended reply.
    pub verbosity: f64,
    /// Stays silent for a turn.
    pub silence_prob: f64,
    /// Calls back after a voicemail.
    pub callback_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PersonaError {
    #[error("{field} = {value} is not a probability")]
    NotProbability { field: &'static str, value: f64 },
    #[error("verbosity {0} is below 1")]
    Verbosity(f64),
    #[error("persona mix is empty")]
    EmptyMix,
    #[error("persona weights sum to {0}, not 1")]
    Weights(f64),
    #[error("persona {0}: {1}")]
    Named(String, Box<PersonaError>),
}

impl RespondentPersona {
    /// Answers every call and every question.
    pub fn cooperative() -> Self {
        Self {
            answer_prob: 1.0,
            ai_reveal_hangup_prob: 0.0,
            refusal_prob: 0.0,
            per_question_dropout_hazard: 0.0,
            invalid_answer_prob: 0.0,
            verbosity: 12.0,
            silence_prob: 0.0,
            callback_prob: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), PersonaError> {
        let probs = [
            ("answer_prob", self.answer_prob),
            ("ai_reveal_hangup_prob", self.ai_reveal_hangup_prob),
            ("refusal_prob", self.refusal_prob),
            ("per_question_dropout_hazard", self.per_question_dropout_hazard),
            ("invalid_answer_prob", self.invalid_answer_prob),
            ("silence_prob", self.silence_prob),
            ("callback_prob", self.callback_prob),
        ];
        for (field, value) in probs {
            if !(0.0..=1.0).contains(&value) {
                return Err(PersonaError::NotProbability { field, value });
            }
        }
        if !(self.verbosity >= 1.0 && self.verbosity.is_finite()) {
            return Err(PersonaError::Verbosity(self.verbosity));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPersona {
    pub name: String,
    pub weight: f64,
    #[serde(flatten)]
    pub persona: RespondentPersona,
}

/// Personas and their shares of the contact list; the `personas.json` file
/// is a JSON array of these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PersonaMix(pub Vec<WeightedPersona>);

impl PersonaMix {
    pub fn single(persona: RespondentPersona) -> Self {
        Self(vec![WeightedPersona { name: "only".into(), weight: 1.0, persona }])
    }

    pub fn validate(&self) -> Result<(), PersonaError> {
        if self.0.is_empty() {
            return Err(PersonaError::EmptyMix);
        }
        for w in &self.0 {
            w.persona.validate().map_err(|e| PersonaError::Named(w.name.clone(), Box::new(e)))?;
            if !(w.weight >= 0.0 && w.weight.is_finite()) {
                return Err(PersonaError::Weights(w.weight));
            }
        }
        let total: f64 = self.0.iter().map(|w| w.weight).sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(PersonaError::Weights(total));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self, String> {
        let mix: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        mix.validate().map_err(|e| e.to_string())?;
        Ok(mix)
    }

    /// Demonstration preset for direct calls in Peru. A seeded run over 2539
    /// attempts lands near 131 full completions; the shares are tuned, not
    /// measured.
    pub fn peru_default() -> Self {
        let base = RespondentPersona {
            answer_prob: 0.0,
            ai_reveal_hangup_prob: 0.0,
            refusal_prob: 0.0,
            per_question_dropout_hazard: 0.0,
            invalid_answer_prob: 0.05,
            verbosity: 18.0,
            silence_prob: 0.03,
            callback_prob: 0.0,
        };
        Self(vec![
            WeightedPersona {
                name: "unreachable".into(),
                weight: 0.665,
                persona: RespondentPersona { callback_prob: 0.002, ..base },
            },
            WeightedPersona {
                name: "wary".into(),
                weight: 0.25,
                persona: RespondentPersona {
                    answer_prob: 0.8,
                    ai_reveal_hangup_prob: 0.55,
                    refusal_prob: 0.6,
                    per_question_dropout_hazard: 0.15,
                    ..base
                },
            },
            WeightedPersona {
                name: "engaged".into(),
                weight: 0.085,
                persona: RespondentPersona {
                    answer_prob: 0.85,
                    ai_reveal_hangup_prob: 0.1,
                    refusal_prob: 0.1,
                    per_question_dropout_hazard: 0.008,
                    callback_prob: 0.05,
                    ..base
                },
            },
        ])
    }
}

/// Where in the interview the respondent is about to act.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Moment {
    /// First hearing of the greeting, which reveals the AI agent.
    Greeting,
    /// A repeated consent prompt.
    Consent,
    /// A question; `after_answer` when the previous reply was recorded.
    Question { kind: QuestionKind, after_answer: bool },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RespondentAction {
    Reply { text: String, delay_ms: u64 },
    Silence { duration_ms: u64 },
    Hangup,
}

/// Timing and language the respondent acts in.
#[derive(Debug, Clone, Copy)]
pub struct StepContext {
    pub family: Family,
    pub idle_delay_ms: u64,
}

const ES_WORDS: &[&str] = &[
    "el", "servicio", "fue", "muy", "bueno", "rápido", "la", "atención", "me", "gustó", "precio",
    "entrega", "producto", "calidad", "siempre", "llegó", "a", "tiempo", "pero", "podría", "mejorar",
    "aplicación", "personal", "amable", "recomiendo", "experiencia", "en", "general", "cómodo", "y",
];
const EN_WORDS: &[&str] = &[
    "the", "service", "was", "really", "good", "fast", "support", "i", "liked", "price", "delivery",
    "product", "quality", "always", "arrived", "on", "time", "but", "could", "improve", "app", "staff",
    "friendly", "recommend", "experience", "overall", "easy", "and", "helpful", "team",
];

fn pick<'a>(rng: &mut impl Rng, items: &[&'a str]) -> &'a str {
    items.choose(rng).copied().expect("non-empty pool")
}

fn consent_reply(rng: &mut impl Rng, family: Family, accept: bool) -> String {
    let pool: &[&str] = match (family, accept) {
        (Family::Spanish, true) => &["Sí, claro", "Sí", "Dale", "Bueno, adelante"],
        (Family::Spanish, false) => &["No, gracias", "No tengo tiempo", "No"],
        (_, true) => &["Yes, sure", "Okay", "Sure, go ahead", "Yes"],
        (_, false) => &["No, thanks", "No, I don't have time", "Not now"],
    };
    pick(rng, pool).to_owned()
}

/// A reply the answer parser accepts for `kind`.
fn valid_reply(rng: &mut impl Rng, family: Family, kind: QuestionKind, verbosity: f64) -> String {
    let es = family == Family::Spanish;
    match kind {
        QuestionKind::YesNo => {
            let pool: &[&str] = if es {
                &["Sí", "Sí, claro", "No", "No, nunca"]
            } else {
                &["Yes", "Yes, I have", "No", "No, never"]
            };
            pick(rng, pool).to_owned()
        }
        QuestionKind::Nps | QuestionKind::Likert { .. } => {
            let (lo, hi) = kind.rating_range().expect("rating kind");
            let n = rng.random_range(lo..=hi);
            match (rng.random_range(0..3), es) {
                (0, _) => n.to_string(),
                (1, true) => format!("Le daría un {n}"),
                (1, false) => format!("I'd give it a {n}"),
                _ => number_word(n, family).map_or_else(|| n.to_string(), str::to_owned),
            }
        }
        QuestionKind::OpenEnded | QuestionKind::Statement => open_reply(rng, family, verbosity),
    }
}

/// A closed-ended reply the parser rejects, prompting a clarification.
fn invalid_reply(rng: &mut impl Rng, family: Family, kind: QuestionKind) -> String {
    let es = family == Family::Spanish;
    match kind {
        QuestionKind::YesNo => {
            let pool: &[&str] =
                if es { &["Tal vez", "Depende", "Más o menos"] } else { &["Maybe", "It depends", "Hard to say"] };
            pick(rng, pool).to_owned()
        }
        QuestionKind::Nps | QuestionKind::Likert { .. } => {
            let (_, hi) = kind.rating_range().expect("rating kind");
            let over = hi + 1 + rng.random_range(0..5);
            let pool = if es {
                [format!("Un {over}"), "Once".to_owned(), "No sabría decir".to_owned()]
            } else {
                [format!("{over}"), "Eleven".to_owned(), "Hard to say".to_owned()]
            };
            pool[rng.random_range(0..pool.len())].clone()
        }
        _ => String::new(),
    }
}

/// Number of words in an open-ended reply: 1 + geometric, mean `verbosity`.
pub fn open_word_count(rng: &mut impl Rng, verbosity: f64) -> usize {
    let g = Geometric::new(1.0 / verbosity).expect("verbosity >= 1");
    1 + g.sample(rng) as usize
}

fn open_reply(rng: &mut impl Rng, family: Family, verbosity: f64) -> String {
    let words = if family == Family::Spanish { ES_WORDS } else { EN_WORDS };
    let n = open_word_count(rng, verbosity);
    let mut out = String::new();
    let mut in_sentence = 0;
    for i in 0..n {
        let w = pick(rng, words);
        if in_sentence == 0 {
            if !out.is_empty() {
                out.push(' ');
            }
            let mut cs = w.chars();
            let first = cs.next().expect("non-empty word");
            out.extend(first.to_uppercase());
            out.push_str(cs.as_str());
        } else {
            out.push(' ');
            out.push_str(w);
        }
        in_sentence += 1;
        let last = i + 1 == n;
        if last || (in_sentence >= 6 && rng.random_bool(0.2)) {
            out.push(if last && rng.random_bool(0.05) { '?' } else { '.' });
            in_sentence = 0;
        }
    }
    out
}

/// One respondent decision.
pub fn respondent_step(
    persona: &RespondentPersona,
    rng: &mut impl Rng,
    _agent_prompt: &str,
    moment: Moment,
    ctx: &StepContext,
) -> RespondentAction {
    match moment {
        Moment::Greeting if rng.random_bool(persona.ai_reveal_hangup_prob) => return RespondentAction::Hangup,
        Moment::Question { after_answer: true, .. } if rng.random_bool(persona.per_question_dropout_hazard) => {
            return RespondentAction::Hangup
        }
        _ => {}
    }
    if rng.random_bool(persona.silence_prob) {
        return RespondentAction::Silence { duration_ms: ctx.idle_delay_ms + rng.random_range(500..=3_000) };
    }
    let reaction_ms = rng.random_range(400..=1_600);
    let text = match moment {
        Moment::Greeting | Moment::Consent => {
            let refuse = rng.random_bool(persona.refusal_prob);
            consent_reply(rng, ctx.family, !refuse)
        }
        Moment::Question { kind, .. } => {
            if kind.is_closed_ended() && rng.random_bool(persona.invalid_answer_prob) {
                invalid_reply(rng, ctx.family, kind)
            } else {
                valid_reply(rng, ctx.family, kind, persona.verbosity)
            }
        }
    };
    // the turn is final once the respondent has finished saying it
    let delay_ms = reaction_ms + mock_tts_duration(&text, DEFAULT_SPEAKING_RATE_WPM);
    RespondentAction::Reply { text, delay_ms }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub turn: TurnTakingConfig,
    pub dialog: DialogConfig,
    /// Campaign start; dial queues and invites are planned from here.
    pub now: DateTime<Utc>,
    /// Respondent decisions per session before the respondent gives up.
    pub max_steps: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            turn: TurnTakingConfig::default(),
            dialog: DialogConfig::default(),
            now: DateTime::from_timestamp(1_717_200_000, 0).expect("valid instant"),
            max_steps: 400,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid personas: {0}")]
    Persona(#[from] PersonaError),
    #[error("invalid questionnaire:\n{0}")]
    Questionnaire(String),
    #[error("invalid turn-taking config: {0}")]
    Turn(#[from] crate::turn::ConfigError),
    #[error("funnel: {0}")]
    Funnel(#[from] FunnelError),
    #[error("campaign enables neither web invites nor direct calls")]
    NoSimulatedMethod,
}

/// One attempt's result, as written to `outcomes.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptResult {
    pub attempt_id: String,
    pub contact_id: String,
    pub method: ContactMethod,
    pub persona: String,
    /// Session that decided the outcome, if any.
    pub session_id: Option<String>,
    /// The session came from the contact calling back after a voicemail.
    pub callback: bool,
    pub outcome: CallOutcome,
    pub progress: f64,
    pub duration_ms: u64,
}

#[derive(Debug, Clone)]
pub struct SessionLog {
    pub session_id: String,
    pub records: Vec<LogRecord>,
}

#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub seed: u64,
    pub campaign_id: String,
    pub attempts: Vec<AttemptResult>,
    pub sessions: Vec<SessionLog>,
    pub outbox: Vec<OutboxMessage>,
    pub funnel: Funnel,
}

struct Ctx<'a> {
    engine: Arc<DialogEngine>,
    ports: Ports,
    config: &'a SimConfig,
    mix: &'a PersonaMix,
    weights: WeightedIndex<f64>,
    family: Family,
}

struct AttemptRun {
    result: AttemptResult,
    session: Option<SessionLog>,
    outbox: Vec<OutboxMessage>,
}

/// The per-attempt random stream.
pub fn attempt_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Plays one session until it ends. The respondent always hangs up if
/// `max_steps` decisions pass without the engine ending the call.
fn play_session(
    ctx: &Ctx<'_>,
    persona: &RespondentPersona,
    rng: &mut ChaCha8Rng,
    session_id: String,
    contact: &Contact,
    channel: Channel,
    t0: u64,
) -> Vec<LogRecord> {
    let contact_ref = ContactRef { contact_id: contact.contact_id.clone(), first_name: contact.first_name.clone() };
    let (mut s, open) =
        Session::open(ctx.engine.clone(), ctx.config.turn, ctx.ports.clone(), session_id, contact_ref, channel, t0);
    let mut records = vec![open];
    records.extend(s.handle(SessionInput::Connect, t0).records().cloned());
    let step_ctx = StepContext { family: ctx.family, idle_delay_ms: ctx.config.turn.idle_delay_ms };
    let mut greeted = false;
    let mut after_answer = false;
    for _ in 0..ctx.config.max_steps {
        if s.is_ended() {
            break;
        }
        let free_at = s.speaking_until().unwrap_or(s.last_ts()).max(s.last_ts());
        let moment = match s.pending() {
            Pending::Consent if !greeted => Moment::Greeting,
            Pending::Consent => Moment::Consent,
            Pending::Question(_, kind) => Moment::Question { kind, after_answer },
            Pending::Nothing => {
                records.extend(s.handle(SessionInput::Tick, free_at + 1_000).records().cloned());
                continue;
            }
        };
        let prompt = s.last_agent_text().unwrap_or_default().to_owned();
        match respondent_step(persona, rng, &prompt, moment, &step_ctx) {
            RespondentAction::Hangup => {
                let at = if moment == Moment::Greeting {
                    // mid-greeting, once the AI has introduced itself
                    let start = s.last_ts();
                    start + rng.random_range(0..=free_at.saturating_sub(start))
                } else {
                    free_at + rng.random_range(200..=1_500)
                };
                records.extend(s.handle(SessionInput::Hangup, at).records().cloned());
            }
            RespondentAction::Silence { duration_ms } => {
                let mut t = free_at;
                while t < free_at + duration_ms && !s.is_ended() {
                    t += 1_000;
                    records.extend(s.handle(SessionInput::Tick, t).records().cloned());
                }
                after_answer = false;
            }
            RespondentAction::Reply { text, delay_ms } => {
                let before = s.state().answers.len();
                records.extend(s.handle(SessionInput::user_text(text), free_at + delay_ms).records().cloned());
                after_answer = s.state().answers.len() > before;
            }
        }
        greeted = true;
    }
    if !s.is_ended() {
        let at = s.speaking_until().unwrap_or(s.last_ts()).max(s.last_ts());
        records.extend(s.handle(SessionInput::Hangup, at).records().cloned());
    }
    records
}

fn run_attempt(ctx: &Ctx<'_>, seed: u64, index: usize, attempt: &OutreachAttempt, contact: &Contact) -> AttemptRun {
    let mut rng = attempt_rng(seed, index as u64);
    let which = ctx.weights.sample(&mut rng);
    let wp = &ctx.mix.0[which];
    let persona = &wp.persona;
    let channel = if attempt.method == ContactMethod::WebcallInvite { Channel::Web } else { Channel::Phone };
    let mut attempt = attempt.clone();
    let mut outbox = Vec::new();
    let t0 = attempt.scheduled_at.timestamp_millis() as u64;
    let reached = rng.random_bool(persona.answer_prob);
    let mut session = None;
    let mut callback = false;
    if reached {
        let sid = format!("{}-s", attempt.attempt_id);
        // web invitees open the link some time after it arrives
        let start = if channel == Channel::Web { t0 + rng.random_range(60_000..=86_400_000) } else { t0 };
        let records = play_session(ctx, persona, &mut rng, sid.clone(), contact, channel, start);
        attempt.disposition = Disposition::Connected { session_id: sid.clone() };
        session = Some(SessionLog { session_id: sid, records });
    } else {
        let when = attempt.scheduled_at + Duration::seconds(30);
        let vm = ctx.engine.voicemail_text(&contact.first_name);
        outbox.extend(handle_no_answer(&mut attempt, &contact.phone, &vm, when));
        if channel == Channel::Phone && rng.random_bool(persona.callback_prob) {
            let sid = format!("{}-cb", attempt.attempt_id);
            let start = t0 + rng.random_range(600_000..=172_800_000);
            let records = play_session(ctx, persona, &mut rng, sid.clone(), contact, Channel::Phone, start);
            session = Some(SessionLog { session_id: sid, records });
            callback = true;
        }
    }
    let transcript = session.as_ref().map(|l| Transcript::from_records(&l.records).expect("driver logs open first"));
    let outcome = classify_outcome(transcript.as_ref(), channel).expect("driver always ends sessions");
    let (progress, duration_ms) = transcript.as_ref().map_or((0.0, 0), |t| (t.progress, t.duration_ms()));
    AttemptRun {
        result: AttemptResult {
            attempt_id: attempt.attempt_id.clone(),
            contact_id: contact.contact_id.clone(),
            method: attempt.method,
            persona: wp.name.clone(),
            session_id: session.as_ref().map(|l| l.session_id.clone()),
            callback,
            outcome,
            progress,
            duration_ms,
        },
        session,
        outbox,
    }
}

/// Attempts implied by a campaign: one web invite and/or one direct call
/// per contact, in contact order.
pub fn campaign_attempts(campaign: &Campaign, now: DateTime<Utc>) -> Vec<OutreachAttempt> {
    let mut out = Vec::new();
    if campaign.config.methods.contains(&ContactMethod::WebcallInvite) {
        out.extend(campaign.contacts.iter().enumerate().map(|(i, c)| OutreachAttempt {
            attempt_id: format!("{}-w{:05}", campaign.config.campaign_id, i + 1),
            contact_id: c.contact_id.clone(),
            method: ContactMethod::WebcallInvite,
            scheduled_at: now,
            disposition: Disposition::Pending,
        }));
    }
    let mut direct = plan_dial_queue(campaign, now, &BTreeSet::new());
    direct.sort_by(|a, b| a.contact_id.cmp(&b.contact_id));
    out.extend(direct);
    out
}

/// Simulates every attempt of `campaign`.
pub fn run_simulation(
    campaign: &Campaign,
    questionnaire: &Questionnaire,
    mix: &PersonaMix,
    config: &SimConfig,
    seed: u64,
) -> Result<SimulationRun, SimError> {
    mix.validate()?;
    config.turn.validate()?;
    let report = validate(questionnaire);
    if !report.is_valid() {
        return Err(SimError::Questionnaire(report.to_string()));
    }
    let methods = &campaign.config.methods;
    if !methods.contains(&ContactMethod::WebcallInvite) && !methods.contains(&ContactMethod::DirectCall) {
        return Err(SimError::NoSimulatedMethod);
    }
    let mut dialog = config.dialog.clone();
    if dialog.callback_number.is_empty() {
        dialog.callback_number = campaign.config.callback_number.clone();
    }
    let ctx = Ctx {
        engine: Arc::new(DialogEngine::new(Arc::new(questionnaire.clone()), dialog)),
        ports: Ports::default(),
        config,
        mix,
        weights: WeightedIndex::new(mix.0.iter().map(|w| w.weight)).map_err(|_| PersonaError::Weights(0.0))?,
        family: questionnaire.language.family(),
    };
    let attempts = campaign_attempts(campaign, config.now);
    let runs: Vec<AttemptRun> = attempts
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let contact = campaign.by_id(&a.contact_id).expect("attempts come from contacts");
            run_attempt(&ctx, seed, i, a, contact)
        })
        .collect();

    let mut outbox = Vec::new();
    if methods.contains(&ContactMethod::WebcallInvite) {
        outbox.extend(generate_invites(campaign, &questionnaire.client_name, config.now));
    }
    let direct: Vec<OutreachAttempt> =
        attempts.iter().filter(|a| a.method == ContactMethod::DirectCall).cloned().collect();
    outbox.extend(sms_primers(campaign, &direct, &questionnaire.client_name));
    let mut results = Vec::with_capacity(runs.len());
    let mut sessions = Vec::new();
    for r in runs {
        outbox.extend(r.outbox);
        sessions.extend(r.session);
        results.push(r.result);
    }
    outbox.sort_by(|a, b| a.ts.cmp(&b.ts).then_with(|| a.to.cmp(&b.to)));
    let outcomes: Vec<CallOutcome> = results.iter().map(|r| r.outcome).collect();
    let funnel = sankey_flow(outcomes.len() as u64, &outcomes)?;
    Ok(SimulationRun {
        seed,
        campaign_id: campaign.config.campaign_id.clone(),
        attempts: results,
        sessions,
        outbox,
        funnel,
    })
}

/// `n` generated contacts with distinct Peruvian mobile numbers.
pub fn synthetic_contacts(n: usize, seed: u64) -> Vec<Contact> {
    const NAMES: &[&str] =
        &["Ana", "Luis", "María", "José", "Rosa", "Carlos", "Lucía", "Jorge", "Carmen", "Miguel", "Elena", "Raúl"];
    let mut rows = String::from("first_name,phone,timezone\n");
    for i in 0..n {
        rows.push_str(&format!("{},+519{:08},America/Lima\n", NAMES[i % NAMES.len()], i + 1));
    }
    crate::outreach::ingest_contacts(&rows, seed).contacts
}

impl SimulationRun {
    pub fn outcomes(&self) -> Vec<CallOutcome> {
        self.attempts.iter().map(|a| a.outcome).collect()
    }

    pub fn transcripts(&self) -> Vec<Transcript> {
        self.sessions
            .iter()
            .map(|l| Transcript::from_records(&l.records).expect("simulated logs are well formed"))
            .collect()
    }

    pub fn outcomes_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "attempt_id", "contact_id", "method", "persona", "session_id", "callback", "outcome", "progress",
            "duration_ms",
        ])
        .expect("in-memory write");
        for a in &self.attempts {
            w.write_record([
                a.attempt_id.clone(),
                a.contact_id.clone(),
                a.method.as_str().to_owned(),
                a.persona.clone(),
                a.session_id.clone().unwrap_or_default(),
                a.callback.to_string(),
                a.outcome.label(),
                format!("{:.4}", a.progress),
                a.duration_ms.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    /// Writes `transcripts/*.jsonl`, `outcomes.csv`, `funnel.json` and
    /// `outbox.jsonl` under `dir`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        let tdir = dir.join("transcripts");
        fs::create_dir_all(&tdir)?;
        for l in &self.sessions {
            fs::write(tdir.join(format!("{}.jsonl", l.session_id)), to_ndjson(&l.records))?;
        }
        fs::write(dir.join("outcomes.csv"), self.outcomes_csv())?;
        fs::write(dir.join("funnel.json"), self.funnel.to_json())?;
        fs::write(dir.join("outbox.jsonl"), outbox_jsonl(&self.outbox))?;
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct OutcomeRow {
    attempt_id: String,
    contact_id: String,
    method: ContactMethod,
    persona: String,
    session_id: String,
    callback: bool,
    outcome: String,
    progress: f64,
    duration_ms: u64,
}

/// Reads an `outcomes.csv` written by [`SimulationRun::write_to`].
pub fn read_outcomes_csv(text: &str) -> Result<Vec<AttemptResult>, String> {
    let mut out = Vec::new();
    for row in csv::Reader::from_reader(text.as_bytes()).deserialize::<OutcomeRow>() {
        let r = row.map_err(|e| e.to_string())?;
        let outcome = CallOutcome::parse(&r.outcome).ok_or_else(|| format!("unknown outcome {:?}", r.outcome))?;
        out.push(AttemptResult {
            attempt_id: r.attempt_id,
            contact_id: r.contact_id,
            method: r.method,
            persona: r.persona,
            session_id: (!r.session_id.is_empty()).then_some(r.session_id),
            callback: r.callback,
            outcome,
            progress: r.progress,
            duration_ms: r.duration_ms,
        });
    }
    Ok(out)
}

/// Loads every `transcripts/*.jsonl` under `dir`, sorted by file name.
pub fn read_transcripts(dir: &Path) -> Result<Vec<Transcript>, String> {
    let tdir = dir.join("transcripts");
    let mut paths: Vec<_> = match fs::read_dir(&tdir) {
        Ok(rd) => rd.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "jsonl")).collect(),
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(format!("{}: {e}", tdir.display())),
    };
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let recs = crate::log::read_log(p).map_err(|e| format!("{}: {e}", p.display()))?;
            Transcript::from_records(&recs).map_err(|e| format!("{}: {e}", p.display()))
        })
        .collect()
}
