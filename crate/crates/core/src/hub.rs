//! Hosts campaigns and live sessions on top of a directory store.
//!
//! Layout under the data directory:
//!
//! ```text
//! campaigns/<id>/campaign.json      config, contacts, questionnaire, bookings
//! campaigns/<id>/sessions/<sid>.jsonl  per-session event log (write-ahead)
//! campaigns/<id>/sim/                 last simulation's outputs
//! ```
//!
//! Every input is appended together with the frames it produced before the
//! frames are returned. Opening a hub replays each session log, so a
//! restart between any two frames rebuilds identical sessions.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, NaiveDate, Utc};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::analytics::funnel::sankey_flow;
use crate::analytics::outcome::{classify_outcome, CallOutcome};
use crate::analytics::report::{
    completed_summary, longest_per_contact, rates_by_group, rates_text, summary_csv, summary_text, ReportError,
};
use crate::analytics::transcript::Transcript;
use crate::dialog::{Channel, ContactRef, DialogConfig, DialogEngine, Phase};
use crate::lang::Family;
use crate::log::{append_records, read_log, to_ndjson, Direction, LogRecord};
use crate::outreach::{
    match_inbound, schedule_call, unknown_caller_message, Campaign, CampaignConfig, Contact, ContactMethod,
    DialWindow, Inbound, OutreachAttempt, ScheduleError,
};
use crate::questionnaire::{validate, Questionnaire};
use crate::session::{Ports, Session, SessionError, SessionInput, Snapshot};
use crate::sim::{read_outcomes_csv, read_transcripts, run_simulation, PersonaMix, SimConfig, SimulationRun};
use crate::turn::TurnTakingConfig;

/// A frame on the session stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireFrame {
    #[serde(default)]
    pub ts_ms: u64,
    #[serde(default)]
    pub session_id: String,
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub payload: Value,
}

impl WireFrame {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("frames serialize") + "\n"
    }

    fn error(session_id: &str, ts_ms: u64, message: String) -> Self {
        Self {
            ts_ms,
            session_id: session_id.to_owned(),
            kind: "error".into(),
            payload: serde_json::json!({ "message": message }),
        }
    }
}

impl From<&LogRecord> for WireFrame {
    fn from(r: &LogRecord) -> Self {
        Self { ts_ms: r.ts_ms, session_id: r.session_id.clone(), kind: r.kind.clone(), payload: r.payload.clone() }
    }
}

/// Parses a client frame. Only participant speech and hangups are
/// accepted; verdicts and node bindings are always assigned server-side.
pub fn parse_inbound(line: &str) -> Result<SessionInput, HubError> {
    let f: WireFrame = serde_json::from_str(line).map_err(|e| HubError::Protocol(e.to_string()))?;
    let field = |k: &str| f.payload.get(k).and_then(Value::as_str).map(str::to_owned);
    match f.kind.as_str() {
        "user_text" => match field("text") {
            Some(t) if !t.trim().is_empty() => Ok(SessionInput::user_text(t)),
            _ => Err(HubError::Protocol("user_text needs a non-empty payload.text".into())),
        },
        "user_word" => match field("word") {
            Some(w) if !w.trim().is_empty() => Ok(SessionInput::UserWord { word: w }),
            _ => Err(HubError::Protocol("user_word needs a non-empty payload.word".into())),
        },
        "hangup" => Ok(SessionInput::Hangup),
        other => Err(HubError::Protocol(format!("unsupported frame type {other:?}"))),
    }
}

/// Labelled outcomes and transcripts feeding the reports.
type ReportInputs = (Vec<(String, CallOutcome)>, Vec<Transcript>);

#[derive(Debug, Error)]
pub enum HubError {
    #[error("unknown token")]
    UnknownToken,
    #[error("already completed")]
    AlreadyCompleted,
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("unknown campaign {0}")]
    UnknownCampaign(String),
    #[error("campaign {0} already exists")]
    CampaignExists(String),
    #[error("invalid campaign: {0}")]
    InvalidCampaign(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("simulation failed: {0}")]
    Simulation(String),
    #[error("replay of {session} diverged: {detail}")]
    Replay { session: String, detail: String },
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// What a browser needs to start a web call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub session_id: String,
    pub first_name: String,
    pub instructions: String,
    pub stream: String,
    pub rejoined: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulePrefill {
    pub first_name: String,
    pub phone: String,
    pub timezone: String,
    pub dial_windows: Vec<DialWindow>,
}

/// Body of `POST /schedule/{token}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleRequest {
    pub phone: String,
    pub timezone: String,
    pub date: NaiveDate,
    pub window: DialWindow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleConfirmation {
    pub attempt_id: String,
    pub scheduled_at: DateTime<Utc>,
    /// The slot in the participant's own zone.
    pub local_time: String,
    pub phone: String,
    pub timezone: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CampaignFile {
    config: CampaignConfig,
    contacts: Vec<Contact>,
    questionnaire: Questionnaire,
    #[serde(default)]
    scheduled: Vec<OutreachAttempt>,
}

struct CampaignEntry {
    campaign: Campaign,
    questionnaire: Arc<Questionnaire>,
    engine: Arc<DialogEngine>,
    scheduled: Vec<OutreachAttempt>,
}

struct Live {
    session: Session,
    campaign_id: String,
    path: PathBuf,
    frames: Vec<WireFrame>,
}

impl Live {
    fn commit(&mut self, records: Vec<&LogRecord>) -> io::Result<Vec<WireFrame>> {
        let owned: Vec<LogRecord> = records.into_iter().cloned().collect();
        append_records(&self.path, &owned)?;
        let out: Vec<WireFrame> =
            owned.iter().filter(|r| r.direction == Direction::Out).map(WireFrame::from).collect();
        self.frames.extend(out.iter().cloned());
        Ok(out)
    }
}

pub struct Hub {
    dir: PathBuf,
    turn: TurnTakingConfig,
    dialog: DialogConfig,
    campaigns: RwLock<BTreeMap<String, CampaignEntry>>,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Live>>>>,
}

fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(tmp, path)
}

fn sorted_entries(dir: &Path, ext: Option<&str>) -> io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    match fs::read_dir(dir) {
        Ok(rd) => {
            for e in rd {
                let p = e?.path();
                if ext.is_none_or(|x| p.extension().is_some_and(|y| y == x)) {
                    out.push(p);
                }
            }
        }
        Err(e) if e.kind() == io::ErrorKind::NotFound => {}
        Err(e) => return Err(e),
    }
    out.sort();
    Ok(out)
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl Hub {
    /// Opens (or creates) a store and replays every session in it.
    pub fn open(dir: impl Into<PathBuf>, turn: TurnTakingConfig, dialog: DialogConfig) -> Result<Self, HubError> {
        let dir = dir.into();
        fs::create_dir_all(dir.join("campaigns"))?;
        let hub = Self {
            dir,
            turn,
            dialog,
            campaigns: RwLock::new(BTreeMap::new()),
            sessions: RwLock::new(BTreeMap::new()),
        };
        for cdir in sorted_entries(&hub.dir.join("campaigns"), None)? {
            let file = cdir.join("campaign.json");
            if !file.exists() {
                continue;
            }
            let cf: CampaignFile = serde_json::from_str(&fs::read_to_string(&file)?)
                .map_err(|e| HubError::InvalidCampaign(format!("{}: {e}", file.display())))?;
            let id = cf.config.campaign_id.clone();
            let entry = hub.entry_from(cf);
            let engine = entry.engine.clone();
            hub.campaigns.write().expect("campaign lock").insert(id.clone(), entry);
            for path in sorted_entries(&cdir.join("sessions"), Some("jsonl"))? {
                let live = hub.replay_file(&id, engine.clone(), &path)?;
                let sid = live.session.id().to_owned();
                hub.sessions.write().expect("session lock").insert(sid, Arc::new(Mutex::new(live)));
            }
        }
        Ok(hub)
    }

    fn entry_from(&self, cf: CampaignFile) -> CampaignEntry {
        let mut dialog = self.dialog.clone();
        if dialog.callback_number.is_empty() {
            dialog.callback_number = cf.config.callback_number.clone();
        }
        let questionnaire = Arc::new(cf.questionnaire);
        CampaignEntry {
            engine: Arc::new(DialogEngine::new(questionnaire.clone(), dialog)),
            questionnaire,
            campaign: Campaign::new(cf.config, cf.contacts),
            scheduled: cf.scheduled,
        }
    }

    fn replay_file(&self, campaign_id: &str, engine: Arc<DialogEngine>, path: &Path) -> Result<Live, HubError> {
        let stored = read_log(path)?;
        let (session, regenerated) = Session::replay(engine, self.turn, Ports::default(), &stored)?;
        let sid = session.id().to_owned();
        if regenerated != stored {
            // A crash may cut a write short; a stored prefix is repaired by
            // the regenerated tail, anything else is corruption.
            if regenerated.len() > stored.len() && regenerated[..stored.len()] == stored[..] {
                tracing::warn!(session = %sid, "repairing truncated session log");
                write_atomic(path, &to_ndjson(&regenerated))?;
            } else {
                let at = regenerated.iter().zip(&stored).position(|(a, b)| a != b).unwrap_or(regenerated.len().min(stored.len()));
                return Err(HubError::Replay { session: sid, detail: format!("first difference at record {at}") });
            }
        }
        let frames = regenerated.iter().filter(|r| r.direction == Direction::Out).map(WireFrame::from).collect();
        Ok(Live { session, campaign_id: campaign_id.to_owned(), path: path.to_owned(), frames })
    }

    pub fn data_dir(&self) -> &Path {
        &self.dir
    }

    fn campaign_dir(&self, id: &str) -> PathBuf {
        self.dir.join("campaigns").join(id)
    }

    fn persist_campaign(&self, e: &CampaignEntry) -> io::Result<()> {
        let cf = CampaignFile {
            config: e.campaign.config.clone(),
            contacts: e.campaign.contacts.clone(),
            questionnaire: (*e.questionnaire).clone(),
            scheduled: e.scheduled.clone(),
        };
        let dir = self.campaign_dir(&cf.config.campaign_id);
        fs::create_dir_all(dir.join("sessions"))?;
        write_atomic(&dir.join("campaign.json"), &(serde_json::to_string_pretty(&cf).expect("campaign serializes") + "\n"))
    }

    pub fn create_campaign(
        &self,
        config: CampaignConfig,
        questionnaire: Questionnaire,
        contacts: Vec<Contact>,
    ) -> Result<(), HubError> {
        config.validate().map_err(|e| HubError::InvalidCampaign(e.to_string()))?;
        let report = validate(&questionnaire);
        if !report.is_valid() {
            return Err(HubError::InvalidCampaign(report.to_string()));
        }
        if config.campaign_id.is_empty()
            || !config.campaign_id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(HubError::InvalidCampaign(format!("campaign id {:?} must be [A-Za-z0-9_-]+", config.campaign_id)));
        }
        let mut campaigns = self.campaigns.write().expect("campaign lock");
        if campaigns.contains_key(&config.campaign_id) {
            return Err(HubError::CampaignExists(config.campaign_id));
        }
        let id = config.campaign_id.clone();
        let entry = self.entry_from(CampaignFile { config, contacts, questionnaire, scheduled: Vec::new() });
        self.persist_campaign(&entry)?;
        campaigns.insert(id, entry);
        Ok(())
    }

    pub fn campaign_ids(&self) -> Vec<String> {
        self.campaigns.read().expect("campaign lock").keys().cloned().collect()
    }

    pub fn session_ids(&self) -> Vec<String> {
        self.sessions.read().expect("session lock").keys().cloned().collect()
    }

    fn find_token(&self, token: &str) -> Option<(String, Contact)> {
        let campaigns = self.campaigns.read().expect("campaign lock");
        campaigns.iter().find_map(|(id, e)| e.campaign.by_token(token).map(|c| (id.clone(), c.clone())))
    }

    /// Sessions of one contact, oldest first.
    fn contact_sessions(&self, campaign_id: &str, contact_id: &str) -> Vec<Arc<Mutex<Live>>> {
        let sessions = self.sessions.read().expect("session lock");
        sessions
            .values()
            .filter(|l| {
                let l = lock(l);
                l.campaign_id == campaign_id && l.session.state().contact.contact_id == contact_id
            })
            .cloned()
            .collect()
    }

    fn start_session(
        &self,
        campaign_id: &str,
        contact: &Contact,
        channel: Channel,
        tag: &str,
        now: u64,
    ) -> Result<(String, Vec<WireFrame>), HubError> {
        let engine = {
            let campaigns = self.campaigns.read().expect("campaign lock");
            campaigns.get(campaign_id).ok_or_else(|| HubError::UnknownCampaign(campaign_id.into()))?.engine.clone()
        };
        let n = self.contact_sessions(campaign_id, &contact.contact_id).len() + 1;
        let sid = format!("{campaign_id}-{}-{tag}{n}", contact.contact_id);
        let contact_ref = ContactRef { contact_id: contact.contact_id.clone(), first_name: contact.first_name.clone() };
        let (mut session, open) = Session::open(engine, self.turn, Ports::default(), &sid, contact_ref, channel, now);
        let connected = session.handle(SessionInput::Connect, now);
        let dir = self.campaign_dir(campaign_id).join("sessions");
        fs::create_dir_all(&dir)?;
        let mut live = Live { session, campaign_id: campaign_id.to_owned(), path: dir.join(format!("{sid}.jsonl")), frames: Vec::new() };
        let mut records = vec![&open];
        records.extend(connected.records());
        let frames = live.commit(records)?;
        self.sessions.write().expect("session lock").insert(sid.clone(), Arc::new(Mutex::new(live)));
        Ok((sid, frames))
    }

    /// Opens the web call behind a link token. A contact with a live call
    /// rejoins it; one who already completed the interview is turned away.
    pub fn open_web_session(&self, token: &str, now: u64) -> Result<(Bootstrap, Vec<WireFrame>), HubError> {
        let (cid, contact) = self.find_token(token).ok_or(HubError::UnknownToken)?;
        let family = self.family(&cid);
        let instructions = match family {
            Family::Spanish => "Permite el acceso al micrófono y habla con naturalidad. Puedes interrumpir al agente en cualquier momento.",
            _ => "Allow microphone access and speak naturally. You can interrupt the agent at any time.",
        }
        .to_owned();
        let bootstrap = |sid: String, rejoined| Bootstrap {
            stream: format!("/stream/{sid}"),
            session_id: sid,
            first_name: contact.first_name.clone(),
            instructions: instructions.clone(),
            rejoined,
        };
        for l in self.contact_sessions(&cid, &contact.contact_id) {
            let l = lock(&l);
            if l.session.state().phase == Phase::Completed {
                return Err(HubError::AlreadyCompleted);
            }
        }
        for l in self.contact_sessions(&cid, &contact.contact_id) {
            let l = lock(&l);
            if !l.session.is_ended() {
                return Ok((bootstrap(l.session.id().to_owned(), true), l.frames.clone()));
            }
        }
        let (sid, frames) = self.start_session(&cid, &contact, Channel::Web, "w", now)?;
        Ok((bootstrap(sid, false), frames))
    }

    /// Answers an inbound phone call. Unknown callers get a short message
    /// and no session.
    pub fn open_inbound_call(&self, caller: Option<&str>, now: u64) -> Result<(String, Vec<WireFrame>), String> {
        let found = {
            let campaigns = self.campaigns.read().expect("campaign lock");
            campaigns.iter().find_map(|(id, e)| match match_inbound(&e.campaign, caller) {
                Inbound::Known(c) => Some((id.clone(), c.clone())),
                Inbound::Unknown => None,
            })
        };
        let Some((cid, contact)) = found else {
            let family = self.campaigns.read().expect("campaign lock").values().next().map_or(Family::English, |e| e.campaign.config.language.family());
            return Err(unknown_caller_message(family).to_owned());
        };
        self.start_session(&cid, &contact, Channel::Phone, "in", now).map_err(|e| e.to_string())
    }

    fn family(&self, campaign_id: &str) -> Family {
        self.campaigns
            .read()
            .expect("campaign lock")
            .get(campaign_id)
            .map_or(Family::English, |e| e.questionnaire.language.family())
    }

    fn live(&self, session_id: &str) -> Result<Arc<Mutex<Live>>, HubError> {
        self.sessions
            .read()
            .expect("session lock")
            .get(session_id)
            .cloned()
            .ok_or_else(|| HubError::UnknownSession(session_id.to_owned()))
    }

    /// Applies one input and returns the frames it produced, after they are
    /// on disk. An ended session answers with its end frame again.
    pub fn route(&self, session_id: &str, input: SessionInput, now: u64) -> Result<Vec<WireFrame>, HubError> {
        let live = self.live(session_id)?;
        let mut l = lock(&live);
        let p = l.session.handle(input, now);
        if p.inbound.is_none() {
            // nothing durable happened (idle tick or repeat after the end)
            return Ok(p.outbound.iter().map(WireFrame::from).collect());
        }
        Ok(l.commit(p.records().collect())?)
    }

    /// Routes one raw client line; malformed lines yield an error frame.
    pub fn route_line(&self, session_id: &str, line: &str, now: u64) -> Result<Vec<WireFrame>, HubError> {
        match parse_inbound(line) {
            Ok(input) => self.route(session_id, input, now),
            Err(e) => {
                let ts = self.live(session_id).map(|l| lock(&l).session.last_ts())?;
                Ok(vec![WireFrame::error(session_id, ts, e.to_string())])
            }
        }
    }

    /// Every outbound frame of a session so far, for (re)connecting clients.
    pub fn frames(&self, session_id: &str) -> Result<Vec<WireFrame>, HubError> {
        let l = self.live(session_id)?;
        let frames = lock(&l).frames.clone();
        Ok(frames)
    }

    pub fn snapshot(&self, session_id: &str) -> Result<Snapshot, HubError> {
        let l = self.live(session_id)?;
        let snap = lock(&l).session.snapshot();
        Ok(snap)
    }

    pub fn is_ended(&self, session_id: &str) -> Result<bool, HubError> {
        let l = self.live(session_id)?;
        let ended = lock(&l).session.is_ended();
        Ok(ended)
    }

    /// Advances the silence clock of every open session.
    pub fn tick_all(&self, now: u64) -> Result<Vec<WireFrame>, HubError> {
        let open: Vec<String> = {
            let sessions = self.sessions.read().expect("session lock");
            sessions.iter().filter(|(_, l)| !lock(l).session.is_ended()).map(|(k, _)| k.clone()).collect()
        };
        let mut out = Vec::new();
        for sid in open {
            out.extend(self.route(&sid, SessionInput::Tick, now)?);
        }
        Ok(out)
    }

    pub fn schedule_prefill(&self, token: &str) -> Result<SchedulePrefill, HubError> {
        let (cid, c) = self.find_token(token).ok_or(HubError::UnknownToken)?;
        let windows = self.campaigns.read().expect("campaign lock")[&cid].campaign.config.dial_windows.clone();
        Ok(SchedulePrefill { first_name: c.first_name, phone: c.phone, timezone: c.timezone, dial_windows: windows })
    }

    /// Books a call; edited phone or timezone values are kept.
    pub fn schedule(&self, token: &str, req: &ScheduleRequest, now: DateTime<Utc>) -> Result<ScheduleConfirmation, HubError> {
        let (cid, _) = self.find_token(token).ok_or(HubError::UnknownToken)?;
        let mut campaigns = self.campaigns.write().expect("campaign lock");
        let e = campaigns.get_mut(&cid).expect("token came from this campaign");
        let mut attempt = schedule_call(&mut e.campaign, token, &req.phone, &req.timezone, req.date, req.window, now)?;
        let c = e.campaign.by_token(token).expect("token resolved").clone();
        attempt.attempt_id = format!("{}-{}", attempt.attempt_id, e.scheduled.len() + 1);
        e.scheduled.push(attempt.clone());
        self.persist_campaign(e)?;
        let tz: Tz = c.timezone.parse().expect("validated by schedule_call");
        Ok(ScheduleConfirmation {
            attempt_id: attempt.attempt_id,
            scheduled_at: attempt.scheduled_at,
            local_time: attempt.scheduled_at.with_timezone(&tz).format("%Y-%m-%d %H:%M %Z").to_string(),
            phone: c.phone,
            timezone: c.timezone,
        })
    }

    pub fn scheduled(&self, campaign_id: &str) -> Result<Vec<OutreachAttempt>, HubError> {
        let campaigns = self.campaigns.read().expect("campaign lock");
        Ok(campaigns.get(campaign_id).ok_or_else(|| HubError::UnknownCampaign(campaign_id.into()))?.scheduled.clone())
    }

    /// Runs a simulation for a campaign and stores its outputs; later
    /// reports for the campaign are computed from them.
    pub fn simulate(&self, campaign_id: &str, mix: &PersonaMix, config: &SimConfig, seed: u64) -> Result<SimulationRun, HubError> {
        let (campaign, q) = {
            let campaigns = self.campaigns.read().expect("campaign lock");
            let e = campaigns.get(campaign_id).ok_or_else(|| HubError::UnknownCampaign(campaign_id.into()))?;
            (e.campaign.clone(), e.questionnaire.clone())
        };
        let run = run_simulation(&campaign, &q, mix, config, seed).map_err(|e| HubError::Simulation(e.to_string()))?;
        let dir = self.campaign_dir(campaign_id).join("sim");
        if dir.exists() {
            fs::remove_dir_all(&dir)?;
        }
        run.write_to(&dir)?;
        Ok(run)
    }

    /// Outcomes and transcripts behind a campaign's reports: the stored
    /// simulation if there is one, otherwise the live sessions. Live
    /// contacts are classified by their longest ended call; contacts whose
    /// only call is still running are left out.
    fn report_inputs(&self, campaign_id: &str) -> Result<ReportInputs, HubError> {
        let campaign = {
            let campaigns = self.campaigns.read().expect("campaign lock");
            campaigns.get(campaign_id).ok_or_else(|| HubError::UnknownCampaign(campaign_id.into()))?.campaign.clone()
        };
        let sim = self.campaign_dir(campaign_id).join("sim");
        if sim.join("outcomes.csv").exists() {
            let attempts = read_outcomes_csv(&fs::read_to_string(sim.join("outcomes.csv"))?).map_err(HubError::Simulation)?;
            let transcripts = read_transcripts(&sim).map_err(HubError::Simulation)?;
            let outcomes = attempts.into_iter().map(|a| (a.method.as_str().to_owned(), a.outcome)).collect();
            return Ok((outcomes, transcripts));
        }
        let transcripts: Vec<Transcript> = {
            let sessions = self.sessions.read().expect("session lock");
            let mut ts = Vec::new();
            for l in sessions.values() {
                let l = lock(l);
                if l.campaign_id == campaign_id {
                    ts.push(Transcript::from_records(&read_log(&l.path)?).map_err(|e| HubError::Simulation(e.to_string()))?);
                }
            }
            ts
        };
        if transcripts.is_empty() {
            return Ok((Vec::new(), transcripts));
        }
        let method = ContactMethod::WebcallInvite.as_str().to_owned();
        let best = longest_per_contact(&transcripts);
        let mut outcomes = Vec::new();
        for c in &campaign.contacts {
            let mine = transcripts.iter().any(|t| t.contact_id == c.contact_id);
            let t = best.iter().find(|t| t.contact_id == c.contact_id);
            if mine && t.is_none() {
                continue;
            }
            let channel = t.map_or(Channel::Web, |t| t.channel);
            let o = classify_outcome(t.copied(), channel).expect("only ended calls are selected");
            outcomes.push((method.clone(), o));
        }
        Ok((outcomes, transcripts))
    }

    pub fn report_rates(&self, campaign_id: &str) -> Result<String, HubError> {
        let (outcomes, _) = self.report_inputs(campaign_id)?;
        let rows = rates_by_group::<f64>(&outcomes).map_err(ReportError::from)?;
        Ok(rates_text(&rows))
    }

    /// Summary over fully completed interviews, as text or CSV.
    pub fn report_summary(&self, campaign_id: &str, csv: bool) -> Result<String, HubError> {
        let (_, transcripts) = self.report_inputs(campaign_id)?;
        let (open, family) = {
            let campaigns = self.campaigns.read().expect("campaign lock");
            let q = &campaigns[campaign_id].questionnaire;
            (q.open_ended_ids(), q.language.family())
        };
        let rows = completed_summary::<f64>(&transcripts, &open, family)?;
        Ok(if csv { summary_csv(&rows) } else { summary_text(&rows) })
    }

    pub fn report_funnel(&self, campaign_id: &str) -> Result<String, HubError> {
        let (outcomes, _) = self.report_inputs(campaign_id)?;
        if outcomes.is_empty() {
            return Err(ReportError::Rates(crate::analytics::rates::RatesError::EmptyCampaign).into());
        }
        let os: Vec<CallOutcome> = outcomes.into_iter().map(|(_, o)| o).collect();
        let f = sankey_flow(os.len() as u64, &os).map_err(|e| HubError::Simulation(e.to_string()))?;
        Ok(f.to_json())
    }
}

#[cfg(test)]
mod tests;
