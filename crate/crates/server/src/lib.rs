//! HTTP front end over [`survey_core::hub::Hub`].
//!
//! Routes:
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/campaigns` | create a campaign from config, questionnaire and contacts CSV |
//! | POST | `/campaigns/{id}/simulate` | run and store a seeded simulation |
//! | GET  | `/call/{token}` | web-call bootstrap |
//! | GET  | `/stream/{session_id}` | NDJSON stream of outbound frames, backlog first |
//! | POST | `/stream/{session_id}` | NDJSON inbound frames; answers with the frames they produced |
//! | GET/POST | `/schedule/{token}` | prefill / book a call |
//! | POST | `/inbound` | answer a phone call from `caller` |
//! | GET  | `/reports/{id}/{rates,summary,funnel}` | analytics computed from the store |

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::body::{Body, Bytes};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use serde_json::json;
use survey_core::dialog::DialogConfig;
use survey_core::hub::{Hub, HubError, ScheduleRequest, WireFrame};
use survey_core::outreach::{ingest_contacts, CampaignConfig, RejectedRow};
use survey_core::questionnaire::Questionnaire;
use survey_core::sim::{PersonaMix, SimConfig};
use survey_core::turn::TurnTakingConfig;
use thiserror::Error;
use tokio::sync::broadcast;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServerConfig {
    pub listen: String,
    pub data_dir: PathBuf,
    /// Interval of the silence clock.
    pub tick_ms: u64,
    pub turn: TurnTakingConfig,
    pub dialog: DialogConfig,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".into(),
            data_dir: PathBuf::from("data"),
            tick_ms: 1_000,
            turn: TurnTakingConfig::default(),
            dialog: DialogConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid turn-taking settings: {0}")]
    Turn(#[from] survey_core::turn::ConfigError),
}

impl ServerConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let c: Self = toml::from_str(text)?;
        c.turn.validate()?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

/// Milliseconds since the epoch; all frame timestamps are assigned here.
pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(|| Utc::now().timestamp_millis() as u64)
}

struct Channel {
    tx: broadcast::Sender<WireFrame>,
    /// Serializes routing with subscription so no frame is lost or doubled
    /// between a client's backlog and its live feed.
    gate: tokio::sync::Mutex<()>,
}

#[derive(Clone)]
pub struct AppState {
    hub: Arc<Hub>,
    clock: Clock,
    channels: Arc<Mutex<HashMap<String, Arc<Channel>>>>,
}

impl AppState {
    pub fn new(hub: Arc<Hub>, clock: Clock) -> Self {
        Self { hub, clock, channels: Arc::default() }
    }

    pub fn hub(&self) -> &Arc<Hub> {
        &self.hub
    }

    fn channel(&self, sid: &str) -> Arc<Channel> {
        let mut map = self.channels.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(sid.to_owned())
            .or_insert_with(|| Arc::new(Channel { tx: broadcast::channel(256).0, gate: tokio::sync::Mutex::new(()) }))
            .clone()
    }

    fn publish(&self, frames: &[WireFrame]) {
        for f in frames {
            // no subscribers is fine
            let _ = self.channel(&f.session_id).tx.send(f.clone());
        }
    }

    /// Runs one silence-clock step over every open session.
    pub async fn tick(&self) {
        let now = (self.clock)();
        match self.hub.tick_all(now) {
            Ok(frames) => self.publish(&frames),
            Err(e) => tracing::error!("tick failed: {e}"),
        }
    }
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<HubError> for ApiError {
    fn from(e: HubError) -> Self {
        use survey_core::analytics::report::ReportError;
        let status = match &e {
            HubError::UnknownToken | HubError::UnknownSession(_) | HubError::UnknownCampaign(_) => {
                StatusCode::NOT_FOUND
            }
            HubError::AlreadyCompleted | HubError::CampaignExists(_) => StatusCode::CONFLICT,
            HubError::InvalidCampaign(_) | HubError::Protocol(_) | HubError::Schedule(_) => StatusCode::BAD_REQUEST,
            HubError::Report(ReportError::Rates(_) | ReportError::NoCompleted) => StatusCode::UNPROCESSABLE_ENTITY,
            HubError::Simulation(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Body of `POST /campaigns`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NewCampaign {
    pub config: CampaignConfig,
    /// Questionnaire in its TOML form.
    pub questionnaire_toml: String,
    /// `first_name,phone,timezone` rows.
    pub contacts_csv: String,
    #[serde(default)]
    pub token_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignCreated {
    pub campaign_id: String,
    pub contacts: usize,
    pub rejected: Vec<String>,
    pub warnings: Vec<String>,
    /// Link tokens in contact order.
    pub tokens: Vec<String>,
}

fn rejected_text(r: &RejectedRow) -> String {
    format!("line {}: {}", r.line, r.reason)
}

async fn create_campaign(State(st): State<AppState>, Json(req): Json<NewCampaign>) -> ApiResult<(StatusCode, Json<CampaignCreated>)> {
    let q = Questionnaire::from_toml_str(&req.questionnaire_toml)
        .map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.to_string()))?;
    let report = ingest_contacts(&req.contacts_csv, req.token_seed);
    let id = req.config.campaign_id.clone();
    let tokens = report.contacts.iter().map(|c| c.link_token.clone()).collect();
    let n = report.contacts.len();
    st.hub.create_campaign(req.config, q, report.contacts)?;
    Ok((
        StatusCode::CREATED,
        Json(CampaignCreated {
            campaign_id: id,
            contacts: n,
            rejected: report.rejected.iter().map(rejected_text).collect(),
            warnings: report.warnings,
            tokens,
        }),
    ))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SimulateRequest {
    #[serde(default)]
    pub seed: u64,
    /// Defaults to the Peru demonstration mix.
    pub personas: Option<PersonaMix>,
    pub now: Option<DateTime<Utc>>,
}

async fn simulate(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<SimulateRequest>,
) -> ApiResult<Json<serde_json::Value>> {
    let hub = st.hub.clone();
    let run = tokio::task::spawn_blocking(move || {
        let mix = req.personas.unwrap_or_else(PersonaMix::peru_default);
        let mut config = SimConfig::default();
        if let Some(now) = req.now {
            config.now = now;
        }
        hub.simulate(&id, &mix, &config, req.seed)
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let mut tally = std::collections::BTreeMap::new();
    for a in &run.attempts {
        *tally.entry(a.outcome.label()).or_insert(0u64) += 1;
    }
    Ok(Json(json!({ "seed": run.seed, "attempts": run.attempts.len(), "sessions": run.sessions.len(), "outcomes": tally })))
}

async fn call_bootstrap(State(st): State<AppState>, Path(token): Path<String>) -> ApiResult<Json<serde_json::Value>> {
    let (boot, frames) = st.hub.open_web_session(&token, (st.clock)())?;
    st.publish(&frames);
    Ok(Json(serde_json::to_value(boot).expect("bootstrap serializes")))
}

fn ndjson(body: Body) -> Response {
    ([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response()
}

async fn stream_out(State(st): State<AppState>, Path(sid): Path<String>) -> ApiResult<Response> {
    let chan = st.channel(&sid);
    let (backlog, ended, rx) = {
        let _g = chan.gate.lock().await;
        let rx = chan.tx.subscribe();
        (st.hub.frames(&sid)?, st.hub.is_ended(&sid)?, rx)
    };
    let head = stream::iter(backlog.into_iter().map(|f| Ok::<_, std::convert::Infallible>(Bytes::from(f.to_line()))));
    if ended {
        return Ok(ndjson(Body::from_stream(head)));
    }
    let live = stream::unfold((rx, false), |(mut rx, done)| async move {
        if done {
            return None;
        }
        loop {
            match rx.recv().await {
                Ok(f) => {
                    let end = f.kind == "end";
                    return Some((Ok(Bytes::from(f.to_line())), (rx, end)));
                }
                Err(broadcast::error::RecvError::Lagged(n)) => tracing::warn!("stream lagged by {n} frames"),
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    Ok(ndjson(Body::from_stream(head.chain(live))))
}

async fn stream_in(State(st): State<AppState>, Path(sid): Path<String>, body: String) -> ApiResult<Response> {
    let chan = st.channel(&sid);
    let mut out = Vec::new();
    {
        let _g = chan.gate.lock().await;
        for line in body.lines().filter(|l| !l.trim().is_empty()) {
            let frames = st.hub.route_line(&sid, line, (st.clock)())?;
            for f in &frames {
                if f.kind != "error" {
                    let _ = chan.tx.send(f.clone());
                }
            }
            out.extend(frames);
        }
    }
    let text: String = out.iter().map(WireFrame::to_line).collect();
    Ok(ndjson(Body::from(text)))
}

async fn schedule_prefill(State(st): State<AppState>, Path(token): Path<String>) -> ApiResult<Json<serde_json::Value>> {
    Ok(Json(serde_json::to_value(st.hub.schedule_prefill(&token)?).expect("prefill serializes")))
}

async fn schedule_book(
    State(st): State<AppState>,
    Path(token): Path<String>,
    Json(req): Json<ScheduleRequest>,
) -> ApiResult<Json<serde_json::Value>> {
    let now = DateTime::from_timestamp_millis((st.clock)() as i64).unwrap_or_else(Utc::now);
    let conf = st.hub.schedule(&token, &req, now)?;
    Ok(Json(serde_json::to_value(conf).expect("confirmation serializes")))
}

#[derive(Debug, Deserialize)]
struct InboundCall {
    caller: Option<String>,
}

async fn inbound(State(st): State<AppState>, Json(req): Json<InboundCall>) -> Response {
    match st.hub.open_inbound_call(req.caller.as_deref(), (st.clock)()) {
        Ok((sid, frames)) => {
            st.publish(&frames);
            Json(json!({ "session_id": sid, "stream": format!("/stream/{sid}"), "frames": frames })).into_response()
        }
        Err(message) => (StatusCode::NOT_FOUND, Json(json!({ "error": "unknown caller", "message": message }))).into_response(),
    }
}

#[derive(Debug, Deserialize)]
struct ReportQuery {
    format: Option<String>,
}

async fn report(
    State(st): State<AppState>,
    Path((id, kind)): Path<(String, String)>,
    Query(q): Query<ReportQuery>,
) -> ApiResult<Response> {
    let hub = st.hub.clone();
    let csv = q.format.as_deref() == Some("csv");
    let kind2 = kind.clone();
    let text = tokio::task::spawn_blocking(move || match kind2.as_str() {
        "rates" => hub.report_rates(&id).map(Some),
        "summary" => hub.report_summary(&id, csv).map(Some),
        "funnel" => hub.report_funnel(&id).map(Some),
        _ => Ok(None),
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??
    .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("unknown report {kind}")))?;
    let ctype = match (kind.as_str(), csv) {
        ("funnel", _) => "application/json",
        ("summary", true) => "text/csv",
        _ => "text/plain; charset=utf-8",
    };
    Ok(([(header::CONTENT_TYPE, ctype)], text).into_response())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/campaigns", post(create_campaign))
        .route("/campaigns/{id}/simulate", post(simulate))
        .route("/call/{token}", get(call_bootstrap))
        .route("/stream/{session_id}", get(stream_out).post(stream_in))
        .route("/schedule/{token}", get(schedule_prefill).post(schedule_book))
        .route("/inbound", post(inbound))
        .route("/reports/{id}/{kind}", get(report))
        .with_state(state)
}

/// Opens the store, starts the silence clock and serves until the process
/// stops.
pub async fn serve(config: ServerConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let hub = Arc::new(Hub::open(&config.data_dir, config.turn, config.dialog.clone())?);
    let state = AppState::new(hub, system_clock());
    let ticker = state.clone();
    let period = Duration::from_millis(config.tick_ms.max(10));
    tokio::spawn(async move {
        let mut iv = tokio::time::interval(period);
        loop {
            iv.tick().await;
            ticker.tick().await;
        }
    });
    let addr: SocketAddr = config.listen.parse()?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}
