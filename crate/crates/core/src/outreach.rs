//! Campaign lifecycle: contact ingestion, invitation links, scheduled and
//! direct calls planned inside contact-local dial windows, SMS primers,
//! voicemail and inbound-callback matching.
//!
//! Message delivery is an outbox of rendered messages; nothing is sent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Duration, NaiveDate, NaiveTime, TimeZone, Utc};
use chrono_tz::Tz;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{Family, LanguageTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactMethod {
    WebcallInvite,
    ScheduledCall,
    DirectCall,
    InboundCallback,
}

impl ContactMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::WebcallInvite => "webcall_invite",
            Self::ScheduledCall => "scheduled_call",
            Self::DirectCall => "direct_call",
            Self::InboundCallback => "inbound_callback",
        }
    }

    pub fn is_phone(&self) -> bool {
        *self != Self::WebcallInvite
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contact {
    pub contact_id: String,
    pub first_name: String,
    /// E.164, e.g. `+51912345678`.
    pub phone: String,
    /// IANA zone name.
    pub timezone: String,
    pub link_token: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhoneError {
    #[error("empty phone number")]
    Empty,
    #[error("invalid character {0:?} in phone number")]
    BadChar(char),
    #[error("phone number lacks a country code")]
    NoCountryCode,
    #[error("phone number has {0} digits; E.164 allows 8 to 15")]
    Length(usize),
}

/// Normalizes `+`- or `00`-prefixed numbers to E.164, ignoring spaces,
/// dots, dashes and parentheses.
pub fn normalize_phone(raw: &str) -> Result<String, PhoneError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(PhoneError::Empty);
    }
    let (plus, rest) = match raw.strip_prefix('+') {
        Some(r) => (true, r),
        None => (false, raw),
    };
    let mut digits = String::new();
    for c in rest.chars() {
        match c {
            '0'..='9' => digits.push(c),
            ' ' | '-' | '.' | '(' | ')' => {}
            other => return Err(PhoneError::BadChar(other)),
        }
    }
    let national = if plus {
        digits.as_str()
    } else if let Some(d) = digits.strip_prefix("00") {
        d
    } else {
        return Err(PhoneError::NoCountryCode);
    };
    if national.starts_with('0') {
        return Err(PhoneError::NoCountryCode);
    }
    if !(8..=15).contains(&national.len()) {
        return Err(PhoneError::Length(national.len()));
    }
    Ok(format!("+{national}"))
}

/// A local time-of-day window, written `HH:MM-HH:MM`; the end is exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DialWindow {
    pub start: NaiveTime,
    pub end: NaiveTime,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid dial window {0:?}: expected HH:MM-HH:MM with start before end")]
pub struct WindowError(pub String);

impl FromStr for DialWindow {
    type Err = WindowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || WindowError(s.to_owned());
        let (a, b) = s.split_once('-').ok_or_else(err)?;
        let start = NaiveTime::parse_from_str(a.trim(), "%H:%M").map_err(|_| err())?;
        let end = NaiveTime::parse_from_str(b.trim(), "%H:%M").map_err(|_| err())?;
        if start >= end {
            return Err(err());
        }
        Ok(Self { start, end })
    }
}

impl fmt::Display for DialWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start.format("%H:%M"), self.end.format("%H:%M"))
    }
}

impl Serialize for DialWindow {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DialWindow {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Campaign settings as read from its configuration file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub campaign_id: String,
    pub questionnaire_id: String,
    #[serde(default)]
    pub dial_windows: Vec<DialWindow>,
    #[serde(default = "default_lead_days")]
    pub primer_lead_days: u32,
    pub methods: BTreeSet<ContactMethod>,
    #[serde(default)]
    pub callback_number: String,
    #[serde(default = "default_base_url")]
    pub base_url: String,
    #[serde(default = "default_language")]
    pub language: LanguageTag,
}

fn default_lead_days() -> u32 {
    1
}

fn default_base_url() -> String {
    "http://localhost:8080".into()
}

fn default_language() -> LanguageTag {
    LanguageTag::new("es-PE")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CampaignError {
    #[error("direct calls need at least one dial window")]
    NoWindows,
    #[error("no contact methods enabled")]
    NoMethods,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.methods.is_empty() {
            return Err(CampaignError::NoMethods);
        }
        if self.methods.contains(&ContactMethod::DirectCall) && self.dial_windows.is_empty() {
            return Err(CampaignError::NoWindows);
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, String> {
        let c: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        c.validate().map_err(|e| e.to_string())?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Campaign {
    pub config: CampaignConfig,
    pub contacts: Vec<Contact>,
}

impl Campaign {
    pub fn new(config: CampaignConfig, contacts: Vec<Contact>) -> Self {
        Self { config, contacts }
    }

    pub fn by_token(&self, token: &str) -> Option<&Contact> {
        self.contacts.iter().find(|c| c.link_token == token)
    }

    pub fn by_id(&self, id: &str) -> Option<&Contact> {
        self.contacts.iter().find(|c| c.contact_id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Disposition {
    Pending,
    Connected { session_id: String },
    NoAnswerVoicemailLeft,
    NotClickedThrough,
    Declined,
}

impl Disposition {
    pub fn is_terminal(&self) -> bool {
        *self != Disposition::Pending
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutreachAttempt {
    pub attempt_id: String,
    pub contact_id: String,
    pub method: ContactMethod,
    pub scheduled_at: DateTime<Utc>,
    pub disposition: Disposition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutboxChannel {
    Whatsapp,
    Sms,
    Voicemail,
}

/// A rendered message awaiting delivery.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutboxMessage {
    pub ts: DateTime<Utc>,
    pub channel: OutboxChannel,
    pub to: String,
    pub body: String,
}

pub fn outbox_jsonl(messages: &[OutboxMessage]) -> String {
    messages
        .iter()
        .map(|m| serde_json::to_string(m).expect("outbox serializes") + "\n")
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRow {
    /// 1-based line in the file, header included.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IngestReport {
    pub contacts: Vec<Contact>,
    pub rejected: Vec<RejectedRow>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct ContactRow {
    first_name: String,
    phone: String,
    timezone: String,
}

const TOKEN_ALPHABET: &[u8] = b"abcdefghijkmnpqrstuvwxyz23456789";

fn token(rng: &mut ChaCha8Rng) -> String {
    (0..12).map(|_| TOKEN_ALPHABET[rng.random_range(0..TOKEN_ALPHABET.len())] as char).collect()
}

/// Reads `first_name,phone,timezone` rows. Valid rows get an E.164 phone, a
/// sequential id and a url-safe link token drawn from `token_seed`.
pub fn ingest_contacts(csv_text: &str, token_seed: u64) -> IngestReport {
    let mut report = IngestReport::default();
    if csv_text.trim().is_empty() {
        report.warnings.push("contact file is empty".into());
        return report;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(token_seed);
    let mut phones = BTreeSet::new();
    let mut tokens = BTreeSet::new();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(csv_text.as_bytes());
    for (i, row) in reader.deserialize::<ContactRow>().enumerate() {
        let line = i + 2;
        let reject = |reason: String| RejectedRow { line, reason };
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                report.rejected.push(reject(format!("unreadable row: {e}")));
                continue;
            }
        };
        if row.first_name.is_empty() {
            report.rejected.push(reject("missing first name".into()));
            continue;
        }
        let phone = match normalize_phone(&row.phone) {
            Ok(p) => p,
            Err(e) => {
                report.rejected.push(reject(format!("malformed phone {:?}: {e}", row.phone)));
                continue;
            }
        };
        if row.timezone.parse::<Tz>().is_err() {
            report.rejected.push(reject(format!("unknown timezone {:?}", row.timezone)));
            continue;
        }
        if !phones.insert(phone.clone()) {
            report.rejected.push(reject(format!("duplicate phone {phone}")));
            continue;
        }
        let mut t = token(&mut rng);
        while !tokens.insert(t.clone()) {
            t = token(&mut rng);
        }
        report.contacts.push(Contact {
            contact_id: format!("c{:05}", report.contacts.len() + 1),
            first_name: row.first_name,
            phone,
            timezone: row.timezone,
            link_token: t,
        });
    }
    if report.contacts.is_empty() {
        report.warnings.push("no valid contacts".into());
    }
    report
}

/// Invitation with a web-call link and a scheduling link for every contact.
pub fn generate_invites(campaign: &Campaign, client_name: &str, now: DateTime<Utc>) -> Vec<OutboxMessage> {
    let base = campaign.config.base_url.trim_end_matches('/');
    campaign
        .contacts
        .iter()
        .map(|c| {
            let call = format!("{base}/call/{}", c.link_token);
            let schedule = format!("{base}/schedule/{}", c.link_token);
            let body = match campaign.config.language.family() {
                Family::Spanish => format!(
                    "Hola {}, {client_name} quiere conocer tu opinión. Hablarías con una IA (estarías hablando con una inteligencia artificial). Inicia la llamada aquí: {call} o agenda una llamada: {schedule}",
                    c.first_name
                ),
                _ => format!(
                    "Hi {}, {client_name} would like your feedback. You would be talking to an AI survey agent. Start the call in your browser: {call} or pick a time for us to call you: {schedule}",
                    c.first_name
                ),
            };
            OutboxMessage { ts: now, channel: OutboxChannel::Whatsapp, to: c.phone.clone(), body }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("unknown token")]
    UnknownToken,
    #[error("slot in past")]
    SlotInPast,
    #[error("slot does not exist in {0}")]
    NonexistentLocalTime(String),
    #[error("invalid phone: {0}")]
    Phone(#[from] PhoneError),
    #[error("unknown timezone {0:?}")]
    Timezone(String),
}

/// The UTC instant of a local date and time, taking the earlier reading of
/// an ambiguous time.
pub fn local_to_utc(tz: Tz, date: NaiveDate, time: NaiveTime) -> Option<DateTime<Utc>> {
    tz.from_local_datetime(&date.and_time(time)).earliest().map(|d| d.with_timezone(&Utc))
}

/// Books a call at the start of `window` on `date`, local to `timezone`.
/// Updated phone or timezone values are stored on the contact.
pub fn schedule_call(
    campaign: &mut Campaign,
    token: &str,
    phone: &str,
    timezone: &str,
    date: NaiveDate,
    window: DialWindow,
    now: DateTime<Utc>,
) -> Result<OutreachAttempt, ScheduleError> {
    let idx = campaign.contacts.iter().position(|c| c.link_token == token).ok_or(ScheduleError::UnknownToken)?;
    let phone = normalize_phone(phone)?;
    let tz: Tz = timezone.parse().map_err(|_| ScheduleError::Timezone(timezone.to_owned()))?;
    let at = local_to_utc(tz, date, window.start).ok_or_else(|| ScheduleError::NonexistentLocalTime(timezone.to_owned()))?;
    if at <= now {
        return Err(ScheduleError::SlotInPast);
    }
    let c = &mut campaign.contacts[idx];
    c.phone = phone;
    c.timezone = timezone.to_owned();
    Ok(OutreachAttempt {
        attempt_id: format!("{}-s-{}", campaign.config.campaign_id, c.contact_id),
        contact_id: c.contact_id.clone(),
        method: ContactMethod::ScheduledCall,
        scheduled_at: at,
        disposition: Disposition::Pending,
    })
}

/// Earliest instant at or after `now` inside one of `windows`, in `tz`.
pub fn next_window_instant(tz: Tz, windows: &[DialWindow], now: DateTime<Utc>) -> Option<DateTime<Utc>> {
    let today = now.with_timezone(&tz).date_naive();
    let mut best: Option<DateTime<Utc>> = None;
    for day in 0..=8 {
        let date = today + Duration::days(day);
        for w in windows {
            let (Some(start), Some(end)) = (local_to_utc(tz, date, w.start), local_to_utc(tz, date, w.end)) else {
                continue;
            };
            let candidate = if start <= now && now < end {
                now
            } else if start > now {
                start
            } else {
                continue;
            };
            best = Some(best.map_or(candidate, |b| b.min(candidate)));
        }
        if best.is_some() {
            break;
        }
    }
    best
}

/// Direct-call attempts for every contact not yet completed, each at the
/// earliest instant inside a local dial window, ordered by time and then
/// contact id.
pub fn plan_dial_queue(
    campaign: &Campaign,
    now: DateTime<Utc>,
    completed: &BTreeSet<String>,
) -> Vec<OutreachAttempt> {
    if !campaign.config.methods.contains(&ContactMethod::DirectCall) {
        return Vec::new();
    }
    let mut planned: Vec<(DateTime<Utc>, &Contact)> = campaign
        .contacts
        .iter()
        .filter(|c| !completed.contains(&c.contact_id))
        .filter_map(|c| {
            let tz: Tz = c.timezone.parse().ok()?;
            Some((next_window_instant(tz, &campaign.config.dial_windows, now)?, c))
        })
        .collect();
    planned.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.contact_id.cmp(&b.1.contact_id)));
    planned
        .into_iter()
        .enumerate()
        .map(|(i, (at, c))| OutreachAttempt {
            attempt_id: format!("{}-d{:05}", campaign.config.campaign_id, i + 1),
            contact_id: c.contact_id.clone(),
            method: ContactMethod::DirectCall,
            scheduled_at: at,
            disposition: Disposition::Pending,
        })
        .collect()
}

/// SMS primers sent `primer_lead_days` before each planned call.
pub fn sms_primers(campaign: &Campaign, queue: &[OutreachAttempt], client_name: &str) -> Vec<OutboxMessage> {
    let by_id: BTreeMap<&str, &Contact> = campaign.contacts.iter().map(|c| (c.contact_id.as_str(), c)).collect();
    let lead = Duration::days(i64::from(campaign.config.primer_lead_days));
    queue
        .iter()
        .filter_map(|a| {
            let c = by_id.get(a.contact_id.as_str())?;
            let body = match campaign.config.language.family() {
                Family::Spanish => format!(
                    "Hola {}, mañana te llamará un agente de IA en nombre de {client_name} para una breve encuesta.",
                    c.first_name
                ),
                _ => format!(
                    "Hi {}, tomorrow an AI agent will call you on behalf of {client_name} for a short survey.",
                    c.first_name
                ),
            };
            Some(OutboxMessage { ts: a.scheduled_at - lead, channel: OutboxChannel::Sms, to: c.phone.clone(), body })
        })
        .collect()
}

/// Closes an attempt nobody answered. Phone attempts leave one voicemail;
/// an unopened web invite is marked not clicked through. Attempts that are
/// already closed are left alone.
pub fn handle_no_answer(
    attempt: &mut OutreachAttempt,
    phone: &str,
    voicemail_text: &str,
    now: DateTime<Utc>,
) -> Option<OutboxMessage> {
    if attempt.disposition.is_terminal() {
        return None;
    }
    if attempt.method == ContactMethod::WebcallInvite {
        attempt.disposition = Disposition::NotClickedThrough;
        return None;
    }
    attempt.disposition = Disposition::NoAnswerVoicemailLeft;
    Some(OutboxMessage { ts: now, channel: OutboxChannel::Voicemail, to: phone.to_owned(), body: voicemail_text.to_owned() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inbound<'a> {
    Known(&'a Contact),
    Unknown,
}

/// Looks a caller up by normalized number.
pub fn match_inbound<'a>(campaign: &'a Campaign, caller: Option<&str>) -> Inbound<'a> {
    let Some(Ok(number)) = caller.map(normalize_phone) else {
        return Inbound::Unknown;
    };
    campaign.contacts.iter().find(|c| c.phone == number).map_or(Inbound::Unknown, Inbound::Known)
}

/// Said to callers who are not in the campaign.
pub fn unknown_caller_message(family: Family) -> &'static str {
    match family {
        Family::Spanish => "Gracias por llamar. No encontramos tu número en este estudio. Que tengas un buen día.",
        _ => "Thank you for calling. We could not find your number in this study. Have a great day.",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> CampaignConfig {
        CampaignConfig {
            campaign_id: "pe".into(),
            questionnaire_id: "feedback".into(),
            dial_windows: vec!["18:00-20:00".parse().unwrap()],
            primer_lead_days: 1,
            methods: BTreeSet::from([ContactMethod::DirectCall, ContactMethod::WebcallInvite]),
            callback_number: "+5116400000".into(),
            base_url: "https://s.example/".into(),
            language: "en-US".into(),
        }
    }

    fn campaign() -> Campaign {
        let r = ingest_contacts("first_name,phone,timezone\nAna,+51 9 1234 5678,America/Lima\nLuis,+51 987 654 321,America/Lima\n", 7);
        Campaign::new(config(), r.contacts)
    }

    fn utc(s: &str) -> DateTime<Utc> {
        DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
    }

    #[test]
    fn e164() {
        assert_eq!(normalize_phone("+51 9 1234 5678").unwrap(), "+51912345678");
        assert_eq!(normalize_phone("0051 9 1234 5678").unwrap(), "+51912345678");
        assert_eq!(normalize_phone("+1 (415) 555-0100").unwrap(), "+14155550100");
        assert!(normalize_phone("abc").is_err());
        assert!(normalize_phone("912345678").is_err());
        assert!(normalize_phone("+12").is_err());
        assert!(normalize_phone("+1234567890123456").is_err());
    }

    #[test]
    fn ingest() {
        let r = ingest_contacts(
            "first_name,phone,timezone\nAna,+51 9 1234 5678,America/Lima\nBad,abc,America/Lima\nDup,0051912345678,America/Lima\nTz,+51911111111,Mars/Base\n",
            1,
        );
        assert_eq!(r.contacts.len(), 1);
        assert_eq!(r.contacts[0].phone, "+51912345678");
        let lines: Vec<_> = r.rejected.iter().map(|x| x.line).collect();
        assert_eq!(lines, [3, 4, 5]);
        assert!(r.rejected[1].reason.contains("duplicate"));
        let empty = ingest_contacts("", 1);
        assert!(empty.contacts.is_empty() && !empty.warnings.is_empty());
    }

    #[test]
    fn tokens_unique_and_deterministic() {
        let rows: String = (0..300).map(|i| format!("P{i},+5190000{i:04},America/Lima\n")).collect();
        let text = format!("first_name,phone,timezone\n{rows}");
        let a = ingest_contacts(&text, 3);
        let b = ingest_contacts(&text, 3);
        assert_eq!(a, b);
        let set: BTreeSet<_> = a.contacts.iter().map(|c| &c.link_token).collect();
        assert_eq!(set.len(), 300);
        assert!(a.contacts.iter().all(|c| c.link_token.chars().all(|ch| ch.is_ascii_alphanumeric())));
    }

    #[test]
    fn invites_carry_both_links() {
        let c = campaign();
        let m = generate_invites(&c, "Acme", utc("2024-05-01T12:00:00Z"));
        let t = &c.contacts[0].link_token;
        assert!(m[0].body.contains(&format!("/call/{t}")));
        assert!(m[0].body.contains(&format!("/schedule/{t}")));
        assert!(m[0].body.contains("talking to an AI"));
        let empty = Campaign::new(config(), vec![]);
        assert!(generate_invites(&empty, "Acme", utc("2024-05-01T12:00:00Z")).is_empty());
    }

    #[test]
    fn scheduling() {
        let mut c = campaign();
        let now = utc("2024-05-01T12:00:00Z");
        let tok = c.contacts[0].link_token.clone();
        let w: DialWindow = "10:00-12:00".parse().unwrap();
        let date = NaiveDate::from_ymd_opt(2024, 5, 2).unwrap();
        let a = schedule_call(&mut c, &tok, "+51 999 888 777", "America/Lima", date, w, now).unwrap();
        // Lima is UTC-5 all year
        assert_eq!(a.scheduled_at, utc("2024-05-02T15:00:00Z"));
        assert_eq!(c.contacts[0].phone, "+51999888777");
        let past = NaiveDate::from_ymd_opt(2024, 4, 30).unwrap();
        let e = schedule_call(&mut c, &tok, "+51999888777", "America/Lima", past, w, now).unwrap_err();
        assert_eq!(e.to_string(), "slot in past");
        let e = schedule_call(&mut c, "nope", "+51999888777", "America/Lima", date, w, now).unwrap_err();
        assert_eq!(e.to_string(), "unknown token");
    }

    #[test]
    fn dial_queue() {
        let c = campaign();
        // 17:00 in Lima
        let q = plan_dial_queue(&c, utc("2024-05-01T22:00:00Z"), &BTreeSet::new());
        assert_eq!(q.len(), 2);
        assert_eq!(q[0].scheduled_at, utc("2024-05-01T23:00:00Z"));
        assert_eq!(q[0].scheduled_at, q[1].scheduled_at);
        assert!(q[0].contact_id < q[1].contact_id);
        // 18:30 in Lima: inside the window
        let now = utc("2024-05-01T23:30:00Z");
        assert_eq!(plan_dial_queue(&c, now, &BTreeSet::new())[0].scheduled_at, now);
        // 20:00 in Lima: window closed, next day
        let q = plan_dial_queue(&c, utc("2024-05-02T01:00:00Z"), &BTreeSet::new());
        assert_eq!(q[0].scheduled_at, utc("2024-05-02T23:00:00Z"));
        let done = BTreeSet::from(["c00001".to_string()]);
        assert_eq!(plan_dial_queue(&c, now, &done).len(), 1);
    }

    #[test]
    fn primers_lead_calls() {
        let c = campaign();
        let q = plan_dial_queue(&c, utc("2024-05-01T22:00:00Z"), &BTreeSet::new());
        for (p, a) in sms_primers(&c, &q, "Acme").iter().zip(&q) {
            assert_eq!(a.scheduled_at - p.ts, Duration::days(1));
            assert_eq!(p.channel, OutboxChannel::Sms);
        }
    }

    #[test]
    fn no_answer() {
        let now = utc("2024-05-01T23:00:00Z");
        let mut a = OutreachAttempt {
            attempt_id: "a".into(),
            contact_id: "c00001".into(),
            method: ContactMethod::DirectCall,
            scheduled_at: now,
            disposition: Disposition::Pending,
        };
        let vm = handle_no_answer(&mut a, "+51912345678", "call us at +5116400000", now).unwrap();
        assert!(vm.body.contains("+5116400000"));
        assert_eq!(a.disposition, Disposition::NoAnswerVoicemailLeft);
        assert!(handle_no_answer(&mut a, "+51912345678", "x", now).is_none(), "one deposit per attempt");
        let mut again = OutreachAttempt { attempt_id: "b".into(), disposition: Disposition::Pending, ..a.clone() };
        assert!(handle_no_answer(&mut again, "+51912345678", "x", now).is_some());
        let mut web = OutreachAttempt { method: ContactMethod::WebcallInvite, disposition: Disposition::Pending, ..a };
        assert!(handle_no_answer(&mut web, "+51912345678", "x", now).is_none());
        assert_eq!(web.disposition, Disposition::NotClickedThrough);
    }

    #[test]
    fn inbound() {
        let c = campaign();
        assert_eq!(match_inbound(&c, Some("+51912345678")), Inbound::Known(&c.contacts[0]));
        assert_eq!(match_inbound(&c, Some("0051 9 1234 5678")), Inbound::Known(&c.contacts[0]));
        assert_eq!(match_inbound(&c, Some("+4915112345678")), Inbound::Unknown);
        assert_eq!(match_inbound(&c, None), Inbound::Unknown);
    }

    #[test]
    fn config_rules() {
        let mut c = config();
        assert!(c.validate().is_ok());
        c.dial_windows.clear();
        assert_eq!(c.validate(), Err(CampaignError::NoWindows));
        assert!("20:00-18:00".parse::<DialWindow>().is_err());
        assert_eq!("08:05-09:00".parse::<DialWindow>().unwrap().to_string(), "08:05-09:00");
    }
}
