use std::collections::BTreeSet;

use super::*;
use crate::outreach::ingest_contacts;
use crate::questionnaire::QuestionKind;
use crate::sim::RespondentPersona;

fn config(id: &str) -> CampaignConfig {
    CampaignConfig {
        campaign_id: id.into(),
        questionnaire_id: "feedback".into(),
        dial_windows: vec!["10:00-12:00".parse().unwrap(), "18:00-20:00".parse().unwrap()],
        primer_lead_days: 1,
        methods: BTreeSet::from([ContactMethod::WebcallInvite, ContactMethod::DirectCall]),
        callback_number: "+5116400000".into(),
        base_url: "https://s.example".into(),
        language: "es-PE".into(),
    }
}

fn hub(dir: &Path) -> Hub {
    Hub::open(dir, TurnTakingConfig::default(), DialogConfig::default()).unwrap()
}

fn setup(dir: &Path) -> (Hub, Vec<Contact>) {
    let h = hub(dir);
    let contacts = ingest_contacts(
        "first_name,phone,timezone\nAna,+51912345678,America/Lima\nLuis,+51987654321,America/Lima\n",
        3,
    )
    .contacts;
    h.create_campaign(config("pe"), Questionnaire::fixture_es(), contacts.clone()).unwrap();
    (h, contacts)
}

fn text(t: &str) -> String {
    format!("{{\"type\":\"user_text\",\"payload\":{{\"text\":{}}}}}\n", serde_json::to_string(t).unwrap())
}

fn reply_for(h: &Hub, sid: &str) -> Option<String> {
    let snap = h.snapshot(sid).unwrap();
    let q = Questionnaire::fixture_es();
    Some(match &snap.state.phase {
        Phase::Consent => "Sí, claro".into(),
        Phase::Asking { node } | Phase::Clarifying { node, .. } => match q.node(node).unwrap().kind {
            QuestionKind::YesNo => "Sí".into(),
            QuestionKind::Nps => "9".into(),
            QuestionKind::Likert { .. } => "4".into(),
            _ => "Todo muy bien, gracias por preguntar".into(),
        },
        _ => return None,
    })
}

/// Answers every prompt until the session ends; returns all frames.
fn complete(h: &Hub, sid: &str, mut now: u64) -> Vec<WireFrame> {
    let mut frames = Vec::new();
    while let Some(r) = reply_for(h, sid) {
        now += 20_000;
        frames.extend(h.route_line(sid, &text(&r), now).unwrap());
    }
    frames
}

#[test]
fn web_open_greets_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let (h, contacts) = setup(dir.path());
    let (b, frames) = h.open_web_session(&contacts[0].link_token, 1_000).unwrap();
    assert!(!b.rejoined);
    assert_eq!(b.stream, format!("/stream/{}", b.session_id));
    assert_eq!(frames[0].kind, "hello");
    assert!(frames[0].payload["text"].as_str().unwrap().contains("Ana"));
    assert!(matches!(h.open_web_session("nope", 1_000), Err(HubError::UnknownToken)));
    let (again, replayed) = h.open_web_session(&contacts[0].link_token, 2_000).unwrap();
    assert!(again.rejoined);
    assert_eq!(again.session_id, b.session_id);
    assert_eq!(replayed, frames);
    assert_eq!(h.session_ids().len(), 1);
}

#[test]
fn decline_ends_and_repeats_end() {
    let dir = tempfile::tempdir().unwrap();
    let (h, contacts) = setup(dir.path());
    let (b, _) = h.open_web_session(&contacts[0].link_token, 0).unwrap();
    let out = h.route_line(&b.session_id, &text("No"), 9_000).unwrap();
    let kinds: Vec<_> = out.iter().map(|f| f.kind.as_str()).collect();
    assert_eq!(kinds, ["agent_say", "end"]);
    assert_eq!(out[1].payload["reason"], "consent_declined");
    let again = h.route_line(&b.session_id, &text("hola?"), 10_000).unwrap();
    assert_eq!(again.len(), 1);
    assert_eq!(again[0].kind, "end");
    // nothing new was persisted after the end
    let frames = h.frames(&b.session_id).unwrap();
    assert_eq!(frames.iter().filter(|f| f.kind == "end").count(), 1);
    // an ended, uncompleted contact may start a new call
    let (b2, _) = h.open_web_session(&contacts[0].link_token, 20_000).unwrap();
    assert_ne!(b2.session_id, b.session_id);
}

#[test]
fn malformed_frames_get_protocol_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (h, contacts) = setup(dir.path());
    let (b, _) = h.open_web_session(&contacts[0].link_token, 0).unwrap();
    for bad in ["not json", "{\"type\":\"teleport\"}", "{\"type\":\"user_text\",\"payload\":{}}"] {
        let out = h.route_line(&b.session_id, bad, 1).unwrap();
        assert_eq!(out[0].kind, "error", "{bad}");
    }
    assert!(matches!(h.route_line("ghost", &text("hi"), 1), Err(HubError::UnknownSession(_))));
    // client-supplied verdicts are ignored
    let sneaky = "{\"type\":\"user_text\",\"payload\":{\"text\":\"Sí\",\"verdict\":{\"flagged\":\"offensive\"}}}";
    assert!(matches!(parse_inbound(sneaky), Ok(SessionInput::UserText { verdict: None, node: None, .. })));
}

#[test]
fn barge_in_over_stream() {
    let dir = tempfile::tempdir().unwrap();
    let (h, contacts) = setup(dir.path());
    let (b, _) = h.open_web_session(&contacts[0].link_token, 0).unwrap();
    let word = |w: &str| format!("{{\"type\":\"user_word\",\"payload\":{{\"word\":\"{w}\"}}}}");
    assert!(h.route_line(&b.session_id, &word("eh"), 100).unwrap().is_empty());
    assert!(h.route_line(&b.session_id, &word("un"), 200).unwrap().is_empty());
    let out = h.route_line(&b.session_id, &word("momento"), 300).unwrap();
    assert_eq!(out.iter().map(|f| f.kind.as_str()).collect::<Vec<_>>(), ["interrupt"]);
}

#[test]
fn web_interview_encourages_and_blocks_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let (h, contacts) = setup(dir.path());
    let (b, _) = h.open_web_session(&contacts[0].link_token, 0).unwrap();
    let frames = complete(&h, &b.session_id, 0);
    let milestones: Vec<_> =
        frames.iter().filter(|f| f.kind == "encouragement").map(|f| f.payload["milestone"].as_u64().unwrap()).collect();
    assert_eq!(milestones, [25, 50, 75]);
    let fractions: Vec<f64> = frames.iter().filter(|f| f.kind == "progress").map(|f| f.payload["fraction"].as_f64().unwrap()).collect();
    assert!(fractions.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(frames.last().unwrap().payload["reason"], "completed");
    assert!(matches!(h.open_web_session(&contacts[0].link_token, 10_000_000), Err(HubError::AlreadyCompleted)));
    let summary = h.report_summary("pe", false).unwrap();
    assert!(summary.contains("Number of AI questions"));
    let rates = h.report_rates("pe").unwrap();
    assert!(rates.contains("RR1 50.0% RR2 50.0%"), "{rates}");
}

#[test]
fn restart_rebuilds_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let (sid, before) = {
        let (h, contacts) = setup(dir.path());
        let (b, _) = h.open_web_session(&contacts[1].link_token, 0).unwrap();
        h.route_line(&b.session_id, &text("Sí, claro"), 12_000).unwrap();
        h.route_line(&b.session_id, &text("9"), 40_000).unwrap();
        h.tick_all(70_000).unwrap();
        (b.session_id.clone(), (h.snapshot(&b.session_id).unwrap(), h.frames(&b.session_id).unwrap()))
    };
    let h = hub(dir.path());
    assert_eq!(h.campaign_ids(), ["pe"]);
    assert_eq!(h.snapshot(&sid).unwrap(), before.0);
    assert_eq!(h.frames(&sid).unwrap(), before.1);
    let done = complete(&h, &sid, 100_000);
    assert_eq!(done.last().unwrap().kind, "end");
}

#[test]
fn truncated_tail_is_repaired_and_corruption_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (path, sid) = {
        let (h, contacts) = setup(dir.path());
        let (b, _) = h.open_web_session(&contacts[0].link_token, 0).unwrap();
        h.route_line(&b.session_id, &text("Sí"), 12_000).unwrap();
        let l = h.live(&b.session_id).unwrap();
        let path = lock(&l).path.clone();
        (path, b.session_id)
    };
    let full = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = full.lines().collect();
    // keep the inbound user_text and half of the next line
    let ui = lines.iter().position(|l| l.contains("\"user_text\"")).unwrap();
    let cut = format!("{}\n{}", lines[..=ui].join("\n"), &lines[ui + 1][..10]);
    fs::write(&path, cut).unwrap();
    let h = hub(dir.path());
    assert_eq!(fs::read_to_string(&path).unwrap(), full);
    drop(h);
    fs::write(&path, full.replace("\"hello\"", "\"agent_say\"")).unwrap();
    assert!(matches!(Hub::open(dir.path(), TurnTakingConfig::default(), DialogConfig::default()), Err(HubError::Replay { .. })));
    let _ = sid;
}

#[test]
fn scheduling_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (h, contacts) = setup(dir.path());
    let tok = &contacts[0].link_token;
    let pre = h.schedule_prefill(tok).unwrap();
    assert_eq!((pre.phone.as_str(), pre.timezone.as_str()), ("+51912345678", "America/Lima"));
    let now = DateTime::parse_from_rfc3339("2024-05-01T12:00:00Z").unwrap().with_timezone(&Utc);
    let req = ScheduleRequest {
        phone: "+51 999 000 111".into(),
        timezone: "America/Lima".into(),
        date: NaiveDate::from_ymd_opt(2024, 5, 3).unwrap(),
        window: "18:00-20:00".parse().unwrap(),
    };
    let conf = h.schedule(tok, &req, now).unwrap();
    assert_eq!(conf.phone, "+51999000111");
    assert!(conf.local_time.starts_with("2024-05-03 18:00"), "{}", conf.local_time);
    let past = ScheduleRequest { date: NaiveDate::from_ymd_opt(2024, 4, 1).unwrap(), ..req.clone() };
    assert_eq!(h.schedule(tok, &past, now).unwrap_err().to_string(), "slot in past");
    assert_eq!(h.schedule("zzz", &req, now).unwrap_err().to_string(), "unknown token");
    drop(h);
    let h = hub(dir.path());
    assert_eq!(h.schedule_prefill(tok).unwrap().phone, "+51999000111");
    assert_eq!(h.scheduled("pe").unwrap().len(), 1);
}

#[test]
fn empty_campaign_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (h, _) = setup(dir.path());
    let e = h.report_rates("pe").unwrap_err();
    assert_eq!(e.to_string(), "empty campaign");
    assert!(h.report_funnel("pe").is_err());
    assert!(matches!(h.report_rates("nope"), Err(HubError::UnknownCampaign(_))));
}

#[test]
fn simulated_reports_match_offline_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (h, _) = setup(dir.path());
    let mix = PersonaMix::single(RespondentPersona { answer_prob: 0.7, per_question_dropout_hazard: 0.03, ..RespondentPersona::cooperative() });
    let run = h.simulate("pe", &mix, &SimConfig::default(), 5).unwrap();
    assert_eq!(h.report_funnel("pe").unwrap(), run.funnel.to_json());
    assert!(h.report_rates("pe").unwrap().contains("direct_call"));
}

#[test]
fn inbound_callers() {
    let dir = tempfile::tempdir().unwrap();
    let (h, _) = setup(dir.path());
    let (sid, frames) = h.open_inbound_call(Some("0051 912 345 678"), 5).unwrap();
    assert!(sid.contains("-in"));
    assert_eq!(frames[0].kind, "hello");
    assert!(h.open_inbound_call(Some("+4915112345678"), 5).unwrap_err().contains("No encontramos"));
    assert!(h.open_inbound_call(None, 5).is_err());
}
