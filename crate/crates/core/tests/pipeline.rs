use std::collections::BTreeSet;

use survey_core::analytics::funnel::sankey_flow;
use survey_core::analytics::outcome::CallOutcome;
use survey_core::analytics::report::{completed_summary, rates_by_group, read_counts_csv};
use survey_core::lang::Family;
use survey_core::outreach::{ingest_contacts, Campaign, CampaignConfig};
use survey_core::questionnaire::{validate, Questionnaire};
use survey_core::sim::{read_outcomes_csv, read_transcripts, run_simulation, PersonaMix, SimConfig};

const CONTACTS: &str = "first_name,phone,timezone
Ana,+51 912 345 678,America/Lima
Luis,+51-987-654-321,America/Lima
Rosa,0051912000111,America/Lima
Pedro,+51912000222,America/Lima
Carmen,+51912000333,America/Lima
Jorge,912000444,America/Lima
Elena,+51912000555,Mars/Olympus
";

fn campaign() -> Campaign {
    let config = CampaignConfig::from_toml_str(
        r#"
campaign_id = "pipe"
questionnaire_id = "feedback"
dial_windows = ["10:00-12:00", "18:00-20:00"]
methods = ["webcall_invite", "direct_call"]
callback_number = "+5116400000"
"#,
    )
    .unwrap();
    let report = ingest_contacts(CONTACTS, 1);
    assert_eq!(report.contacts.len(), 5);
    assert_eq!(report.rejected.iter().map(|r| r.line).collect::<Vec<_>>(), [7, 8]);
    Campaign::new(config, report.contacts)
}

#[test]
fn bundled_fixtures_are_valid() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let q = Questionnaire::load(&path).unwrap();
            assert!(validate(&q).is_valid(), "{}: {}", path.display(), validate(&q));
            n += 1;
        }
    }
    assert!(n >= 4);
}

#[test]
fn simulation_survives_a_disk_round_trip() {
    let q = Questionnaire::fixture_es();
    let run = run_simulation(&campaign(), &q, &PersonaMix::peru_default(), &SimConfig::default(), 3).unwrap();
    // five contacts, each with a web invite and a direct call
    assert_eq!(run.attempts.len(), 10);

    let dir = tempfile::tempdir().unwrap();
    run.write_to(dir.path()).unwrap();
    let attempts = read_outcomes_csv(&std::fs::read_to_string(dir.path().join("outcomes.csv")).unwrap()).unwrap();
    assert_eq!(attempts.len(), 10);
    assert_eq!(attempts.iter().map(|a| a.outcome).collect::<Vec<_>>(), run.outcomes());
    let transcripts = read_transcripts(dir.path()).unwrap();
    let mut expected = run.transcripts();
    expected.sort_by(|a, b| a.session_id.cmp(&b.session_id));
    assert_eq!(transcripts, expected);

    let os: Vec<CallOutcome> = attempts.iter().map(|a| a.outcome).collect();
    let funnel = sankey_flow(os.len() as u64, &os).unwrap();
    assert_eq!(funnel.to_json(), std::fs::read_to_string(dir.path().join("funnel.json")).unwrap());

    let groups: Vec<(String, CallOutcome)> = attempts.iter().map(|a| (a.method.as_str().to_owned(), a.outcome)).collect();
    let rates = rates_by_group::<f64>(&groups).unwrap();
    let labels: BTreeSet<&str> = rates.iter().map(|(l, _)| l.as_str()).collect();
    assert_eq!(labels, BTreeSet::from(["direct_call", "webcall_invite"]));
    assert!(rates.iter().all(|(_, r)| r.attempts == 5));
}

#[test]
fn summary_over_a_cooperative_corpus() {
    let q = Questionnaire::fixture_en();
    let mut c = campaign();
    c.config.language = "en-US".into();
    let mix = PersonaMix::single(survey_core::sim::RespondentPersona::cooperative());
    let run = run_simulation(&c, &q, &mix, &SimConfig::default(), 8).unwrap();
    let rows = completed_summary::<f64>(&run.transcripts(), &q.open_ended_ids(), Family::English).unwrap();
    assert_eq!(rows.len(), 13);
    // one interview per contact; the longest call wins
    let turns = &rows[0];
    assert!(turns.min <= turns.median && turns.median <= turns.max);
    let f32_rows = completed_summary::<f32>(&run.transcripts(), &q.open_ended_ids(), Family::English).unwrap();
    assert!((f32_rows[2].median as f64 - rows[2].median).abs() < 1e-4);
}

#[test]
fn counts_table_parses() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/table1_counts.csv")).unwrap();
    let rows = read_counts_csv(&text).unwrap();
    assert_eq!(rows.iter().map(|r| r.attempts).sum::<u64>(), 75 + 200 + 2539);
}
