use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{DateTime, Utc};
use clap::{Parser, Subcommand, ValueEnum};
use survey_core::analytics::funnel::sankey_flow;
use survey_core::analytics::outcome::CallOutcome;
use survey_core::analytics::rates::response_rates;
use survey_core::analytics::report::{
    completed_metrics, completed_summary, durations_histogram_csv, longest_per_contact, metrics_csv, rates_by_group, rates_text,
    read_counts_csv, summary_csv, summary_text,
};
use survey_core::outreach::{ingest_contacts, Campaign, CampaignConfig};
use survey_core::questionnaire::{validate, Questionnaire};
use survey_core::sim::{read_outcomes_csv, read_transcripts, run_simulation, synthetic_contacts, PersonaMix, SimConfig};
use survey_server::ServerConfig;

#[derive(Parser)]
#[command(name = "survey", version, about = "Voice-survey campaigns: validate, simulate, serve, report")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a questionnaire file; exit 0 if valid, 1 if not, 2 if unreadable.
    Validate { path: PathBuf },
    /// Simulate a campaign and write transcripts, outcomes and funnel.
    Simulate {
        /// Campaign TOML; defaults to a direct-call campaign in Lima.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Questionnaire file; defaults to the bundled Spanish script.
        #[arg(long)]
        questionnaire: Option<PathBuf>,
        /// Contacts CSV (`first_name,phone,timezone`).
        #[arg(long, conflicts_with = "attempts")]
        contacts: Option<PathBuf>,
        /// Number of generated contacts when no CSV is given.
        #[arg(long, default_value_t = 2539)]
        attempts: usize,
        /// personas.json; defaults to the Peru demonstration mix.
        #[arg(long)]
        personas: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Campaign start (RFC 3339); fixes dial-window planning.
        #[arg(long)]
        now: Option<DateTime<Utc>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        /// Server TOML (listen, data_dir, turn overrides).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print a report from a simulation directory or a counts table.
    Report {
        which: Which,
        /// Directory written by `simulate`.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Outreach counts CSV (`label,attempts,fully_completed,partial_76_plus_cumulative`); rates only.
        #[arg(long)]
        counts: Option<PathBuf>,
        /// Summary as CSV instead of an aligned table.
        #[arg(long)]
        csv: bool,
        /// Histogram bin width for `durations`.
        #[arg(long, default_value_t = 1)]
        bin_minutes: u64,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Rates,
    Summary,
    Funnel,
    Durations,
    /// Per-interview metrics of completed interviews.
    Metrics,
}

struct Failure(u8, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(1, e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(2, format!("{}: {e}", path.display())))
}

fn cmd_validate(path: &Path) -> Result<String, Failure> {
    let q = Questionnaire::load(path).map_err(|e| Failure(2, format!("{}: {e}", path.display())))?;
    let report = validate(&q);
    if report.is_valid() {
        Ok(format!("{}: valid ({} nodes)\n", path.display(), q.nodes.len()))
    } else {
        Err(Failure(1, format!("{}: invalid\n{report}", path.display())))
    }
}

fn default_campaign() -> CampaignConfig {
    CampaignConfig::from_toml_str(
        r#"
campaign_id = "peru-direct"
questionnaire_id = "feedback"
dial_windows = ["09:00-13:00", "16:00-20:00"]
methods = ["direct_call"]
callback_number = "+5116400000"
language = "es-PE"
"#,
    )
    .expect("built-in campaign is valid")
}

/// `not_picked_up` → `NotPickedUp`.
fn camel(label: &str) -> String {
    label
        .split('_')
        .map(|w| {
            let mut c = w.chars();
            c.next().map(|f| f.to_uppercase().chain(c).collect::<String>()).unwrap_or_default()
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    config: Option<&Path>,
    questionnaire: Option<&Path>,
    contacts: Option<&Path>,
    attempts: usize,
    personas: Option<&Path>,
    seed: u64,
    now: Option<DateTime<Utc>>,
    out: &Path,
) -> Result<String, Failure> {
    let cfg = match config {
        Some(p) => CampaignConfig::from_toml_str(&read(p)?).map_err(|e| Failure(2, e))?,
        None => default_campaign(),
    };
    let q = match questionnaire {
        Some(p) => Questionnaire::load(p).map_err(|e| Failure(2, format!("{}: {e}", p.display())))?,
        None => Questionnaire::fixture_es(),
    };
    let mut notes = String::new();
    let people = match contacts {
        Some(p) => {
            let r = ingest_contacts(&read(p)?, seed);
            for rej in &r.rejected {
                notes.push_str(&format!("rejected line {}: {}\n", rej.line, rej.reason));
            }
            for w in &r.warnings {
                notes.push_str(&format!("warning: {w}\n"));
            }
            r.contacts
        }
        None => synthetic_contacts(attempts, seed),
    };
    let mix = match personas {
        Some(p) => PersonaMix::from_json_str(&read(p)?).map_err(|e| Failure(2, e))?,
        None => PersonaMix::peru_default(),
    };
    let mut sim = SimConfig::default();
    if let Some(now) = now {
        sim.now = now;
    }
    let run = run_simulation(&Campaign::new(cfg, people), &q, &mix, &sim, seed)?;
    run.write_to(out)?;
    fs::write(out.join("questionnaire.toml"), q.to_toml_string())?;
    let mut tally: BTreeMap<String, u64> = BTreeMap::new();
    for a in &run.attempts {
        *tally.entry(camel(&a.outcome.label())).or_default() += 1;
    }
    let mut text = notes;
    text.push_str(&format!("attempts: {}\nsessions: {}\n", run.attempts.len(), run.sessions.len()));
    for (k, v) in tally {
        text.push_str(&format!("{k}: {v}\n"));
    }
    text.push_str(&format!("wrote {}\n", out.display()));
    Ok(text)
}

fn load_questionnaire(data: &Path) -> Result<Questionnaire, Failure> {
    let p = data.join("questionnaire.toml");
    if p.exists() {
        Questionnaire::load(&p).map_err(|e| Failure(2, format!("{}: {e}", p.display())))
    } else {
        Ok(Questionnaire::fixture_es())
    }
}

fn cmd_report(
    which: Which,
    data: Option<&Path>,
    counts: Option<&Path>,
    csv: bool,
    bin_minutes: u64,
) -> Result<String, Failure> {
    if let Some(path) = counts {
        if !matches!(which, Which::Rates) {
            return Err(Failure(2, "--counts only feeds the rates report".into()));
        }
        let rows = read_counts_csv(&read(path)?)?;
        if rows.is_empty() {
            return Err(Failure(1, format!("{}: no rows", path.display())));
        }
        let rates = rows
            .iter()
            .map(|r| Ok((r.label.clone(), response_rates::<f64>(r.attempts, r.fully_completed, r.partial_76_plus_cumulative)?)))
            .collect::<Result<Vec<_>, Failure>>()?;
        return Ok(rates_text(&rates));
    }
    let data = data.ok_or_else(|| Failure(2, "pass --data DIR or --counts FILE".into()))?;
    if !data.is_dir() {
        return Err(Failure(2, format!("{}: not a directory", data.display())));
    }
    let outcomes_path = data.join("outcomes.csv");
    let attempts = if outcomes_path.exists() { read_outcomes_csv(&read(&outcomes_path)?)? } else { Vec::new() };
    let transcripts = read_transcripts(data)?;
    if attempts.is_empty() && transcripts.is_empty() {
        return Err(Failure(1, format!("{}: no outcomes or transcripts found", data.display())));
    }
    let q = load_questionnaire(data)?;
    let open = q.open_ended_ids();
    let family = q.language.family();
    Ok(match which {
        Which::Rates => {
            let groups: Vec<(String, CallOutcome)> =
                attempts.iter().map(|a| (a.method.as_str().to_owned(), a.outcome)).collect();
            rates_text(&rates_by_group::<f64>(&groups)?)
        }
        Which::Funnel => {
            let os: Vec<CallOutcome> = attempts.iter().map(|a| a.outcome).collect();
            if os.is_empty() {
                return Err(Failure(1, format!("{}: no outcomes.csv", data.display())));
            }
            sankey_flow(os.len() as u64, &os)?.to_json()
        }
        Which::Summary => {
            let rows = completed_summary::<f64>(&transcripts, &open, family)?;
            if csv {
                summary_csv(&rows)
            } else {
                let n = longest_per_contact(&transcripts).iter().filter(|t| t.is_completed()).count();
                format!("{n} fully completed interviews\n{}", summary_text(&rows))
            }
        }
        Which::Metrics => metrics_csv(&completed_metrics::<f64>(&transcripts, &open, family)?),
        Which::Durations => {
            let durations: Vec<u64> = longest_per_contact(&transcripts)
                .into_iter()
                .filter(|t| t.is_completed())
                .map(|t| t.duration_ms())
                .collect();
            if durations.is_empty() {
                "0 interviews\n".to_owned()
            } else {
                durations_histogram_csv(&durations, bin_minutes)
            }
        }
    })
}

fn cmd_serve(config: Option<&Path>) -> Result<String, Failure> {
    let cfg = match config {
        Some(p) => ServerConfig::load(p).map_err(|e| Failure(2, format!("{}: {e}", p.display())))?,
        None => ServerConfig::default(),
    };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(survey_server::serve(cfg)).map_err(|e| Failure(1, e.to_string()))?;
    Ok(String::new())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { path } => cmd_validate(path),
        Command::Simulate { config, questionnaire, contacts, attempts, personas, seed, now, out } => cmd_simulate(
            config.as_deref(),
            questionnaire.as_deref(),
            contacts.as_deref(),
            *attempts,
            personas.as_deref(),
            *seed,
            *now,
            out,
        ),
        Command::Serve { config } => cmd_serve(config.as_deref()),
        Command::Report { which, data, counts, csv, bin_minutes, out } => {
            cmd_report(*which, data.as_deref(), counts.as_deref(), *csv, *bin_minutes).and_then(|text| match out {
                Some(p) => {
                    fs::write(p, &text)?;
                    Ok(String::new())
                }
                None => Ok(text),
            })
        }
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure(code, msg)) => {
            eprintln!("{}", msg.trim_end());
            ExitCode::from(code)
        }
    }
}
