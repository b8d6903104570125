//! Plain-text and CSV renderings of the analytics outputs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::metrics::{conversation_metrics, ConversationMetrics, MetricsError, METRIC_ROWS};
use super::outcome::CallOutcome;
use super::rates::{from_outcomes, RatesError, ResponseRates};
use super::stats::{summarize, StatsError, SummaryRow};
use super::transcript::{select_longest_call, Transcript};
use crate::lang::Family;
use crate::questionnaire::NodeId;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error(transparent)]
    Rates(#[from] RatesError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("no fully completed interviews to summarize")]
    NoCompleted,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Outreach counts for one method, as tabulated per campaign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsRow {
    pub label: String,
    pub attempts: u64,
    pub fully_completed: u64,
    pub partial_76_plus_cumulative: u64,
}

pub fn read_counts_csv(text: &str) -> Result<Vec<CountsRow>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}

/// One line per method, e.g. `Peru direct: attempts 2539 … RR1 5.2% RR2 5.7%`.
pub fn rates_text<T: Scalar>(rows: &[(String, ResponseRates<T>)]) -> String {
    let width = rows.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for (label, r) in rows {
        out.push_str(&format!(
            "{label:<width$}  attempts {:>5}  fully {:>4}  cumulative≥76% {:>4}  RR1 {} RR2 {}\n",
            r.attempts,
            r.fully_completed,
            r.partial_76_plus_cumulative,
            r.rr1_display(),
            r.rr2_display(),
        ));
    }
    out
}

/// Rates per group label, in label order.
pub fn rates_by_group<T: Scalar>(
    outcomes: &[(String, CallOutcome)],
) -> Result<Vec<(String, ResponseRates<T>)>, RatesError> {
    let mut groups: BTreeMap<&str, Vec<CallOutcome>> = BTreeMap::new();
    for (label, o) in outcomes {
        groups.entry(label).or_default().push(*o);
    }
    if groups.is_empty() {
        return Err(RatesError::EmptyCampaign);
    }
    groups.into_iter().map(|(l, os)| Ok((l.to_owned(), from_outcomes(&os)?))).collect()
}

/// The longest ended call of every contact, in contact order.
pub fn longest_per_contact(transcripts: &[Transcript]) -> Vec<&Transcript> {
    let mut by_contact: BTreeMap<&str, Vec<Transcript>> = BTreeMap::new();
    for t in transcripts.iter().filter(|t| t.is_terminal()) {
        by_contact.entry(&t.contact_id).or_default().push(t.clone());
    }
    by_contact
        .into_values()
        .filter_map(|calls| {
            let best = select_longest_call(&calls).ok()?.session_id.clone();
            transcripts.iter().find(|t| t.session_id == best)
        })
        .collect()
}

/// Conversation metrics of fully completed interviews only, one per
/// contact (its longest call).
pub fn completed_metrics<T: Scalar>(
    transcripts: &[Transcript],
    open_ended: &BTreeSet<NodeId>,
    family: Family,
) -> Result<Vec<(String, ConversationMetrics<T>)>, ReportError> {
    longest_per_contact(transcripts)
        .into_iter()
        .filter(|t| t.is_completed())
        .map(|t| Ok((t.session_id.clone(), conversation_metrics(t, open_ended, family)?)))
        .collect()
}

/// Summary table over [`completed_metrics`].
pub fn completed_summary<T: Scalar>(
    transcripts: &[Transcript],
    open_ended: &BTreeSet<NodeId>,
    family: Family,
) -> Result<Vec<SummaryRow<T>>, ReportError> {
    let metrics: Vec<ConversationMetrics<T>> =
        completed_metrics(transcripts, open_ended, family)?.into_iter().map(|(_, m)| m).collect();
    if metrics.is_empty() {
        return Err(ReportError::NoCompleted);
    }
    Ok(summary_table(&metrics)?)
}

/// Order statistics of every metric over a set of interviews.
pub fn summary_table<T: Scalar>(metrics: &[ConversationMetrics<T>]) -> Result<Vec<SummaryRow<T>>, StatsError> {
    let columns: Vec<[T; 13]> = metrics.iter().map(|m| m.row_values()).collect();
    METRIC_ROWS
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let values: Vec<T> = columns.iter().map(|c| c[i]).collect();
            summarize(*name, &values)
        })
        .collect()
}

fn mmss<T: Scalar>(secs: T) -> String {
    let total = secs.round().to_u64().unwrap_or(0);
    format!("{}:{:02}", total / 60, total % 60)
}

fn cell<T: Scalar>(row: &SummaryRow<T>, v: T) -> String {
    if row.metric == METRIC_ROWS[1] {
        mmss(v)
    } else {
        format!("{v:.2}")
    }
}

/// Aligned table; the duration row is shown as m:ss.
pub fn summary_text<T: Scalar>(rows: &[SummaryRow<T>]) -> String {
    let width = rows.iter().map(|r| r.metric.chars().count()).max().unwrap_or(6).max(6);
    let mut out = format!(
        "{:<width$}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}\n",
        "Metric", "Min", "Q1", "Median", "Mean", "Q3", "Max"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<width$}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}\n",
            r.metric,
            cell(r, r.min),
            cell(r, r.q1),
            cell(r, r.median),
            cell(r, r.mean),
            cell(r, r.q3),
            cell(r, r.max),
        ));
    }
    out
}

/// CSV with full precision; durations in seconds.
pub fn summary_csv<T: Scalar>(rows: &[SummaryRow<T>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["metric", "min", "q1", "median", "mean", "q3", "max"]).expect("in-memory write");
    for r in rows {
        let vals = [r.min, r.q1, r.median, r.mean, r.q3, r.max].map(|v| v.to_string());
        let mut rec = vec![r.metric.clone()];
        rec.extend(vals);
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// One row per interview.
pub fn metrics_csv<T: Scalar>(rows: &[(String, ConversationMetrics<T>)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["session_id".to_string()];
    header.extend(METRIC_ROWS.iter().map(|s| s.to_string()));
    w.write_record(&header).expect("in-memory write");
    for (id, m) in rows {
        let mut rec = vec![id.clone()];
        rec.extend(m.row_values().iter().map(|v| v.to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Histogram of durations in `bin_minutes`-wide bins, starting at 0.
pub fn durations_histogram_csv(durations_ms: &[u64], bin_minutes: u64) -> String {
    let bin_ms = bin_minutes.max(1) * 60_000;
    let mut out = String::from("bin_start_min,bin_end_min,count\n");
    let Some(&max) = durations_ms.iter().max() else { return out };
    let bins = (max / bin_ms + 1) as usize;
    let mut counts = vec![0u64; bins];
    for d in durations_ms {
        counts[(d / bin_ms) as usize] += 1;
    }
    for (i, c) in counts.iter().enumerate() {
        let lo = i as u64 * bin_minutes;
        out.push_str(&format!("{lo},{},{c}\n", lo + bin_minutes));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::rates::response_rates;

    #[test]
    fn counts_and_rates_lines() {
        let rows = read_counts_csv("label,attempts,fully_completed,partial_76_plus_cumulative\nPeru direct,2539,131,144\n").unwrap();
        let r = response_rates::<f64>(rows[0].attempts, rows[0].fully_completed, rows[0].partial_76_plus_cumulative).unwrap();
        let text = rates_text(&[(rows[0].label.clone(), r)]);
        assert!(text.contains("RR1 5.2% RR2 5.7%"), "{text}");
    }

    #[test]
    fn histogram() {
        let csv = durations_histogram_csv(&[30_000, 61_000, 119_000, 300_000], 1);
        assert_eq!(csv.lines().nth(1), Some("0,1,1"));
        assert_eq!(csv.lines().nth(2), Some("1,2,2"));
        assert_eq!(csv.lines().count(), 1 + 6);
        assert_eq!(durations_histogram_csv(&[], 1).lines().count(), 1);
    }

    #[test]
    fn duration_cells() {
        assert_eq!(mmss(398.0f64), "6:38");
        assert_eq!(mmss(420.4f64), "7:00");
    }
}
