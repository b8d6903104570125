//! Evaluation of outreach and interviews: outcome classes, response
//! rates, per-conversation metrics, readability, order statistics and
//! funnel flows. Numeric routines are generic over [`crate::Scalar`].

pub mod funnel;
pub mod metrics;
pub mod outcome;
pub mod rates;
pub mod readability;
pub mod report;
pub mod stats;
pub mod transcript;

pub use funnel::{sankey_flow, Funnel};
pub use metrics::{conversation_metrics, METRIC_ROWS};
pub use outcome::{classify_outcome, CallOutcome, ProgressBucket};
pub use rates::response_rates;
pub use readability::flesch_reading_ease;
pub use stats::summarize;
pub use transcript::{select_longest_call, Speaker, Transcript, Turn};
