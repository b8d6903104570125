//! Voice-survey orchestration: branching questionnaires, a deterministic
//! interview state machine with duplex floor control, outreach planning,
//! seeded campaign simulation and response-rate / conversation analytics.
//!
//! The numeric analytics are generic over a [`Scalar`] (`f32` or `f64`);
//! the aliases below pin the `f64` instantiations used by the rest of the
//! crate and by the CLI.

pub mod adapters;
pub mod analytics;
pub mod dialog;
pub mod hub;
pub mod lang;
pub mod log;
pub mod outreach;
pub mod questionnaire;
pub mod scalar;
pub mod session;
pub mod sim;
pub mod turn;

pub use scalar::Scalar;

/// Response rates in double precision.
pub type ResponseRates = analytics::rates::ResponseRates<f64>;
/// Per-conversation metrics in double precision.
pub type ConversationMetrics = analytics::metrics::ConversationMetrics<f64>;
/// Table row of order statistics in double precision.
pub type SummaryRow = analytics::stats::SummaryRow<f64>;
/// Single-precision summary row, used where memory matters more than digits.
pub type SummaryRow32 = analytics::stats::SummaryRow<f32>;
