//! RR1 and RR2 response rates.
//!
//! RR2's numerator is the cumulative count of interviews reaching at least
//! 76% completion, fully completed ones included.

use serde::Serialize;
use thiserror::Error;

use super::outcome::CallOutcome;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatesError {
    #[error("empty campaign")]
    EmptyCampaign,
    #[error("{what} ({count}) exceeds {bound} ({limit})")]
    Inconsistent { what: &'static str, count: u64, bound: &'static str, limit: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseRates<T> {
    pub attempts: u64,
    pub fully_completed: u64,
    pub partial_76_plus_cumulative: u64,
    pub rr1: T,
    pub rr2: T,
}

pub fn response_rates<T: Scalar>(
    attempts: u64,
    fully_completed: u64,
    partial_76_plus_cumulative: u64,
) -> Result<ResponseRates<T>, RatesError> {
    if attempts == 0 {
        return Err(RatesError::EmptyCampaign);
    }
    if fully_completed > partial_76_plus_cumulative {
        return Err(RatesError::Inconsistent {
            what: "fully completed",
            count: fully_completed,
            bound: "cumulative ≥76%",
            limit: partial_76_plus_cumulative,
        });
    }
    if partial_76_plus_cumulative > attempts {
        return Err(RatesError::Inconsistent {
            what: "cumulative ≥76%",
            count: partial_76_plus_cumulative,
            bound: "attempts",
            limit: attempts,
        });
    }
    let a = T::from_count(attempts as usize);
    Ok(ResponseRates {
        attempts,
        fully_completed,
        partial_76_plus_cumulative,
        rr1: T::from_count(fully_completed as usize) / a,
        rr2: T::from_count(partial_76_plus_cumulative as usize) / a,
    })
}

/// Rates over a list of classified attempts.
pub fn from_outcomes<T: Scalar>(outcomes: &[CallOutcome]) -> Result<ResponseRates<T>, RatesError> {
    let fully = outcomes.iter().filter(|o| **o == CallOutcome::FullyCompleted).count();
    let cumulative = outcomes.iter().filter(|o| o.reached_76()).count();
    response_rates(outcomes.len() as u64, fully as u64, cumulative as u64)
}

/// `num/den` as a percentage with one decimal, rounded half up in exact
/// integer arithmetic.
pub fn percent_1dp(num: u64, den: u64) -> String {
    assert!(den > 0, "percentage of an empty total");
    let tenths = (2 * 1000 * u128::from(num) + u128::from(den)) / (2 * u128::from(den));
    format!("{}.{}%", tenths / 10, tenths % 10)
}

impl<T: Scalar> ResponseRates<T> {
    pub fn rr1_display(&self) -> String {
        percent_1dp(self.fully_completed, self.attempts)
    }

    pub fn rr2_display(&self) -> String {
        percent_1dp(self.partial_76_plus_cumulative, self.attempts)
    }

    /// Partials strictly below 100%, the disjoint reading of the counts.
    pub fn partial_only(&self) -> u64 {
        self.partial_76_plus_cumulative - self.fully_completed
    }
}
