//! Order statistics with linearly interpolated quartiles (type 7).

use serde::Serialize;
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("no values to summarize")]
    Empty,
    #[error("non-finite value in input")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow<T> {
    pub metric: String,
    pub min: T,
    pub q1: T,
    pub median: T,
    pub mean: T,
    pub q3: T,
    pub max: T,
}

/// Quantile `p` of ascending `sorted` values: `h = (n-1)p`, interpolating
/// between the order statistics around `h`.
pub fn quantile<T: Scalar>(sorted: &[T], p: T) -> T {
    let n = sorted.len();
    let h = T::from_count(n - 1) * p;
    let lo = h.floor();
    let i = lo.to_usize().unwrap_or(0).min(n - 1);
    if i + 1 >= n {
        return sorted[n - 1];
    }
    sorted[i] + (h - lo) * (sorted[i + 1] - sorted[i])
}

pub fn summarize<T: Scalar>(metric: impl Into<String>, values: &[T]) -> Result<SummaryRow<T>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
    let mean = v.iter().copied().sum::<T>() / T::from_count(v.len());
    Ok(SummaryRow {
        metric: metric.into(),
        min: v[0],
        q1: quantile(&v, T::lit(0.25)),
        median: quantile(&v, T::lit(0.5)),
        mean,
        q3: quantile(&v, T::lit(0.75)),
        max: v[v.len() - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn four_values() {
        let r = summarize("x", &[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((r.min, r.q1, r.median, r.mean, r.q3, r.max), (1.0, 1.75, 2.5, 2.5, 3.25, 4.0));
    }

    #[test]
    fn single_and_empty() {
        let r = summarize("x", &[5.0f32]).unwrap();
        assert_eq!((r.min, r.q1, r.median, r.mean, r.q3, r.max), (5.0, 5.0, 5.0, 5.0, 5.0, 5.0));
        assert_eq!(summarize::<f64>("x", &[]), Err(StatsError::Empty));
        assert_eq!(summarize("x", &[f64::NAN]), Err(StatsError::NonFinite));
    }

    proptest! {
        #[test]
        fn ordered(v in prop::collection::vec(-1e6f64..1e6, 1..100)) {
            let r = summarize("x", &v).unwrap();
            prop_assert!(r.min <= r.q1 && r.q1 <= r.median && r.median <= r.q3 && r.q3 <= r.max);
            prop_assert!(r.min <= r.mean && r.mean <= r.max);
        }
    }
}
