//! Error metrics and box-plot statistics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::net::Point2;
use crate::scalar::Scalar;

/// Root of the summed squared position errors of one trial.
pub fn trial_error<T: Scalar>(est: &[Point2<T>], truth: &[Point2<T>]) -> Result<T> {
    if est.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), got: est.len() });
    }
    Ok(est.iter().zip(truth).map(|(a, b)| a.sub(b).norm_squared()).sum::<T>().sqrt())
}

/// `sqrt(mean(E_i^2))`.
pub fn rmse<T: Scalar>(errors: &[T]) -> Result<T> {
    if errors.is_empty() {
        return Err(Error::EmptySample);
    }
    let sum: T = errors.iter().map(|&e| e * e).sum();
    Ok((sum / T::of_usize(errors.len())).sqrt())
}

/// Box-and-whisker summary with Tukey fences at 1.5 IQR.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct BoxStats<T> {
    pub median: T,
    pub q1: T,
    pub q3: T,
    /// Smallest sample inside the lower fence.
    pub whisker_lo: T,
    /// Largest sample inside the upper fence.
    pub whisker_hi: T,
    /// Samples beyond either fence, ascending.
    pub outliers: Vec<T>,
}

impl<T: Scalar> BoxStats<T> {
    pub fn iqr(&self) -> T {
        self.q3 - self.q1
    }
}

/// Quantile of sorted data by linear interpolation at position
/// `p (n - 1)` (zero-based), i.e. `p (n - 1) + 1` in one-based order
/// statistics.
pub fn quantile_sorted<T: Scalar>(sorted: &[T], p: T) -> T {
    let n = sorted.len();
    let h = p * T::of_usize(n - 1);
    let lo = h.floor().to_usize().unwrap_or(0).min(n - 1);
    let frac = h - T::of_usize(lo);
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}

pub fn boxplot_stats<T: Scalar>(errors: &[T]) -> Result<BoxStats<T>> {
    if errors.is_empty() {
        return Err(Error::EmptySample);
    }
    if errors.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("NaN in sample".into()));
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let q1 = quantile_sorted(&sorted, T::of(0.25));
    let median = quantile_sorted(&sorted, T::of(0.5));
    let q3 = quantile_sorted(&sorted, T::of(0.75));
    let span = T::of(1.5) * (q3 - q1);
    let (lo_fence, hi_fence) = (q1 - span, q3 + span);
    let inside = || sorted.iter().copied().filter(|&v| v >= lo_fence && v <= hi_fence);
    let whisker_lo = inside().next().unwrap_or(q1);
    let whisker_hi = inside().last().unwrap_or(q3);
    let outliers = sorted.iter().copied().filter(|&v| v < lo_fence || v > hi_fence).collect();
    Ok(BoxStats { median, q1, q3, whisker_lo, whisker_hi, outliers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Insertion sort, then quartiles and a scan for fences.
    fn oracle(data: &[f64]) -> BoxStats<f64> {
        let mut v = data.to_vec();
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                v.swap(j - 1, j);
                j -= 1;
            }
        }
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let k = h as usize;
            if k + 1 >= v.len() {
                v[v.len() - 1]
            } else {
                v[k] + (h - k as f64) * (v[k + 1] - v[k])
            }
        };
        let (q1, median, q3) = (q(0.25), q(0.5), q(0.75));
        let lo = q1 - 1.5 * (q3 - q1);
        let hi = q3 + 1.5 * (q3 - q1);
        let mut whisker_lo = f64::INFINITY;
        let mut whisker_hi = f64::NEG_INFINITY;
        let mut outliers = Vec::new();
        for &x in &v {
            if x < lo || x > hi {
                outliers.push(x);
            } else {
                whisker_lo = whisker_lo.min(x);
                whisker_hi = whisker_hi.max(x);
            }
        }
        BoxStats { median, q1, q3, whisker_lo, whisker_hi, outliers }
    }

    #[test]
    fn trial_error_examples() {
        let p = |x: f64, y: f64| Point2::new(x, y);
        assert_eq!(trial_error(&[p(0.3, 0.4)], &[p(0.0, 0.0)]).unwrap(), 0.5);
        assert_eq!(trial_error(&[p(0.3, 0.4)], &[p(0.3, 0.4)]).unwrap(), 0.0);
        let two = trial_error(&[p(1.0, 0.0), p(0.0, 1.0)], &[p(0.0, 0.0), p(0.0, 0.0)]).unwrap();
        assert!((two - 2f64.sqrt()).abs() < 1e-15);
        assert!(trial_error(&[p(0.0, 0.0)], &[]).is_err());
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[0.5]).unwrap(), 0.5);
        assert!((rmse(&[1.0, 3.0]).unwrap() - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(rmse(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(rmse::<f64>(&[]).is_err());
    }

    #[test]
    fn boxplot_examples() {
        let b = boxplot_stats(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((b.median, b.q1, b.q3), (3.0, 2.0, 4.0));
        assert!(b.outliers.is_empty());

        let b = boxplot_stats(&[0.7; 6]).unwrap();
        assert_eq!(b.iqr(), 0.0);
        assert_eq!((b.whisker_lo, b.whisker_hi), (0.7, 0.7));
        assert!(b.outliers.is_empty());

        let b = boxplot_stats(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!(b.outliers, vec![100.0]);
        assert_eq!(b.whisker_hi, 4.0);

        assert!(boxplot_stats::<f64>(&[]).is_err());
        assert!(boxplot_stats(&[1.0, f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn boxplot_matches_oracle(data in prop::collection::vec(0.0..10.0f64, 1..200)) {
            prop_assert_eq!(boxplot_stats(&data).unwrap(), oracle(&data));
        }

        #[test]
        fn box_invariants(data in prop::collection::vec(-5.0..5.0f64, 1..100)) {
            let b = boxplot_stats(&data).unwrap();
            prop_assert!(b.q1 <= b.median && b.median <= b.q3);
            let span = 1.5 * b.iqr();
            for &o in &b.outliers {
                prop_assert!(o < b.q1 - span || o > b.q3 + span);
            }
        }

        #[test]
        fn rmse_is_nonnegative(data in prop::collection::vec(0.0..10.0f64, 1..50)) {
            let r = rmse(&data).unwrap();
            prop_assert!(r >= 0.0);
            prop_assert_eq!(r == 0.0, data.iter().all(|&e| e == 0.0));
        }
    }
}
