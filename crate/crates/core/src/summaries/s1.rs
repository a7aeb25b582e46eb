//! Quantile-spread summary: `(v̂_α, v̂_β, IQR, x̄)`.

use crate::scalar::Scalar;

use super::quantile::{mean, quantile_sorted, sorted};
use super::{SummaryFamily, SummaryStatus, SummaryVector};

/// Population-style quantile spreads used by the S1 family and its inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileSpreads<T> {
    pub v_alpha: T,
    pub v_beta: T,
    pub iqr: T,
}

impl<T: Scalar> QuantileSpreads<T> {
    pub fn from_sorted(x: &[T]) -> Self {
        let q = |p: f64| quantile_sorted(x, T::lit(p));
        let (q05, q25, q50, q75, q95) = (q(0.05), q(0.25), q(0.5), q(0.75), q(0.95));
        let outer = q95 - q05;
        let iqr = q75 - q25;
        Self {
            v_alpha: outer / iqr,
            v_beta: (q95 + q05 - T::lit(2.0) * q50) / outer,
            iqr,
        }
    }
}

/// S1 on already-sorted data with a precomputed mean.
pub(crate) fn s1_sorted<T: Scalar>(sorted_x: &[T], mean_x: T) -> SummaryVector<T> {
    let sp = QuantileSpreads::from_sorted(sorted_x);
    let values = vec![sp.v_alpha, sp.v_beta, sp.iqr, mean_x];
    let status = if values.iter().all(|v| v.is_finite()) {
        SummaryStatus::Ok
    } else {
        SummaryStatus::Degenerate
    };
    SummaryVector::new(SummaryFamily::S1, values, status)
}

/// S1: `(v̂_α, v̂_β, q̂_.75 − q̂_.25, x̄)`.
///
/// The third entry is the raw interquartile range; the scale-normalized form
/// needs the unknown `γ`, and under ABC only comparability matters. Constant
/// data (zero spreads) is flagged degenerate.
pub fn s1_mcculloch<T: Scalar>(x: &[T]) -> SummaryVector<T> {
    if x.len() < 2 {
        return SummaryVector::degenerate(SummaryFamily::S1, 4);
    }
    s1_sorted(&sorted(x), mean(x))
}
