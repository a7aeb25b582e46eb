//! Mean, 21 quantiles and the two-sample Kolmogorov–Smirnov distance to the
//! observed data.

use crate::scalar::Scalar;

use super::quantile::{mean, quantile_sorted, sorted};
use super::{SummaryFamily, SummaryStatus, SummaryVector};

/// `{0.01, 0.05, 0.10, …, 0.95, 0.99}`.
pub const S5_PROBABILITIES: [f64; 21] = [
    0.01, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85,
    0.90, 0.95, 0.99,
];

/// `sup_z |F_x(z) − F_y(z)|` for sorted samples, by a merge sweep over the
/// pooled jump points.
pub fn ks_sorted<T: Scalar>(x: &[T], y: &[T]) -> T {
    if x.is_empty() || y.is_empty() {
        return T::nan();
    }
    let (n, m) = (x.len(), y.len());
    let (nf, mf) = (T::from_usize_lossy(n), T::from_usize_lossy(m));
    let (mut i, mut j) = (0, 0);
    let mut d = T::zero();
    while i < n && j < m {
        let z = if x[i] <= y[j] { x[i] } else { y[j] };
        while i < n && x[i] <= z {
            i += 1;
        }
        while j < m && y[j] <= z {
            j += 1;
        }
        let gap = (T::from_usize_lossy(i) / nf - T::from_usize_lossy(j) / mf).abs();
        if gap > d {
            d = gap;
        }
    }
    d
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic<T: Scalar>(x: &[T], y: &[T]) -> T {
    ks_sorted(&sorted(x), &sorted(y))
}

pub(crate) fn s5_sorted<T: Scalar>(sorted_x: &[T], mean_x: T, sorted_ref: &[T]) -> SummaryVector<T> {
    let mut values = Vec::with_capacity(23);
    values.push(mean_x);
    values.extend(S5_PROBABILITIES.iter().map(|&p| quantile_sorted(sorted_x, T::lit(p))));
    values.push(ks_sorted(sorted_x, sorted_ref));
    let status = if values.iter().all(|v| v.is_finite()) {
        SummaryStatus::Ok
    } else {
        SummaryStatus::Degenerate
    };
    SummaryVector::new(SummaryFamily::S5, values, status)
}

/// S5 of `x` against the observed reference `y_ref`.
pub fn s5_ks<T: Scalar>(x: &[T], y_ref: &[T]) -> SummaryVector<T> {
    if x.is_empty() || y_ref.is_empty() {
        return SummaryVector::degenerate(SummaryFamily::S5, 23);
    }
    s5_sorted(&sorted(x), mean(x), &sorted(y_ref))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_examples() {
        assert_eq!(ks_statistic(&[1.0, 5.0, 2.0], &[2.0, 1.0, 5.0]), 0.0);
        assert_eq!(ks_statistic(&[1.0], &[2.0]), 1.0);
        // F_x jumps to 1/2 at 1 and 1 at 2; F_y to 1/2 at 1 and 1 at 3: gap 1/2 on [2, 3)
        assert_eq!(ks_statistic(&[1.0, 2.0], &[1.0, 3.0]), 0.5);
    }

    #[test]
    fn ties_across_samples() {
        assert_eq!(ks_statistic(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]), 1.0 / 3.0);
    }

    #[test]
    fn layout() {
        let x: Vec<f64> = (1..=100).map(f64::from).collect();
        let s = s5_ks(&x, &x);
        assert_eq!(s.values.len(), 23);
        assert_eq!(s.values[0], 50.5);
        assert_eq!(s.values[22], 0.0);
        assert_eq!(s.values[11], 50.5);
    }
}
