//! Sample quantiles with plotting positions `s(i) = (2i - 1) / (2n)`.

use crate::error::{invalid, Result};
use crate::scalar::{total_cmp, Scalar};

/// Sorted copy of `x` (NaN last).
pub fn sorted<T: Scalar>(x: &[T]) -> Vec<T> {
    let mut v = x.to_vec();
    v.sort_unstable_by(total_cmp);
    v
}

/// Quantile of already-sorted data: the `i`-th order statistic sits at `s(i)`,
/// values in between are linearly interpolated and `p` outside `[s(1), s(n)]`
/// clamps to the extreme order statistics.
pub fn quantile_sorted<T: Scalar>(sorted: &[T], p: T) -> T {
    let n = sorted.len();
    // s(i) = p  <=>  i = n p + 1/2 (1-based)
    let h = T::from_usize_lossy(n) * p + T::lit(0.5);
    if h <= T::one() {
        return sorted[0];
    }
    if h >= T::from_usize_lossy(n) {
        return sorted[n - 1];
    }
    let lower = h.floor();
    let i = lower.to_usize().unwrap_or(1).clamp(1, n - 1);
    let frac = h - lower;
    let a = sorted[i - 1];
    let b = sorted[i];
    if frac == T::zero() {
        a
    } else {
        a + frac * (b - a)
    }
}

/// McCulloch-style sample quantile of unsorted data.
pub fn mcculloch_quantile<T: Scalar>(x: &[T], p: T) -> Result<T> {
    if x.len() < 2 {
        return Err(invalid("quantile needs at least two observations"));
    }
    if !(p > T::zero() && p < T::one()) {
        return Err(invalid(format!("probability must lie in (0, 1), got {p}")));
    }
    Ok(quantile_sorted(&sorted(x), p))
}

pub(crate) fn mean<T: Scalar>(x: &[T]) -> T {
    x.iter().copied().sum::<T>() / T::from_usize_lossy(x.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plotting_position_examples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(mcculloch_quantile(&x, 0.5).unwrap(), 3.0);
        assert_eq!(mcculloch_quantile(&x, 0.2).unwrap(), 1.5);
        assert_eq!(mcculloch_quantile(&x, 0.99).unwrap(), 5.0);
        assert_eq!(mcculloch_quantile(&x, 0.01).unwrap(), 1.0);
        // unsorted input
        assert_eq!(mcculloch_quantile(&[5.0, 1.0, 3.0, 2.0, 4.0], 0.7).unwrap(), 4.0);
    }

    #[test]
    fn rejects_small_input_and_bad_p() {
        assert!(mcculloch_quantile::<f64>(&[], 0.5).is_err());
        assert!(mcculloch_quantile(&[1.0], 0.5).is_err());
        assert!(mcculloch_quantile(&[1.0, 2.0], 0.0).is_err());
        assert!(mcculloch_quantile(&[1.0, 2.0], 1.0).is_err());
    }
}
