//! Empirical characteristic function summary.

use num_complex::Complex;

use crate::scalar::Scalar;

use super::{SummaryFamily, SummaryStatus, SummaryVector};

/// `(Σ cos(t x_j), Σ sin(t x_j))`.
#[inline]
pub(crate) fn ecf_sums<T: Scalar>(x: &[T], t: T) -> (T, T) {
    x.iter().fold((T::zero(), T::zero()), |(c, s), &v| {
        let (sn, cs) = (t * v).sin_cos();
        (c + cs, s + sn)
    })
}

/// `Φ̂(t) = n⁻¹ Σ e^{i t x_j}`.
pub fn empirical_cf<T: Scalar>(x: &[T], t: T) -> Complex<T> {
    let n = T::from_usize_lossy(x.len());
    let (c, s) = ecf_sums(x, t);
    Complex::new(c / n, s / n)
}

/// The 20-point grid `{±0.5, ±1, …, ±5}` in ascending order.
pub fn default_grid<T: Scalar>() -> Vec<T> {
    let pos: Vec<T> = (1..=10).map(|i| T::lit(0.5 * i as f64)).collect();
    pos.iter().rev().map(|&t| -t).chain(pos.iter().copied()).collect()
}

/// S4: real parts of `Φ̂` over the grid followed by the imaginary parts.
pub fn s4_ecf<T: Scalar>(x: &[T], grid: &[T]) -> SummaryVector<T> {
    if x.is_empty() {
        return SummaryVector::degenerate(SummaryFamily::S4, 2 * grid.len());
    }
    let phis: Vec<Complex<T>> = grid.iter().map(|&t| empirical_cf(x, t)).collect();
    let values: Vec<T> = phis.iter().map(|c| c.re).chain(phis.iter().map(|c| c.im)).collect();
    let status = if values.iter().all(|v| v.is_finite()) {
        SummaryStatus::Ok
    } else {
        SummaryStatus::Degenerate
    };
    SummaryVector::new(SummaryFamily::S4, values, status)
}
