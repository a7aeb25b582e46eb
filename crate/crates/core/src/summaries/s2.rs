//! Zolotarev log-moment summary `(ν̂, η̂, τ̂, x̄)`.

use crate::scalar::{sgn, Scalar};

use super::quantile::mean;
use super::{SummaryFamily, SummaryStatus, SummaryVector};

pub const DEFAULT_XI: f64 = 0.25;

fn sample_variance<T: Scalar>(x: &[T], m: T) -> T {
    if x.len() < 2 {
        return T::zero();
    }
    x.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / T::from_usize_lossy(x.len() - 1)
}

/// S2 over triples `Z_j = X_{3j-2} − ξ X_{3j-1} − (1−ξ) X_{3j}` of the data
/// truncated to a multiple of three, with `V_j = ln|Z_j|`, `U_j = sgn(Z_j)`.
///
/// A `Z_j` that is exactly zero is nudged by a machine-epsilon jitter and the
/// vector is marked [`SummaryStatus::Adjusted`].
pub fn s2_zolotarev<T: Scalar>(x: &[T], xi: T) -> SummaryVector<T> {
    let m = x.len() / 3;
    if m < 2 || !(xi > T::zero() && xi <= T::lit(0.5)) {
        return SummaryVector::degenerate(SummaryFamily::S2, 4);
    }
    let mut status = SummaryStatus::Ok;
    let mut v = Vec::with_capacity(m);
    let mut u = Vec::with_capacity(m);
    for tri in x[..3 * m].chunks_exact(3) {
        let mut z = tri[0] - xi * tri[1] - (T::one() - xi) * tri[2];
        if z == T::zero() {
            z = T::epsilon() * (T::one() + tri[0].abs());
            status = SummaryStatus::Adjusted;
        }
        v.push(z.abs().ln());
        u.push(sgn(z));
    }
    let eta = mean(&u);
    let tau = mean(&v);
    let six_over_pi2 = T::lit(6.0) / (T::PI() * T::PI());
    let nu_tilde = six_over_pi2 * sample_variance(&v, tau) - T::lit(1.5) * sample_variance(&u, eta) + T::one();
    let floor = (T::one() + eta.abs()).powi(2) / T::lit(4.0);
    let nu = nu_tilde.max(floor);
    let values = vec![nu, eta, tau, mean(x)];
    if values.iter().any(|v| !v.is_finite()) {
        status = SummaryStatus::Degenerate;
    }
    SummaryVector::new(SummaryFamily::S2, values, status)
}
