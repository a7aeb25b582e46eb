//! Press's method-of-moments summary `(α̂, β̂, γ̂, δ̂)` from the empirical
//! characteristic function at four points.

use crate::scalar::Scalar;

use super::s4::ecf_sums;
use super::{SummaryFamily, SummaryStatus, SummaryVector};

/// Koutrouvelis' evaluation points `(t₁, t₂, t₃, t₄)`.
pub const KOUTROUVELIS_POINTS: [f64; 4] = [0.2, 0.8, 0.1, 0.4];

const MODULUS_TOL: f64 = 1e-12;
const ALPHA_FLOOR: f64 = 0.1;

/// Characteristic-function values the closed forms consume: moduli at `t₁, t₂`
/// and arguments at `t₃, t₄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressInputs<T> {
    pub modulus_t1: T,
    pub modulus_t2: T,
    pub arg_t3: T,
    pub arg_t4: T,
}

/// Evaluates the closed forms. The location is reported in the same
/// parameterization as [`crate::stable_model::char_fn_univariate`], i.e. the
/// moment-equation location plus `β̂ γ̂ tan(πα̂/2)`.
pub fn press_estimates<T: Scalar>(inputs: &PressInputs<T>, t: [T; 4]) -> SummaryVector<T> {
    let [t1, t2, t3, t4] = t;
    let (m1, m2) = (inputs.modulus_t1, inputs.modulus_t2);
    let bad = |m: T| !(m > T::lit(MODULUS_TOL) && m < T::one() - T::lit(MODULUS_TOL));
    if bad(m1) || bad(m2) {
        return SummaryVector::degenerate(SummaryFamily::S3, 4);
    }
    let mut status = SummaryStatus::Ok;
    let (l1, l2) = (m1.ln(), m2.ln());
    let log_ratio_t = (t1 / t2).abs().ln();
    let alpha_raw = (l1 / l2).ln() / log_ratio_t;
    if !alpha_raw.is_finite() {
        return SummaryVector::degenerate(SummaryFamily::S3, 4);
    }
    let alpha = alpha_raw.max(T::lit(ALPHA_FLOOR)).min(T::lit(2.0));
    if alpha != alpha_raw {
        status = SummaryStatus::Adjusted;
    }
    // the moment equations give ln(γ^α)
    let log_gamma_alpha = (t1.abs().ln() * (-l2).ln() - t2.abs().ln() * (-l1).ln()) / log_ratio_t;
    let gamma = (log_gamma_alpha / alpha).exp();
    let gamma_alpha = log_gamma_alpha.exp();
    let tan = (alpha * T::FRAC_PI_2()).tan();
    let (a3, a4) = (t3.abs().powf(alpha - T::one()), t4.abs().powf(alpha - T::one()));
    let (r3, r4) = (inputs.arg_t3 / t3, inputs.arg_t4 / t4);
    let beta_raw = (r4 - r3) / ((a4 - a3) * gamma_alpha * tan);
    // at α̂ = 2 the characteristic function carries no skewness information
    let beta = if alpha == T::lit(2.0) {
        T::zero()
    } else if beta_raw.is_finite() {
        beta_raw.max(-T::one()).min(T::one())
    } else {
        beta_raw
    };
    if beta != beta_raw {
        status = SummaryStatus::Adjusted;
    }
    let delta_moment = (a4 * r3 - a3 * r4) / (a4 - a3);
    let delta = delta_moment + beta * gamma * tan;
    let values = vec![alpha, beta, gamma, delta];
    if values.iter().any(|v| !v.is_finite()) {
        status = SummaryStatus::Degenerate;
    }
    SummaryVector::new(SummaryFamily::S3, values, status)
}

/// S3 at evaluation points `t`. The empirical argument is the quadrant-aware
/// `atan2(Σ sin(t x), Σ cos(t x))`.
pub fn s3_press<T: Scalar>(x: &[T], t: [T; 4]) -> SummaryVector<T> {
    if x.len() < 2 || t.iter().any(|&v| v == T::zero()) || t[0] == t[1] || t[2] == t[3] {
        return SummaryVector::degenerate(SummaryFamily::S3, 4);
    }
    let n = T::from_usize_lossy(x.len());
    let modulus = |tt: T| {
        let (c, s) = ecf_sums(x, tt);
        (c * c + s * s).sqrt() / n
    };
    let arg = |tt: T| {
        let (c, s) = ecf_sums(x, tt);
        s.atan2(c)
    };
    let inputs = PressInputs {
        modulus_t1: modulus(t[0]),
        modulus_t2: modulus(t[1]),
        arg_t3: arg(t[2]),
        arg_t4: arg(t[3]),
    };
    press_estimates(&inputs, t)
}

pub fn default_points<T: Scalar>() -> [T; 4] {
    KOUTROUVELIS_POINTS.map(T::lit)
}
