//! Distribution function and quantiles of the univariate law by numerical
//! inversion of the characteristic function (Gil-Pelaez).

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

use super::params::{is_unit_alpha, StableParams};

const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

fn gauss_legendre(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS)
        .map(|(&x, w)| w * (f(m - h * x) + f(m + h * x)))
        .sum::<f64>()
        * h
}

/// Standardized (`γ = 1`, `δ = 0`) distribution function.
fn standard_cdf(alpha: f64, beta: f64, z: f64) -> f64 {
    let unit = is_unit_alpha(alpha);
    let tan = (std::f64::consts::FRAC_PI_2 * alpha).tan();
    // Im[e^{-itz} Φ(t)] / t for t > 0
    let integrand = |t: f64| {
        let (decay, phase) = if unit {
            (-t, -z * t - beta * std::f64::consts::FRAC_2_PI * t * t.ln())
        } else {
            let ta = t.powf(alpha);
            (-ta, -z * t - beta * tan * (t - ta))
        };
        decay.exp() * phase.sin() / t
    };
    let upper = 40f64.powf(1.0 / alpha).max(1.0);
    // geometric panels resolve the behaviour near the origin
    let mut total = 0.0;
    let mut a = 0.0;
    for k in (1..=12).rev() {
        let b = 10f64.powi(-k);
        total += gauss_legendre(&integrand, a, b);
        a = b;
    }
    let width = 0.05;
    while a < upper {
        let b = (a + width).min(upper);
        total += gauss_legendre(&integrand, a, b);
        a = b;
    }
    0.5 - total / std::f64::consts::PI
}

/// `P(X ≤ x)` for the law with characteristic function
/// [`super::char_fn_univariate`].
pub fn cdf_univariate<T: Scalar>(p: &StableParams<T>, x: T) -> T {
    let z = (x - p.delta) / p.gamma;
    T::lit(standard_cdf(p.alpha.as_f64(), p.beta.as_f64(), z.as_f64()).clamp(0.0, 1.0))
}

/// Quantile of the standardized law, by bracketing and regula falsi (Illinois).
pub(crate) fn standard_quantile(alpha: f64, beta: f64, prob: f64) -> f64 {
    let f = |z: f64| standard_cdf(alpha, beta, z) - prob;
    let (mut lo, mut hi) = (-1.0, 1.0);
    let (mut flo, mut fhi) = (f(lo), f(hi));
    while flo > 0.0 {
        hi = lo;
        fhi = flo;
        lo *= 2.0;
        flo = f(lo);
    }
    while fhi < 0.0 {
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        fhi = f(hi);
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let z = (lo * fhi - hi * flo) / (fhi - flo);
        let fz = f(z);
        if fz.abs() < 1e-13 || (hi - lo) < 1e-12 * (1.0 + z.abs()) {
            return z;
        }
        if fz > 0.0 {
            hi = z;
            fhi = fz;
            if side == -1 {
                flo /= 2.0;
            }
            side = -1;
        } else {
            lo = z;
            flo = fz;
            if side == 1 {
                fhi /= 2.0;
            }
            side = 1;
        }
    }
    (lo + hi) / 2.0
}

/// `p`-quantile of the law with characteristic function
/// [`super::char_fn_univariate`].
pub fn quantile_univariate<T: Scalar>(p: &StableParams<T>, prob: T) -> Result<T> {
    if !(prob > T::zero() && prob < T::one()) {
        return Err(invalid(format!("probability must lie in (0, 1), got {prob}")));
    }
    let z = standard_quantile(p.alpha.as_f64(), p.beta.as_f64(), prob.as_f64());
    Ok(p.delta + p.gamma * T::lit(z))
}
