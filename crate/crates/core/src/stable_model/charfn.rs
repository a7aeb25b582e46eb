//! Characteristic functions.
//!
//! The univariate law is parameterized so that the characteristic function is
//! continuous in `α` (the `|γt|^{1-α} - 1` form). The multivariate law uses the
//! discrete spectral representation `exp{-Σ w_j ψ_α(⟨t, s_j⟩) + i⟨μ⁰, t⟩}`.

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::linalg::dot;
use crate::scalar::{sgn, Scalar};

use super::params::{is_unit_alpha, SpectralStableModel, StableParams};

/// `ln Φ_X(t)` for the univariate law.
pub fn log_char_fn_univariate<T: Scalar>(p: &StableParams<T>, t: T) -> Complex<T> {
    if t == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let gt = p.gamma * t.abs();
    let s = sgn(t);
    if is_unit_alpha(p.alpha) {
        let two_over_pi = T::lit(2.0) / T::PI();
        let re = -gt;
        let im = p.delta * t - p.beta * two_over_pi * s * gt * gt.ln();
        Complex::new(re, im)
    } else {
        // γ^α|t|^α (|γt|^{1-α} - 1) = γ|t| - (γ|t|)^α
        let ga = gt.powf(p.alpha);
        let tan = (T::FRAC_PI_2() * p.alpha).tan();
        Complex::new(-ga, p.delta * t - p.beta * tan * s * (gt - ga))
    }
}

/// `Φ_X(t)` for the univariate law; `Φ_X(0) = 1` exactly.
pub fn char_fn_univariate<T: Scalar>(p: &StableParams<T>, t: T) -> Complex<T> {
    log_char_fn_univariate(p, t).exp()
}

/// `ψ_α(u)`, with `ψ_α(0) = 0`.
pub fn psi<T: Scalar>(alpha: T, u: T) -> Complex<T> {
    if u == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let a = u.abs();
    let s = sgn(u);
    if is_unit_alpha(alpha) {
        let two_over_pi = T::lit(2.0) / T::PI();
        Complex::new(a, a * two_over_pi * s * a.ln())
    } else {
        let m = a.powf(alpha);
        let tan = (T::FRAC_PI_2() * alpha).tan();
        Complex::new(m, -m * s * tan)
    }
}

/// `Φ_X(t)` for a discrete-spectral-measure multivariate law.
pub fn char_fn_multivariate<T: Scalar>(model: &SpectralStableModel<T>, t: &[T]) -> Result<Complex<T>> {
    if t.len() != model.dim() {
        return Err(invalid(format!(
            "argument has dimension {}, model has dimension {}",
            t.len(),
            model.dim()
        )));
    }
    let mut exponent = Complex::new(T::zero(), dot(model.mu0(), t));
    for (w, s) in model.weights().iter().zip(model.locations()) {
        exponent = exponent - psi(model.alpha(), dot(t, &s)) * *w;
    }
    Ok(exponent.exp())
}
