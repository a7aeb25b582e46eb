//! Exact simulation of stable variates (Chambers–Mallows–Stuck) and of
//! discrete-spectral-measure multivariate laws.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::rng::{open01, stream};
use crate::scalar::Scalar;

use super::params::{is_unit_alpha, SpectralStableModel, StableParams};

/// Draws `(w, u)` with `W ~ Exp(1)` by inverse CDF and `U ~ U(-π/2, π/2)` by an
/// affine map, both from open-interval uniforms.
#[inline]
fn exp_and_angle<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> (T, T) {
    let w = -open01(rng).ln();
    let u = std::f64::consts::PI * (open01(rng) - 0.5);
    (T::lit(w), T::lit(u))
}

/// Precomputed constants of the CMS transform for fixed `(α, β)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CmsConstants<T> {
    alpha: T,
    beta: T,
    unit: bool,
    b: T,
    s: T,
    inv_alpha: T,
    exponent: T,
    /// `β tan(πα/2)`: S1 → S0 location offset.
    zeta: T,
}

impl<T: Scalar> CmsConstants<T> {
    pub(crate) fn new(alpha: T, beta: T) -> Self {
        let unit = is_unit_alpha(alpha);
        let tan = (T::FRAC_PI_2() * alpha).tan();
        let bt = beta * tan;
        let (b, s, zeta) = if unit {
            (T::zero(), T::one(), T::zero())
        } else {
            (
                bt.atan() / alpha,
                (T::one() + bt * bt).powf(T::one() / (T::lit(2.0) * alpha)),
                bt,
            )
        };
        Self {
            alpha,
            beta,
            unit,
            b,
            s,
            inv_alpha: T::one() / alpha,
            exponent: (T::one() - alpha) / alpha,
            zeta,
        }
    }

    /// Standard variate in the S1 parameterization (`γ = 1`, `δ = 0`).
    #[inline]
    pub(crate) fn s1(&self, w: T, u: T) -> T {
        if self.unit {
            let half_pi = T::FRAC_PI_2();
            let a = half_pi + self.beta * u;
            (a * u.tan() - self.beta * ((half_pi * w * u.cos()) / a).ln()) / half_pi
        } else {
            let au = self.alpha * (u + self.b);
            self.s * au.sin() / u.cos().powf(self.inv_alpha) * ((u - au).cos() / w).powf(self.exponent)
        }
    }

    /// Standard variate with characteristic function `Φ_X(t; α, β, 1, 0)`.
    #[inline]
    pub(crate) fn s0(&self, w: T, u: T) -> T {
        self.s1(w, u) - self.zeta
    }

    pub(crate) fn draw_s0<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let (w, u) = exp_and_angle(rng);
        self.s0(w, u)
    }

    pub(crate) fn draw_s1<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let (w, u) = exp_and_angle(rng);
        self.s1(w, u)
    }
}

/// `n` i.i.d. draws with characteristic function `Φ_X(t; α, β, γ, δ)`.
pub fn sample_univariate<T: Scalar>(params: &StableParams<T>, n: usize, seed: u64) -> Result<Vec<T>> {
    sample_univariate_with(params, n, &mut stream(seed, &[]))
}

/// As [`sample_univariate`], drawing from a caller-supplied stream.
pub fn sample_univariate_with<T: Scalar, R: Rng + ?Sized>(
    params: &StableParams<T>,
    n: usize,
    rng: &mut R,
) -> Result<Vec<T>> {
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    params.validate()?;
    let c = CmsConstants::new(params.alpha, params.beta);
    Ok((0..n)
        .map(|_| params.gamma * c.draw_s0(rng) + params.delta)
        .collect())
}

/// `n` i.i.d. rows drawn from a discrete-spectral-measure multivariate law.
pub fn sample_multivariate<T: Scalar>(model: &SpectralStableModel<T>, n: usize, seed: u64) -> Result<Matrix<T>> {
    sample_multivariate_with(model, n, &mut stream(seed, &[]))
}

pub fn sample_multivariate_with<T: Scalar, R: Rng + ?Sized>(
    model: &SpectralStableModel<T>,
    n: usize,
    rng: &mut R,
) -> Result<Matrix<T>> {
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let d = model.dim();
    let alpha = model.alpha();
    let c = CmsConstants::new(alpha, T::one());
    let locations = model.locations();
    let unit = is_unit_alpha(alpha);
    let two_over_pi = T::lit(2.0) / T::PI();
    // (scale, shift) per mass: Y = Σ (scale_j Z_j + shift_j) s_j + μ⁰
    let coeffs: Vec<(T, T)> = model
        .weights()
        .iter()
        .map(|&w| {
            if w == T::zero() {
                (T::zero(), T::zero())
            } else if unit {
                (w, w * two_over_pi * w.ln())
            } else {
                (w.powf(T::one() / alpha), T::zero())
            }
        })
        .collect();
    let mut out = Matrix::zeros(n, d);
    for i in 0..n {
        let row = out.row_mut(i);
        row.copy_from_slice(model.mu0());
        for ((scale, shift), s) in coeffs.iter().zip(&locations) {
            // draw even for zero weights so streams do not depend on w
            let z = c.draw_s1(rng);
            if *scale == T::zero() {
                continue;
            }
            let a = *scale * z + *shift;
            for (r, &sj) in row.iter_mut().zip(s) {
                *r = *r + a * sj;
            }
        }
    }
    Ok(out)
}
