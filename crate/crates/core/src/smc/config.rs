//! Sampler configuration.

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

use super::model::ParamLayout;
use super::mutation::{perturbed_len, Bandwidth};

/// The printed tolerance schedule: 1000 down to 100 in steps of 100, to 10 in
/// steps of 1, to 5 in steps of 0.5, to 3 in steps of 0.05, then in steps of
/// 0.01 down to 0.01 (zero itself is never reachable with continuous
/// summaries).
pub fn default_schedule<T: Scalar>() -> Vec<T> {
    // in units of 0.01 to keep the grid exact
    let mut out: Vec<i64> = (1..=10).rev().map(|i| i * 10_000).collect();
    out.extend((10..100).rev().map(|i| i * 100));
    out.extend((10..20).rev().map(|i| i * 50));
    out.extend((60..100).rev().map(|i| i * 5));
    out.extend((1..300).rev());
    out.into_iter().map(|c| T::lit(c as f64 / 100.0)).collect()
}

/// Default mutation variances: `diag(0.25, 0.25, 1, 1)` for `(α, β, γ, δ)`,
/// and unit variance for every angle and location coordinate with 0.25 for `α`
/// in the spectral model.
pub fn default_lambda<T: Scalar>(layout: ParamLayout) -> Vec<T> {
    match layout {
        ParamLayout::Euclidean(4) => vec![T::lit(0.25), T::lit(0.25), T::one(), T::one()],
        ParamLayout::Euclidean(n) => vec![T::one(); n],
        ParamLayout::Spectral { .. } => {
            let mut l = vec![T::one(); perturbed_len(layout)];
            *l.last_mut().expect("nonempty") = T::lit(0.25);
            l
        }
    }
}

/// Which part of the calibrated summary covariance the kernel uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CovarianceForm {
    /// Full sample covariance.
    #[default]
    Full,
    /// Its diagonal only; robust when many summaries are nearly collinear.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbcConfig<T> {
    /// Number of particles `N`.
    pub particles: usize,
    /// Model draws per target-density estimate `P`.
    pub draws: usize,
    /// Decreasing kernel scales `ε_t`.
    pub schedule: Vec<T>,
    /// Mutation bandwidth; `None` uses [`default_lambda`].
    pub bandwidth: Option<Bandwidth<T>>,
    /// Quantile of the pilot weights used as rejection threshold `c_t`.
    pub c_quantile: T,
    /// Stop once the ESS falls below `ess_frac · N` ...
    pub ess_frac: T,
    /// ... for this many consecutive stages.
    pub ess_patience: usize,
    /// Concentration `κ` of the Dirichlet weight proposal.
    pub dirichlet_kappa: T,
    /// Simulations used to calibrate the kernel covariance.
    pub sigma_draws: usize,
    pub sigma_form: CovarianceForm,
    /// Consecutive zero-weight proposals after which a stage is abandoned.
    pub max_zero_attempts: usize,
}

impl<T: Scalar> Default for AbcConfig<T> {
    fn default() -> Self {
        Self {
            particles: 1000,
            draws: 1,
            schedule: default_schedule(),
            bandwidth: None,
            c_quantile: T::lit(0.9),
            ess_frac: T::lit(0.2),
            ess_patience: 1,
            dirichlet_kappa: T::lit(100.0),
            sigma_draws: 1000,
            sigma_form: CovarianceForm::Full,
            max_zero_attempts: 1_000_000,
        }
    }
}

impl<T: Scalar> AbcConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.particles < 2 {
            return Err(invalid("need at least two particles"));
        }
        if self.draws < 1 {
            return Err(invalid("need at least one model draw per particle"));
        }
        if self.schedule.is_empty() {
            return Err(invalid("tolerance schedule is empty"));
        }
        if self.schedule.iter().any(|&e| !(e > T::zero()) || !e.is_finite()) {
            return Err(invalid("tolerances must be positive and finite"));
        }
        if self.schedule.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(invalid("tolerance schedule must be strictly decreasing"));
        }
        if !(self.c_quantile > T::zero() && self.c_quantile < T::one()) {
            return Err(invalid("c_quantile must lie in (0, 1)"));
        }
        if !(self.ess_frac > T::zero() && self.ess_frac < T::one()) {
            return Err(invalid("ess_frac must lie in (0, 1)"));
        }
        if self.ess_patience < 1 {
            return Err(invalid("ess_patience must be at least 1"));
        }
        if !(self.dirichlet_kappa > T::zero()) {
            return Err(invalid("dirichlet_kappa must be positive"));
        }
        if self.sigma_draws < 2 {
            return Err(invalid("sigma_draws must be at least 2"));
        }
        if self.max_zero_attempts < 1 {
            return Err(invalid("max_zero_attempts must be at least 1"));
        }
        Ok(())
    }

    pub fn bandwidth_for(&self, layout: ParamLayout) -> Bandwidth<T> {
        self.bandwidth.clone().unwrap_or_else(|| Bandwidth::Fixed(default_lambda(layout)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_shape() {
        let s = default_schedule::<f64>();
        assert_eq!(s[0], 1000.0);
        assert_eq!(s[9], 100.0);
        assert_eq!(s[10], 99.0);
        assert_eq!(s[99], 10.0);
        assert_eq!(s[100], 9.5);
        assert_eq!(s[109], 5.0);
        assert_eq!(s[110], 4.95);
        assert_eq!(s[149], 3.0);
        assert_eq!(s[150], 2.99);
        assert_eq!(*s.last().unwrap(), 0.01);
        assert_eq!(s.len(), 449);
        assert!(s.windows(2).all(|w| w[1] < w[0]));
        assert!(AbcConfig::<f64>::default().validate().is_ok());
    }
}
