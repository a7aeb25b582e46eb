//! Weighted particle populations, effective sample size and resampling.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::scalar::{log_sum_exp, Scalar};
use crate::summaries::SummaryVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Particle<T> {
    pub theta: Vec<T>,
    /// Normalized importance weight.
    pub weight: T,
    /// Summary of the dataset simulated when the particle was accepted.
    pub summary: Option<SummaryVector<T>>,
}

/// Per-stage diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StageTrace<T> {
    pub stage: usize,
    pub epsilon: T,
    pub ess: T,
    /// Accepted particles over proposals evaluated in the rejection pass.
    pub acceptance_rate: T,
    /// Model simulations spent in the stage, pilot pass included.
    pub simulations: u64,
    /// Natural log of the rejection threshold `c_t` (`-inf` when unused).
    pub log_threshold: T,
    pub mmse: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population<T> {
    pub particles: Vec<Particle<T>>,
    pub epsilon: T,
    pub stage: usize,
    pub ess: T,
}

impl<T: Scalar> Population<T> {
    /// Builds a population from unnormalized log weights. Fails when every
    /// weight is zero.
    pub fn from_log_weights(
        thetas: Vec<Vec<T>>,
        log_weights: &[T],
        summaries: Vec<Option<SummaryVector<T>>>,
        epsilon: T,
        stage: usize,
    ) -> Result<Self> {
        let w = normalize_log_weights(log_weights).ok_or(Error::Collapse { stage, epsilon: epsilon.as_f64() })?;
        let particles: Vec<Particle<T>> = thetas
            .into_iter()
            .zip(w)
            .zip(summaries)
            .map(|((theta, weight), summary)| Particle { theta, weight, summary })
            .collect();
        let ess = ess(&particles.iter().map(|p| p.weight).collect::<Vec<_>>());
        Ok(Self { particles, epsilon, stage, ess })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn weights(&self) -> Vec<T> {
        self.particles.iter().map(|p| p.weight).collect()
    }

    pub fn thetas(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.particles.iter().map(|p| p.theta.as_slice())
    }

    /// Multinomial resampling to the same size; all weights become `1/N`.
    pub fn resample(&self, rng: &mut StreamRng) -> Result<Self> {
        let idx = resample_indices(&self.weights(), self.len(), rng)
            .ok_or(Error::Collapse { stage: self.stage, epsilon: self.epsilon.as_f64() })?;
        let w = T::one() / T::from_usize_lossy(self.len());
        let particles = idx
            .into_iter()
            .map(|i| Particle { weight: w, ..self.particles[i].clone() })
            .collect();
        Ok(Self { particles, epsilon: self.epsilon, stage: self.stage, ess: T::from_usize_lossy(self.len()) })
    }
}

/// `1 / Σ W_i²` for normalized weights.
pub fn ess<T: Scalar>(weights: &[T]) -> T {
    let s: T = weights.iter().map(|&w| w * w).sum();
    T::one() / s
}

/// Normalizes log weights; non-finite (NaN) entries count as zero weight.
/// Returns `None` when all weights are zero.
pub fn normalize_log_weights<T: Scalar>(log_weights: &[T]) -> Option<Vec<T>> {
    let clean: Vec<T> = log_weights
        .iter()
        .map(|&l| if l.is_nan() || l == T::infinity() { T::neg_infinity() } else { l })
        .collect();
    let total = log_sum_exp(clean.iter().copied());
    if !total.is_finite() {
        return None;
    }
    Some(clean.iter().map(|&l| (l - total).exp()).collect())
}

/// `n` multinomial draws of indices with probabilities proportional to
/// `weights`, via sorted uniforms (linear time, same law as independent draws).
pub fn resample_indices<T: Scalar>(weights: &[T], n: usize, rng: &mut StreamRng) -> Option<Vec<usize>> {
    let total: f64 = weights.iter().map(|w| w.as_f64().max(0.0)).sum();
    if !(total > 0.0) || !total.is_finite() {
        return None;
    }
    // sorted uniforms through normalized exponential spacings
    let mut spacings: Vec<f64> = (0..=n).map(|_| -(-rng.random::<f64>()).ln_1p()).collect();
    let norm: f64 = spacings.iter().sum();
    let mut out = Vec::with_capacity(n);
    let mut cum = 0.0;
    let mut u = 0.0;
    let mut i = 0;
    for s in spacings.drain(..n) {
        u += s / norm;
        let target = u * total;
        while i + 1 < weights.len() && cum + weights[i].as_f64().max(0.0) < target {
            cum += weights[i].as_f64().max(0.0);
            i += 1;
        }
        out.push(i);
    }
    Some(out)
}
