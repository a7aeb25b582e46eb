//! The model interface the sampler needs, and its stable-distribution instance.

use crate::data::Dataset;
use crate::error::{invalid, Result};
use crate::rng::StreamRng;
use crate::scalar::Scalar;
use crate::stable_model::{simulate, ModelKind, PriorSpec};
use crate::summaries::{Summarizer, SummaryVector};

use super::kernel::GaussianKernel;

/// How a parameter vector is laid out, which decides how it is perturbed and
/// averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamLayout {
    /// Unconstrained real coordinates.
    Euclidean(usize),
    /// `[w (k), angles (k(d−1)), μ⁰ (d), α]` with canonically ordered masses.
    Spectral { dim: usize, masses: usize },
}

impl ParamLayout {
    pub fn len(&self) -> usize {
        match *self {
            Self::Euclidean(n) => n,
            Self::Spectral { dim, masses } => masses + masses * (dim - 1) + dim + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl From<ModelKind> for ParamLayout {
    fn from(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Univariate => Self::Euclidean(4),
            ModelKind::Multivariate { dim, masses } => Self::Spectral { dim, masses },
        }
    }
}

/// A simulator with a prior and a summary of the observed data.
pub trait AbcModel<T: Scalar>: Sync {
    fn layout(&self) -> ParamLayout;
    /// `-inf` outside the support.
    fn log_prior(&self, theta: &[T]) -> T;
    fn sample_prior(&self, rng: &mut StreamRng) -> Vec<T>;
    /// Summary of one dataset simulated at `theta`; failures are reported as
    /// degenerate summaries.
    fn simulate_summary(&self, theta: &[T], rng: &mut StreamRng) -> SummaryVector<T>;
    fn observed_summary(&self) -> &SummaryVector<T>;
}

/// Stable model with its prior and a summarizer bound to the observed data.
#[derive(Debug, Clone)]
pub struct StableAbcModel<T> {
    kind: ModelKind,
    prior: PriorSpec<T>,
    summarizer: Summarizer<T>,
}

impl<T: Scalar> StableAbcModel<T> {
    pub fn new(kind: ModelKind, prior: PriorSpec<T>, summarizer: Summarizer<T>) -> Result<Self> {
        kind.validate()?;
        prior.validate()?;
        let dim = match kind {
            ModelKind::Univariate => 1,
            ModelKind::Multivariate { dim, .. } => dim,
        };
        if summarizer.dim() != dim {
            return Err(invalid(format!("model has dimension {dim}, observed data {}", summarizer.dim())));
        }
        Ok(Self { kind, prior, summarizer })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn prior(&self) -> &PriorSpec<T> {
        &self.prior
    }

    pub fn summarizer(&self) -> &Summarizer<T> {
        &self.summarizer
    }

    /// A dataset of the observed size simulated at `theta`.
    pub fn simulate(&self, theta: &[T], rng: &mut StreamRng) -> Result<Dataset<T>> {
        simulate(self.kind, theta, self.summarizer.n(), rng)
    }
}

impl<T: Scalar> AbcModel<T> for StableAbcModel<T> {
    fn layout(&self) -> ParamLayout {
        self.kind.into()
    }

    fn log_prior(&self, theta: &[T]) -> T {
        self.prior.log_density(self.kind, theta)
    }

    fn sample_prior(&self, rng: &mut StreamRng) -> Vec<T> {
        self.prior.sample(self.kind, rng)
    }

    fn simulate_summary(&self, theta: &[T], rng: &mut StreamRng) -> SummaryVector<T> {
        let len = self.summarizer.len();
        let family = self.summarizer.observed().family;
        self.simulate(theta, rng)
            .and_then(|data| self.summarizer.summarize(&data))
            .unwrap_or_else(|_| SummaryVector::degenerate(family, len))
    }

    fn observed_summary(&self) -> &SummaryVector<T> {
        self.summarizer.observed()
    }
}

/// Result of evaluating the ABC target at one parameter.
#[derive(Debug, Clone)]
pub struct TargetEval<T> {
    /// `ln[π(θ) · P⁻¹ Σ_p K_ε(S(y) | S(x_p))]`
    pub log_target: T,
    pub log_prior: T,
    /// Summary of the last simulated dataset, if any.
    pub summary: Option<SummaryVector<T>>,
    pub simulations: u64,
}

/// Unbiased `P`-draw estimate of the ABC target; outside the prior support it
/// returns `-inf` without simulating.
pub fn abc_target_log_density<T: Scalar, M: AbcModel<T> + ?Sized>(
    model: &M,
    kernel: &GaussianKernel<T>,
    theta: &[T],
    eps: T,
    draws: usize,
    rng: &mut StreamRng,
) -> Result<TargetEval<T>> {
    let log_prior = model.log_prior(theta);
    if log_prior == T::neg_infinity() || log_prior.is_nan() {
        return Ok(TargetEval { log_target: T::neg_infinity(), log_prior: T::neg_infinity(), summary: None, simulations: 0 });
    }
    let draws = draws.max(1);
    let mut logs = Vec::with_capacity(draws);
    let mut summary = None;
    for _ in 0..draws {
        let s = model.simulate_summary(theta, rng);
        logs.push(kernel.log_weight(&s, eps)?);
        summary = Some(s);
    }
    let lk = crate::scalar::log_sum_exp(logs.iter().copied()) - T::from_usize_lossy(draws).ln();
    Ok(TargetEval { log_target: log_prior + lk, log_prior, summary, simulations: draws as u64 })
}

/// Unbiased estimate of the unnormalized ABC target density (not logged).
pub fn abc_target_density<T: Scalar, M: AbcModel<T> + ?Sized>(
    model: &M,
    kernel: &GaussianKernel<T>,
    theta: &[T],
    eps: T,
    draws: usize,
    rng: &mut StreamRng,
) -> Result<T> {
    Ok(abc_target_log_density(model, kernel, theta, eps, draws, rng)?.log_target.exp())
}
