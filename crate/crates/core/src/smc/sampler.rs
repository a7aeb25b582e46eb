//! Partial-rejection-control SMC.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::stream;
use crate::scalar::Scalar;
use crate::summaries::{quantile_sorted, SummaryVector};

use super::config::AbcConfig;
use super::estimate::mmse;
use super::kernel::GaussianKernel;
use super::model::{abc_target_log_density, AbcModel};
use super::mutation::{MixtureKernel, Mutation};
use super::population::{Population, StageTrace};

const TAG_INIT: u64 = 0;
const TAG_PILOT: u64 = 1;
const TAG_PRC: u64 = 2;
const TAG_RESAMPLE: u64 = 3;

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    /// The ESS fell below the threshold at this stage (for the configured
    /// number of consecutive stages).
    EssBelowThreshold { stage: usize },
    ScheduleExhausted,
    /// A slot saw too many consecutive zero-weight proposals.
    StageAbort { stage: usize, slot: usize, attempts: usize },
}

#[derive(Debug, Clone)]
pub struct SmcRun<T> {
    /// Last population whose ESS stayed above the threshold.
    pub population: Population<T>,
    /// One entry per completed stage, including the sub-threshold ones.
    pub trace: Vec<StageTrace<T>>,
    pub termination: Termination,
    pub simulations: u64,
}

#[derive(Debug, Clone)]
pub struct StageOutcome<T> {
    pub population: Population<T>,
    pub trace: StageTrace<T>,
}

struct Candidate<T> {
    theta: Vec<T>,
    log_weight: T,
    summary: Option<SummaryVector<T>>,
    simulations: u64,
}

fn evaluate<T: Scalar, M: AbcModel<T>, K: MixtureKernel<T>>(
    model: &M,
    kernel: &GaussianKernel<T>,
    mixture: &K,
    theta: Vec<T>,
    eps: T,
    draws: usize,
    rng: &mut crate::rng::StreamRng,
) -> Result<Candidate<T>> {
    let eval = abc_target_log_density(model, kernel, &theta, eps, draws, rng)?;
    let log_weight = if eval.log_target == T::neg_infinity() {
        T::neg_infinity()
    } else {
        let lw = eval.log_target - mixture.log_density(&theta);
        if lw.is_nan() { T::neg_infinity() } else { lw }
    };
    Ok(Candidate { theta, log_weight, summary: eval.summary, simulations: eval.simulations })
}

/// Log of the `q`-quantile of `exp(log_weights)`, `-inf` if all are zero.
fn log_quantile<T: Scalar>(log_weights: &[T], q: T) -> T {
    let max = log_weights.iter().copied().filter(|l| l.is_finite()).fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    let mut scaled: Vec<T> = log_weights.iter().map(|&l| (l - max).exp()).collect();
    scaled.sort_unstable_by(crate::scalar::total_cmp);
    let c = quantile_sorted(&scaled, q);
    if c > T::zero() { c.ln() + max } else { T::neg_infinity() }
}

/// Initial population: `N` prior draws weighted by the kernel factor of the
/// ABC target (the prior cancels).
pub fn initialize<T: Scalar, M: AbcModel<T>>(
    model: &M,
    kernel: &GaussianKernel<T>,
    config: &AbcConfig<T>,
    eps: T,
    seed: u64,
) -> Result<StageOutcome<T>> {
    let results: Vec<Result<(Vec<T>, T, Option<SummaryVector<T>>)>> = (0..config.particles)
        .into_par_iter()
        .map(|slot| {
            let mut rng = stream(seed, &[0, slot as u64, TAG_INIT]);
            let theta = model.sample_prior(&mut rng);
            let eval = abc_target_log_density(model, kernel, &theta, eps, config.draws, &mut rng)?;
            Ok((theta, eval.log_target - eval.log_prior, eval.summary))
        })
        .collect();
    let mut thetas = Vec::with_capacity(config.particles);
    let mut logs = Vec::with_capacity(config.particles);
    let mut summaries = Vec::with_capacity(config.particles);
    for r in results {
        let (t, l, s) = r?;
        thetas.push(t);
        logs.push(if l.is_nan() { T::neg_infinity() } else { l });
        summaries.push(s);
    }
    let population = Population::from_log_weights(thetas, &logs, summaries, eps, 0)?;
    let trace = StageTrace {
        stage: 0,
        epsilon: eps,
        ess: population.ess,
        acceptance_rate: T::one(),
        simulations: (config.particles * config.draws) as u64,
        log_threshold: T::neg_infinity(),
        mmse: mmse(&population, model.layout()),
    };
    Ok(StageOutcome { population, trace })
}

/// One mutation/correction stage at tolerance `eps` from a resampled
/// population.
///
/// A pilot pass of `N` proposals fixes `c_t` as the configured quantile of
/// their weights; each slot then takes its pilot draw as first candidate and
/// keeps proposing until one is accepted with probability `min(1, W/c_t)`,
/// storing `max(W, c_t)`.
pub fn prc_stage<T: Scalar, M: AbcModel<T>, U: Mutation<T>>(
    pop: &Population<T>,
    eps: T,
    stage: usize,
    config: &AbcConfig<T>,
    model: &M,
    kernel: &GaussianKernel<T>,
    mutation: &U,
    seed: u64,
) -> Result<StageOutcome<T>> {
    let n = config.particles;
    let mixture = mutation.mixture(pop)?;
    let st = stage as u64;
    let pilots: Vec<Candidate<T>> = (0..n)
        .into_par_iter()
        .map(|slot| {
            let mut rng = stream(seed, &[st, slot as u64, TAG_PILOT]);
            let theta = mixture.propose(&mut rng);
            evaluate(model, kernel, &mixture, theta, eps, config.draws, &mut rng)
        })
        .collect::<Result<_>>()?;
    let pilot_logs: Vec<T> = pilots.iter().map(|c| c.log_weight).collect();
    let log_c = log_quantile(&pilot_logs, config.c_quantile);
    let pilot_sims: u64 = pilots.iter().map(|c| c.simulations).sum();

    let filled: Vec<(Candidate<T>, u64, u64)> = pilots
        .into_par_iter()
        .enumerate()
        .map(|(slot, first)| {
            let mut rng = stream(seed, &[st, slot as u64, TAG_PRC]);
            let mut cand = first;
            let mut tried = 0u64;
            let mut sims = 0u64;
            let mut zeros = 0usize;
            loop {
                tried += 1;
                if cand.log_weight > T::neg_infinity() {
                    zeros = 0;
                    let log_p = (cand.log_weight - log_c).min(T::zero());
                    let accept = log_p >= T::zero() || T::lit(rng.random::<f64>()).ln() < log_p;
                    if accept {
                        // W / p = max(W, c)
                        cand.log_weight = cand.log_weight.max(log_c);
                        return Ok((cand, tried, sims));
                    }
                } else {
                    zeros += 1;
                    if zeros >= config.max_zero_attempts {
                        return Err(Error::StageAbort { stage, slot, attempts: zeros, epsilon: eps.as_f64() });
                    }
                }
                let theta = mixture.propose(&mut rng);
                cand = evaluate(model, kernel, &mixture, theta, eps, config.draws, &mut rng)?;
                sims += cand.simulations;
            }
        })
        .collect::<Result<_>>()?;

    let tried: u64 = filled.iter().map(|f| f.1).sum();
    let sims: u64 = pilot_sims + filled.iter().map(|f| f.2).sum::<u64>();
    let mut thetas = Vec::with_capacity(n);
    let mut logs = Vec::with_capacity(n);
    let mut summaries = Vec::with_capacity(n);
    for (c, _, _) in filled {
        thetas.push(c.theta);
        logs.push(c.log_weight);
        summaries.push(c.summary);
    }
    let population = Population::from_log_weights(thetas, &logs, summaries, eps, stage)?;
    let trace = StageTrace {
        stage,
        epsilon: eps,
        ess: population.ess,
        acceptance_rate: T::from_usize_lossy(n) / T::lit(tried as f64),
        simulations: sims,
        log_threshold: log_c,
        mmse: mmse(&population, model.layout()),
    };
    Ok(StageOutcome { population, trace })
}

/// Runs the sampler through the schedule until the ESS rule, the end of the
/// schedule, or a stage abort stops it. Deterministic in `seed`.
pub fn run_sampler<T: Scalar, M: AbcModel<T>, U: Mutation<T>>(
    model: &M,
    kernel: &GaussianKernel<T>,
    mutation: &U,
    config: &AbcConfig<T>,
    seed: u64,
) -> Result<SmcRun<T>> {
    config.validate()?;
    let threshold = config.ess_frac * T::from_usize_lossy(config.particles);
    let first = initialize(model, kernel, config, config.schedule[0], seed)?;
    let mut simulations = first.trace.simulations;
    let mut trace = vec![first.trace];
    let mut current = first.population;
    let mut last_good = current.clone();
    let mut below = 0usize;
    if current.ess < threshold {
        below = 1;
        if config.ess_patience <= 1 {
            return Ok(SmcRun { population: current, trace, termination: Termination::EssBelowThreshold { stage: 0 }, simulations });
        }
    }
    for (stage, &eps) in config.schedule.iter().enumerate().skip(1) {
        let mut rng = stream(seed, &[stage as u64, u64::MAX, TAG_RESAMPLE]);
        let resampled = current.resample(&mut rng)?;
        let outcome = match prc_stage(&resampled, eps, stage, config, model, kernel, mutation, seed) {
            Ok(o) => o,
            Err(Error::StageAbort { stage, slot, attempts, .. }) => {
                return Ok(SmcRun {
                    population: last_good,
                    trace,
                    termination: Termination::StageAbort { stage, slot, attempts },
                    simulations,
                });
            }
            Err(e) => return Err(e),
        };
        simulations += outcome.trace.simulations;
        trace.push(outcome.trace);
        current = outcome.population;
        if current.ess < threshold {
            below += 1;
            if below >= config.ess_patience {
                return Ok(SmcRun {
                    population: last_good,
                    trace,
                    termination: Termination::EssBelowThreshold { stage },
                    simulations,
                });
            }
        } else {
            below = 0;
            last_good = current.clone();
        }
    }
    Ok(SmcRun { population: last_good, trace, termination: Termination::ScheduleExhausted, simulations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_in_log_domain() {
        let logs: Vec<f64> = [1.0f64, 2.0, 3.0, 4.0, 5.0].iter().map(|x| x.ln() + 700.0).collect();
        let lq = log_quantile(&logs, 0.5);
        assert!((lq - (3.0f64.ln() + 700.0)).abs() < 1e-12);
        assert_eq!(log_quantile(&[f64::NEG_INFINITY; 3], 0.9), f64::NEG_INFINITY);
    }
}
