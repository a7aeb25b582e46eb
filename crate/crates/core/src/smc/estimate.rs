//! Posterior point estimates, kernel-covariance calibration and the end-to-end
//! fitting entry point.

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::rng::{derive_seed, stream};
use crate::scalar::{wrap_angle, Scalar};
use crate::stable_model::{canonicalize_theta, cartesian_to_spherical, ModelKind, PriorSpec};
use crate::summaries::{column_means, project, sorted, ProjectionSet, QuantileSpreads, Summarizer, SummarySpec};

use super::config::{AbcConfig, CovarianceForm};
use super::kernel::GaussianKernel;
use super::mcculloch::{mcculloch_estimate, McCullochTable};
use super::model::{AbcModel, ParamLayout, StableAbcModel};
use super::mutation::KdeMutation;
use super::population::Population;
use super::sampler::{run_sampler, SmcRun};

const TAG_CALIBRATE: u64 = 0xCA11;
const TAG_RUN: u64 = 0x5A3C;
const DEFAULT_PROJECTIONS: usize = 20;

/// Posterior mean; angles use the weighted circular mean in `[0, 2π)` and
/// simplex weights are renormalized.
pub fn mmse<T: Scalar>(pop: &Population<T>, layout: ParamLayout) -> Vec<T> {
    let n = layout.len();
    let mut out = vec![T::zero(); n];
    for p in &pop.particles {
        for (o, &x) in out.iter_mut().zip(&p.theta) {
            *o = *o + p.weight * x;
        }
    }
    if let ParamLayout::Spectral { dim, masses } = layout {
        let total: T = out[..masses].iter().copied().sum();
        if total > T::zero() {
            out[..masses].iter_mut().for_each(|w| *w = *w / total);
        }
        for j in masses..masses + masses * (dim - 1) {
            let (s, c) = pop.particles.iter().fold((T::zero(), T::zero()), |(s, c), p| {
                let (sn, cs) = p.theta[j].sin_cos();
                (s + p.weight * sn, c + p.weight * cs)
            });
            out[j] = wrap_angle(s.atan2(c));
        }
    }
    out
}

/// Sample covariance of `M` summaries simulated at `theta_hat`, plus a ridge
/// `λI` with `λ = 10⁻⁸ ×` mean diagonal (or `10⁻⁸` if that is zero). Fails when
/// more than half the simulated summaries are degenerate.
pub fn calibrate_kernel_covariance<T: Scalar, M: AbcModel<T>>(
    model: &M,
    theta_hat: &[T],
    draws: usize,
    seed: u64,
) -> Result<Matrix<T>> {
    calibrate_kernel_covariance_with(model, theta_hat, draws, CovarianceForm::Full, seed)
}

/// [`calibrate_kernel_covariance`] keeping only the requested part.
pub fn calibrate_kernel_covariance_with<T: Scalar, M: AbcModel<T>>(
    model: &M,
    theta_hat: &[T],
    draws: usize,
    form: CovarianceForm,
    seed: u64,
) -> Result<Matrix<T>> {
    if draws < 2 {
        return Err(invalid("calibration needs at least two draws"));
    }
    if !model.log_prior(theta_hat).is_finite() {
        return Err(invalid("calibration point lies outside the prior support"));
    }
    let summaries: Vec<_> = (0..draws)
        .into_par_iter()
        .map(|i| model.simulate_summary(theta_hat, &mut stream(seed, &[TAG_CALIBRATE, i as u64])))
        .collect();
    let good: Vec<&Vec<T>> = summaries.iter().filter(|s| !s.is_degenerate()).map(|s| &s.values).collect();
    let degenerate = draws - good.len();
    if 2 * degenerate > draws || good.len() < 2 {
        return Err(Error::Calibration { degenerate, total: draws });
    }
    let q = good[0].len();
    let m = T::from_usize_lossy(good.len());
    // centred on the first draw so identical summaries give exactly zero
    let origin = good[0].clone();
    let shifted: Vec<Vec<T>> = good.iter().map(|s| s.iter().zip(&origin).map(|(&v, &o)| v - o).collect()).collect();
    let mut mean = vec![T::zero(); q];
    for s in &shifted {
        for (a, &v) in mean.iter_mut().zip(s.iter()) {
            *a = *a + v;
        }
    }
    mean.iter_mut().for_each(|a| *a = *a / m);
    let mut cov = vec![T::zero(); q * q];
    for s in &shifted {
        for i in 0..q {
            let di = s[i] - mean[i];
            for j in 0..=i {
                cov[i * q + j] = cov[i * q + j] + di * (s[j] - mean[j]);
            }
        }
    }
    let denom = m - T::one();
    for i in 0..q {
        for j in 0..=i {
            let v = if form == CovarianceForm::Diagonal && i != j { T::zero() } else { cov[i * q + j] / denom };
            cov[i * q + j] = v;
            cov[j * q + i] = v;
        }
    }
    let mean_diag = (0..q).map(|i| cov[i * q + i]).sum::<T>() / T::from_usize_lossy(q);
    let ridge = if mean_diag > T::zero() { T::lit(1e-8) * mean_diag } else { T::lit(1e-8) };
    for i in 0..q {
        cov[i * q + i] = cov[i * q + i] + ridge;
    }
    Matrix::from_row_major(q, q, cov)
}

/// Rough parameter estimate used to calibrate the kernel covariance.
///
/// Univariate: McCulloch's quantile estimator for `(α, β, γ)` and the sample
/// mean for `δ`, clamped into the prior. Multivariate: `α` averaged over the
/// per-projection McCulloch estimates, equal weights, masses at the `k`
/// projection directions with the largest interquartile range, and the
/// column means as location. Falls back to the prior centre when the
/// inversion fails.
pub fn point_estimate_for_calibration<T: Scalar>(
    data: &Dataset<T>,
    kind: ModelKind,
    prior: &PriorSpec<T>,
    projections: Option<&ProjectionSet<T>>,
) -> Result<Vec<T>> {
    if data.is_empty() {
        return Err(invalid("no observations"));
    }
    match (data, kind) {
        (Dataset::Univariate(y), ModelKind::Univariate) => {
            let b = &prior.univariate;
            let mean = y.iter().copied().sum::<T>() / T::from_usize_lossy(y.len());
            let inside = |lo: T, hi: T, x: T| {
                // keep strictly inside open ends such as γ > 0
                let eps = (hi - lo) * T::lit(1e-6);
                x.max(lo + eps).min(hi)
            };
            let (a, be, g) = match mcculloch_estimate(&sorted(y)) {
                Some(v) => v,
                None => {
                    let c = b.center();
                    (c[0], c[1], c[2])
                }
            };
            Ok(vec![
                b.alpha.clamp(a),
                b.beta.clamp(be),
                inside(b.gamma.lo, b.gamma.hi, g),
                b.delta.clamp(mean),
            ])
        }
        (Dataset::Multivariate(x), ModelKind::Multivariate { dim, masses }) => {
            if x.cols() != dim {
                return Err(invalid(format!("data has {} columns, model dimension {dim}", x.cols())));
            }
            let owned;
            let proj = match projections {
                Some(p) => p,
                None => {
                    owned = ProjectionSet::generate(dim, DEFAULT_PROJECTIONS.max(masses), 0)?;
                    &owned
                }
            };
            let table = McCullochTable::get();
            let mut alphas = Vec::new();
            let mut spreads: Vec<(T, usize)> = Vec::new();
            for (i, t) in proj.vectors().iter().enumerate() {
                let s = sorted(&project(x, t));
                let sp = QuantileSpreads::from_sorted(&s);
                if let Some((a, _)) = table.invert(sp.v_alpha.as_f64(), sp.v_beta.as_f64()) {
                    alphas.push(a);
                }
                spreads.push((sp.iqr, i));
            }
            let sp = &prior.spectral;
            let alpha = if alphas.is_empty() {
                (sp.alpha.lo + sp.alpha.hi) / T::lit(2.0)
            } else {
                T::lit(alphas.iter().sum::<f64>() / alphas.len() as f64)
            };
            let alpha = alpha.max(sp.alpha.lo.max(T::lit(0.1))).min(sp.alpha.hi.min(T::lit(2.0)));
            spreads.sort_by(|a, b| crate::scalar::total_cmp(&b.0, &a.0));
            let mut theta = vec![T::one() / T::from_usize_lossy(masses); masses];
            for j in 0..masses {
                let (_, i) = spreads[j % spreads.len()];
                theta.extend(cartesian_to_spherical(&proj.vectors()[i])?);
            }
            theta.extend(column_means(x));
            theta.push(alpha);
            canonicalize_theta(dim, masses, &mut theta);
            Ok(theta)
        }
        _ => Err(invalid("data kind does not match the model")),
    }
}

/// Everything besides the sampler settings that defines a fit.
#[derive(Debug, Clone)]
pub struct FitSetup<T> {
    pub kind: ModelKind,
    pub summary: SummarySpec<T>,
    pub prior: PriorSpec<T>,
    /// Calibration point; estimated from the data when absent.
    pub theta_hat: Option<Vec<T>>,
}

#[derive(Debug, Clone)]
pub struct FitResult<T> {
    pub run: SmcRun<T>,
    /// Calibration point of the kernel covariance.
    pub theta_hat: Vec<T>,
    pub sigma: Matrix<T>,
    /// MMSE of the returned population.
    pub estimate: Vec<T>,
}

/// Calibrates the kernel covariance and runs the sampler on `observed`.
pub fn run_smc<T: Scalar>(observed: &Dataset<T>, setup: &FitSetup<T>, config: &AbcConfig<T>, seed: u64) -> Result<FitResult<T>> {
    config.validate()?;
    let summarizer = Summarizer::new(setup.summary.clone(), observed)?;
    let model = StableAbcModel::new(setup.kind, setup.prior, summarizer)?;
    let theta_hat = match &setup.theta_hat {
        Some(t) => {
            let mut t = t.clone();
            if let ModelKind::Multivariate { dim, masses } = setup.kind {
                if t.len() == setup.kind.param_dim() {
                    canonicalize_theta(dim, masses, &mut t);
                }
            }
            t
        }
        None => point_estimate_for_calibration(observed, setup.kind, &setup.prior, setup.summary.projections.as_ref())?,
    };
    let layout = model.layout();
    let sigma = calibrate_kernel_covariance_with(
        &model,
        &theta_hat,
        config.sigma_draws,
        config.sigma_form,
        derive_seed(seed, &[TAG_CALIBRATE]),
    )?;
    let kernel = GaussianKernel::new(model.observed_summary().clone(), &sigma)?;
    let mutation = KdeMutation::new(layout, config.bandwidth_for(layout), config.dirichlet_kappa)?;
    let run = run_sampler(&model, &kernel, &mutation, config, derive_seed(seed, &[TAG_RUN]))?;
    let estimate = mmse(&run.population, layout);
    Ok(FitResult { run, theta_hat, sigma, estimate })
}
