//! Flat key-value study configuration (TOML) with command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stable_abc::smc::{default_lambda, default_schedule};
use stable_abc::stable_model::{Interval, SpectralPrior, UniformBox};
use stable_abc::summaries::{default_grid, default_points, SummaryOptions, DEFAULT_XI};
use stable_abc::{AbcConfig, BaseFamily, Bandwidth, CovarianceForm, ModelKind, ParamLayout, PriorSpec, ProjectionSet, SummarySpec};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    #[default]
    FitUnivariate,
    FitMultivariate,
    Summarize,
    Returns,
    SpectralCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BandwidthMode {
    /// Fixed diagonal `lambda`.
    #[default]
    Fixed,
    /// `bandwidth_scale ×` the weighted population variance per coordinate.
    Scaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaForm {
    #[default]
    Full,
    Diagonal,
}

/// Every knob of a replicate study. Field names are the config-file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub mode: Mode,

    /// CSV input; synthetic data from the `truth_*` keys when absent.
    pub data: Option<PathBuf>,
    /// Columns to use (all when empty).
    pub columns: Vec<String>,
    /// Convert price columns to log returns before fitting.
    pub returns: bool,
    /// Multiplier applied to log returns (100 gives percent returns).
    pub returns_scale: f64,
    pub n: usize,
    pub data_seed: u64,

    pub truth_alpha: Option<f64>,
    pub truth_beta: Option<f64>,
    pub truth_gamma: Option<f64>,
    pub truth_delta: Option<f64>,
    pub truth_weights: Vec<f64>,
    pub truth_angles: Vec<Vec<f64>>,
    pub truth_mu0: Vec<f64>,
    /// Number of spectral masses fitted (defaults to the truth's).
    pub masses: Option<usize>,
    /// Multivariate fits on data: first fit each column univariately with S1,
    /// then fit the two columns whose `α̂` are closest.
    pub select_pair: bool,

    pub family: String,
    pub xi: f64,
    pub press_points: Option<[f64; 4]>,
    pub ecf_grid: Option<Vec<f64>>,
    pub projections: usize,
    /// Seed for the random projection directions (defaults to `data_seed`).
    pub projection_seed: Option<u64>,

    pub prior_alpha: [f64; 2],
    pub prior_beta: [f64; 2],
    pub prior_gamma: [f64; 2],
    pub prior_delta: [f64; 2],
    pub prior_concentration: f64,
    pub prior_location_mean: f64,
    pub prior_location_precision: f64,
    pub prior_spectral_alpha: [f64; 2],

    pub particles: usize,
    pub draws: usize,
    pub schedule: Option<Vec<f64>>,
    pub bandwidth: BandwidthMode,
    pub lambda: Option<Vec<f64>>,
    pub bandwidth_scale: f64,
    pub bandwidth_floor: f64,
    pub c_quantile: f64,
    pub ess_frac: f64,
    pub ess_patience: usize,
    pub dirichlet_kappa: f64,
    pub sigma_draws: usize,
    pub sigma_form: SigmaForm,
    /// Kernel-covariance calibration point (estimated from the data when absent).
    pub theta_hat: Option<Vec<f64>>,

    pub replicates: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads (0 = all cores); `STABLE_ABC_WORKERS` overrides it.
    pub workers: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        let abc = AbcConfig::default();
        let prior = PriorSpec::default();
        let iv = |i: Interval<f64>| [i.lo, i.hi];
        Self {
            mode: Mode::FitUnivariate,
            data: None,
            columns: Vec::new(),
            returns: false,
            returns_scale: 1.0,
            n: 200,
            data_seed: 1,
            truth_alpha: None,
            truth_beta: None,
            truth_gamma: None,
            truth_delta: None,
            truth_weights: Vec::new(),
            truth_angles: Vec::new(),
            truth_mu0: Vec::new(),
            masses: None,
            select_pair: false,
            family: "s1".into(),
            xi: DEFAULT_XI,
            press_points: None,
            ecf_grid: None,
            projections: 20,
            projection_seed: None,
            prior_alpha: iv(prior.univariate.alpha),
            prior_beta: iv(prior.univariate.beta),
            prior_gamma: iv(prior.univariate.gamma),
            prior_delta: iv(prior.univariate.delta),
            prior_concentration: prior.spectral.concentration,
            prior_location_mean: prior.spectral.location_mean,
            prior_location_precision: prior.spectral.location_precision,
            prior_spectral_alpha: iv(prior.spectral.alpha),
            particles: abc.particles,
            draws: abc.draws,
            schedule: None,
            bandwidth: BandwidthMode::Fixed,
            lambda: None,
            bandwidth_scale: 2.0,
            bandwidth_floor: 1e-8,
            c_quantile: abc.c_quantile,
            ess_frac: abc.ess_frac,
            ess_patience: abc.ess_patience,
            dirichlet_kappa: abc.dirichlet_kappa,
            sigma_draws: abc.sigma_draws,
            sigma_form: SigmaForm::Full,
            theta_hat: None,
            replicates: 10,
            seed: 1,
            output_dir: PathBuf::from("out"),
            workers: 0,
        }
    }
}

/// Parses `value` as a TOML value, falling back to a bare string.
fn parse_value(value: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_owned()))
}

impl StudyConfig {
    /// Parses a config file body and applies `key=value` overrides on top.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| HarnessError::Usage(format!("config: {e}")))?;
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| HarnessError::Usage(format!("override {o:?} is not key=value")))?;
            table.insert(k.trim().to_owned(), parse_value(v.trim()));
        }
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Usage(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative `data` paths resolve against its directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Usage(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text, overrides)?;
        if let (Some(d), Some(base)) = (&cfg.data, path.parent()) {
            if d.is_relative() {
                cfg.data = Some(base.join(d));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    pub fn base_family(&self) -> Result<BaseFamily> {
        self.family.parse().map_err(|_| HarnessError::Usage(format!("unknown summary family {:?}", self.family)))
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(HarnessError::Usage(m));
        if self.replicates < 1 {
            return usage("replicates must be at least 1".into());
        }
        self.base_family()?;
        self.prior().validate()?;
        self.abc_config(self.layout_hint())?.validate()?;
        if let Some(t) = self.univariate_truth() {
            if !self.prior().log_density(ModelKind::Univariate, &t).is_finite() {
                return usage("synthetic truth lies outside the prior support".into());
            }
        }
        if self.mode == Mode::FitMultivariate && self.data.is_none() && self.truth_weights.is_empty() {
            return usage("multivariate fit needs data or truth_weights/truth_angles".into());
        }
        Ok(())
    }

    fn layout_hint(&self) -> ParamLayout {
        match self.mode {
            Mode::FitMultivariate => {
                let dim = self.truth_angles.first().map_or(self.columns.len().max(2), |a| a.len() + 1);
                ParamLayout::Spectral { dim, masses: self.masses.unwrap_or(self.truth_weights.len()).max(1) }
            }
            _ => ParamLayout::Euclidean(4),
        }
    }

    /// Univariate truth `(α, β, γ, δ)` when all four keys are set.
    pub fn univariate_truth(&self) -> Option<Vec<f64>> {
        Some(vec![self.truth_alpha?, self.truth_beta?, self.truth_gamma?, self.truth_delta?])
    }

    pub fn prior(&self) -> PriorSpec {
        let iv = |a: [f64; 2]| Interval::new(a[0], a[1]);
        PriorSpec {
            univariate: UniformBox {
                alpha: iv(self.prior_alpha),
                beta: iv(self.prior_beta),
                gamma: iv(self.prior_gamma),
                delta: iv(self.prior_delta),
            },
            spectral: SpectralPrior {
                concentration: self.prior_concentration,
                location_mean: self.prior_location_mean,
                location_precision: self.prior_location_precision,
                alpha: iv(self.prior_spectral_alpha),
            },
        }
    }

    pub fn summary_options(&self) -> SummaryOptions<f64> {
        SummaryOptions {
            xi: self.xi,
            press_points: self.press_points.unwrap_or_else(default_points),
            ecf_grid: self.ecf_grid.clone().unwrap_or_else(default_grid),
        }
    }

    /// Summary spec for data of dimension `dim`; projections are drawn from
    /// `projection_seed` (or `data_seed`) when `dim > 1`.
    pub fn summary_spec(&self, dim: usize) -> Result<SummarySpec> {
        let family = self.base_family()?;
        let mut spec = if dim > 1 {
            let seed = self.projection_seed.unwrap_or(self.data_seed);
            SummarySpec::projected(family, ProjectionSet::generate(dim, self.projections, seed)?)
        } else {
            SummarySpec::univariate(family)
        };
        spec.options = self.summary_options();
        Ok(spec)
    }

    pub fn abc_config(&self, layout: ParamLayout) -> Result<AbcConfig> {
        let bandwidth = match self.bandwidth {
            BandwidthMode::Fixed => Bandwidth::Fixed(self.lambda.clone().unwrap_or_else(|| default_lambda(layout))),
            BandwidthMode::Scaled => Bandwidth::PopulationScaled { scale: self.bandwidth_scale, floor: self.bandwidth_floor },
        };
        Ok(AbcConfig {
            particles: self.particles,
            draws: self.draws,
            schedule: self.schedule.clone().unwrap_or_else(default_schedule),
            bandwidth: Some(bandwidth),
            c_quantile: self.c_quantile,
            ess_frac: self.ess_frac,
            ess_patience: self.ess_patience,
            dirichlet_kappa: self.dirichlet_kappa,
            sigma_draws: self.sigma_draws,
            sigma_form: match self.sigma_form {
                SigmaForm::Full => CovarianceForm::Full,
                SigmaForm::Diagonal => CovarianceForm::Diagonal,
            },
            ..AbcConfig::default()
        })
    }

    /// Worker-pool size: `STABLE_ABC_WORKERS` if set, else `workers`, else all cores.
    pub fn worker_count(&self) -> usize {
        std::env::var("STABLE_ABC_WORKERS")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&w: &usize| w > 0)
            .unwrap_or(self.workers)
    }
}
