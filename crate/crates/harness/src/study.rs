//! Replicate studies: data preparation, parallel runs, aggregation and output.

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use stable_abc::rng::derive_seed;
use stable_abc::stable_model::{sample_multivariate, sample_univariate};
use stable_abc::{
    run_smc, Dataset, FitSetup, Matrix, ModelKind, ParamLayout, Population, SpectralStableModel, StableParams, StageTrace, Termination,
};

use crate::config::{Mode, StudyConfig};
use crate::curve::{angle_grid, average_curves, spectral_mass_curve, MassCurve};
use crate::error::{io_err, HarnessError, Result};
use crate::io::{fmt_num, fmt_opt, load_series_csv, log_returns, write_csv, write_text, SeriesTable};

/// Points on the `[0, 2π]` grid of emitted spectral-mass curves.
pub const CURVE_POINTS: usize = 629;

/// Observed data ready for fitting.
#[derive(Debug, Clone)]
pub struct Observed {
    pub data: Dataset,
    pub kind: ModelKind,
    /// Data-generating parameter vector for synthetic data (canonical order).
    pub truth: Option<Vec<f64>>,
    pub series: Vec<String>,
}

/// Parameter labels in parameter-vector order.
pub fn param_names(kind: ModelKind) -> Vec<String> {
    match kind {
        ModelKind::Univariate => ["alpha", "beta", "gamma", "delta"].map(String::from).to_vec(),
        ModelKind::Multivariate { dim, masses } => {
            let mut n: Vec<String> = (1..=masses).map(|j| format!("w{j}")).collect();
            for j in 1..=masses {
                n.extend((1..dim).map(|i| format!("phi{j}_{i}")));
            }
            n.extend((1..=dim).map(|i| format!("mu{i}")));
            n.push("alpha".into());
            n
        }
    }
}

/// Indices of angle coordinates.
pub fn angle_indices(kind: ModelKind) -> std::ops::Range<usize> {
    match kind {
        ModelKind::Univariate => 0..0,
        ModelKind::Multivariate { dim, masses } => masses..masses + masses * (dim - 1),
    }
}

fn layout_of(kind: ModelKind) -> ParamLayout {
    match kind {
        ModelKind::Univariate => ParamLayout::Euclidean(4),
        ModelKind::Multivariate { dim, masses } => ParamLayout::Spectral { dim, masses },
    }
}

/// Applies the `columns`, `returns` and `returns_scale` settings to a table.
pub fn prepare_table(cfg: &StudyConfig, table: &SeriesTable) -> Result<SeriesTable> {
    let mut t = if cfg.columns.is_empty() { table.clone() } else { table.select(&cfg.columns)? };
    if cfg.returns {
        for c in &mut t.columns {
            *c = log_returns(c)?.into_iter().map(|r| r * cfg.returns_scale).collect();
        }
    }
    Ok(t)
}

pub(crate) fn observed_from_table(cfg: &StudyConfig, t: SeriesTable) -> Result<Observed> {
    match cfg.mode {
        Mode::FitUnivariate => {
            if t.columns.len() != 1 {
                return Err(HarnessError::Usage(format!("univariate fit needs one column, got {}", t.columns.len())));
            }
            Ok(Observed { data: Dataset::Univariate(t.columns[0].clone()), kind: ModelKind::Univariate, truth: None, series: t.names })
        }
        Mode::FitMultivariate => {
            let dim = t.columns.len();
            if dim < 2 {
                return Err(HarnessError::Usage("multivariate fit needs at least two columns".into()));
            }
            let masses = cfg.masses.ok_or_else(|| HarnessError::Usage("set `masses` for a multivariate fit on data".into()))?;
            let x = Matrix::from_row_major(t.rows(), dim, t.row_major())?;
            Ok(Observed { data: Dataset::Multivariate(x), kind: ModelKind::Multivariate { dim, masses }, truth: None, series: t.names })
        }
        m => Err(HarnessError::Usage(format!("mode {m:?} is not a fitting mode"))),
    }
}

/// Synthetic truth model described by the `truth_*` keys.
pub fn truth_model(cfg: &StudyConfig) -> Result<SpectralStableModel> {
    let alpha = cfg.truth_alpha.ok_or_else(|| HarnessError::Usage("truth_alpha is required".into()))?;
    let dim = cfg.truth_angles.first().map_or(2, |a| a.len() + 1);
    let mu0 = if cfg.truth_mu0.is_empty() { vec![0.0; dim] } else { cfg.truth_mu0.clone() };
    Ok(SpectralStableModel::new(alpha, cfg.truth_weights.clone(), cfg.truth_angles.clone(), mu0)?)
}

/// Loads or simulates the observed data for a fitting study.
pub fn observed_data(cfg: &StudyConfig) -> Result<Observed> {
    if let Some(path) = &cfg.data {
        let table = load_series_csv(path)?;
        return observed_from_table(cfg, prepare_table(cfg, &table)?);
    }
    match cfg.mode {
        Mode::FitUnivariate => {
            let t = cfg.univariate_truth().ok_or_else(|| HarnessError::Usage("set `data` or all four truth_alpha/beta/gamma/delta keys".into()))?;
            let p = StableParams::from_slice(&t)?;
            let y = sample_univariate(&p, cfg.n, cfg.data_seed)?;
            Ok(Observed { data: Dataset::Univariate(y), kind: ModelKind::Univariate, truth: Some(t), series: vec!["y".into()] })
        }
        Mode::FitMultivariate => {
            let model = truth_model(cfg)?;
            let x = sample_multivariate(&model, cfg.n, cfg.data_seed)?;
            let masses = cfg.masses.unwrap_or(model.masses());
            let truth = (masses == model.masses()).then(|| model.to_theta());
            let series = (1..=model.dim()).map(|i| format!("x{i}")).collect();
            Ok(Observed { data: Dataset::Multivariate(x), kind: ModelKind::Multivariate { dim: model.dim(), masses }, truth, series })
        }
        m => Err(HarnessError::Usage(format!("mode {m:?} is not a fitting mode"))),
    }
}

/// One successful replicate.
#[derive(Debug, Clone)]
pub struct ReplicateFit {
    pub estimate: Vec<f64>,
    pub theta_hat: Vec<f64>,
    pub trace: Vec<StageTrace>,
    pub termination: Termination,
    /// Simulations inside the sampler (equals the sum over the trace).
    pub simulations: u64,
    pub calibration_simulations: u64,
    pub population: Population,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ReplicateResult {
    pub index: usize,
    pub seed: u64,
    pub outcome: std::result::Result<ReplicateFit, String>,
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub kind: ModelKind,
    pub names: Vec<String>,
    pub series: Vec<String>,
    pub truth: Option<Vec<f64>>,
    pub replicates: Vec<ReplicateResult>,
    /// Cross-replicate means (circular for angles).
    pub mean: Vec<f64>,
    /// Standard errors `sd / √R`; `None` with fewer than two replicates.
    pub se: Vec<Option<f64>>,
    pub simulations: u64,
    pub calibration_simulations: u64,
    pub wall_seconds: f64,
}

impl StudyResult {
    pub fn successes(&self) -> impl Iterator<Item = &ReplicateFit> {
        self.replicates.iter().filter_map(|r| r.outcome.as_ref().ok())
    }

    pub fn param(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Per-replicate spectral-mass curves (bivariate fits only).
    pub fn curves(&self) -> Vec<MassCurve> {
        let grid = angle_grid(CURVE_POINTS);
        self.successes().filter_map(|f| spectral_mass_curve(&f.population, layout_of(self.kind), &grid).ok()).collect()
    }
}

fn wrap_pi(x: f64) -> f64 {
    (x + PI).rem_euclid(TAU) - PI
}

/// Means and standard errors; angles use the circular mean and wrapped
/// deviations from it.
pub fn aggregate(estimates: &[&[f64]], angles: std::ops::Range<usize>, width: usize) -> (Vec<f64>, Vec<Option<f64>>) {
    let r = estimates.len();
    let mut mean = vec![f64::NAN; width];
    let mut se = vec![None; width];
    if r == 0 {
        return (mean, se);
    }
    for i in 0..width {
        let xs: Vec<f64> = estimates.iter().map(|e| e[i]).collect();
        let (m, dev): (f64, Vec<f64>) = if angles.contains(&i) {
            let (s, c) = xs.iter().fold((0.0, 0.0), |(s, c), x| (s + x.sin(), c + x.cos()));
            let m = s.atan2(c).rem_euclid(TAU);
            (m, xs.iter().map(|x| wrap_pi(x - m)).collect())
        } else {
            let m = xs.iter().sum::<f64>() / r as f64;
            (m, xs.iter().map(|x| x - m).collect())
        };
        mean[i] = m;
        if r > 1 {
            let var = dev.iter().map(|d| d * d).sum::<f64>() / (r - 1) as f64;
            se[i] = Some((var / r as f64).sqrt());
        }
    }
    (mean, se)
}

fn fit_replicate(observed: &Observed, setup: &FitSetup, cfg: &StudyConfig, seed: u64) -> std::result::Result<ReplicateFit, String> {
    let t0 = Instant::now();
    let abc = cfg.abc_config(layout_of(observed.kind)).map_err(|e| e.to_string())?;
    let fit = run_smc(&observed.data, setup, &abc, seed).map_err(|e| e.to_string())?;
    Ok(ReplicateFit {
        estimate: fit.estimate,
        theta_hat: fit.theta_hat,
        trace: fit.run.trace,
        termination: fit.run.termination,
        simulations: fit.run.simulations,
        calibration_simulations: abc.sigma_draws as u64,
        population: fit.run.population,
        wall_seconds: t0.elapsed().as_secs_f64(),
    })
}

/// Runs `cfg.replicates` independent fits on the same observed data with
/// seeds derived from the master seed, in a bounded worker pool.
pub fn run_replicates(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let observed = observed_data(cfg)?;
    run_replicates_on(cfg, observed)
}

/// [`run_replicates`] on already prepared data.
pub fn run_replicates_on(cfg: &StudyConfig, observed: Observed) -> Result<StudyResult> {
    let t0 = Instant::now();
    let setup = FitSetup {
        kind: observed.kind,
        summary: cfg.summary_spec(observed.data.dim())?,
        prior: cfg.prior(),
        theta_hat: cfg.theta_hat.clone(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count())
        .build()
        .map_err(|e| HarnessError::Numerical(format!("worker pool: {e}")))?;
    let replicates: Vec<ReplicateResult> = pool.install(|| {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|index| {
                let seed = derive_seed(cfg.seed, &[index as u64]);
                ReplicateResult { index, seed, outcome: fit_replicate(&observed, &setup, cfg, seed) }
            })
            .collect()
    });
    let names = param_names(observed.kind);
    let ests: Vec<&[f64]> = replicates.iter().filter_map(|r| r.outcome.as_ref().ok()).map(|f| f.estimate.as_slice()).collect();
    let (mean, se) = aggregate(&ests, angle_indices(observed.kind), names.len());
    let fits = replicates.iter().filter_map(|r| r.outcome.as_ref().ok());
    let (simulations, calibration_simulations) = fits.fold((0, 0), |(s, c), f| (s + f.simulations, c + f.calibration_simulations));
    Ok(StudyResult {
        config: cfg.clone(),
        kind: observed.kind,
        names,
        series: observed.series,
        truth: observed.truth,
        replicates,
        mean,
        se,
        simulations,
        calibration_simulations,
        wall_seconds: t0.elapsed().as_secs_f64(),
    })
}

/// Fails with a numerical error when no replicate succeeded.
pub fn require_success(result: &StudyResult) -> Result<()> {
    if result.successes().next().is_some() {
        return Ok(());
    }
    let msgs: Vec<String> = result.replicates.iter().filter_map(|r| r.outcome.as_ref().err()).cloned().collect();
    Err(HarnessError::Numerical(format!("every replicate failed: {}", msgs.join("; "))))
}

fn termination_label(t: &Termination) -> String {
    match t {
        Termination::EssBelowThreshold { stage } => format!("ess-below-threshold at stage {stage}"),
        Termination::ScheduleExhausted => "schedule-exhausted".into(),
        Termination::StageAbort { stage, slot, attempts } => format!("stage-abort at stage {stage} slot {slot} after {attempts} attempts"),
    }
}

/// Writes `result.csv`, `replicate_<r>.csv`, `population_<r>.csv`, curves for
/// bivariate fits, and the `manifest`. Everything except the manifest is a
/// deterministic function of the config.
pub fn write_study(result: &StudyResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let header: Vec<String> = ["parameter", "truth", "mean", "se", "replicates"].map(String::from).to_vec();
    let ok = result.successes().count();
    let rows = result.names.iter().enumerate().map(|(i, n)| {
        vec![
            n.clone(),
            fmt_opt(result.truth.as_ref().map(|t| t[i])),
            fmt_num(result.mean[i]),
            fmt_opt(result.se[i]),
            ok.to_string(),
        ]
    });
    write_csv(&dir.join("result.csv"), &header, rows)?;

    for rep in &result.replicates {
        let Ok(fit) = &rep.outcome else { continue };
        let mut h: Vec<String> = ["row", "stage", "epsilon", "ess", "acceptance_rate", "simulations", "log_threshold"].map(String::from).to_vec();
        h.extend(result.names.iter().cloned());
        let mut rows: Vec<Vec<String>> = fit
            .trace
            .iter()
            .map(|s| {
                let mut r = vec![
                    "stage".into(),
                    s.stage.to_string(),
                    fmt_num(s.epsilon),
                    fmt_num(s.ess),
                    fmt_num(s.acceptance_rate),
                    s.simulations.to_string(),
                    fmt_num(s.log_threshold),
                ];
                r.extend(s.mmse.iter().map(|&v| fmt_num(v)));
                r
            })
            .collect();
        let pop = &fit.population;
        let mut fin = vec![
            "final".into(),
            pop.stage.to_string(),
            fmt_num(pop.epsilon),
            fmt_num(pop.ess),
            "NA".into(),
            fit.simulations.to_string(),
            "NA".into(),
        ];
        fin.extend(fit.estimate.iter().map(|&v| fmt_num(v)));
        rows.push(fin);
        write_csv(&dir.join(format!("replicate_{}.csv", rep.index)), &h, rows)?;

        let mut h = vec!["weight".to_string()];
        h.extend(result.names.iter().cloned());
        let rows = pop.particles.iter().map(|p| std::iter::once(fmt_num(p.weight)).chain(p.theta.iter().map(|&v| fmt_num(v))).collect());
        write_csv(&dir.join(format!("population_{}.csv", rep.index)), &h, rows)?;
    }

    let grid = angle_grid(CURVE_POINTS);
    let curve_header: Vec<String> = ["angle", "mean", "lo", "hi"].map(String::from).to_vec();
    let mut curves = Vec::new();
    if let ModelKind::Multivariate { dim: 2, .. } = result.kind {
        for rep in &result.replicates {
            let Ok(fit) = &rep.outcome else { continue };
            let c = spectral_mass_curve(&fit.population, layout_of(result.kind), &grid)?;
            write_curve(&dir.join(format!("curve_{}.csv", rep.index)), &curve_header, &c)?;
            curves.push(c);
        }
    }
    if let Some(avg) = average_curves(&curves) {
        write_curve(&dir.join("curve.csv"), &curve_header, &avg)?;
    }
    write_text(&dir.join("manifest"), &manifest(result, !curves.is_empty()))
}

fn write_curve(path: &Path, header: &[String], c: &MassCurve) -> Result<()> {
    let rows = (0..c.angle.len()).map(|i| vec![fmt_num(c.angle[i]), fmt_num(c.mean[i]), fmt_num(c.lo[i]), fmt_num(c.hi[i])]);
    write_csv(path, header, rows)
}

fn toml_str(s: &str) -> String {
    toml::Value::String(s.to_owned()).to_string()
}

/// Key-value run record: versions, seeds, accounting and the config echo.
pub fn manifest(result: &StudyResult, has_curve: bool) -> String {
    let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut m = String::new();
    let mut kv = |k: &str, v: String| m.push_str(&format!("{k} = {v}\n"));
    kv("tool", toml_str(env!("CARGO_PKG_NAME")));
    kv("version", toml_str(env!("CARGO_PKG_VERSION")));
    kv("finished_unix", now.to_string());
    kv("wall_seconds", fmt_num(result.wall_seconds));
    kv("master_seed", result.config.seed.to_string());
    kv("data_seed", result.config.data_seed.to_string());
    kv("series", format!("[{}]", result.series.iter().map(|s| toml_str(s)).collect::<Vec<_>>().join(", ")));
    kv("replicates", result.replicates.len().to_string());
    kv("replicates_ok", result.successes().count().to_string());
    kv("sampler_simulations", result.simulations.to_string());
    kv("calibration_simulations", result.calibration_simulations.to_string());
    for r in &result.replicates {
        let (status, secs) = match &r.outcome {
            Ok(f) => (termination_label(&f.termination), fmt_num(f.wall_seconds)),
            Err(e) => (format!("failed: {e}"), "NA".into()),
        };
        // derived seeds use the full u64 range, beyond TOML integers
        kv(&format!("replicate_{}_seed", r.index), toml_str(&r.seed.to_string()));
        kv(&format!("replicate_{}_status", r.index), toml_str(&status));
        kv(&format!("replicate_{}_wall_seconds", r.index), toml_str(&secs));
    }
    if has_curve {
        kv(
            "curve_band",
            toml_str("per-replicate posterior mean +/- 3 sd of cumulative weight (curve_<r>.csv); curve.csv averages those columns pointwise"),
        );
    }
    m.push_str("\n[config]\n");
    m.push_str(&result.config.to_toml());
    m
}
