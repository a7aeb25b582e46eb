use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stable_abc::stable_model::{sample_multivariate, sample_univariate};
use stable_abc::{ParamLayout, Particle, Population, SpectralStableModel, StableParams};
use stable_abc_harness::config::{Mode, StudyConfig};
use stable_abc_harness::currency::{run_currency_study, write_currency_study};
use stable_abc_harness::curve::{angle_grid, spectral_mass_curve};
use stable_abc_harness::error::{HarnessError, Result};
use stable_abc_harness::io::{fmt_num, load_series_csv, log_returns, SeriesTable};
use stable_abc_harness::study::{require_success, run_replicates, write_study, CURVE_POINTS};
use stable_abc_harness::summarize::summarize_table;

#[derive(Parser)]
#[command(name = "stable-abc", version, about = "ABC-SMC inference for alpha-stable models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate stable data to CSV.
    Simulate(SimulateArgs),
    /// Print a summary vector of a CSV series.
    Summarize(SummarizeArgs),
    /// Convert price columns to log returns.
    Returns(ReturnsArgs),
    /// Run a replicate study from a config file.
    Fit(FitArgs),
    /// Cumulative spectral-mass curve of a saved bivariate population.
    SpectralCurve(CurveArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    alpha: f64,
    /// Univariate skewness.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Univariate scale.
    #[arg(long)]
    gamma: Option<f64>,
    /// Univariate location.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Spectral weights, comma separated (selects the multivariate model).
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    /// Mass angles: one group per mass, groups separated by ';', angles by ','.
    #[arg(long)]
    angles: Option<String>,
    /// Location vector, comma separated (zeros by default).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mu0: Vec<f64>,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SummarizeArgs {
    #[arg(long)]
    input: PathBuf,
    /// s1 … s5; several columns give the projected summary.
    #[arg(long, default_value = "s1")]
    family: String,
    /// Columns to use (all when absent).
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long, default_value_t = 20)]
    projections: usize,
    #[arg(long, default_value_t = 1)]
    projection_seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReturnsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Multiplier applied to each log return.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Study config (TOML, flat keys).
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. `--set replicates=3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct CurveArgs {
    /// A `population_<r>.csv` written by `fit`.
    #[arg(long)]
    population: PathBuf,
    #[arg(long, default_value_t = CURVE_POINTS)]
    points: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn emit(output: Option<&Path>, header: &[String], rows: Vec<Vec<String>>) -> Result<()> {
    match output {
        Some(p) => stable_abc_harness::io::write_csv(p, header, rows),
        None => {
            let io = |e: csv::Error| HarnessError::Io(format!("stdout: {e}"));
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            w.write_record(header).map_err(io)?;
            for r in rows {
                w.write_record(&r).map_err(io)?;
            }
            w.flush().map_err(|e| HarnessError::Io(format!("stdout: {e}")))
        }
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let (header, rows): (Vec<String>, Vec<Vec<String>>) = if a.weights.is_empty() {
        let need = |v: Option<f64>, n: &str| v.ok_or_else(|| HarnessError::Usage(format!("--{n} is required for univariate data")));
        let p = StableParams::new(a.alpha, need(a.beta, "beta")?, need(a.gamma, "gamma")?, need(a.delta, "delta")?)?;
        let y = sample_univariate(&p, a.n, a.seed)?;
        (vec!["y".into()], y.into_iter().map(|v| vec![fmt_num(v)]).collect())
    } else {
        let spec = a.angles.ok_or_else(|| HarnessError::Usage("--angles is required with --weights".into()))?;
        let angles = spec
            .split(';')
            .map(|g| g.split(',').map(|v| v.trim().parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| HarnessError::Usage(format!("--angles: {e}")))?;
        let dim = angles.first().map_or(2, |g| g.len() + 1);
        let mu0 = if a.mu0.is_empty() { vec![0.0; dim] } else { a.mu0 };
        let model = SpectralStableModel::new(a.alpha, a.weights, angles, mu0)?;
        let x = sample_multivariate(&model, a.n, a.seed)?;
        ((1..=dim).map(|i| format!("x{i}")).collect(), x.iter_rows().map(|r| r.iter().map(|&v| fmt_num(v)).collect()).collect())
    };
    emit(a.output.as_deref(), &header, rows)
}

fn summarize(a: SummarizeArgs) -> Result<()> {
    let mut cfg = StudyConfig { family: a.family, projections: a.projections, projection_seed: Some(a.projection_seed), ..Default::default() };
    if let Some(xi) = a.xi {
        cfg.xi = xi;
    }
    cfg.validate()?;
    let table = load_series_csv(&a.input)?;
    let table = if a.columns.is_empty() { table } else { table.select(&a.columns)? };
    let (values, status) = summarize_table(&cfg, &table)?;
    eprintln!("status: {status:?}");
    let header = vec!["component".to_string(), "value".to_string()];
    emit(a.output.as_deref(), &header, values.into_iter().map(|(n, v)| vec![n, fmt_num(v)]).collect())
}

fn returns(a: ReturnsArgs) -> Result<()> {
    let table = load_series_csv(&a.input)?;
    let cols = table
        .columns
        .iter()
        .map(|c| log_returns(c).map(|r| r.into_iter().map(|v| v * a.scale).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let n = cols.first().map_or(0, Vec::len);
    let rows = (0..n).map(|i| cols.iter().map(|c| fmt_num(c[i])).collect()).collect();
    emit(a.output.as_deref(), &table.names, rows)
}

fn fit(a: FitArgs) -> Result<()> {
    let mut overrides = a.overrides;
    if let Some(r) = a.replicates {
        overrides.push(format!("replicates={r}"));
    }
    if let Some(s) = a.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(w) = a.workers {
        overrides.push(format!("workers={w}"));
    }
    if let Some(d) = &a.output_dir {
        overrides.push(format!("output_dir={}", toml::Value::String(d.display().to_string())));
    }
    let cfg = StudyConfig::load(&a.config, &overrides)?;
    let dir = cfg.output_dir.clone();
    if cfg.select_pair && cfg.mode == Mode::FitMultivariate {
        let study = run_currency_study(&cfg)?;
        write_currency_study(&study, &dir)?;
        require_success(&study.bivariate)?;
        report(&study.bivariate);
    } else {
        let result = run_replicates(&cfg)?;
        write_study(&result, &dir)?;
        require_success(&result)?;
        report(&result);
    }
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn report(r: &stable_abc_harness::StudyResult) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{:<10} {:>12} {:>12}", "parameter", "mean", "se");
    for (i, n) in r.names.iter().enumerate() {
        let se = r.se[i].map_or_else(|| "NA".into(), |s| format!("{s:.4}"));
        let _ = writeln!(err, "{n:<10} {:>12.4} {se:>12}", r.mean[i]);
    }
}

fn load_population(path: &Path) -> Result<(Population, ParamLayout)> {
    let t: SeriesTable = load_series_csv(path)?;
    if t.names.first().map(String::as_str) != Some("weight") {
        return Err(HarnessError::Data(format!("{}: first column must be `weight`", path.display())));
    }
    let count = |prefix: &str| t.names.iter().filter(|n| n.starts_with(prefix) && n[prefix.len()..].parse::<usize>().is_ok()).count();
    let (masses, dim) = (count("w"), count("mu"));
    if masses == 0 || dim < 2 || t.names.len() != 1 + masses + masses * (dim - 1) + dim + 1 {
        return Err(HarnessError::Data(format!("{}: not a multivariate population file", path.display())));
    }
    let particles = (0..t.rows())
        .map(|i| Particle { theta: t.columns[1..].iter().map(|c| c[i]).collect(), weight: t.columns[0][i], summary: None })
        .collect();
    Ok((Population { particles, epsilon: f64::NAN, stage: 0, ess: f64::NAN }, ParamLayout::Spectral { dim, masses }))
}

fn spectral_curve(a: CurveArgs) -> Result<()> {
    let (pop, layout) = load_population(&a.population)?;
    let c = spectral_mass_curve(&pop, layout, &angle_grid(a.points))?;
    let header: Vec<String> = ["angle", "mean", "lo", "hi"].map(String::from).to_vec();
    let rows = (0..c.angle.len()).map(|i| vec![fmt_num(c.angle[i]), fmt_num(c.mean[i]), fmt_num(c.lo[i]), fmt_num(c.hi[i])]).collect();
    emit(a.output.as_deref(), &header, rows)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let out = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Summarize(a) => summarize(a),
        Command::Returns(a) => returns(a),
        Command::Fit(a) => fit(a),
        Command::SpectralCurve(a) => spectral_curve(a),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
