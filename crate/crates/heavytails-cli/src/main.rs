//! Command-line pipeline: ingest -> detrend -> stats -> fit -> tails,
//! plus the SDE simulator. Outputs are plot-ready delimited tables and
//! JSON documents; every command writes a manifest with the resolved
//! configuration so runs are reproducible byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use heavytails::data::{self, Side};
use heavytails::distributions::Model;
use heavytails::fit::{self, FitConfig, Optimizer};
use heavytails::gof;
use heavytails::sde::{self, PositivityScheme, SdeConfig};
use heavytails::tails;

#[derive(Parser)]
#[command(name = "heavytails", version, about = "Heavy-tailed return distribution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Empirical statistics and CCDF tables from a price file.
    Stats(CommonArgs),
    /// Maximum-likelihood fits with summary statistics and comparison.
    Fit(CommonArgs),
    /// Simulate the stochastic-volatility SDE and check its laws.
    Simulate(CommonArgs),
    /// Tail slopes, confidence bands, and Dragon-King tests.
    Tails(CommonArgs),
    /// Stats + fit + tails in one run.
    Report(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Input price CSV (date, close columns).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory (created if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated models: student, half-student, mjf1, mjf2.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Return horizon in trading days.
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of points kept per tail side.
    #[arg(long)]
    tail_fraction: Option<f64>,
    /// Confidence level of the binomial band.
    #[arg(long)]
    ci_level: Option<f64>,
    #[arg(long)]
    date_col: Option<String>,
    #[arg(long)]
    price_col: Option<String>,
    /// JSON config file; explicit flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// simplex or quasi-newton.
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
    // SDE settings.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    /// Composite parameter 2*gamma*theta/kappa^2 of the variance law.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    n_paths: Option<usize>,
    /// full-truncation or reflection.
    #[arg(long)]
    scheme: Option<String>,
}

/// Fully resolved run configuration; recorded verbatim in the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunConfig {
    input: Option<PathBuf>,
    out: PathBuf,
    models: Vec<String>,
    tau: usize,
    seed: u64,
    tail_fraction: f64,
    ci_level: f64,
    date_col: String,
    price_col: String,
    optimizer: String,
    restarts: usize,
    max_iterations: usize,
    gamma: f64,
    theta: f64,
    alpha: f64,
    dt: f64,
    n_steps: usize,
    burn_in: usize,
    n_paths: usize,
    scheme: String,
}

/// Optional-field mirror of [`RunConfig`] for the JSON config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    input: Option<PathBuf>,
    out: Option<PathBuf>,
    models: Option<Vec<String>>,
    tau: Option<usize>,
    seed: Option<u64>,
    tail_fraction: Option<f64>,
    ci_level: Option<f64>,
    date_col: Option<String>,
    price_col: Option<String>,
    optimizer: Option<String>,
    restarts: Option<usize>,
    max_iterations: Option<usize>,
    gamma: Option<f64>,
    theta: Option<f64>,
    alpha: Option<f64>,
    dt: Option<f64>,
    n_steps: Option<usize>,
    burn_in: Option<usize>,
    n_paths: Option<usize>,
    scheme: Option<String>,
}

// Exit codes: 0 success, 1 computation failure, 2 usage or I/O failure.
enum CliError {
    Usage(String),
    Computation(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Computation(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Computation(m) => m,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn computation<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Computation(e.to_string())
}

// Library errors that indicate bad input files or settings map to exit
// code 2; numerical failures map to 1.
fn lib_error(e: heavytails::Error) -> CliError {
    use heavytails::Error::*;
    match e {
        Io(_) | Parse { .. } | InvalidInput(_) | Domain(_) => CliError::Usage(e.to_string()),
        _ => CliError::Computation(e.to_string()),
    }
}

fn resolve(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| usage(format!("bad config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let config = RunConfig {
        input: args.input.clone().or(file.input),
        out: args
            .out
            .clone()
            .or(file.out)
            .ok_or_else(|| usage("--out is required"))?,
        models: args.models.clone().or(file.models).unwrap_or_else(|| {
            vec!["student".into(), "half-student".into(), "mjf1".into(), "mjf2".into()]
        }),
        tau: args.tau.or(file.tau).unwrap_or(1),
        seed: args.seed.or(file.seed).unwrap_or(0),
        tail_fraction: args.tail_fraction.or(file.tail_fraction).unwrap_or(0.01),
        ci_level: args.ci_level.or(file.ci_level).unwrap_or(0.95),
        date_col: args.date_col.clone().or(file.date_col).unwrap_or_else(|| "date".into()),
        price_col: args.price_col.clone().or(file.price_col).unwrap_or_else(|| "close".into()),
        optimizer: args.optimizer.clone().or(file.optimizer).unwrap_or_else(|| "simplex".into()),
        restarts: args.restarts.or(file.restarts).unwrap_or(8),
        max_iterations: args.max_iterations.or(file.max_iterations).unwrap_or(2000),
        gamma: args.gamma.or(file.gamma).unwrap_or(0.05),
        theta: args.theta.or(file.theta).unwrap_or(1.407e-4),
        alpha: args.alpha.or(file.alpha).unwrap_or(7.347e-5),
        dt: args.dt.or(file.dt).unwrap_or(0.01),
        n_steps: args.n_steps.or(file.n_steps).unwrap_or(100_000),
        burn_in: args.burn_in.or(file.burn_in).unwrap_or(40_000),
        n_paths: args.n_paths.or(file.n_paths).unwrap_or(4),
        scheme: args.scheme.clone().or(file.scheme).unwrap_or_else(|| "full-truncation".into()),
    };
    for m in &config.models {
        if !matches!(m.as_str(), "student" | "half-student" | "mjf1" | "mjf2") {
            return Err(usage(format!("unknown model '{m}'")));
        }
    }
    if config.models.is_empty() {
        return Err(usage("at least one model must be selected"));
    }
    fs::create_dir_all(&config.out)
        .map_err(|e| usage(format!("cannot create {}: {e}", config.out.display())))?;
    Ok(config)
}

fn write_text(dir: &Path, name: &str, text: &str, artifacts: &mut Vec<String>) -> Result<(), CliError> {
    fs::write(dir.join(name), text).map_err(computation)?;
    artifacts.push(name.to_string());
    Ok(())
}

fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    value: &T,
    artifacts: &mut Vec<String>,
) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(computation)?;
    text.push('\n');
    write_text(dir, name, &text, artifacts)
}

fn write_manifest(command: &str, config: &RunConfig, artifacts: &[String]) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Manifest<'a> {
        command: &'a str,
        version: &'a str,
        seed: u64,
        config: &'a RunConfig,
        artifacts: &'a [String],
    }
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        config,
        artifacts,
    };
    let mut ignore = Vec::new();
    write_json(&config.out, "manifest.json", &manifest, &mut ignore)
}

fn load_increments(config: &RunConfig) -> Result<Vec<f64>, CliError> {
    let input = config
        .input
        .as_ref()
        .ok_or_else(|| usage("--input is required for this command"))?;
    let file = fs::File::open(input)
        .map_err(|e| usage(format!("cannot open {}: {e}", input.display())))?;
    let prices = data::load_prices(file, &config.date_col, &config.price_col).map_err(lib_error)?;
    let series = data::detrend(&prices).map_err(lib_error)?;
    data::daily_increments(&series, config.tau).map_err(lib_error)
}

fn ccdf_table(pairs: &[(f64, f64)]) -> String {
    let mut text = String::from("x\tccdf\n");
    for &(x, c) in pairs {
        text.push_str(&format!("{x:.12e}\t{c:.12e}\n"));
    }
    text
}

fn cmd_stats(config: &RunConfig, artifacts: &mut Vec<String>) -> Result<Vec<f64>, CliError> {
    let dx = load_increments(config)?;
    let stats = data::empirical_stats(&dx).map_err(lib_error)?;
    write_json(&config.out, "stats.json", &stats, artifacts)?;
    for (side, name) in [(Side::Gains, "ccdf_gains.tsv"), (Side::Losses, "ccdf_losses.tsv")] {
        let pairs = data::empirical_ccdf(&dx, side).map_err(lib_error)?;
        write_text(&config.out, name, &ccdf_table(&pairs), artifacts)?;
    }
    Ok(dx)
}

#[derive(Serialize)]
#[serde(untagged)]
enum FitEntry {
    Ok(Box<fit::FitResult>),
    Err { model_id: String, error: String },
}

fn fit_models(config: &RunConfig, dx: &[f64]) -> Result<(Vec<fit::FitResult>, Vec<FitEntry>), CliError> {
    let optimizer = match config.optimizer.as_str() {
        "simplex" => Optimizer::Simplex,
        "quasi-newton" => Optimizer::QuasiNewtonFiniteDifferences,
        other => return Err(usage(format!("unknown optimizer '{other}'"))),
    };
    let mut ok = Vec::new();
    let mut entries = Vec::new();
    for id in &config.models {
        let mut fc = FitConfig::new(id);
        fc.optimizer = optimizer;
        fc.restarts = config.restarts;
        fc.max_iterations = config.max_iterations;
        fc.seed = config.seed;
        match fit::fit_mle(&fc, dx) {
            Ok(result) => {
                ok.push(result.clone());
                entries.push(FitEntry::Ok(Box::new(result)));
            }
            Err(e) => entries.push(FitEntry::Err { model_id: id.clone(), error: e.to_string() }),
        }
    }
    Ok((ok, entries))
}

fn cmd_fit(config: &RunConfig, artifacts: &mut Vec<String>) -> Result<Vec<fit::FitResult>, CliError> {
    let dx = load_increments(config)?;
    let (ok, entries) = fit_models(config, &dx)?;
    write_json(&config.out, "fits.json", &entries, artifacts)?;
    let mut summaries = BTreeMap::new();
    let mut reconcile = Vec::new();
    for r in &ok {
        if let Ok(s) = r.model.summary_stats() {
            summaries.insert(r.model.id().to_string(), s);
        }
        if let Ok(mut entries) = r.model.reconcile() {
            reconcile.append(&mut entries);
        }
    }
    write_json(&config.out, "summary_stats.json", &summaries, artifacts)?;
    write_json(&config.out, "reconcile.json", &reconcile, artifacts)?;
    if ok.len() > 1 {
        let table = fit::model_comparison(&ok).map_err(lib_error)?;
        write_json(&config.out, "model_comparison.json", &table, artifacts)?;
    }
    if ok.is_empty() {
        return Err(CliError::Computation("every selected model failed to fit".into()));
    }
    Ok(ok)
}

fn cmd_simulate(config: &RunConfig, artifacts: &mut Vec<String>) -> Result<(), CliError> {
    let scheme = match config.scheme.as_str() {
        "full-truncation" => PositivityScheme::FullTruncation,
        "reflection" => PositivityScheme::Reflection,
        other => return Err(usage(format!("unknown scheme '{other}'"))),
    };
    let sde_config = SdeConfig::with_target_alpha(
        config.gamma,
        config.theta,
        config.alpha,
        config.dt,
        config.n_steps,
        config.burn_in,
        config.n_paths,
        config.seed,
        scheme,
    )
    .map_err(lib_error)?;
    let ensemble = sde::simulate(&sde_config).map_err(lib_error)?;
    let mut buf = Vec::new();
    ensemble.write_columnar(&mut buf).map_err(lib_error)?;
    write_text(
        &config.out,
        "ensemble.tsv",
        std::str::from_utf8(&buf).map_err(computation)?,
        artifacts,
    )?;
    drop(ensemble);

    // Distributional diagnostics against the stationary variance law and
    // the matching Student-t daily-return law. These run on a dedicated
    // streaming pass with the same parameters so the sample size has real
    // power regardless of how small the exported ensemble is. Both checks
    // thin well past the 1/gamma variance correlation time; otherwise the
    // KS null distribution does not apply.
    let diag_config = SdeConfig::with_target_alpha(
        config.gamma,
        config.theta,
        config.alpha,
        config.dt,
        config.burn_in + 3_000_000,
        config.burn_in,
        4,
        config.seed.wrapping_add(1),
        scheme,
    )
    .map_err(lib_error)?;
    let corr_steps = (1.0 / (config.gamma * config.dt)).ceil().max(1.0) as usize;
    let mut vs = sde::stationary_variance_sample(&diag_config, 3 * corr_steps)
        .map_err(lib_error)?;
    let ks_variance = gof::ks_distance(&mut vs, |v| diag_config.stationary_variance_cdf(v));
    // 0.1% critical value of the one-sample KS distance.
    let ks_variance_critical = 1.95 / (vs.len() as f64).sqrt();
    let student = Model::from_key_values(
        "student",
        &BTreeMap::from([
            ("theta".to_string(), config.theta),
            ("alpha".to_string(), config.alpha),
            ("tau".to_string(), 1.0),
        ]),
    )
    .map_err(lib_error)?;
    let daily = sde::accumulated_returns(&diag_config, 1).map_err(lib_error)?;
    let stride_days = (5.0 / config.gamma).ceil().max(1.0) as usize;
    let mut thinned: Vec<f64> = daily.iter().copied().step_by(stride_days).collect();
    let ks_daily_p = gof::ks_test(&mut thinned, |x| student.cdf_gains(x));
    #[derive(Serialize)]
    struct Diagnostics {
        stationary_variance_samples: usize,
        stationary_variance_ks_distance: f64,
        stationary_variance_ks_critical: f64,
        stationary_variance_pass: bool,
        daily_return_samples: usize,
        daily_return_ks_pvalue: f64,
        daily_return_pass: bool,
    }
    let diag = Diagnostics {
        stationary_variance_samples: vs.len(),
        stationary_variance_ks_distance: ks_variance,
        stationary_variance_ks_critical: ks_variance_critical,
        stationary_variance_pass: ks_variance < ks_variance_critical,
        daily_return_samples: thinned.len(),
        daily_return_ks_pvalue: ks_daily_p,
        daily_return_pass: ks_daily_p > 1e-3,
    };
    write_json(&config.out, "diagnostics.json", &diag, artifacts)?;
    if !diag.stationary_variance_pass || !diag.daily_return_pass {
        return Err(CliError::Computation(format!(
            "simulation diagnostics failed: variance KS distance {ks_variance:.4}, daily-return KS p {ks_daily_p:.4} (see diagnostics.json)"
        )));
    }
    Ok(())
}

fn cmd_tails(
    config: &RunConfig,
    dx: &[f64],
    fitted: &[fit::FitResult],
    artifacts: &mut Vec<String>,
) -> Result<(), CliError> {
    for (side, tag) in [(Side::Gains, "gains"), (Side::Losses, "losses")] {
        let ccdf = data::empirical_ccdf(dx, side).map_err(lib_error)?;
        let selection =
            tails::select_tail(&ccdf, side, config.tail_fraction, dx.len()).map_err(lib_error)?;
        // Band against the fitted power law itself; model overlays below.
        let fitted_law = tails::fit_powerlaw(&selection).map_err(lib_error)?;
        let law = move |x: f64| (fitted_law.intercept + fitted_law.slope * x.ln()).exp().min(1.0);
        let report =
            tails::tail_report(&selection, law, config.ci_level).map_err(lib_error)?;
        write_json(&config.out, &format!("tails_{tag}.json"), &report, artifacts)?;
        let mut table = String::from("x\tccdf\tband_lower\tband_upper\n");
        for &(x, c, lo, hi) in &report.ci_band {
            table.push_str(&format!("{x:.12e}\t{c:.12e}\t{lo:.12e}\t{hi:.12e}\n"));
        }
        write_text(&config.out, &format!("tails_{tag}.tsv"), &table, artifacts)?;
        for r in fitted {
            let model = r.model.clone();
            let model_ccdf = |x: f64| match side {
                Side::Gains => 1.0 - model.cdf_gains(x),
                Side::Losses => {
                    // Loss CCDF at magnitude x is the mass below -x.
                    model.cdf_gains(-x)
                }
            };
            let band =
                tails::binomial_ci_band(&selection, model_ccdf, config.ci_level).map_err(lib_error)?;
            let mut overlay = String::from("x\tccdf\tmodel_ccdf\tband_lower\tband_upper\n");
            for (&(x, c), &(lo, hi)) in selection.points.iter().zip(&band) {
                overlay.push_str(&format!(
                    "{x:.12e}\t{c:.12e}\t{:.12e}\t{lo:.12e}\t{hi:.12e}\n",
                    model_ccdf(x)
                ));
            }
            write_text(
                &config.out,
                &format!("tails_{tag}_{}.tsv", r.model.id()),
                &overlay,
                artifacts,
            )?;
        }
    }
    Ok(())
}

fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Stats(args) => {
            let config = resolve(args)?;
            let mut artifacts = Vec::new();
            cmd_stats(&config, &mut artifacts)?;
            write_manifest("stats", &config, &artifacts)
        }
        Command::Fit(args) => {
            let config = resolve(args)?;
            let mut artifacts = Vec::new();
            cmd_fit(&config, &mut artifacts)?;
            write_manifest("fit", &config, &artifacts)
        }
        Command::Simulate(args) => {
            let config = resolve(args)?;
            let mut artifacts = Vec::new();
            let result = cmd_simulate(&config, &mut artifacts);
            write_manifest("simulate", &config, &artifacts)?;
            result
        }
        Command::Tails(args) => {
            let config = resolve(args)?;
            let mut artifacts = Vec::new();
            let dx = load_increments(&config)?;
            let (fitted, _) = fit_models(&config, &dx)?;
            cmd_tails(&config, &dx, &fitted, &mut artifacts)?;
            write_manifest("tails", &config, &artifacts)
        }
        Command::Report(args) => {
            let config = resolve(args)?;
            let mut artifacts = Vec::new();
            let dx = cmd_stats(&config, &mut artifacts)?;
            let fitted = cmd_fit(&config, &mut artifacts)?;
            cmd_tails(&config, &dx, &fitted, &mut artifacts)?;
            write_manifest("report", &config, &artifacts)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
