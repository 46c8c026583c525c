//! `fracdecay` command-line tool. Every command prints one JSON document on
//! stdout; tables go to CSV files.
//!
//! Exit codes: 0 success, 2 bad configuration, 3 numerical or I/O failure.

mod config;
mod output;
mod routes;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracdecay::fit::{fit_power_law, log_grid};
use fracdecay::resolvent::pole_report;
use fracdecay::shorttime::{amplitude_series, zeno_time};
use serde_json::{json, Value};

use config::{parse_routes, RunConfig, Spacing, TimeGrid};
use routes::{evaluate, max_abs_diff, RouteSamples};

#[derive(Parser)]
#[command(name = "fracdecay", version, about = "Survival amplitude of a level decaying into a fractional bath")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the amplitude on the configured time grid.
    Survival(Common),
    /// Report the poles of the resolvent and their residues.
    Poles(Common),
    /// Short-time coefficient, Zeno time, and a log-log fit of 1 - p.
    Zeno(Common),
    /// Evaluate several routes on one grid and report their differences.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path; overrides `output_path`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated routes; overrides `routes`.
    #[arg(long)]
    routes: Option<String>,
    /// Tolerance; overrides `tol`.
    #[arg(long)]
    tol: Option<f64>,
}

enum Failure {
    Config(String),
    Numerical(fracdecay::Error),
    Io(String),
}

impl From<fracdecay::Error> for Failure {
    fn from(e: fracdecay::Error) -> Self {
        Failure::Numerical(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) | Failure::Io(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        use fracdecay::Error as E;
        match self {
            Failure::Config(_) => "config",
            Failure::Io(_) => "io",
            Failure::Numerical(e) => match e {
                E::GammaPole(_) => "gamma_pole",
                E::ZeroToNonPositivePower(_) => "zero_power",
                E::NonConvergence { .. } => "non_convergence",
                E::Domain { .. } => "domain",
                E::Regime { .. } => "regime",
                E::Overflow { .. } => "overflow",
                E::NoPole(_) => "no_pole",
                E::Quadrature { .. } => "quadrature",
                E::Dimension { .. } => "dimension",
                E::StepSize { .. } => "step_size",
                E::ZeroCoupling => "zero_coupling",
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(m) | Failure::Io(m) => m.clone(),
            Failure::Numerical(e) => e.to_string(),
        }
    }
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", common.config.display())))?;
    let mut cfg: RunConfig =
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("invalid configuration: {e}")))?;
    if let Some(out) = &common.out {
        cfg.output_path = Some(out.to_string_lossy().into_owned());
    }
    if let Some(list) = &common.routes {
        cfg.routes = parse_routes(list).map_err(Failure::Config)?;
    }
    if let Some(tol) = common.tol {
        cfg.tol = tol;
    }
    cfg.validate().map_err(Failure::Config)?;
    Ok(cfg)
}

fn grid(cfg: &RunConfig) -> Result<Vec<f64>, Failure> {
    cfg.time_grid
        .map(|g| g.points())
        .ok_or_else(|| Failure::Config("this command needs a `time_grid` section".into()))
}

fn sample_all(cfg: &RunConfig, times: &[f64]) -> Result<Vec<RouteSamples>, Failure> {
    cfg.routes
        .iter()
        .map(|&r| evaluate(r, cfg, times).map_err(Failure::from))
        .collect()
}

fn write_table(command: &str, cfg: &RunConfig, times: &[f64], samples: &[RouteSamples]) -> Result<Option<String>, Failure> {
    let Some(path) = &cfg.output_path else {
        return Ok(None);
    };
    let csv = output::render_csv(command, cfg, times, samples);
    output::write_atomic(Path::new(path), &csv).map_err(|e| Failure::Io(format!("cannot write {path}: {e}")))?;
    Ok(Some(path.clone()))
}

fn survival(cfg: &RunConfig) -> Result<Value, Failure> {
    if cfg.output_path.is_none() {
        return Err(Failure::Config("survival needs --out or `output_path`".into()));
    }
    let times = grid(cfg)?;
    let samples = sample_all(cfg, &times)?;
    let path = write_table("survival", cfg, &times, &samples)?;
    Ok(json!({
        "table_path": path,
        "rows": times.len(),
        "routes": cfg.routes,
        "config_sha256": output::config_hash(cfg),
    }))
}

fn poles(cfg: &RunConfig) -> Result<Value, Failure> {
    let report = pole_report(cfg.params(), cfg.tol)?;
    let z0 = report.z0.to_complex();
    let z1 = report.z1.map(|z| {
        let c = z.to_complex();
        [c.re, c.im]
    });
    Ok(json!({
        "params": cfg.params(),
        "poles": report,
        "z0_cartesian": [z0.re, z0.im],
        "z1_cartesian": z1,
    }))
}

/// Default fit window, where the leading short-time law dominates for unit scales.
const ZENO_WINDOW: TimeGrid = TimeGrid {
    t_min: 1e-4,
    t_max: 1e-2,
    n_points: 40,
    spacing: Spacing::Log,
};

fn zeno(cfg: &RunConfig) -> Result<Value, Failure> {
    let p = cfg.params();
    let est = zeno_time(p)?;
    let window = cfg.time_grid.unwrap_or(ZENO_WINDOW);
    if window.t_min <= 0.0 {
        return Err(Failure::Config("the zeno fit window needs t_min > 0".into()));
    }
    let ts = log_grid(window.t_min, window.t_max, window.n_points);
    let mut ys = Vec::with_capacity(ts.len());
    for &t in &ts {
        let loss = 1.0 - amplitude_series(p, t, cfg.tol)?.value.norm_sqr();
        // Below this the loss is mostly rounding and the fit means nothing.
        if !(loss > 1e3 * f64::EPSILON) {
            return Err(Failure::Numerical(fracdecay::Error::Domain {
                name: "t_min",
                value: window.t_min,
                reason: "1 - p is lost to rounding at the start of the fit window",
            }));
        }
        ys.push(loss);
    }
    let fit = fit_power_law(&ts, &ys)?;
    Ok(json!({
        "coeff": est.coeff,
        "exponent": est.exponent,
        "tau_z": est.tau_z,
        "fitted_slope": fit.slope,
        "fitted_coeff": fit.coeff,
        "fit_rms_residual": fit.rms_residual,
        "fit_window": [window.t_min, window.t_max],
    }))
}

fn compare(cfg: &RunConfig) -> Result<Value, Failure> {
    let times = grid(cfg)?;
    let samples = sample_all(cfg, &times)?;
    let mut diffs = serde_json::Map::new();
    for (i, a) in samples.iter().enumerate() {
        for b in &samples[i + 1..] {
            diffs.insert(format!("{}-{}", a.route, b.route), json!(max_abs_diff(a, b)));
        }
    }
    let path = write_table("compare", cfg, &times, &samples)?;
    Ok(json!({
        "routes": cfg.routes,
        "max_abs_diff": diffs,
        "table_path": path,
    }))
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("FRACDECAY_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("FRACDECAY_THREADS = `{raw}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(format!("cannot start thread pool: {e}")))
}

fn run(cli: Cli) -> Result<Value, Failure> {
    configure_threads()?;
    let (common, f): (&Common, fn(&RunConfig) -> Result<Value, Failure>) = match &cli.command {
        Command::Survival(c) => (c, survival),
        Command::Poles(c) => (c, poles),
        Command::Zeno(c) => (c, zeno),
        Command::Compare(c) => (c, compare),
    };
    let cfg = load(common)?;
    f(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("value serializes"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let v = json!({ "error": { "kind": e.kind(), "message": e.message() } });
            println!("{}", serde_json::to_string_pretty(&v).expect("value serializes"));
            eprintln!("fracdecay: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

