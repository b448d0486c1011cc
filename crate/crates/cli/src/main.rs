//! `heatforms` command-line front end.
//!
//! Exit codes: 0 success, 1 failed validation or I/O error, 2 invalid
//! configuration, 3 numerical failure.

mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heatforms::estimators::{estimate, EstimatorRequest, RunOptions};
use heatforms::oracles::damping_closed_form;
use heatforms::record::EstimateRecord;
use heatforms::transport::{path_rng, simulate_path, DampingMode};
use heatforms::validation::{self, Suite, ValidationOptions};

use config::{parse_count, parse_list, parse_window, Format, RunArgs, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Failed(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<heatforms::Error> for CliError {
    fn from(e: heatforms::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "heatforms", version, about = "Monte Carlo estimators for heat flows of differential forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one estimator and write a JSON record.
    Estimate {
        /// pt, d, dstar, laplacian, flow-d or bismut-fn.
        estimator: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a validation suite: algebra, transport, commutation or full.
    Validate(ValidateArgs),
    /// Repeat an estimator over a list of t, h, N or window values.
    Sweep {
        estimator: Option<String>,
        #[arg(long, value_enum)]
        over: SweepAxis,
        /// Comma-separated values; windows are "δ,h′" pairs separated by ';'.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print the resolved configuration as TOML without running anything.
    Config {
        estimator: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Debug)]
struct ValidateArgs {
    suite: String,
    #[arg(long, value_parser = parse_count)]
    n_paths: Option<usize>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Randomized cases per dimension in the algebra suite.
    #[arg(long, value_parser = parse_count)]
    cases: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepAxis {
    T,
    H,
    N,
    Window,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate { estimator, run } => cmd_estimate(estimator.as_deref(), &run),
        Command::Validate(args) => cmd_validate(&args),
        Command::Sweep {
            estimator,
            over,
            values,
            run,
        } => cmd_sweep(estimator.as_deref(), over, &values, &run),
        Command::Config { estimator, run } => cmd_config(estimator.as_deref(), &run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("heatforms: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run_options(threads: Option<usize>) -> RunOptions {
    RunOptions {
        threads,
        retain_samples: false,
    }
}

fn run_one(cfg: &RunConfig, req: &EstimatorRequest) -> Result<EstimateRecord, CliError> {
    let outcome = estimate(req, &run_options(cfg.threads))?;
    Ok(EstimateRecord::new(req, &outcome.estimate, cfg.timing))
}

fn cmd_estimate(estimator: Option<&str>, args: &RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(estimator, args)?;
    let req = cfg.request()?;
    let record = run_one(&cfg, &req)?;
    let text = match cfg.format {
        Format::Json => record.to_json(),
        Format::Csv => output::records_csv(&[(record, None)], false),
    };
    output::emit(cfg.out.as_deref(), &text)
}

fn cmd_config(estimator: Option<&str>, args: &RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(estimator, args)?;
    cfg.request()?;
    output::emit(None, &cfg.to_toml())
}

/// Largest entry of `W_t − e^{−c t/2}·I` for ODE damping on one path.
fn damping_error(req: &EstimatorRequest) -> Result<f64, CliError> {
    let q = req.form.degree();
    let mut config = req.config.clone();
    config.damping = DampingMode::Ode;
    config.degrees = vec![q];
    let path = simulate_path(&req.model, &req.x0, req.t, &config, &mut path_rng(req.seed, config.stream, 0))?;
    let w = path.damped[q as usize].last().expect("nonempty path");
    let n = req.model.intrinsic_dim();
    let target = damping_closed_form(n, q as usize, req.model.curvature(), req.t);
    let m = w.matrix();
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let expect = if i == j { target } else { 0.0 };
            worst = worst.max((m[(i, j)] - expect).abs());
        }
    }
    Ok(worst)
}

fn cmd_sweep(estimator: Option<&str>, over: SweepAxis, values: &str, args: &RunArgs) -> Result<(), CliError> {
    let base = RunConfig::resolve(estimator, args)?;
    let configs: Vec<RunConfig> = match over {
        SweepAxis::Window => values
            .split(';')
            .map(|w| parse_window(w).map(|w| RunConfig { window: Some(w), ..base.clone() }))
            .collect::<Result<_, _>>()?,
        SweepAxis::N => values
            .split(',')
            .map(|v| {
                parse_count(v.trim())
                    .map(|n| RunConfig { n_paths: n, ..base.clone() })
                    .map_err(CliError::Config)
            })
            .collect::<Result<_, _>>()?,
        SweepAxis::T | SweepAxis::H => parse_list(values, "values")?
            .into_iter()
            .map(|v| match over {
                SweepAxis::T => RunConfig { t: Some(v), ..base.clone() },
                _ => RunConfig { step: v, ..base.clone() },
            })
            .collect(),
    };
    let requests = configs.iter().map(|c| c.request()).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::with_capacity(requests.len());
    for (cfg, req) in configs.iter().zip(&requests) {
        rows.push((run_one(cfg, req)?, Some(damping_error(req)?)));
    }
    let text = match base.format {
        Format::Csv => output::records_csv(&rows, true),
        Format::Json => {
            let list: Vec<_> = rows.iter().map(|(r, _)| r).collect();
            let mut s = serde_json::to_string_pretty(&list).expect("records serialize");
            s.push('\n');
            s
        }
    };
    output::emit(base.out.as_deref(), &text)
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let suite = Suite::from_name(&args.suite)?;
    let defaults = ValidationOptions::default();
    let options = ValidationOptions {
        n_paths: args.n_paths.unwrap_or(defaults.n_paths),
        step: args.step.unwrap_or(defaults.step),
        seed: args.seed.unwrap_or(defaults.seed),
        cases: args.cases.unwrap_or(defaults.cases),
        threads: args.threads,
    };
    if options.n_paths == 0 || options.cases == 0 || !(options.step.is_finite() && options.step > 0.0) {
        return Err(CliError::Config("n_paths, cases and step must be positive".into()));
    }
    let report = validation::run(suite, &options)?;
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.estimate);
    }
    let text = match args.format.unwrap_or_default() {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => output::report_csv(&report),
    };
    output::emit(args.out.as_deref(), &text)?;
    if report.passed() {
        Ok(())
    } else {
        let failed = report.checks.iter().filter(|c| !c.pass).count();
        Err(CliError::Failed(format!("{failed} check(s) failed in suite {}", suite.name())))
    }
}
