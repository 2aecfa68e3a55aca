//! `susy`: verification driver for the current on flat tori.
//!
//! Exit codes: 0 all checks passed, 1 some check failed, 2 configuration or
//! usage error (including refused requests), 3 resource budget exceeded,
//! 4 any other runtime error.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use config::{Backend, RunConfig};
use report::{Calibration, Environment, Report, REPORT_SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error(transparent)]
    Core(#[from] susy_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Refused(_) => 2,
            CliError::Core(susy_core::Error::Resource { .. }) => 3,
            CliError::Core(susy_core::Error::Parse(_)) => 2,
            CliError::Core(_) => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    Exact,
    Float,
}

#[derive(Debug, Parser)]
#[command(name = "susy", version, about = "Verify the supersymmetric current on flat tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration (all fields optional).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Where to write the JSON report.
    #[arg(long, global = true, default_value = "susy-report.json")]
    out: PathBuf,
    /// Seed for the randomized suites (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendArg>,
    /// Cross-check evaluations against the dense oracle.
    #[arg(long, global = true)]
    oracle: bool,
    /// Cap on enumerated items (trace terms, basis words) for every stage.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Certified truncation tolerance of each evaluation.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact nilpotency and anticommutation of the chain differentials.
    VerifyAlgebra,
    /// Values of the current on the configured chains.
    Evaluate,
    /// Cocycles, localization, metric and diffeomorphism invariance, H1/H2.
    Invariance,
    /// Randomized check of the operator inequality.
    Lemma,
    /// Every suite above.
    All,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VerifyAlgebra => "verify-algebra",
            Command::Evaluate => "evaluate",
            Command::Invariance => "invariance",
            Command::Lemma => "lemma",
            Command::All => "all",
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if let Some(b) = cli.backend {
        cfg.backend = match b {
            BackendArg::Exact => Backend::Exact,
            BackendArg::Float => Backend::Float,
        };
    }
    if let Some(b) = cli.budget {
        cfg.budgets.trace_terms = b;
        cfg.budgets.algebra_words = b;
        cfg.budgets.cocycle_words = b;
    }
    if let Some(t) = cli.tol {
        cfg.tolerances.eval_tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let cfg = load_config(cli)?;
    let mut outcome = commands::Outcome { checks: Vec::new(), localization_pinned: false };
    let mut merge = |o: commands::Outcome| {
        outcome.localization_pinned |= o.localization_pinned;
        outcome.checks.extend(o.checks);
    };
    match cli.command {
        Command::VerifyAlgebra => merge(commands::verify_algebra(&cfg)?),
        Command::Evaluate => merge(commands::evaluate(&cfg, cli.oracle)?),
        Command::Invariance => merge(commands::invariance(&cfg)?),
        Command::Lemma => merge(commands::lemma(&cfg)?),
        Command::All => {
            merge(commands::verify_algebra(&cfg)?);
            merge(commands::evaluate(&cfg, cli.oracle)?);
            merge(commands::invariance(&cfg)?);
            merge(commands::lemma(&cfg)?);
        }
    }
    let mut calibration = Calibration::for_dimension(cfg.geometry.n);
    calibration.gamma_sign_pinned = outcome.localization_pinned;
    let config_json = serde_json::to_value(&cfg).expect("config serializes");
    let mut report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        command: cli.command.name().into(),
        environment: Environment {
            version: env!("CARGO_PKG_VERSION"),
            seed: cfg.seed,
            backend: format!("{:?}", cfg.backend).to_lowercase(),
            budgets: serde_json::to_value(&cfg.budgets).expect("budgets serialize"),
            config_digest: report::digest(&config_json),
        },
        calibration,
        checks: Vec::new(),
        passed: false,
    };
    for (rec, elapsed) in &outcome.checks {
        let status = if rec.passed { "PASS" } else { "FAIL" };
        let extra = commands::describe_value(&rec.values);
        println!("{status} {:<40} {:>9.3}s {extra}", rec.name, elapsed.as_secs_f64());
        for v in &rec.violations {
            println!("     violated: {} (value {}, threshold {})", v.what, v.value, v.threshold);
        }
        for w in &rec.warnings {
            println!("     warning: {w}");
        }
    }
    report.checks = outcome.checks.into_iter().map(|(r, _)| r).collect();
    report.finish();
    std::fs::write(&cli.out, report.to_json()).map_err(|e| CliError::Config(format!("cannot write {}: {e}", cli.out.display())))?;
    println!("{} ({} checks) -> {}", if report.passed { "all checks passed" } else { "some checks FAILED" }, report.checks.len(), cli.out.display());
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("susy: {e}");
            if let CliError::Core(susy_core::Error::Resource { what, needed, budget }) = &e {
                eprintln!("susy: size diagnostics: {what} needs {needed}, budget {budget}; raise --budget or shrink the truncation");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
