use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tyc_cli::commands::{self, Report};
use tyc_cli::config::ExperimentConfig;
use tyc_cli::{CliError, EXIT_CONFIG};

/// Trojan Y Chromosome model laboratory.
#[derive(Debug, Parser)]
#[command(name = "tyc", version)]
struct Cli {
    /// JSON experiment configuration; omitted sections take their defaults.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Override a config key, e.g. `--set initial.s=2.5`. Applied in order; the last one wins.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the point model; writes trajectory.csv and summary.txt.
    Simulate,
    /// Integrate the reaction-diffusion model; writes snapshot_NNN.csv, norms.csv and summary.txt.
    Pde,
    /// Classify one initial condition into its region.
    Classify,
    /// Locate one critical value at analysis.f0m0; writes thresholds.csv.
    Threshold,
    /// Both critical curves over analysis.range; writes thresholds.csv.
    Regionmap,
    /// Local stability criterion with an eigenvalue cross-check.
    Stability,
    /// Critical curves for the main model and analysis.compare; writes comparison.csv.
    Compare,
    /// Print the effective configuration.
    Config,
}

/// Worker count for parallel sweeps.
const WORKERS_ENV: &str = "TYC_WORKERS";

fn init_pool() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    init_pool()?;
    let cfg = ExperimentConfig::load(cli.config.as_deref(), &cli.overrides)?;
    match cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Pde => commands::pde(&cfg),
        Command::Classify => commands::classify(&cfg),
        Command::Threshold => commands::threshold(&cfg),
        Command::Regionmap => commands::regionmap(&cfg),
        Command::Stability => commands::stability(&cfg),
        Command::Compare => commands::compare(&cfg),
        Command::Config => Ok(commands::show_config(&cfg)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.stdout);
            ExitCode::from(report.exit)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
