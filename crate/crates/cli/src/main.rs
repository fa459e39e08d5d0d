//! `cstar-est`: metrics, SLDs, geodesics and estimation bounds from a JSON run config.

mod commands;
mod config;
mod failure;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::RunConfig;
use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "cstar-est", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Parameter point, comma separated.
    #[arg(long, global = true, allow_hyphen_values = true)]
    point: Option<String>,

    /// `lo:hi:n` per coordinate, separated by `;` (for `geodesic`, a single time axis).
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,

    /// Chart direction, comma separated.
    #[arg(long, global = true, allow_hyphen_values = true)]
    direction: Option<String>,

    #[arg(long, global = true, value_enum, default_value_t = MetricKind::Quantum)]
    kind: MetricKind,

    /// Number of independent rounds.
    #[arg(long, global = true)]
    rounds: Option<usize>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Regularity margin on outcome probabilities.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Randomized trials per invariant suite (`check`).
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Pullback metric at each point.
    Metric,
    /// SLD of a tangent at one point.
    Sld,
    /// Geodesic through a state along a tangent.
    Geodesic,
    /// Cramer-Rao / Helstrom bound chain.
    Bounds,
    /// Seeded invariant suite.
    Check,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricKind {
    Quantum,
    Classical,
}

/// Config merged with command-line overrides.
pub struct Run {
    pub config: RunConfig,
    pub kind: MetricKind,
}

fn merge(cli: &Cli) -> Result<Run, Failure> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    if let Some(p) = &cli.point {
        config.point = Some(config::parse_vector(p)?);
    }
    if let Some(g) = &cli.grid {
        config.grid = Some(g.clone());
    }
    if let Some(d) = &cli.direction {
        config.direction = Some(config::parse_vector(d)?);
    }
    config.rounds = cli.rounds.or(config.rounds);
    config.seed = cli.seed.or(config.seed);
    config.tol = cli.tol.or(config.tol);
    config.trials = cli.trials.or(config.trials);
    if config.rounds == Some(0) {
        return Err(Failure::Schema("rounds must be at least 1".into()));
    }
    Ok(Run {
        config,
        kind: cli.kind,
    })
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let run = merge(cli)?;
    let (report, outcome) = match cli.command {
        Command::Metric => (commands::metric(&run)?, Ok(())),
        Command::Sld => (commands::sld(&run)?, Ok(())),
        Command::Geodesic => (commands::geodesic(&run)?, Ok(())),
        Command::Bounds => (commands::bounds(&run)?, Ok(())),
        Command::Check => commands::check(&run)?,
    };
    let mut text = serde_json::to_string_pretty(&output::round_floats(report))
        .map_err(|e| Failure::Schema(e.to_string()))?;
    text.push('\n');
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    outcome
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            if let Failure::Core(cstar_estimation::Error::NonStationary { residual }) = &failure {
                eprintln!("stationarity residual: {residual:?}");
            }
            ExitCode::from(failure.exit_code())
        }
    }
}
