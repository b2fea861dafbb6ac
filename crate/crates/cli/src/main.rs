mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kickscope_core::experiment::ExperimentError;
use kickscope_core::hilbert::DomainError;
use kickscope_core::wavepacket::ConfigError;

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Two-slit interference with an imperfect which-way detector.
#[derive(Parser)]
#[command(name = "kickscope", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (flat key = value); desk defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory. Falls back to output.dir, then $KICKSCOPE_OUT, then `.`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides sampling.seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Screen pattern, momentum spectra and a summary for one configuration.
    Run(Common),
    /// Visibility, kick fraction and kick magnitude across overlaps.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Overlap magnitudes to scan.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        c_values: Option<Vec<f64>>,
    },
    /// Monte Carlo detection events.
    Sample(Common),
    /// Run the invariant suite; exit 1 if any check fails.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, hide = true, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(common: &Common, cfg: &RunConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .or_else(|| std::env::var_os("KICKSCOPE_OUT").map(PathBuf::from))
        .unwrap_or_else(|| Path::new(".").to_path_buf())
}

fn report(written: Vec<PathBuf>) {
    for p in written {
        eprintln!("wrote {}", p.display());
    }
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run(common) => {
            let cfg = load(&common)?;
            report(commands::run(&cfg, &out_dir(&common, &cfg))?);
        }
        Command::Scan { common, c_values } => {
            let cfg = load(&common)?;
            let cs = c_values.unwrap_or_else(|| commands::DEFAULT_SCAN.to_vec());
            report(commands::scan(&cfg, &cs, &out_dir(&common, &cfg))?);
        }
        Command::Sample(common) => {
            let cfg = load(&common)?;
            report(commands::sample(&cfg, &out_dir(&common, &cfg))?);
        }
        Command::Verify {
            common,
            tolerance_scale,
        } => {
            let cfg = load(&common)?;
            if !commands::verify(&cfg, tolerance_scale)? {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
