//! `geophase`: command-line front end for geophase-core.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input.

mod commands;
mod config;
mod output;
mod plot;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{FileConfig, Flags, Format};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "geophase",
    version,
    about = "Weak-measurement geometric phases on a qubit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Closed-form phase versus c (or versus alpha with --vs-alpha) and its critical strengths.
    Analytic,
    /// Finite-N postselected phase versus alpha for each (N, c).
    FiniteN,
    /// Noiseless phase over an N × c grid.
    Landscape,
    /// Phase-noise ensemble over an N × c grid with stability summary.
    Noise,
    /// Sampled readout records and the all-plus frequency.
    Trajectory,
    /// Critical strengths for one or more winding numbers.
    Critical,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Analytic => "analytic",
            Command::FiniteN => "finite-n",
            Command::Landscape => "landscape",
            Command::Noise => "noise",
            Command::Trajectory => "trajectory",
            Command::Critical => "critical",
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.flags.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(cmd) = &file.command {
        if cmd != cli.command.name() {
            return Err(CliError::Validation(format!(
                "config was written for `{cmd}`, not `{}`",
                cli.command.name()
            )));
        }
    }
    let mut cfg = config::merge(cli.flags, file);
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| CliError::Validation("--out is required".into()))?;
    cfg.format = Some(cfg.format.unwrap_or(Format::Csv));
    cfg.plot = Some(cfg.plot.unwrap_or(false));

    let threads = match cfg.workers {
        Some(0) => return Err(CliError::Validation("--workers must be >= 1".into())),
        Some(n) => n,
        None => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Io(format!("starting worker pool: {e}")))?;

    let (manifest, emission) = match cli.command {
        Command::Analytic => commands::analytic(&cfg)?,
        Command::FiniteN => commands::finite_n(&cfg)?,
        Command::Landscape => commands::landscape(&cfg)?,
        Command::Noise => commands::noise(&cfg)?,
        Command::Trajectory => commands::trajectory(&cfg)?,
        Command::Critical => commands::critical(&cfg)?,
    };
    for path in output::emit(&out, cfg.format.unwrap(), &manifest, emission)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("geophase: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
