//! Command-line flags, the JSON config file, and their merge.
//!
//! A config file and a run manifest share one schema, so any manifest can be
//! passed back through `--config` to rerun the command it describes.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use geophase_core::landscape::{IntRange, RealRange};
use geophase_core::NoiseMode;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModeArg {
    PerStep,
    PerRunAlpha,
}

impl From<NoiseModeArg> for NoiseMode {
    fn from(m: NoiseModeArg) -> Self {
        match m {
            NoiseModeArg::PerStep => NoiseMode::PerStep,
            NoiseModeArg::PerRunAlpha => NoiseMode::PerRunAlpha,
        }
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to per-command defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON config file (or a manifest from an earlier run).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Winding number W (α = Wπ); comma-separated list for `critical`.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub winding: Vec<f64>,
    /// Measurement strength; comma-separated list where several are allowed.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub c: Vec<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c_max: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c_step: Option<f64>,
    /// Upper end of the α grid for `finite-n` and `analytic --vs-alpha`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha_max: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha_step: Option<f64>,
    /// Number of steps N; comma-separated list for `finite-n`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub n_steps: Vec<usize>,
    /// Landscape grid as `N_START:N_END:N_STEP,C_START:C_END:C_STEP`.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Noise standard deviation as a fraction of π (0.05 means 5%).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub spread: Option<f64>,
    /// Samples per cell (`noise`) or number of records (`trajectory`).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub noise_mode: Option<NoiseModeArg>,
    /// Distance to {0, −π} below which a noisy cell counts as quantized.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub quantization_tol: Option<f64>,
    /// `analytic`: sweep α at fixed `--c` instead of sweeping c.
    #[arg(long, global = true)]
    pub vs_alpha: bool,
    /// Primary output file; sidecars are written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Also write an SVG rendering of the primary output.
    #[arg(long, global = true)]
    pub plot: bool,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Compute cells with 4c/N > 1 by continuing M₊ analytically; such
    /// outputs are labelled non-physical.
    #[arg(long, global = true)]
    pub allow_analytic_continuation: bool,
}

/// On-disk config and manifest schema.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winding: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_mode: Option<NoiseModeArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantization_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vs_alpha: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allow_analytic_continuation: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }
}

fn list<T>(flag: Vec<T>, file: Option<Vec<T>>) -> Option<Vec<T>> {
    if flag.is_empty() {
        file
    } else {
        Some(flag)
    }
}

fn switch(flag: bool, file: Option<bool>) -> Option<bool> {
    if flag {
        Some(true)
    } else {
        file
    }
}

/// Flags override file values field by field.
pub fn merge(flags: Flags, file: FileConfig) -> FileConfig {
    FileConfig {
        command: file.command,
        version: file.version,
        winding: list(flags.winding, file.winding),
        c: list(flags.c, file.c),
        c_max: flags.c_max.or(file.c_max),
        c_step: flags.c_step.or(file.c_step),
        alpha_max: flags.alpha_max.or(file.alpha_max),
        alpha_step: flags.alpha_step.or(file.alpha_step),
        n_steps: list(flags.n_steps, file.n_steps),
        grid: flags.grid.or(file.grid),
        spread: flags.spread.or(file.spread),
        samples: flags.samples.or(file.samples),
        seed: flags.seed.or(file.seed),
        noise_mode: flags.noise_mode.or(file.noise_mode),
        quantization_tol: flags.quantization_tol.or(file.quantization_tol),
        vs_alpha: switch(flags.vs_alpha, file.vs_alpha),
        out: flags.out.or(file.out),
        format: flags.format.or(file.format),
        plot: switch(flags.plot, file.plot),
        workers: flags.workers.or(file.workers),
        allow_analytic_continuation: switch(
            flags.allow_analytic_continuation,
            file.allow_analytic_continuation,
        ),
    }
}

fn parse_part<T: std::str::FromStr>(s: &str, what: &str) -> Result<[T; 3], CliError> {
    let bad = || CliError::Validation(format!("--grid: cannot parse {what} range {s:?}"));
    let parts: Vec<T> = s
        .split(':')
        .map(|p| p.trim().parse::<T>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| bad())
}

/// Parses `N_START:N_END:N_STEP,C_START:C_END:C_STEP`.
pub fn parse_grid(s: &str) -> Result<(IntRange, RealRange), CliError> {
    let (n, c) = s.split_once(',').ok_or_else(|| {
        CliError::Validation(format!(
            "--grid {s:?}: expected N_START:N_END:N_STEP,C_START:C_END:C_STEP"
        ))
    })?;
    let [start, end, step] = parse_part::<usize>(n, "N")?;
    let [c0, c1, dc] = parse_part::<f64>(c, "c")?;
    Ok((
        IntRange { start, end, step },
        RealRange {
            start: c0,
            end: c1,
            step: dc,
        },
    ))
}

pub fn format_grid(n: &IntRange, c: &RealRange) -> String {
    format!(
        "{}:{}:{},{:?}:{:?}:{:?}",
        n.start, n.end, n.step, c.start, c.end, c.step
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_round_trips() {
        let (n, c) = parse_grid("4:50:2,0.5:9.5:0.5").unwrap();
        assert_eq!((n.start, n.end, n.step), (4, 50, 2));
        assert_eq!((c.start, c.end, c.step), (0.5, 9.5, 0.5));
        assert_eq!(parse_grid(&format_grid(&n, &c)).unwrap(), (n, c));
    }

    #[test]
    fn malformed_grids_are_rejected() {
        for s in [
            "4:50:2",
            "4:50,0.5:1:0.1",
            "a:b:c,1:2:3",
            "4:50:2,0.5:x:0.5",
        ] {
            assert!(matches!(parse_grid(s), Err(CliError::Validation(_))), "{s}");
        }
    }

    #[test]
    fn flags_win_over_file() {
        let file = FileConfig {
            seed: Some(1),
            spread: Some(0.1),
            c: Some(vec![2.0]),
            plot: Some(true),
            ..FileConfig::default()
        };
        let flags = Flags {
            seed: Some(9),
            c: vec![],
            ..Flags::default()
        };
        let m = merge(flags, file);
        assert_eq!(m.seed, Some(9));
        assert_eq!(m.spread, Some(0.1));
        assert_eq!(m.c, Some(vec![2.0]));
        assert_eq!(m.plot, Some(true));
    }

    #[test]
    fn unknown_keys_are_refused() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"sead": 3}"#).is_err());
        let ok: FileConfig = serde_json::from_str(r#"{"noise_mode": "per-run-alpha"}"#).unwrap();
        assert_eq!(ok.noise_mode, Some(NoiseModeArg::PerRunAlpha));
    }
}
