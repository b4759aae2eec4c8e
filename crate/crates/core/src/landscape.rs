//! N–c landscapes, phase-noise ensembles and stability summaries.
//!
//! Cells are independent work units evaluated in parallel. Random draws for
//! a cell are keyed by the master seed and the cell's coordinates, so a
//! sub-grid reproduces the matching cells of a larger grid and completion
//! order never affects the output.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::baseline_phase;
use crate::error::{Error, Result};
use crate::qmat::{principal, wrap_phase, ZERO_MODULUS};
use crate::seed::derive_seed;
use crate::trajectory::{
    postselected_amplitude, postselected_amplitude_for_angles, ProtocolParams, Regime,
};

pub const DEFAULT_SAMPLES_PER_CELL: usize = 100;
/// Circular standard deviation (rad) above which a cell is flagged unstable.
pub const DEFAULT_UNSTABLE_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub start: usize,
    pub end: usize,
    pub step: usize,
}

impl IntRange {
    pub fn values(&self) -> Vec<usize> {
        (self.start..=self.end).step_by(self.step.max(1)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealRange {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl RealRange {
    /// `start + i·step` for every `i` that stays within `end` (plus a small
    /// slack for accumulated rounding).
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_range: IntRange,
    pub c_range: RealRange,
    pub winding: f64,
    /// Evaluate `η > 1` cells in the analytic-continuation regime instead
    /// of flagging them invalid.
    #[serde(default)]
    pub analytic_continuation: bool,
}

impl GridSpec {
    pub fn new(n_range: IntRange, c_range: RealRange, winding: f64) -> Self {
        GridSpec {
            n_range,
            c_range,
            winding,
            analytic_continuation: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = &self.n_range;
        if n.step == 0 || n.start == 0 || n.end < n.start {
            return Err(Error::param(
                "n_range",
                "need 1 <= start <= end and step > 0",
            ));
        }
        let c = &self.c_range;
        if !(c.step > 0.0 && c.start >= 0.0 && c.end >= c.start && c.end.is_finite()) {
            return Err(Error::param(
                "c_range",
                "need 0 <= start <= end and step > 0",
            ));
        }
        if !self.winding.is_finite() {
            return Err(Error::param("winding", "must be finite"));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.winding * PI
    }

    /// Cell coordinates, N-major.
    pub fn cells(&self) -> Vec<(usize, f64)> {
        let cs = self.c_range.values();
        self.n_range
            .values()
            .into_iter()
            .flat_map(|n| cs.iter().map(move |&c| (n, c)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// Independent perturbation of every orientation angle `φ_1 … φ_N`.
    PerStep,
    /// One perturbation of `α` per run; steps stay evenly spaced.
    PerRunAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Noise standard deviation as a fraction of π.
    pub spread_fraction: f64,
    pub master_seed: u64,
    pub samples_per_cell: usize,
    pub mode: NoiseMode,
}

impl NoiseModel {
    pub fn new(spread_fraction: f64, master_seed: u64) -> Self {
        NoiseModel {
            spread_fraction,
            master_seed,
            samples_per_cell: DEFAULT_SAMPLES_PER_CELL,
            mode: NoiseMode::PerStep,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spread_fraction >= 0.0 && self.spread_fraction.is_finite()) {
            return Err(Error::param("spread_fraction", "must be finite and >= 0"));
        }
        if self.samples_per_cell == 0 {
            return Err(Error::param("samples_per_cell", "must be >= 1"));
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.spread_fraction * PI
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Validity {
    Ok,
    /// `η = 4c/N > 1`; not computed.
    InvalidRegime,
    /// `η > 1` evaluated by analytic continuation; not physical.
    NonPhysical,
}

impl Validity {
    pub fn label(self) -> &'static str {
        match self {
            Validity::Ok => "ok",
            Validity::InvalidRegime => "invalid-regime",
            Validity::NonPhysical => "non-physical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub n_steps: usize,
    pub c: f64,
    /// Relative to the `c = 0` baseline, in `[−π, π)`.
    pub phase: Option<f64>,
    pub postselect_prob: Option<f64>,
    pub validity: Validity,
    /// Circular standard deviation of the noisy phases.
    pub stability: Option<f64>,
}

impl CellRecord {
    fn invalid(n_steps: usize, c: f64) -> Self {
        CellRecord {
            n_steps,
            c,
            phase: None,
            postselect_prob: None,
            validity: Validity::InvalidRegime,
            stability: None,
        }
    }

    pub fn is_computed(&self) -> bool {
        self.validity != Validity::InvalidRegime
    }

    /// Distance of the phase to the nearest of `{0, −π}` modulo 2π.
    pub fn quantization_error(&self) -> Option<f64> {
        self.phase.map(quantization_error)
    }
}

/// Distance of `phase` to the nearest multiple of π.
pub fn quantization_error(phase: f64) -> f64 {
    let d0 = principal(phase).abs();
    let d1 = principal(phase + PI).abs();
    d0.min(d1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeResult {
    pub grid: GridSpec,
    pub noise: Option<NoiseModel>,
    pub cells: Vec<CellRecord>,
}

impl LandscapeResult {
    pub fn cell(&self, n_steps: usize, c: f64) -> Option<&CellRecord> {
        self.cells
            .iter()
            .find(|r| r.n_steps == n_steps && (r.c - c).abs() < 1e-12)
    }
}

fn cell_regime(grid: &GridSpec, n: usize, c: f64) -> Option<(Regime, Validity)> {
    let eta = 4.0 * c / n as f64;
    if eta <= 1.0 {
        Some((Regime::Physical, Validity::Ok))
    } else if grid.analytic_continuation {
        Some((Regime::AnalyticContinuation, Validity::NonPhysical))
    } else {
        None
    }
}

/// Noiseless finite-N phase on every cell; `η > 1` cells are flagged.
pub fn grid_sweep(grid: &GridSpec) -> Result<LandscapeResult> {
    grid.validate()?;
    let alpha = grid.alpha();
    let cells = grid
        .cells()
        .into_par_iter()
        .map(|(n, c)| {
            let Some((regime, validity)) = cell_regime(grid, n, c) else {
                return Ok(CellRecord::invalid(n, c));
            };
            let p = ProtocolParams::with_regime(n, c, alpha, regime)?;
            let r = postselected_amplitude(&p)?;
            Ok(CellRecord {
                n_steps: n,
                c,
                phase: Some(r.phase),
                postselect_prob: Some(r.postselect_prob),
                validity,
                stability: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LandscapeResult {
        grid: *grid,
        noise: None,
        cells,
    })
}

/// Seed key of a `c` coordinate, stable against rounding in grid
/// construction.
fn c_key(c: f64) -> u64 {
    (c * 1e9).round() as i64 as u64
}

/// Circular mean and circular standard deviation of unit phasors.
///
/// Deviations are taken from the first sample, so identical inputs give a
/// mean equal to that sample and a deviation of exactly zero.
fn circular_stats(phases: &[f64]) -> (f64, f64) {
    let reference = phases[0];
    let (s, c) = phases.iter().fold((0.0, 0.0), |(s, c), p| {
        let d = principal(p - reference);
        (s + d.sin(), c + d.cos())
    });
    let mean = reference + s.atan2(c);
    // 1 − R accumulated directly keeps identical samples at exactly zero.
    let one_minus_r = phases
        .iter()
        .map(|p| 2.0 * (0.5 * principal(p - mean)).sin().powi(2))
        .sum::<f64>()
        / phases.len() as f64;
    let r = 1.0 - one_minus_r;
    let std = if r <= 0.0 {
        f64::INFINITY
    } else {
        (-2.0 * (-one_minus_r).ln_1p()).max(0.0).sqrt()
    };
    (mean, std)
}

/// Mean taken as an offset from the first value, so identical samples
/// reproduce it bit for bit.
fn offset_mean(xs: &[f64]) -> f64 {
    let x0 = xs[0];
    x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64
}

fn noisy_cell(grid: &GridSpec, noise: &NoiseModel, n: usize, c: f64) -> Result<CellRecord> {
    let Some((regime, validity)) = cell_regime(grid, n, c) else {
        return Ok(CellRecord::invalid(n, c));
    };
    let alpha = grid.alpha();
    let base = ProtocolParams::with_regime(n, c, alpha, regime)?;
    let sigma = noise.sigma();
    let mut phases = Vec::with_capacity(noise.samples_per_cell);
    let mut probs = Vec::with_capacity(noise.samples_per_cell);
    for s in 0..noise.samples_per_cell {
        let seed = derive_seed(noise.master_seed, &[n as u64, c_key(c), s as u64]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let result = match noise.mode {
            NoiseMode::PerStep => {
                let mut phis = base.angles();
                for phi in phis.iter_mut().skip(1) {
                    let xi: f64 = StandardNormal.sample(&mut rng);
                    *phi += sigma * xi;
                }
                postselected_amplitude_for_angles(&base, &phis)?
            }
            NoiseMode::PerRunAlpha => {
                let xi: f64 = StandardNormal.sample(&mut rng);
                let p = ProtocolParams::with_regime(n, c, alpha + sigma * xi, regime)?;
                let mut r = postselected_amplitude(&p)?;
                // Report against the nominal α, not the perturbed one.
                r.phase = wrap_phase(r.amplitude.arg() - baseline_phase(alpha));
                r
            }
        };
        probs.push(result.postselect_prob);
        if result.amplitude.norm() > ZERO_MODULUS {
            phases.push(result.phase);
        }
    }
    let (phase, stability) = if phases.is_empty() {
        (None, None)
    } else {
        let (mean, std) = circular_stats(&phases);
        (Some(wrap_phase(mean)), Some(std))
    };
    Ok(CellRecord {
        n_steps: n,
        c,
        phase,
        postselect_prob: Some(offset_mean(&probs)),
        validity,
        stability,
    })
}

/// Monte Carlo phase-noise ensemble on every cell.
///
/// Each sample perturbs the orientation angles by independent
/// `Normal(0, spread·π)` draws (or `α` once per run, see [`NoiseMode`]). The
/// cell phase is the circular mean of the sample phases and `stability` is
/// their circular standard deviation.
pub fn noise_ensemble(grid: &GridSpec, noise: &NoiseModel) -> Result<LandscapeResult> {
    grid.validate()?;
    noise.validate()?;
    let cells = grid
        .cells()
        .into_par_iter()
        .map(|(n, c)| noisy_cell(grid, noise, n, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(LandscapeResult {
        grid: *grid,
        noise: Some(*noise),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityCriteria {
    pub quantization_tol: f64,
    pub unstable_threshold: f64,
}

impl StabilityCriteria {
    pub fn new(quantization_tol: f64) -> Self {
        StabilityCriteria {
            quantization_tol,
            unstable_threshold: DEFAULT_UNSTABLE_THRESHOLD,
        }
    }
}

/// Aggregates over one set of rows (a whole result or one `N`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub cells: usize,
    pub computed: usize,
    /// `None` when no cell was computed.
    pub quantized_fraction: Option<f64>,
    pub unstable_fraction: Option<f64>,
    pub median_stability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NRow {
    pub n_steps: usize,
    pub summary: RegionSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub criteria: StabilityCriteria,
    pub overall: RegionSummary,
    pub per_n: Vec<NRow>,
    /// Smallest `N` from which every larger `N` in the grid has no unstable
    /// cell; `None` if even the largest `N` has one.
    pub stable_from_n: Option<usize>,
}

fn summarize<'a>(
    rows: impl Iterator<Item = &'a CellRecord>,
    crit: &StabilityCriteria,
) -> RegionSummary {
    let rows: Vec<&CellRecord> = rows.collect();
    let computed: Vec<&&CellRecord> = rows.iter().filter(|r| r.phase.is_some()).collect();
    let frac = |count: usize| (!computed.is_empty()).then(|| count as f64 / computed.len() as f64);
    let quantized = computed
        .iter()
        .filter(|r| r.quantization_error().unwrap() <= crit.quantization_tol)
        .count();
    let mut stabilities: Vec<f64> = computed.iter().filter_map(|r| r.stability).collect();
    let unstable = stabilities
        .iter()
        .filter(|&&s| s > crit.unstable_threshold)
        .count();
    stabilities.sort_by(f64::total_cmp);
    let median_stability = (!stabilities.is_empty()).then(|| {
        let m = stabilities.len() / 2;
        if stabilities.len() % 2 == 1 {
            stabilities[m]
        } else {
            0.5 * (stabilities[m - 1] + stabilities[m])
        }
    });
    RegionSummary {
        cells: rows.len(),
        computed: computed.len(),
        quantized_fraction: frac(quantized),
        unstable_fraction: (!stabilities.is_empty())
            .then(|| unstable as f64 / stabilities.len() as f64),
        median_stability,
    }
}

/// Quantization summary of any result, noisy or not.
pub fn quantization_summary(
    r: &LandscapeResult,
    crit: &StabilityCriteria,
    include: impl Fn(&CellRecord) -> bool,
) -> RegionSummary {
    summarize(r.cells.iter().filter(|c| include(c)), crit)
}

/// Stability report of a noise ensemble.
///
/// Fails with [`Error::MissingStability`] for a noiseless sweep. Only cells
/// accepted by `include` are counted (pass `|_| true` for all).
pub fn stability_report(
    r: &LandscapeResult,
    crit: &StabilityCriteria,
    include: impl Fn(&CellRecord) -> bool,
) -> Result<StabilityReport> {
    if r.noise.is_none()
        || r.cells
            .iter()
            .any(|c| c.phase.is_some() && c.stability.is_none())
    {
        return Err(Error::MissingStability);
    }
    let rows: Vec<&CellRecord> = r.cells.iter().filter(|c| include(c)).collect();
    let mut ns: Vec<usize> = rows.iter().map(|c| c.n_steps).collect();
    ns.dedup();
    let per_n: Vec<NRow> = ns
        .iter()
        .map(|&n| NRow {
            n_steps: n,
            summary: summarize(rows.iter().copied().filter(|c| c.n_steps == n), crit),
        })
        .collect();
    let mut stable_from_n = None;
    for row in per_n.iter().rev() {
        if row.summary.unstable_fraction.unwrap_or(0.0) > 0.0 {
            break;
        }
        stable_from_n = Some(row.n_steps);
    }
    Ok(StabilityReport {
        criteria: *crit,
        overall: summarize(rows.iter().copied(), crit),
        per_n,
        stable_from_n,
    })
}
