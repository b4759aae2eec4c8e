//! Quasicontinuous (N → ∞) post-selected amplitude
//!
//! ```text
//! A(c, α) = e^{−iα−c} · [cosh τ + c·sinh(τ)/τ],   τ = √(c² − α²)
//! ```
//!
//! For `c < α` the bracket is the real function `cos s + c·sin(s)/s` with
//! `s = √(α² − c²)`; for `c ≥ α` it is real and at least one. The geometric
//! phase is therefore `−α` plus `0` or `π`, and critical strengths are the
//! simple zeros of the bracket on `(0, α)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{arg_unwrap, wrap_phase, Complex};

/// Default scan step in `c` for root bracketing.
pub const DEFAULT_RESOLUTION: f64 = 1e-3;
/// Default bisection tolerance.
pub const DEFAULT_REFINE_TOL: f64 = 1e-10;
/// Below this `|τ|` the removable singularity is evaluated by series.
pub const SERIES_CUTOFF: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticParams {
    pub c: f64,
    pub alpha: f64,
}

impl AnalyticParams {
    pub fn new(c: f64, alpha: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::param(
                "c",
                format!("must be finite and >= 0, got {c}"),
            ));
        }
        if !alpha.is_finite() {
            return Err(Error::param("alpha", "must be finite"));
        }
        Ok(AnalyticParams { c, alpha })
    }

    pub fn from_winding(c: f64, winding: f64) -> Result<Self> {
        AnalyticParams::new(c, winding * PI)
    }

    pub fn winding(&self) -> f64 {
        self.alpha / PI
    }
}

/// Direction of the phase step at a critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Jump {
    #[serde(rename = "0->-pi")]
    ZeroToMinusPi,
    #[serde(rename = "-pi->0")]
    MinusPiToZero,
}

impl Jump {
    fn for_index(index: usize) -> Jump {
        if index.is_multiple_of(2) {
            Jump::ZeroToMinusPi
        } else {
            Jump::MinusPiToZero
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Jump::ZeroToMinusPi => "0->-pi",
            Jump::MinusPiToZero => "-pi->0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub c_crit: f64,
    pub winding: f64,
    /// Ordinal among the roots, ascending in `c`.
    pub index: usize,
    pub jump: Jump,
}

/// Principal square root of `c² − α²`.
pub fn tau(c: f64, alpha: f64) -> Complex {
    let d = c * c - alpha * alpha;
    if d >= 0.0 {
        Complex::new(d.sqrt(), 0.0)
    } else {
        Complex::new(0.0, (-d).sqrt())
    }
}

/// `cosh τ + c·sinh(τ)/τ` by series in `τ²` (exact to O(τ⁶)).
fn bracket_series(c: f64, tau_sq: f64) -> f64 {
    let cosh = 1.0 + tau_sq / 2.0 + tau_sq * tau_sq / 24.0;
    let sinhc = 1.0 + tau_sq / 6.0 + tau_sq * tau_sq / 120.0;
    cosh + c * sinhc
}

/// `cosh τ + c·sinh(τ)/τ` evaluated in closed form.
fn bracket_direct(c: f64, alpha: f64) -> f64 {
    let d = c * c - alpha * alpha;
    if d < 0.0 {
        let s = (-d).sqrt();
        s.cos() + c * s.sin() / s
    } else {
        let t = d.sqrt();
        t.cosh() + c * t.sinh() / t
    }
}

/// The real bracket `cosh τ + c·sinh(τ)/τ`. Overflows to `+∞` for very large
/// `c − α`; use [`amplitude_analytic`] for scaled values.
pub fn bracket(c: f64, alpha: f64) -> f64 {
    let tau_sq = c * c - alpha * alpha;
    if tau_sq.abs() < SERIES_CUTOFF * SERIES_CUTOFF {
        bracket_series(c, tau_sq)
    } else {
        bracket_direct(c, alpha)
    }
}

/// `e^{−c}·bracket(c, α)`, stable for large `c`.
fn scaled_bracket(c: f64, alpha: f64) -> f64 {
    let tau_sq = c * c - alpha * alpha;
    if tau_sq > 400.0 {
        let t = tau_sq.sqrt();
        let ct = c / t;
        0.5 * (t - c).exp() * (1.0 + ct) + 0.5 * (-t - c).exp() * (1.0 - ct)
    } else {
        (-c).exp() * bracket(c, alpha)
    }
}

/// Closed-form post-selected amplitude `A(c, α)`.
pub fn amplitude_analytic(p: AnalyticParams) -> Complex {
    Complex::from_polar(scaled_bracket(p.c, p.alpha), -p.alpha)
}

/// Phase of `A(0, α) = e^{−iα}cos α`, the reference for relative phases.
pub fn baseline_phase(alpha: f64) -> f64 {
    let flip = if alpha.cos() < 0.0 { PI } else { 0.0 };
    wrap_phase(-alpha + flip)
}

fn check_grid(grid: &[f64], name: &'static str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::param(name, "grid values must be finite"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param(name, "grid must be ascending"));
    }
    Ok(())
}

/// Unwraps `amplitude(c)` along an ascending nonnegative `c` grid and
/// reports it relative to the `c = 0` baseline.
///
/// When the grid starts above zero, a lead-in from `c = 0` at
/// [`DEFAULT_RESOLUTION`] is unwrapped first so the branch is anchored at the
/// baseline, not at the first grid point.
pub(crate) fn relative_phase_curve<F>(c_grid: &[f64], mut amplitude: F) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<Complex>,
{
    check_grid(c_grid, "c_grid")?;
    if c_grid[0] < 0.0 {
        return Err(Error::param("c_grid", "values must be nonnegative"));
    }
    let lead_in: Vec<f64> = if c_grid[0] > 0.0 {
        let steps = (c_grid[0] / DEFAULT_RESOLUTION).ceil() as usize;
        (0..steps).map(|i| i as f64 * DEFAULT_RESOLUTION).collect()
    } else {
        Vec::new()
    };
    let samples = lead_in
        .iter()
        .chain(c_grid)
        .map(|&c| amplitude(c))
        .collect::<Result<Vec<_>>>()?;
    // The first unwrapped sample is always c = 0.
    let phases = arg_unwrap(&samples)?;
    let base = phases[0];
    Ok(phases[lead_in.len()..].iter().map(|p| p - base).collect())
}

/// Analytic phase curve in `c` at fixed `alpha`, relative to the `c = 0`
/// baseline: starts at 0 and steps by −π at each critical point.
pub fn phase_analytic(alpha: f64, c_grid: &[f64]) -> Result<Vec<f64>> {
    relative_phase_curve(c_grid, |c| {
        Ok(amplitude_analytic(AnalyticParams { c, alpha }))
    })
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All critical strengths for total angle `alpha`, ascending.
///
/// Scans the bracket on `(0, α)` at `resolution`, brackets each sign change
/// and refines it by bisection to `refine_tol`.
pub fn find_critical(alpha: f64, resolution: f64, refine_tol: f64) -> Result<Vec<CriticalPoint>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param("alpha", format!("must be > 0, got {alpha}")));
    }
    if !(resolution > 0.0 && resolution <= 0.01) {
        return Err(Error::param("resolution", "must lie in (0, 0.01]"));
    }
    if !(refine_tol > 0.0 && refine_tol <= 1e-9) {
        return Err(Error::param("refine_tol", "must lie in (0, 1e-9]"));
    }
    let f = |c: f64| bracket(c, alpha);
    let steps = (alpha / resolution).ceil() as usize;
    let grid = (0..=steps).map(|i| (i as f64 * resolution).min(alpha));

    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for c in grid {
        let v = f(c);
        if let Some((pc, pv)) = prev {
            if v == 0.0 && c < alpha {
                roots.push(c);
            } else if pv != 0.0 && (pv < 0.0) != (v < 0.0) {
                roots.push(bisect(f, pc, c, refine_tol));
            }
        }
        prev = Some((c, v));
    }
    let winding = alpha / PI;
    Ok(roots
        .into_iter()
        .filter(|&c| c > 0.0 && c < alpha)
        .enumerate()
        .map(|(index, c_crit)| CriticalPoint {
            c_crit,
            winding,
            index,
            jump: Jump::for_index(index),
        })
        .collect())
}

/// Critical strengths with the default scan resolution and tolerance.
pub fn critical_points(alpha: f64) -> Result<Vec<CriticalPoint>> {
    find_critical(alpha, DEFAULT_RESOLUTION, DEFAULT_REFINE_TOL)
}

/// Unwrapped phase of `A(c, α)` along an ascending positive `alpha` grid.
pub fn sweep_alpha(c: f64, alpha_grid: &[f64]) -> Result<Vec<f64>> {
    check_grid(alpha_grid, "alpha_grid")?;
    if alpha_grid[0] <= 0.0 {
        return Err(Error::param("alpha_grid", "values must be positive"));
    }
    if c.is_nan() || c < 0.0 {
        return Err(Error::param("c", "must be >= 0"));
    }
    let amps: Vec<Complex> = alpha_grid
        .iter()
        .map(|&alpha| amplitude_analytic(AnalyticParams { c, alpha }))
        .collect();
    arg_unwrap(&amps)
}

/// Number of sign changes of the bracket along `alpha_grid` at fixed `c`,
/// i.e. the number of π-steps in the corresponding [`sweep_alpha`] curve.
pub fn oscillation_count(c: f64, alpha_grid: &[f64]) -> usize {
    alpha_grid
        .iter()
        .map(|&a| bracket(c, a))
        .filter(|v| *v != 0.0)
        .collect::<Vec<_>>()
        .windows(2)
        .filter(|w| (w[0] < 0.0) != (w[1] < 0.0))
        .count()
}
