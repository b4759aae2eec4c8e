//! Finite-N measurement sequences.
//!
//! A protocol measures along `n_k = (θ, φ_k)`, `φ_k = k·ε`, `ε = 2α/N`, with
//! per-step strength `η = 4c/N`. Post-selecting every readout on `+` gives
//! the amplitude
//!
//! ```text
//! ⟨ψ₀| M₊(n_{N−1}) ⋯ M₊(n_1) |ψ₀⟩ = ⟨↑| δR (M₊(ẑ) δR)^{N−1} |↑⟩
//! ```
//!
//! which is evaluated here as an ordered product with exact power-of-two
//! rescaling, so large `c·N` never underflows.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{baseline_phase, relative_phase_curve};
use crate::error::{Error, Result};
use crate::measurement::{
    delta_r, kraus_oriented, kraus_z, kraus_z_plus_continued, rotation, Orientation, Readout,
};
use crate::qmat::{arg_unwrap, wrap_phase, Complex, Mat2, Vec2};
use crate::seed::derive_seed;

/// Overlaps below this leave the Pancharatnam phase undefined.
pub const OVERLAP_FLOOR: f64 = 1e-12;

/// Largest `N` accepted by [`enumerate_records`].
pub const MAX_ENUMERATION_STEPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Physical,
    /// `η > 1` allowed, with `√(1−η)` continued to the imaginary axis.
    /// Results are not physical.
    AnalyticContinuation,
}

/// One closed measurement sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    n_steps: usize,
    c: f64,
    alpha: f64,
    theta: f64,
    regime: Regime,
}

impl ProtocolParams {
    /// Physical protocol; fails with [`Error::InvalidEta`] when `4c/N > 1`.
    pub fn new(n_steps: usize, c: f64, alpha: f64) -> Result<Self> {
        ProtocolParams::with_regime(n_steps, c, alpha, Regime::Physical)
    }

    pub fn from_winding(n_steps: usize, c: f64, winding: f64) -> Result<Self> {
        ProtocolParams::new(n_steps, c, winding * PI)
    }

    pub fn with_regime(n_steps: usize, c: f64, alpha: f64, regime: Regime) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::param("n_steps", "must be >= 1"));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::param(
                "c",
                format!("must be finite and >= 0, got {c}"),
            ));
        }
        if !alpha.is_finite() {
            return Err(Error::param("alpha", "must be finite"));
        }
        let p = ProtocolParams {
            n_steps,
            c,
            alpha,
            theta: FRAC_PI_2,
            regime,
        };
        if regime == Regime::Physical && p.eta() > 1.0 {
            return Err(Error::InvalidEta {
                n_steps,
                c,
                eta: p.eta(),
            });
        }
        Ok(p)
    }

    /// Replaces the fixed azimuthal angle (default π/2).
    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn winding(&self) -> f64 {
        self.alpha / PI
    }

    /// Per-step strength `4c/N`.
    pub fn eta(&self) -> f64 {
        4.0 * self.c / self.n_steps as f64
    }

    /// Per-step polar increment `2α/N`.
    pub fn epsilon(&self) -> f64 {
        2.0 * self.alpha / self.n_steps as f64
    }

    /// Noiseless orientation angles `φ_0 … φ_N`.
    pub fn angles(&self) -> Vec<f64> {
        let eps = self.epsilon();
        (0..=self.n_steps).map(|k| k as f64 * eps).collect()
    }

    fn is_equatorial(&self) -> bool {
        self.theta == FRAC_PI_2
    }

    fn plus_z(&self) -> Mat2 {
        match self.regime {
            Regime::Physical => kraus_z(self.eta()).expect("validated").plus,
            Regime::AnalyticContinuation => kraus_z_plus_continued(self.eta()),
        }
    }

    fn require_physical(&self) -> Result<()> {
        if self.eta() > 1.0 {
            Err(Error::InvalidEta {
                n_steps: self.n_steps,
                c: self.c,
                eta: self.eta(),
            })
        } else {
            Ok(())
        }
    }
}

/// Post-selected (all `+`) amplitude of one protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeophaseResult {
    /// Mantissa: the true amplitude is `amplitude · e^{log_scale}`.
    pub amplitude: Complex,
    /// Phase relative to the `c = 0` baseline, in `[−π, π)`.
    pub phase: f64,
    pub postselect_prob: f64,
    pub log_scale: f64,
}

impl GeophaseResult {
    fn from_mantissa(amplitude: Complex, log_scale: f64, alpha: f64) -> Self {
        let postselect_prob = (amplitude.norm_sqr().ln() + 2.0 * log_scale).exp();
        GeophaseResult {
            amplitude,
            phase: wrap_phase(amplitude.arg() - baseline_phase(alpha)),
            postselect_prob: if amplitude.norm_sqr() > 0.0 {
                postselect_prob
            } else {
                0.0
            },
            log_scale,
        }
    }

    /// Rescaled amplitude (may underflow to zero).
    pub fn amplitude_value(&self) -> Complex {
        self.amplitude * self.log_scale.exp()
    }
}

/// Running product with power-of-two normalisation.
#[derive(Debug, Clone, Copy)]
struct ScaledProduct {
    m: Mat2,
    log2: i32,
}

impl ScaledProduct {
    fn new(m: Mat2) -> Self {
        let mut p = ScaledProduct { m, log2: 0 };
        p.renormalize();
        p
    }

    fn left_mul(&mut self, a: Mat2) {
        self.m = a * self.m;
        self.renormalize();
    }

    fn renormalize(&mut self) {
        let max = self.m.max_norm();
        if max > 0.0 && max.is_finite() && !(0.5..2.0).contains(&max) {
            let e = max.log2().floor() as i32;
            self.m = self.m.scale_real(2f64.powi(-e));
            self.log2 += e;
        }
    }

    fn log_scale(&self) -> f64 {
        self.log2 as f64 * LN_2
    }
}

/// Post-selected amplitude for explicit orientation angles `φ_0 … φ_N`.
///
/// Step `k` rotates by `φ_k − φ_{k−1}`; noiseless protocols pass
/// [`ProtocolParams::angles`]. For `θ = π/2` the δR factorisation is used,
/// otherwise the oriented Kraus operators are multiplied directly.
pub fn postselected_amplitude_for_angles(
    p: &ProtocolParams,
    phis: &[f64],
) -> Result<GeophaseResult> {
    if phis.len() != p.n_steps + 1 {
        return Err(Error::param(
            "phis",
            format!("expected {} angles, got {}", p.n_steps + 1, phis.len()),
        ));
    }
    if p.regime == Regime::Physical {
        p.require_physical()?;
    }
    let plus = p.plus_z();
    let (mantissa, log_scale) = if p.is_equatorial() {
        let mut acc = ScaledProduct::new(delta_r(phis[1] - phis[0]));
        for k in 2..=p.n_steps {
            acc.left_mul(delta_r(phis[k] - phis[k - 1]) * plus);
        }
        (acc.m.m00, acc.log_scale())
    } else {
        let psi0 = Vec2::plus_x();
        let mut acc = ScaledProduct::new(Mat2::identity());
        for &phi in &phis[1..p.n_steps] {
            let u = rotation(Orientation::new(p.theta, phi));
            acc.left_mul(u.dagger() * plus * u);
        }
        (psi0.inner(&(acc.m * psi0)), acc.log_scale())
    };
    Ok(GeophaseResult::from_mantissa(mantissa, log_scale, p.alpha))
}

/// Post-selected amplitude `⟨↑| δR (M₊ δR)^{N−1} |↑⟩`.
pub fn postselected_amplitude(p: &ProtocolParams) -> Result<GeophaseResult> {
    postselected_amplitude_for_angles(p, &p.angles())
}

/// Probability of post-selecting every readout on `+`.
pub fn postselection_probability(p: &ProtocolParams) -> Result<f64> {
    Ok(postselected_amplitude(p)?.postselect_prob)
}

/// One stochastic readout record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub readouts: Vec<Readout>,
    /// Normalised; the zero vector for impossible records.
    pub final_state: Vec2,
    pub probability: f64,
    /// `arg⟨ψ₀|ψ_final⟩`, absent when the overlap vanishes.
    pub pancharatnam_phase: Option<f64>,
}

impl TrajectoryRecord {
    pub fn readout_string(&self) -> String {
        self.readouts.iter().map(|r| r.symbol()).collect()
    }

    pub fn is_all_plus(&self) -> bool {
        self.readouts.iter().all(|&r| r == Readout::Plus)
    }
}

/// Kraus pairs of the record steps: weak measurements at `n_1 … n_{N−1}`
/// and a closing projective (`η = 1`) readout along `n_N`.
fn record_steps(p: &ProtocolParams) -> Result<Vec<[Mat2; 2]>> {
    p.require_physical()?;
    let angles = p.angles();
    let weak = kraus_z(p.eta())?;
    let strong = kraus_z(1.0)?;
    Ok((1..=p.n_steps)
        .map(|k| {
            let kraus = if k < p.n_steps { weak } else { strong };
            let pair = kraus.oriented(Orientation::new(p.theta, angles[k]));
            [pair.plus, pair.minus]
        })
        .collect())
}

fn finish_record(readouts: Vec<Readout>, psi: Vec2, probability: f64) -> TrajectoryRecord {
    let psi0 = Vec2::plus_x();
    let final_state = psi
        .normalized()
        .unwrap_or(Vec2::new(Complex::default(), Complex::default()));
    let overlap = psi0.inner(&final_state);
    TrajectoryRecord {
        readouts,
        final_state,
        probability,
        pancharatnam_phase: (overlap.norm() >= OVERLAP_FLOOR).then(|| wrap_phase(overlap.arg())),
    }
}

/// Samples one readout record by Born probabilities from `(|↑⟩+|↓⟩)/√2`.
///
/// The record has `N` readouts: weak steps `1 … N−1` and a projective
/// closing readout along the final axis, so that the all-`+` record has
/// probability exactly [`postselection_probability`].
pub fn sample_trajectory(p: &ProtocolParams, seed: u64) -> Result<TrajectoryRecord> {
    let steps = record_steps(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_with(&steps, &mut rng))
}

fn sample_with<R: Rng>(steps: &[[Mat2; 2]], rng: &mut R) -> TrajectoryRecord {
    let mut psi = Vec2::plus_x();
    let mut probability = 1.0;
    let mut readouts = Vec::with_capacity(steps.len());
    for [plus, minus] in steps {
        let after_plus = *plus * psi;
        let p_plus = after_plus.norm_sqr();
        let u: f64 = rng.random();
        let (r, next, p_step) = if u < p_plus {
            (Readout::Plus, after_plus, p_plus)
        } else {
            let after_minus = *minus * psi;
            (Readout::Minus, after_minus, after_minus.norm_sqr())
        };
        readouts.push(r);
        probability *= p_step;
        psi = next.normalized().unwrap_or(next);
    }
    finish_record(readouts, psi, probability)
}

/// `count` independent records; record `i` uses the substream seed
/// `derive_seed(master_seed, [i])`.
pub fn sample_trajectories(
    p: &ProtocolParams,
    master_seed: u64,
    count: usize,
) -> Result<Vec<TrajectoryRecord>> {
    let steps = record_steps(p)?;
    Ok((0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, &[i as u64]));
            sample_with(&steps, &mut rng)
        })
        .collect())
}

/// Every one of the `2^N` readout records with its Born probability, in
/// binary order (bit `k` set means readout `k` was `−`).
pub fn enumerate_records(p: &ProtocolParams) -> Result<Vec<TrajectoryRecord>> {
    if p.n_steps > MAX_ENUMERATION_STEPS {
        return Err(Error::param(
            "n_steps",
            format!("enumeration limited to N <= {MAX_ENUMERATION_STEPS}"),
        ));
    }
    let steps = record_steps(p)?;
    Ok((0..1u64 << p.n_steps)
        .map(|bits| {
            let mut psi = Vec2::plus_x();
            let readouts: Vec<Readout> = steps
                .iter()
                .enumerate()
                .map(|(k, [plus, minus])| {
                    let r = if bits >> k & 1 == 0 {
                        Readout::Plus
                    } else {
                        Readout::Minus
                    };
                    psi = if r == Readout::Plus {
                        *plus * psi
                    } else {
                        *minus * psi
                    };
                    r
                })
                .collect();
            let probability = psi.norm_sqr();
            finish_record(readouts, psi, probability)
        })
        .collect())
}

/// Finite-N phase versus `c`, relative to the `c = 0` baseline.
///
/// In the physical regime any grid point with `4c/N > 1` fails with
/// [`Error::InvalidEta`] naming that `c`.
pub fn finite_n_phase_curve(
    n_steps: usize,
    alpha: f64,
    c_grid: &[f64],
    regime: Regime,
) -> Result<Vec<f64>> {
    if regime == Regime::Physical {
        if let Some(&c) = c_grid.iter().find(|&&c| 4.0 * c / n_steps as f64 > 1.0) {
            return Err(Error::InvalidEta {
                n_steps,
                c,
                eta: 4.0 * c / n_steps as f64,
            });
        }
    }
    relative_phase_curve(c_grid, |c| {
        let p = ProtocolParams::with_regime(n_steps, c, alpha, regime)?;
        Ok(postselected_amplitude(&p)?.amplitude)
    })
}

/// Finite-N phase versus `alpha` at fixed `c`, unwrapped along the grid.
pub fn finite_n_alpha_curve(
    n_steps: usize,
    c: f64,
    alpha_grid: &[f64],
    regime: Regime,
) -> Result<Vec<f64>> {
    if alpha_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if alpha_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("alpha_grid", "grid must be ascending"));
    }
    let amps = alpha_grid
        .iter()
        .map(|&alpha| {
            let p = ProtocolParams::with_regime(n_steps, c, alpha, regime)?;
            Ok(postselected_amplitude(&p)?.amplitude)
        })
        .collect::<Result<Vec<_>>>()?;
    arg_unwrap(&amps)
}

/// Explicit per-step route, independent of the δR factorisation: conjugates
/// `M(ẑ, +)` into every orientation and sandwiches the product with `ψ₀`.
pub fn postselected_amplitude_direct(p: &ProtocolParams) -> Result<Complex> {
    p.require_physical()?;
    let angles = p.angles();
    let psi0 = Vec2::plus_x();
    let mut psi = psi0;
    for &phi in &angles[1..p.n_steps] {
        psi = kraus_oriented(p.eta(), Orientation::new(p.theta, phi), Readout::Plus)? * psi;
    }
    Ok(psi0.inner(&psi))
}
