//! The six subcommands. Each resolves its parameters (validating all of them
//! before computing anything), runs, and returns its manifest and outputs.

use std::f64::consts::PI;

use geophase_core::analytic::{self, amplitude_analytic, bracket};
use geophase_core::landscape::{self, LandscapeResult, StabilityCriteria};
use geophase_core::trajectory::{self, postselected_amplitude, sample_trajectories};
use geophase_core::{AnalyticParams, GridSpec, NoiseModel, ProtocolParams, Regime};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{format_grid, parse_grid, FileConfig, NoiseModeArg};
use crate::output::{Emission, Table};
use crate::plot::{self, Heatmap, LinePlot, Series};
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const DEFAULT_GRID: &str = "10:500:10,0.5:9.5:0.5";

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn finite(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(format!("--{name} must be finite, got {x}")))
    }
}

fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if finite(name, x)? > 0.0 {
        Ok(x)
    } else {
        Err(invalid(format!("--{name} must be > 0, got {x}")))
    }
}

fn nonnegative(name: &str, x: f64) -> Result<f64, CliError> {
    if finite(name, x)? >= 0.0 {
        Ok(x)
    } else {
        Err(invalid(format!("--{name} must be >= 0, got {x}")))
    }
}

fn single<T: Copy>(name: &str, v: &Option<Vec<T>>, default: T) -> Result<T, CliError> {
    match v.as_deref() {
        None => Ok(default),
        Some([x]) => Ok(*x),
        Some(_) => Err(invalid(format!("--{name} takes a single value here"))),
    }
}

fn nonempty<T: Clone>(name: &str, v: &Option<Vec<T>>, default: &[T]) -> Result<Vec<T>, CliError> {
    match v {
        None => Ok(default.to_vec()),
        Some(v) if v.is_empty() => Err(invalid(format!("--{name} needs at least one value"))),
        Some(v) => Ok(v.clone()),
    }
}

/// `step, 2·step, …` up to `max` inclusive.
fn positive_grid(step: f64, max: f64) -> Vec<f64> {
    let n = (max / step + 1e-9).floor() as usize;
    (1..=n).map(|k| k as f64 * step).collect()
}

/// `0, step, …` up to `max` inclusive.
fn zero_grid(step: f64, max: f64) -> Vec<f64> {
    let n = (max / step + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * step).collect()
}

fn manifest(command: &str, cfg: &FileConfig) -> FileConfig {
    FileConfig {
        command: Some(command.to_string()),
        version: Some(VERSION.to_string()),
        format: cfg.format,
        plot: cfg.plot,
        ..FileConfig::default()
    }
}

fn want_plot(cfg: &FileConfig) -> bool {
    cfg.plot.unwrap_or(false)
}

fn core_err(e: geophase_core::Error) -> CliError {
    CliError::Validation(e.to_string())
}

pub fn analytic(cfg: &FileConfig) -> Result<(FileConfig, Emission), CliError> {
    let winding = positive("winding", single("winding", &cfg.winding, 1.0)?)?;
    let alpha = winding * PI;
    let mut m = manifest("analytic", cfg);
    m.winding = Some(vec![winding]);

    if cfg.vs_alpha.unwrap_or(false) {
        let cs = nonempty("c", &cfg.c, &[1.0, 3.0])?;
        for &c in &cs {
            nonnegative("c", c)?;
        }
        let alpha_max = positive("alpha-max", cfg.alpha_max.unwrap_or(alpha))?;
        let alpha_step = positive("alpha-step", cfg.alpha_step.unwrap_or(0.01))?;
        if alpha_step > alpha_max {
            return Err(invalid("--alpha-step exceeds --alpha-max"));
        }
        let alphas = positive_grid(alpha_step, alpha_max);
        m.vs_alpha = Some(true);
        m.c = Some(cs.clone());
        m.alpha_max = Some(alpha_max);
        m.alpha_step = Some(alpha_step);

        let mut table = Table::new(&[
            "c",
            "alpha",
            "phase",
            "amplitude_re",
            "amplitude_im",
            "bracket",
        ]);
        let mut series = Vec::new();
        for &c in &cs {
            let phases = analytic::sweep_alpha(c, &alphas).map_err(core_err)?;
            for (&a, &ph) in alphas.iter().zip(&phases) {
                let amp = amplitude_analytic(AnalyticParams { c, alpha: a });
                table.push(vec![
                    c.into(),
                    a.into(),
                    ph.into(),
                    amp.re.into(),
                    amp.im.into(),
                    bracket(c, a).into(),
                ]);
            }
            series.push(Series {
                label: format!("c={c}"),
                points: alphas.iter().copied().zip(phases).collect(),
            });
        }
        let svg = want_plot(cfg).then(|| {
            plot::line_plot(&LinePlot {
                title: "analytic phase vs alpha",
                x_label: "alpha",
                y_label: "phase (rad)",
                series,
                markers: false,
            })
        });
        return Ok((
            m,
            Emission {
                table,
                extras: Vec::new(),
                svg,
            },
        ));
    }

    let c_max = nonnegative("c-max", cfg.c_max.unwrap_or(4.0))?;
    let c_step = positive("c-step", cfg.c_step.unwrap_or(1e-3))?;
    m.c_max = Some(c_max);
    m.c_step = Some(c_step);
    let cs = zero_grid(c_step, c_max);
    let criticals: Vec<_> = analytic::critical_points(alpha)
        .map_err(core_err)?
        .into_iter()
        .filter(|p| p.c_crit <= c_max)
        .collect();
    let phases = analytic::phase_analytic(alpha, &cs).map_err(core_err)?;

    let mut table = Table::new(&["c", "phase", "amplitude_re", "amplitude_im", "bracket"]);
    for (&c, &ph) in cs.iter().zip(&phases) {
        let amp = amplitude_analytic(AnalyticParams { c, alpha });
        table.push(vec![
            c.into(),
            ph.into(),
            amp.re.into(),
            amp.im.into(),
            bracket(c, alpha).into(),
        ]);
    }
    let svg = want_plot(cfg).then(|| {
        plot::line_plot(&LinePlot {
            title: &format!("analytic phase, W={winding}"),
            x_label: "c",
            y_label: "phase relative to c=0 (rad)",
            series: vec![Series {
                label: format!("W={winding}"),
                points: cs.iter().copied().zip(phases.iter().copied()).collect(),
            }],
            markers: false,
        })
    });
    Ok((
        m,
        Emission {
            table,
            extras: vec![("criticals", json!(criticals))],
            svg,
        },
    ))
}

pub fn critical(cfg: &FileConfig) -> Result<(FileConfig, Emission), CliError> {
    let windings = nonempty("winding", &cfg.winding, &[1.0, 2.0, 3.0, 4.0, 5.0])?;
    for &w in &windings {
        positive("winding", w)?;
    }
    let c_max = cfg.c_max.map(|c| nonnegative("c-max", c)).transpose()?;
    let mut m = manifest("critical", cfg);
    m.winding = Some(windings.clone());
    m.c_max = c_max;

    let mut table = Table::new(&["winding", "index", "c_crit", "jump"]);
    let mut points = Vec::new();
    for &w in &windings {
        for p in analytic::critical_points(w * PI).map_err(core_err)? {
            if c_max.is_some_and(|cm| p.c_crit > cm) {
                continue;
            }
            table.push(vec![
                w.into(),
                p.index.into(),
                p.c_crit.into(),
                p.jump.label().into(),
            ]);
            points.push((w, p.c_crit));
        }
    }
    let svg = want_plot(cfg).then(|| {
        plot::line_plot(&LinePlot {
            title: "critical strengths",
            x_label: "winding W",
            y_label: "c_crit",
            series: vec![Series {
                label: "roots".into(),
                points,
            }],
            markers: true,
        })
    });
    Ok((
        m,
        Emission {
            table,
            extras: Vec::new(),
            svg,
        },
    ))
}

fn regime(cfg: &FileConfig) -> Regime {
    if cfg.allow_analytic_continuation.unwrap_or(false) {
        Regime::AnalyticContinuation
    } else {
        Regime::Physical
    }
}

pub fn finite_n(cfg: &FileConfig) -> Result<(FileConfig, Emission), CliError> {
    let ns = nonempty("n-steps", &cfg.n_steps, &[100])?;
    let cs = nonempty("c", &cfg.c, &[1.0])?;
    let winding = positive("winding", single("winding", &cfg.winding, 1.0)?)?;
    let alpha_max = positive("alpha-max", cfg.alpha_max.unwrap_or(winding * PI))?;
    let alpha_step = positive("alpha-step", cfg.alpha_step.unwrap_or(0.01))?;
    if alpha_step > alpha_max {
        return Err(invalid("--alpha-step exceeds --alpha-max"));
    }
    if ns.contains(&0) {
        return Err(invalid("--n-steps must be >= 1"));
    }
    for &c in &cs {
        nonnegative("c", c)?;
    }
    let regime = regime(cfg);
    let pairs: Vec<(usize, f64)> = ns
        .iter()
        .flat_map(|&n| cs.iter().map(move |&c| (n, c)))
        .collect();
    if regime == Regime::Physical {
        let bad: Vec<String> = pairs
            .iter()
            .filter(|(n, c)| 4.0 * c / *n as f64 > 1.0)
            .map(|(n, c)| format!("N={n} c={c} (eta={})", 4.0 * c / *n as f64))
            .collect();
        if !bad.is_empty() {
            return Err(invalid(format!(
                "eta = 4c/N exceeds 1 for {}; pass --allow-analytic-continuation to compute them as non-physical",
                bad.join(", ")
            )));
        }
    }
    let mut m = manifest("finite-n", cfg);
    m.n_steps = Some(ns);
    m.c = Some(cs);
    m.winding = Some(vec![winding]);
    m.alpha_max = Some(alpha_max);
    m.alpha_step = Some(alpha_step);
    m.allow_analytic_continuation = Some(regime == Regime::AnalyticContinuation);
    let alphas = positive_grid(alpha_step, alpha_max);

    let computed = pairs
        .par_iter()
        .map(|&(n, c)| {
            let unwrapped = trajectory::finite_n_alpha_curve(n, c, &alphas, regime)?;
            let points = alphas
                .iter()
                .map(|&a| postselected_amplitude(&ProtocolParams::with_regime(n, c, a, regime)?))
                .collect::<geophase_core::Result<Vec<_>>>()?;
            Ok((n, c, unwrapped, points))
        })
        .collect::<geophase_core::Result<Vec<_>>>()
        .map_err(core_err)?;

    let mut table = Table::new(&[
        "n_steps",
        "c",
        "alpha",
        "phase",
        "phase_unwrapped",
        "amplitude_re",
        "amplitude_im",
        "postselect_prob",
        "validity",
    ]);
    let mut series = Vec::new();
    for (n, c, unwrapped, points) in computed {
        let validity = if 4.0 * c / n as f64 > 1.0 {
            "non-physical"
        } else {
            "ok"
        };
        for ((&a, &u), r) in alphas.iter().zip(&unwrapped).zip(&points) {
            let amp = r.amplitude_value();
            table.push(vec![
                n.into(),
                c.into(),
                a.into(),
                r.phase.into(),
                u.into(),
                amp.re.into(),
                amp.im.into(),
                r.postselect_prob.into(),
                validity.into(),
            ]);
        }
        series.push(Series {
            label: format!("N={n} c={c}"),
            points: alphas
                .iter()
                .copied()
                .zip(points.iter().map(|r| r.phase))
                .collect(),
        });
    }
    let svg = want_plot(cfg).then(|| {
        plot::line_plot(&LinePlot {
            title: "finite-N phase vs alpha",
            x_label: "alpha",
            y_label: "phase relative to c=0 (rad)",
            series,
            markers: false,
        })
    });
    Ok((
        m,
        Emission {
            table,
            extras: Vec::new(),
            svg,
        },
    ))
}

fn grid_spec(cfg: &FileConfig, m: &mut FileConfig) -> Result<GridSpec, CliError> {
    let (n_range, c_range) = parse_grid(cfg.grid.as_deref().unwrap_or(DEFAULT_GRID))?;
    let winding = positive("winding", single("winding", &cfg.winding, 1.0)?)?;
    let mut g = GridSpec::new(n_range, c_range, winding);
    g.analytic_continuation = regime(cfg) == Regime::AnalyticContinuation;
    g.validate().map_err(core_err)?;
    m.grid = Some(format_grid(&n_range, &c_range));
    m.winding = Some(vec![winding]);
    m.allow_analytic_continuation = Some(g.analytic_continuation);
    Ok(g)
}

fn landscape_table(r: &LandscapeResult) -> Table {
    let mut table = Table::new(&[
        "n_steps",
        "c",
        "phase",
        "postselect_prob",
        "validity",
        "stability",
    ]);
    for cell in &r.cells {
        table.push(vec![
            cell.n_steps.into(),
            cell.c.into(),
            cell.phase.into(),
            cell.postselect_prob.into(),
            cell.validity.label().into(),
            cell.stability.into(),
        ]);
    }
    table
}

fn landscape_heatmap(
    r: &LandscapeResult,
    title: &str,
    value: impl Fn(&landscape::CellRecord) -> Option<f64>,
) -> String {
    let ns = r.grid.n_range.values();
    let cs = r.grid.c_range.values();
    plot::heatmap(&Heatmap {
        title,
        x_label: "c",
        y_label: "N",
        xs: cs,
        ys: ns.iter().map(|&n| n as f64).collect(),
        values: r.cells.iter().map(value).collect(),
    })
}

pub fn landscape(cfg: &FileConfig) -> Result<(FileConfig, Emission), CliError> {
    let mut m = manifest("landscape", cfg);
    let g = grid_spec(cfg, &mut m)?;
    let r = landscape::grid_sweep(&g).map_err(core_err)?;
    let svg = want_plot(cfg).then(|| landscape_heatmap(&r, "phase landscape", |c| c.phase));
    Ok((
        m,
        Emission {
            table: landscape_table(&r),
            extras: Vec::new(),
            svg,
        },
    ))
}

pub fn noise(cfg: &FileConfig) -> Result<(FileConfig, Emission), CliError> {
    let mut m = manifest("noise", cfg);
    let g = grid_spec(cfg, &mut m)?;
    let spread = nonnegative("spread", cfg.spread.unwrap_or(0.05))?;
    let samples = cfg.samples.unwrap_or(landscape::DEFAULT_SAMPLES_PER_CELL);
    let seed = cfg.seed.unwrap_or(0);
    let mode = cfg.noise_mode.unwrap_or(NoiseModeArg::PerStep);
    let tol = nonnegative(
        "quantization-tol",
        cfg.quantization_tol.unwrap_or(0.05 * PI),
    )?;
    let model = NoiseModel {
        spread_fraction: spread,
        master_seed: seed,
        samples_per_cell: samples,
        mode: mode.into(),
    };
    model.validate().map_err(core_err)?;
    m.spread = Some(spread);
    m.samples = Some(samples);
    m.seed = Some(seed);
    m.noise_mode = Some(mode);
    m.quantization_tol = Some(tol);

    let r = landscape::noise_ensemble(&g, &model).map_err(core_err)?;
    let report = landscape::stability_report(&r, &StabilityCriteria::new(tol), |_| true)
        .map_err(core_err)?;
    let svg = want_plot(cfg)
        .then(|| landscape_heatmap(&r, "phase stability (circular std)", |c| c.stability));
    Ok((
        m,
        Emission {
            table: landscape_table(&r),
            extras: vec![("summary", json!(report))],
            svg,
        },
    ))
}

pub fn trajectory(cfg: &FileConfig) -> Result<(FileConfig, Emission), CliError> {
    let n = single("n-steps", &cfg.n_steps, 20)?;
    let c = nonnegative("c", single("c", &cfg.c, 1.0)?)?;
    let winding = positive("winding", single("winding", &cfg.winding, 1.0)?)?;
    let samples = cfg.samples.unwrap_or(1000);
    let seed = cfg.seed.unwrap_or(0);
    if samples == 0 {
        return Err(invalid("--samples must be >= 1"));
    }
    let p = ProtocolParams::from_winding(n, c, winding).map_err(core_err)?;
    let mut m = manifest("trajectory", cfg);
    m.n_steps = Some(vec![n]);
    m.c = Some(vec![c]);
    m.winding = Some(vec![winding]);
    m.samples = Some(samples);
    m.seed = Some(seed);

    let records = sample_trajectories(&p, seed, samples).map_err(core_err)?;
    let exact = trajectory::postselection_probability(&p).map_err(core_err)?;
    let mut table = Table::new(&["index", "readouts", "probability", "pancharatnam_phase"]);
    let mut hist = [0usize; 36];
    for (i, r) in records.iter().enumerate() {
        table.push(vec![
            i.into(),
            r.readout_string().into(),
            r.probability.into(),
            r.pancharatnam_phase.into(),
        ]);
        if let Some(ph) = r.pancharatnam_phase {
            let bin = (((ph + PI) / (2.0 * PI)) * 36.0).floor().clamp(0.0, 35.0) as usize;
            hist[bin] += 1;
        }
    }
    let hits = records.iter().filter(|r| r.is_all_plus()).count();
    let freq = hits as f64 / samples as f64;
    let sigma = (exact * (1.0 - exact) / samples as f64).sqrt();
    let z = if sigma > 0.0 {
        Some((freq - exact) / sigma)
    } else {
        None
    };
    let summary: Value = json!({
        "samples": samples,
        "all_plus_count": hits,
        "all_plus_frequency": freq,
        "postselection_probability": exact,
        "binomial_sigma": sigma,
        "z_score": z,
    });
    let svg = want_plot(cfg).then(|| {
        plot::line_plot(&LinePlot {
            title: "Pancharatnam phase of sampled records",
            x_label: "phase (rad)",
            y_label: "records",
            series: vec![Series {
                label: format!("N={n} c={c}"),
                points: hist
                    .iter()
                    .enumerate()
                    .map(|(k, &h)| (-PI + (k as f64 + 0.5) * 2.0 * PI / 36.0, h as f64))
                    .collect(),
            }],
            markers: false,
        })
    });
    Ok((
        m,
        Emission {
            table,
            extras: vec![("summary", summary)],
            svg,
        },
    ))
}
