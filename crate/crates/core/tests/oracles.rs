mod common;

use std::f64::consts::PI;

use geophase_core::analytic::{
    amplitude_analytic, bracket, critical_points, find_critical, phase_analytic, sweep_alpha,
};
use geophase_core::landscape::{
    self, GridSpec, IntRange, NoiseModel, RealRange, StabilityCriteria, Validity,
};
use geophase_core::trajectory::{
    enumerate_records, finite_n_alpha_curve, finite_n_phase_curve, postselected_amplitude,
    postselected_amplitude_direct, postselection_probability, sample_trajectories,
};
use geophase_core::{AnalyticParams, Error, GeophaseResult, ProtocolParams, Regime};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn amp(p: &ProtocolParams) -> GeophaseResult {
    postselected_amplitude(p).unwrap()
}

#[test]
fn factorised_product_matches_projector_oracle_up_to_twelve_steps() {
    for n in 1..=12usize {
        for &eta in &[0.05, 0.3, 0.7, 1.0] {
            for w in 1..=3 {
                let c = eta * n as f64 / 4.0;
                let alpha = w as f64 * PI;
                let p = ProtocolParams::new(n, c, alpha).unwrap();
                let oracle = common::brute_amplitude(n, c, alpha);
                let fast = amp(&p).amplitude_value();
                let direct = postselected_amplitude_direct(&p).unwrap();
                assert!((fast - oracle).norm() < 1e-12, "N={n} eta={eta} W={w}");
                assert!((direct - oracle).norm() < 1e-12, "N={n} eta={eta} W={w}");
            }
        }
    }
}

#[test]
fn record_probabilities_match_oracle() {
    for n in [1usize, 3, 6, 9] {
        let p = ProtocolParams::new(n, n as f64 / 8.0, PI).unwrap();
        let ours = enumerate_records(&p).unwrap();
        let oracle = common::brute_record_probabilities(n, n as f64 / 8.0, PI);
        assert_eq!(ours.len(), oracle.len());
        for (r, o) in ours.iter().zip(&oracle) {
            assert!((r.probability - o).abs() < 1e-13);
        }
        let all_plus = &ours[0];
        assert!(all_plus.is_all_plus());
        assert!((all_plus.probability - postselection_probability(&p).unwrap()).abs() < 1e-13);
    }
}

#[test]
fn critical_points_match_independent_bisection() {
    for w in 1..=5 {
        let alpha = w as f64 * PI;
        let ours = critical_points(alpha).unwrap();
        let f = |c: f64| {
            let s = (alpha * alpha - c * c).sqrt();
            s.cos() + c * s.sin() / s
        };
        // Sign changes of the real bracket on a coarse independent scan.
        let cs = common::grid(0.01, alpha - 0.01, 0.01);
        let mut oracle = Vec::new();
        for w2 in cs.windows(2) {
            if (f(w2[0]) < 0.0) != (f(w2[1]) < 0.0) {
                oracle.push(common::bisect_root(f, w2[0], w2[1]));
            }
        }
        assert_eq!(ours.len(), oracle.len(), "W={w}");
        for (a, b) in ours.iter().zip(&oracle) {
            assert!((a.c_crit - b).abs() < 1e-8, "W={w}: {} vs {b}", a.c_crit);
        }
    }
}

#[test]
fn bracket_is_real_continuation_above_alpha() {
    let alpha = PI;
    for c in [3.0, PI, 3.5, 10.0, 30.0] {
        let t2 = c * c - alpha * alpha;
        let want = if t2 > 0.0 {
            let t = t2.sqrt();
            t.cosh() + c * t.sinh() / t
        } else if t2 < 0.0 {
            let s = (-t2).sqrt();
            s.cos() + c * s.sin() / s
        } else {
            1.0 + c
        };
        let got = bracket(c, alpha);
        assert!(
            (got - want).abs() <= 1e-6 * want.abs().max(1.0),
            "c={c}: {got} vs {want}"
        );
    }
}

#[test]
fn finite_n_error_halves_with_doubling() {
    let exact = amplitude_analytic(AnalyticParams { c: 1.0, alpha: PI });
    let errs: Vec<f64> = [50usize, 100, 200, 400, 800]
        .iter()
        .map(|&n| (amp(&ProtocolParams::new(n, 1.0, PI).unwrap()).amplitude_value() - exact).norm())
        .collect();
    for w in errs.windows(2) {
        let r = w[0] / w[1];
        assert!((1.8..=2.2).contains(&r), "{errs:?}");
    }
}

#[test]
fn large_n_alpha_curve_tracks_analytic() {
    let alphas = common::grid(0.05, 4.0 * PI, 0.01);
    let analytic = sweep_alpha(3.0, &alphas).unwrap();
    let finite = finite_n_alpha_curve(500, 3.0, &alphas, Regime::Physical).unwrap();
    // Sign changes of the bracket along alpha; the finite-N root sits O(1/N)
    // away, so the π-step lands on a neighbouring grid point.
    let roots: Vec<f64> = alphas
        .windows(2)
        .filter(|w| (bracket(3.0, w[0]) < 0.0) != (bracket(3.0, w[1]) < 0.0))
        .map(|w| w[0])
        .collect();
    assert!(roots.len() >= 3);
    let worst = alphas
        .iter()
        .zip(analytic.iter().zip(&finite))
        .filter(|(a, _)| roots.iter().all(|r| (*a - r).abs() > 0.05))
        .map(|(_, (a, b))| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 0.02, "max deviation {worst}");
}

#[test]
fn small_n_curve_departs_from_analytic() {
    let cs = common::grid(0.0, 2.0, 0.01);
    let analytic = phase_analytic(PI, &cs).unwrap();
    let finite = finite_n_phase_curve(8, PI, &cs, Regime::Physical).unwrap();
    let worst = analytic
        .iter()
        .zip(&finite)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(
        worst > 1.0,
        "N=8 should not reproduce the continuum transition at c≈2.1"
    );
}

#[test]
fn single_step_is_trivial() {
    for alpha in common::grid(0.1, 2.0 * PI, 0.1) {
        let r = amp(&ProtocolParams::new(1, 0.2, alpha).unwrap());
        assert!(r.phase.abs() < 1e-12, "alpha={alpha}: {}", r.phase);
    }
}

#[test]
fn all_plus_frequency_within_three_sigma() {
    let p = ProtocolParams::new(20, 1.0, PI).unwrap();
    let exact = postselection_probability(&p).unwrap();
    let samples = 100_000;
    let records = sample_trajectories(&p, 31, samples).unwrap();
    let hits = records.iter().filter(|r| r.is_all_plus()).count() as f64;
    let freq = hits / samples as f64;
    let sigma = (exact * (1.0 - exact) / samples as f64).sqrt();
    assert!(
        (freq - exact).abs() <= 3.0 * sigma,
        "freq {freq}, exact {exact}, sigma {sigma}"
    );
}

#[test]
fn zero_strength_always_reads_plus() {
    let p = ProtocolParams::new(9, 0.0, PI).unwrap();
    let records = sample_trajectories(&p, 5, 200).unwrap();
    assert!(records.iter().all(|r| r.is_all_plus()));
}

#[test]
fn projective_record_distribution_passes_chi_squared() {
    let p = ProtocolParams::new(4, 1.0, PI).unwrap();
    assert_eq!(p.eta(), 1.0);
    let exact = enumerate_records(&p).unwrap();
    let samples = 50_000;
    let drawn = sample_trajectories(&p, 1, samples).unwrap();
    let mut counts = std::collections::HashMap::new();
    for r in &drawn {
        *counts.entry(r.readout_string()).or_insert(0usize) += 1;
    }
    let mut stat = 0.0;
    let mut dof = 0usize;
    for r in exact.iter().filter(|r| r.probability > 1e-12) {
        let expected = r.probability * samples as f64;
        let observed = *counts.get(&r.readout_string()).unwrap_or(&0) as f64;
        stat += (observed - expected).powi(2) / expected;
        dof += 1;
    }
    let impossible: usize = exact
        .iter()
        .filter(|r| r.probability <= 1e-12)
        .map(|r| *counts.get(&r.readout_string()).unwrap_or(&0))
        .sum();
    assert_eq!(impossible, 0);
    let p_value = 1.0 - ChiSquared::new((dof - 1) as f64).unwrap().cdf(stat);
    assert!(
        p_value > 0.01,
        "chi2 {stat} on {} dof, p {p_value}",
        dof - 1
    );
}

#[test]
fn invalid_regime_cells_are_flagged_not_computed() {
    let g = GridSpec::new(
        IntRange {
            start: 4,
            end: 48,
            step: 4,
        },
        RealRange {
            start: 0.5,
            end: 9.5,
            step: 0.5,
        },
        1.0,
    );
    let r = landscape::grid_sweep(&g).unwrap();
    for cell in &r.cells {
        let eta = 4.0 * cell.c / cell.n_steps as f64;
        if eta > 1.0 + 1e-12 {
            assert_eq!(cell.validity, Validity::InvalidRegime, "{cell:?}");
            assert!(cell.phase.is_none() && cell.postselect_prob.is_none());
        } else {
            assert_eq!(cell.validity, Validity::Ok, "{cell:?}");
            assert!(cell.phase.is_some());
        }
    }

    let mut cont = g;
    cont.analytic_continuation = true;
    let r = landscape::grid_sweep(&cont).unwrap();
    for cell in &r.cells {
        let eta = 4.0 * cell.c / cell.n_steps as f64;
        let want = if eta > 1.0 + 1e-12 {
            Validity::NonPhysical
        } else {
            Validity::Ok
        };
        assert_eq!(cell.validity, want);
        assert!(cell.phase.is_some());
    }
}

#[test]
fn physical_curve_names_offending_strength() {
    let err = finite_n_phase_curve(4, PI, &[0.5, 1.0, 1.5], Regime::Physical).unwrap_err();
    match err {
        Error::InvalidEta { n_steps, c, .. } => {
            assert_eq!(n_steps, 4);
            assert_eq!(c, 1.5);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn stability_grows_with_spread() {
    let g = GridSpec::new(
        IntRange {
            start: 100,
            end: 400,
            step: 100,
        },
        RealRange {
            start: 0.5,
            end: 9.5,
            step: 1.0,
        },
        1.0,
    );
    let spreads = [0.0, 0.02, 0.05, 0.10];
    let results: Vec<_> = spreads
        .iter()
        .map(|&s| {
            let mut m = NoiseModel::new(s, 404);
            m.samples_per_cell = 60;
            landscape::noise_ensemble(&g, &m).unwrap()
        })
        .collect();
    let mut ok = 0;
    let mut total = 0;
    for i in 0..results[0].cells.len() {
        let s: Vec<f64> = results
            .iter()
            .map(|r| r.cells[i].stability.unwrap())
            .collect();
        total += 1;
        if s.windows(2).all(|w| w[1] >= w[0]) {
            ok += 1;
        }
    }
    assert!(ok as f64 >= 0.95 * total as f64, "{ok}/{total} monotone");
}

#[test]
fn robust_region_keeps_quantization_under_moderate_noise() {
    let g = GridSpec::new(
        IntRange {
            start: 100,
            end: 500,
            step: 100,
        },
        RealRange {
            start: 0.5,
            end: 9.5,
            step: 0.5,
        },
        1.0,
    );
    let mut m = NoiseModel::new(0.10, 8);
    m.samples_per_cell = 50;
    let r = landscape::noise_ensemble(&g, &m).unwrap();
    let mut errs: Vec<f64> = r
        .cells
        .iter()
        .filter(|c| (c.c - 2.1).abs() > 0.3)
        .map(|c| c.quantization_error().unwrap())
        .collect();
    errs.sort_by(f64::total_cmp);
    let median = errs[errs.len() / 2];
    assert!(median < 0.1 * PI, "median distance {median}");
    let crit = StabilityCriteria::new(0.05 * PI);
    let rep = landscape::stability_report(&r, &crit, |_| true).unwrap();
    assert!(rep.overall.quantized_fraction.unwrap() > 0.9);
}

#[test]
fn noise_is_reproducible_and_cell_local() {
    let full = GridSpec::new(
        IntRange {
            start: 20,
            end: 80,
            step: 20,
        },
        RealRange {
            start: 0.5,
            end: 4.0,
            step: 0.5,
        },
        1.0,
    );
    let sub = GridSpec::new(
        IntRange {
            start: 40,
            end: 60,
            step: 20,
        },
        RealRange {
            start: 1.5,
            end: 3.0,
            step: 0.5,
        },
        1.0,
    );
    let mut m = NoiseModel::new(0.05, 99);
    m.samples_per_cell = 25;
    let a = landscape::noise_ensemble(&full, &m).unwrap();
    let b = landscape::noise_ensemble(&full, &m).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    let s = landscape::noise_ensemble(&sub, &m).unwrap();
    for cell in &s.cells {
        assert_eq!(a.cell(cell.n_steps, cell.c).unwrap(), cell);
    }
}

#[test]
fn critical_scan_rejects_bad_arguments() {
    assert!(find_critical(PI, 0.1, 1e-10).is_err());
    assert!(find_critical(PI, 1e-3, 1e-3).is_err());
    assert!(find_critical(-1.0, 1e-3, 1e-10).is_err());
}
