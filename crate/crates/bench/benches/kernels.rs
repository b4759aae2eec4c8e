use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use geophase_core::analytic::{critical_points, phase_analytic};
use geophase_core::landscape::{grid_sweep, noise_ensemble, IntRange, RealRange};
use geophase_core::trajectory::{postselected_amplitude, sample_trajectories};
use geophase_core::{GridSpec, NoiseModel, ProtocolParams};

fn amplitude(c: &mut Criterion) {
    let mut g = c.benchmark_group("postselected_amplitude");
    for n in [50usize, 500, 5000] {
        let p = ProtocolParams::new(n, 1.0, PI).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| postselected_amplitude(black_box(p)).unwrap())
        });
    }
    g.finish();
}

fn analytic(c: &mut Criterion) {
    let grid: Vec<f64> = (0..=4000).map(|i| i as f64 * 1e-3).collect();
    c.bench_function("phase_analytic/4001", |b| {
        b.iter(|| phase_analytic(black_box(PI), &grid).unwrap())
    });
    c.bench_function("critical_points/W=1..5", |b| {
        b.iter(|| {
            (1..=5)
                .map(|w| critical_points(black_box(w as f64 * PI)).unwrap().len())
                .sum::<usize>()
        })
    });
}

fn landscape(c: &mut Criterion) {
    let grid = GridSpec::new(
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
    let mut noise = NoiseModel::new(0.05, 1);
    noise.samples_per_cell = 10;
    let mut g = c.benchmark_group("landscape");
    g.sample_size(10);
    g.bench_function("grid_sweep/95", |b| {
        b.iter(|| grid_sweep(black_box(&grid)).unwrap())
    });
    g.bench_function("noise_ensemble/95x10", |b| {
        b.iter(|| noise_ensemble(black_box(&grid), &noise).unwrap())
    });
    g.finish();
}

fn trajectories(c: &mut Criterion) {
    let p = ProtocolParams::new(20, 1.0, PI).unwrap();
    c.bench_function("sample_trajectories/N=20x1000", |b| {
        b.iter(|| sample_trajectories(black_box(&p), 3, 1000).unwrap())
    });
}

criterion_group!(benches, amplitude, analytic, landscape, trajectories);
criterion_main!(benches);
