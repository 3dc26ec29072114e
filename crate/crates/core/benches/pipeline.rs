//! Parallel vs sequential benchmarks for the pipeline hot paths.
//!
//! The `*_seq` entry points are the always-compiled sequential twins of the
//! rayon-backed defaults, so one run compares both execution modes.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sqztomo::analysis::{g1_estimate, g1_estimate_seq};
use sqztomo::pattern::PatternKernel;
use sqztomo::sim::{simulate_trace, simulate_trace_seq, simulate_vacuum_trace};
use sqztomo::spectral::{attach_phase, band_decompose, band_decompose_seq};
use sqztomo::tomography::{
    estimate_density_matrix, estimate_density_matrix_seq, marginal_histogram,
    wigner_backprojection_helpers as _unused,
};
use sqztomo::types::{AcquisitionConfig, OpaParams, SimSeed};
use sqztomo::wigner::{wigner_backprojection, wigner_backprojection_seq, WignerGridSpec};

fn nominal() -> OpaParams {
    OpaParams::new(0.5_f64.sqrt(), std::f64::consts::TAU * 17.5e6, 0.88, 0.7 / 0.88).unwrap()
}

fn acq(pow2: u32) -> AcquisitionConfig {
    AcquisitionConfig {
        n_samples: 1 << pow2,
        sweep_period: (1 << pow2) as f64 / 60e6,
        ..AcquisitionConfig::default()
    }
}

fn bench_simulate(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_trace");
    for pow2 in [16u32, 18] {
        let a = acq(pow2);
        group.bench_with_input(BenchmarkId::new("parallel", 1usize << pow2), &a, |b, a| {
            b.iter(|| simulate_trace(&nominal(), a, SimSeed(1)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", 1usize << pow2), &a, |b, a| {
            b.iter(|| simulate_trace_seq(&nominal(), a, SimSeed(1)).unwrap())
        });
    }
    group.finish();
}

fn bench_decompose(c: &mut Criterion) {
    let mut group = c.benchmark_group("band_decompose");
    let a = acq(18);
    let trace = simulate_trace(&nominal(), &a, SimSeed(2)).unwrap();
    group.bench_function("parallel", |b| {
        b.iter(|| band_decompose(&trace, 16).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| band_decompose_seq(&trace, 16).unwrap())
    });
    group.finish();
}

fn bench_density_matrix(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate_density_matrix");
    group.sample_size(10);
    let a = acq(16);
    let trace = simulate_trace(&nominal(), &a, SimSeed(3)).unwrap();
    let bands = band_decompose(&trace, 16).unwrap();
    let samples = attach_phase(&bands[8], &a).unwrap();
    let kernel = PatternKernel::build(15, 8.0, 1025).unwrap();
    group.bench_function("parallel", |b| {
        b.iter(|| estimate_density_matrix(&samples, &kernel).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| estimate_density_matrix_seq(&samples, &kernel).unwrap())
    });
    group.finish();
}

fn bench_backprojection(c: &mut Criterion) {
    let mut group = c.benchmark_group("wigner_backprojection");
    group.sample_size(10);
    let a = acq(16);
    let trace = simulate_trace(&nominal(), &a, SimSeed(4)).unwrap();
    let bands = band_decompose(&trace, 16).unwrap();
    let samples = attach_phase(&bands[8], &a).unwrap();
    let tomo = marginal_histogram(&samples, 64, 128).unwrap();
    let spec = WignerGridSpec::default();
    group.bench_function("parallel", |b| {
        b.iter(|| wigner_backprojection(&tomo, 5.0, &spec).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| wigner_backprojection_seq(&tomo, 5.0, &spec).unwrap())
    });
    group.finish();
}

fn bench_g1(c: &mut Criterion) {
    let mut group = c.benchmark_group("g1_estimate");
    let a = acq(18);
    let sig = simulate_trace(&nominal(), &a, SimSeed(5)).unwrap();
    let vac = simulate_vacuum_trace(&a, SimSeed(6)).unwrap();
    group.bench_function("parallel", |b| {
        b.iter(|| g1_estimate(&sig, &vac, 64).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| g1_estimate_seq(&sig, &vac, 64).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_simulate,
    bench_decompose,
    bench_density_matrix,
    bench_backprojection,
    bench_g1
);
criterion_main!(benches);
