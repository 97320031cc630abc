//! Sweep throughput: sequential loop vs rayon work-stealing pool, and the
//! two evolution backends on matched small workloads.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::f64::consts::FRAC_PI_4;

use qumech::dynamics::LindbladOptions;
use qumech::hilbert::FockCutoff;
use qumech::sweep::{run_points_sequential, Axis, Backend, ScenarioConfig};
use qumech::SystemParams;

fn bench_cfg(backend: Backend, n_points: usize) -> ScenarioConfig {
    ScenarioConfig {
        base: SystemParams {
            g0: 0.1,
            theta: FRAC_PI_4,
            n_m: 0.5,
            gamma_m: if matches!(backend, Backend::Lindblad) { 1e-4 } else { 0.0 },
            cutoff: FockCutoff { n_max: 15 },
            ..Default::default()
        },
        axis: Axis::Theta,
        values: (0..n_points).map(|i| 0.2 + i as f64 * 0.15).collect(),
        horizon: 4.0,
        samples: 81,
        backend,
        auto_cutoff: false,
        integrator: LindbladOptions { steps_per_period: 200.0, auto_halve: false, ..Default::default() },
        ..Default::default()
    }
}

fn sweep_executors(c: &mut Criterion) {
    let cfg = bench_cfg(Backend::Unitary, 8);
    let mut group = c.benchmark_group("sweep_executors");
    group.sample_size(10);
    group.bench_function("sequential", |b| b.iter(|| run_points_sequential(&cfg)));
    #[cfg(feature = "parallel")]
    for workers in [2usize, 4] {
        group.bench_with_input(
            BenchmarkId::new("parallel", workers),
            &workers,
            |b, &workers| b.iter(|| qumech::sweep::run_points_parallel(&cfg, workers)),
        );
    }
    group.finish();
}

fn evolution_backends(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolution_backends");
    group.sample_size(10);
    for (name, backend) in [("unitary", Backend::Unitary), ("lindblad", Backend::Lindblad)] {
        let cfg = bench_cfg(backend, 2);
        group.bench_function(name, |b| b.iter(|| run_points_sequential(&cfg)));
    }
    group.finish();
}

criterion_group!(benches, sweep_executors, evolution_backends);
criterion_main!(benches);
