use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use crownkit::horo::convexity_scan_with;
use crownkit::numerics::QuadratureConfig;
use crownkit::par::{map_with, Mode};
use crownkit::principal::{orbit_norm_sq, SpectralParam};

const MODES: [(&str, Mode); 2] = [
    ("sequential", Mode::Sequential),
    ("parallel", Mode::Parallel),
];

fn convexity(c: &mut Criterion) {
    let mut group = c.benchmark_group("convexity_scan");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 10_000), &mode, |b, &m| {
            b.iter(|| convexity_scan_with(m, black_box(0.6), 10_000).unwrap())
        });
    }
    group.finish();
}

fn orbit_norms(c: &mut Criterion) {
    let lambda = SpectralParam::new(1.0).unwrap();
    let cfg = QuadratureConfig::representation();
    let phis: Vec<f64> = (0..32).map(|k| 0.7 * k as f64 / 32.0).collect();
    let mut group = c.benchmark_group("orbit_norm_sweep");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::new(name, phis.len()), &mode, |b, &m| {
            b.iter(|| map_with(m, &phis, |&p| orbit_norm_sq(lambda, p, &cfg).unwrap().0))
        });
    }
    group.finish();
}

criterion_group!(benches, convexity, orbit_norms);
criterion_main!(benches);
