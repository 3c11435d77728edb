use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use slelab::gff::covariance_mc;
use slelab::martingale::{check_martingale, MartingaleParams, PathSettings};
use slelab::par::Mode;
use slelab::Kappa;

const MODES: [(&str, Mode); 2] = [("sequential", Mode::Sequential), ("parallel", Mode::Parallel)];

fn martingale_replicas(c: &mut Criterion) {
    let params = MartingaleParams::new(Kappa::new(2.0).unwrap(), 2.0, Complex64::new(0.5, 0.2)).unwrap();
    let settings = PathSettings { steps: 1000, eta: 0.1 };
    let mut group = c.benchmark_group("martingale_check");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| check_martingale(&params, 0.5, &settings, 256, 7, mode).unwrap())
        });
    }
    group.finish();
}

fn gff_replicas(c: &mut Criterion) {
    let (z, w) = (Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.5));
    let mut group = c.benchmark_group("gff_covariance");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| covariance_mc(24, 20_000, z, w, 7, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, martingale_replicas, gff_replicas);
criterion_main!(benches);
