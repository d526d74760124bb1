use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use slelab::dimension::box_dimension_1d;
use slelab::gmc::{chaos_profile, sample_log_field};
use slelab::kpz::phi;
use slelab::loewner::{sample_driving, trace, zip_set};
use slelab::stochastic::{ancestor_free_times, stable_subordinator};
use slelab::{BoxCountConfig, CantorSpec, Gamma, Kappa, SlitChain};

fn formulas(c: &mut Criterion) {
    let kappa = Kappa::new(6.0).unwrap();
    let ds: Vec<f64> = (0..1000).map(|i| i as f64 / 999.0).collect();
    c.bench_function("phi/1000", |b| {
        b.iter(|| {
            ds.iter()
                .map(|&d| phi(kappa, black_box(d)).unwrap().value())
                .sum::<f64>()
        })
    });
}

fn zipper(c: &mut Criterion) {
    let mut group = c.benchmark_group("zipper");
    group.sample_size(10);
    for n in [10_000usize, 100_000] {
        let path = sample_driving(Kappa::new(2.0).unwrap(), 1.0, n, 1).unwrap();
        let chain = SlitChain::reverse(&path);
        let (_, right) = chain.zipped_window();
        let ys: Vec<f64> = CantorSpec::middle_thirds(8)
            .discretize()
            .unwrap()
            .into_iter()
            .map(|y| 0.9 * right * y)
            .collect();
        group.bench_with_input(BenchmarkId::new("zip_set_256", n), &chain, |b, chain| {
            b.iter(|| zip_set(chain, &ys).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("trace_256", n), &chain, |b, chain| {
            b.iter(|| trace(chain, 256).unwrap())
        });
    }
    group.finish();
}

fn estimators(c: &mut Criterion) {
    let pts = CantorSpec::middle_thirds(12).discretize().unwrap();
    c.bench_function("box_dimension_1d/4096", |b| {
        b.iter(|| box_dimension_1d(black_box(&pts), BoxCountConfig::default()).unwrap())
    });
}

fn stochastic(c: &mut Criterion) {
    let mut group = c.benchmark_group("stochastic");
    group.sample_size(10);
    group.bench_function("chaos_profile/L16", |b| {
        let field = sample_log_field(16, 3).unwrap();
        b.iter(|| chaos_profile(&field, Gamma::new(1.0).unwrap()))
    });
    let grid = CantorSpec::middle_thirds(10).discretize().unwrap();
    group.bench_function("stable_subordinator/1024", |b| {
        b.iter(|| stable_subordinator(0.5, &grid, 7).unwrap())
    });
    group.bench_function("ancestor_free/1e5", |b| {
        b.iter(|| ancestor_free_times(Kappa::new(6.0).unwrap(), 100_000, 5).unwrap())
    });
    group.finish();
}

criterion_group!(benches, formulas, zipper, estimators, stochastic);
criterion_main!(benches);
