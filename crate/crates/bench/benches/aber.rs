use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fdrlos::{aber, aber_montecarlo, aber_quadrature, ChannelParams, ModulationSpec, SeriesControl, TruncationOrder};

fn cases() -> Vec<(&'static str, ChannelParams, ModulationSpec)> {
    vec![
        ("m2.5-psk4", ChannelParams::from_db(2.5, 5.0, 30.0).unwrap(), "psk-4".parse().unwrap()),
        ("m0.5-qam64", ChannelParams::new(0.5, 1.0, 1000.0).unwrap(), "qam-64".parse().unwrap()),
        ("m3-qam16", ChannelParams::from_db(3.0, 10.0, 25.0).unwrap(), "qam-16".parse().unwrap()),
    ]
}

fn series(c: &mut Criterion) {
    let ctrl = SeriesControl::default();
    let mut g = c.benchmark_group("series");
    for (name, p, q) in cases() {
        g.bench_with_input(BenchmarkId::new("adaptive", name), &(p, q.clone()), |b, (p, q)| {
            b.iter(|| aber(black_box(p), q, &ctrl, None).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("fixed-5x5", name), &(p, q), |b, (p, q)| {
            b.iter(|| aber(black_box(p), q, &ctrl, Some(TruncationOrder::square(5))).unwrap())
        });
    }
    g.finish();
}

fn quadrature(c: &mut Criterion) {
    let mut g = c.benchmark_group("quadrature");
    g.sample_size(20);
    for (name, p, q) in cases() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &(p, q), |b, (p, q)| {
            b.iter(|| aber_quadrature(black_box(p), q).unwrap())
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("monte-carlo");
    g.sample_size(10);
    let (_, p, q) = &cases()[0];
    for n in [10_000u64, 100_000] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| aber_montecarlo(black_box(p), q, n, 7).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, series, quadrature, monte_carlo);
criterion_main!(benches);
