use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ecop_core::copula::{self, delta_star, CopulaParams, UnitSquarePoint};
use ecop_core::dependence::{self, TABLE1_ALPHAS};
use ecop_core::inference::{fit_brd, log_likelihood};
use ecop_core::{brd, BrdParams, ObservationSet, QuadratureSpec};

fn pointwise(c: &mut Criterion) {
    let p = CopulaParams::new(3.8, delta_star(3.8).unwrap()).unwrap();
    let pt = UnitSquarePoint::new(0.3, 0.7).unwrap();
    c.bench_function("cdf", |b| {
        b.iter(|| copula::cdf(black_box(&p), black_box(pt)))
    });
    c.bench_function("pdf", |b| {
        b.iter(|| copula::pdf(black_box(&p), black_box(pt)))
    });
    c.bench_function("conditional_quantile", |b| {
        b.iter(|| copula::conditional_quantile(black_box(&p), 0.3, black_box(0.42)))
    });
}

fn sampling(c: &mut Criterion) {
    let p = CopulaParams::new(3.8, delta_star(3.8).unwrap()).unwrap();
    let mut g = c.benchmark_group("sample");
    for n in [1_000usize, 100_000] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| copula::sample(&p, n, 1))
        });
    }
    g.finish();
}

fn measures(c: &mut Criterion) {
    c.bench_function("table1", |b| {
        b.iter(|| dependence::table1(black_box(&TABLE1_ALPHAS)))
    });
    let p = CopulaParams::new(-3.0, 0.05).unwrap();
    let spec = QuadratureSpec::default();
    c.bench_function("measure_oracle", |b| {
        b.iter(|| dependence::measure_oracle(black_box(&p), &spec))
    });
}

fn inference(c: &mut Criterion) {
    let truth = BrdParams::new(33.4, 28.1, 0.287, 10.398).unwrap();
    let data = ObservationSet::new(brd::sample_brd(&truth, 2000, 3)).unwrap();
    c.bench_function("log_likelihood_n2000", |b| {
        b.iter(|| log_likelihood(black_box(&truth), &data))
    });
    let mut g = c.benchmark_group("fit");
    g.sample_size(10);
    g.bench_function("fit_brd_n2000", |b| b.iter(|| fit_brd(&data, 8, 0)));
    g.finish();
}

criterion_group!(benches, pointwise, sampling, measures, inference);
criterion_main!(benches);
