use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use num_complex::Complex64;
use std::hint::black_box;

use gts_core::bilateral::BilateralGamma;
use gts_core::estimation::Likelihood;
use gts_core::{
    build_grid, cdf_table, frft, pdf_table, quantile, sample, Exponent, GridConfig, GtsParams,
};

fn bench_exponent(c: &mut Criterion) {
    let p = GtsParams::bitcoin();
    let xi: Vec<f64> = (0..1024).map(|k| k as f64 * 0.05).collect();
    c.bench_function("exponent/1024 points", |b| {
        b.iter(|| {
            let e = Exponent::new(black_box(&p));
            xi.iter().map(|&x| e.eval(x)).fold(Complex64::new(0.0, 0.0), |a, v| a + v)
        })
    });
}

fn bench_frft(c: &mut Criterion) {
    let mut group = c.benchmark_group("frft");
    for m in [1usize << 10, 1 << 14] {
        let seq: Vec<Complex64> = (0..m)
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()))
            .collect();
        group.bench_function(format!("m={m}"), |b| b.iter(|| frft(black_box(&seq), 0.3 / m as f64)));
    }
    group.finish();
}

fn bench_tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("tables");
    group.sample_size(20);
    for (name, p) in [("btc", GtsParams::bitcoin()), ("eth", GtsParams::ethereum())] {
        let g = build_grid(&p, &GridConfig::default()).unwrap();
        group.bench_function(format!("pdf/{name}"), |b| b.iter(|| pdf_table(black_box(&p), &g)));
        group.bench_function(format!("cdf/{name}"), |b| b.iter(|| cdf_table(black_box(&p), &g)));
    }
    group.finish();
}

fn bench_quantile(c: &mut Criterion) {
    let p = GtsParams::bitcoin();
    let t = cdf_table(&p, &build_grid(&p, &GridConfig::default()).unwrap()).unwrap();
    let levels = [1e-4, 1e-3, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 0.999, 0.9999];
    c.bench_function("quantile/11 levels", |b| {
        b.iter(|| levels.iter().map(|&a| quantile(&t, black_box(a)).unwrap()).sum::<f64>())
    });
    c.bench_function("sample/10k", |b| b.iter(|| sample(&t, 10_000, black_box(7))));
}

fn bench_likelihood(c: &mut Criterion) {
    let p = GtsParams::bitcoin();
    let t = cdf_table(&p, &build_grid(&p, &GridConfig::default()).unwrap()).unwrap();
    let data = sample(&t, 5000, 1).unwrap();
    let mut group = c.benchmark_group("likelihood");
    group.sample_size(20);
    group.bench_function("fixed grid/n=5000", |b| {
        b.iter_batched(
            || {
                let mut lik = Likelihood::new(&data.values, GridConfig::default());
                lik.rebuild(&p).unwrap();
                lik
            },
            |lik| lik.eval_fixed(black_box(&p)),
            BatchSize::LargeInput,
        )
    });
    let bg = GtsParams::new(0.0, 0.0, 0.0, 0.7, 0.67, 0.31, 0.31).unwrap();
    let sorted = data.sorted();
    group.bench_function("bilateral gamma/n=5000", |b| {
        b.iter(|| BilateralGamma::new(black_box(&bg)).unwrap().sum_ln_pdf(&sorted))
    });
    group.finish();
}

criterion_group!(benches, bench_exponent, bench_frft, bench_tables, bench_quantile, bench_likelihood);
criterion_main!(benches);
