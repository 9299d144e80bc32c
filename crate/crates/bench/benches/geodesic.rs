use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use geoprod::geodesic::{generators_from_velocity, ProductCurve};
use geoprod::oracle::{integrate_horizontal, OdeConfig};
use geoprod_bench::{chain_metric, so4_three_step, spread_velocity};

fn closed_form(c: &mut Criterion) {
    let cm = so4_three_step();
    let v = spread_velocity(&cm);
    c.bench_function("generators so4 N=3", |b| b.iter(|| generators_from_velocity(&cm, black_box(&v)).unwrap()));
    let pc = ProductCurve::new(generators_from_velocity(&cm, &v).unwrap());
    c.bench_function("eval so4 N=3", |b| b.iter(|| pc.eval(black_box(1.3)).unwrap()));
    c.bench_function("lax_residual so4 N=3", |b| b.iter(|| pc.lax_residual(black_box(1.3)).unwrap()));

    let cm5 = chain_metric(5, &[2, 4], &[3.0, 0.7]);
    let pc5 = ProductCurve::new(generators_from_velocity(&cm5, &spread_velocity(&cm5)).unwrap());
    c.bench_function("eval so5 N=2", |b| b.iter(|| pc5.eval(black_box(1.3)).unwrap()));
}

fn oracle(c: &mut Criterion) {
    let cm = so4_three_step();
    let v = spread_velocity(&cm);
    let cfg = OdeConfig::new(1e-3, 2.0).with_record_every(100);
    let mut group = c.benchmark_group("rk4");
    group.sample_size(20);
    group.bench_function("so4 N=3 t=2 h=1e-3", |b| b.iter(|| integrate_horizontal(&cm, black_box(&v), &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, closed_form, oracle);
criterion_main!(benches);
