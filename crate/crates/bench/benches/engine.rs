//! Benchmarks for the rate derivations, the covariance engine and one
//! oracle step at desk scale.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use squeezesim::gaussian::{build_model, evolve, minimal_variance};
use squeezesim::params::{
    derive_rates, predict_optimal_detuning, predict_optimal_time, PhysicalParams,
};
use squeezesim::{fock, gaussian};

fn optimal_params() -> PhysicalParams {
    let mut p =
        PhysicalParams::new(1e4, 1.0, 1.0, 1.0, 1.0, 100.0, 0.0, 0.0, 0.0, 1.0).unwrap();
    p.delta_big = predict_optimal_detuning(&p).unwrap().delta_opt;
    p
}

fn bench_derive(c: &mut Criterion) {
    let p = optimal_params();
    c.bench_function("derive_rates", |b| {
        b.iter(|| derive_rates(black_box(&p)).unwrap())
    });
}

fn bench_evolve_to_optimum(c: &mut Criterion) {
    let p = optimal_params();
    let d = derive_rates(&p).unwrap();
    let m = build_model(&p, &d).unwrap();
    let t_star = predict_optimal_time(&d).unwrap();
    let dt = m.max_step().min(t_star / 2000.0);
    c.bench_function("evolve_to_optimum", |b| {
        b.iter(|| {
            let states = evolve(black_box(&m), 1.2 * t_star, dt).unwrap();
            states
                .iter()
                .map(minimal_variance)
                .fold(f64::INFINITY, f64::min)
        })
    });
}

fn bench_minimal_variance(c: &mut Criterion) {
    let s = gaussian::GaussianState::ideal(1.0, 1.0);
    c.bench_function("minimal_variance", |b| {
        b.iter(|| minimal_variance(black_box(&s)))
    });
}

fn bench_oracle_short(c: &mut Criterion) {
    let m = gaussian::LinearModel::from_rates(1.0, 0.07, 0.0, 0.05, 0.05, 0.0, 0.00875)
        .unwrap();
    c.bench_function("oracle_100_steps_cutoff_10", |b| {
        b.iter(|| fock::oracle_evolve(black_box(&m), 0.05, 5e-4, 10, usize::MAX).unwrap())
    });
}

criterion_group!(
    benches,
    bench_derive,
    bench_evolve_to_optimum,
    bench_minimal_variance,
    bench_oracle_short
);
criterion_main!(benches);
