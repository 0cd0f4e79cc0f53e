//! Criterion benchmarks for the hot paths: noise generation, forward
//! simulation, one backward regression sweep, and the PDE stepper.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use std::sync::Arc;

use fbsde_core::model::evaluators::{drift_fn, sigma_fn};
use fbsde_core::path::{sample_noise, simulate_sde, TimeGrid};

fn bench_noise(c: &mut Criterion) {
    let grid = TimeGrid::new(1.0, 50).unwrap();
    c.bench_function("sample_noise 20k x 50", |b| {
        b.iter(|| black_box(sample_noise(&grid, 20_000, 1, 7).unwrap()))
    });
}

fn bench_simulate(c: &mut Criterion) {
    let grid = TimeGrid::new(1.0, 50).unwrap();
    let noise = Arc::new(sample_noise(&grid, 20_000, 1, 7).unwrap());
    let drift = drift_fn(|_t, x, out| out[0] = -x[0]);
    let sigma = sigma_fn(|_t, _x, out| out[0] = 1.0);
    c.bench_function("simulate_sde ou 20k x 50", |b| {
        b.iter(|| black_box(simulate_sde(&drift, &sigma, &[1.0], &noise, &grid, "ou").unwrap()))
    });
}

fn bench_backward_sweep(c: &mut Criterion) {
    use fbsde_core::bsde::{solve_decoupled_bsde, BasisSpec, PicardConfig};
    use fbsde_core::model::presets;
    let case = presets::linear_driver();
    let grid = TimeGrid::new(1.0, 25).unwrap();
    let noise = Arc::new(sample_noise(&grid, 20_000, 1, 7).unwrap());
    let paths = simulate_sde(
        &case.coeffs.b,
        &case.coeffs.sigma,
        &case.coeffs.x0,
        &noise,
        &grid,
        "bench",
    )
    .unwrap();
    let basis = BasisSpec::local_linear(20).unwrap();
    let cfg = PicardConfig::new(4, 1e-4).unwrap();
    c.bench_function("solve_decoupled_bsde linear 20k x 25", |b| {
        b.iter(|| black_box(solve_decoupled_bsde(&paths, &case.coeffs, &basis, &cfg).unwrap()))
    });
}

fn bench_pde(c: &mut Criterion) {
    use fbsde_core::model::presets;
    use fbsde_core::pde::{solve_semilinear_pde, SpaceGrid};
    let case = presets::digital_terminal();
    let sgrid = SpaceGrid::new(-6.0, 6.0, 200).unwrap();
    let tgrid = TimeGrid::new(1.0, 100).unwrap();
    c.bench_function("pde digital 200 x 100", |b| {
        b.iter(|| black_box(solve_semilinear_pde(&case.coeffs, &sgrid, &tgrid).unwrap()))
    });
}

criterion_group!(benches, bench_noise, bench_simulate, bench_backward_sweep, bench_pde);
criterion_main!(benches);
