use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qsync_bench::dense_setup;
use qsync_core::consensus::{
    integrate_classical, random_connected_edges, random_distinct_thetas, random_state,
    ClassicalSystem,
};
use qsync_core::lindblad::{integrate, master_rhs, stiffness_bound, StepParams};
use qsync_core::orbits::{all_orbits, integrate_by_orbits};

fn bench_master_rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("master_rhs");
    for n in [3usize, 5, 7] {
        let (rho0, h, g) = dense_setup(n);
        let rho = rho0.matrix().clone();
        group.bench_function(format!("n{n}"), |b| {
            b.iter(|| master_rhs(black_box(&rho), &h, &g).unwrap())
        });
    }
    group.finish();
}

fn bench_integrate_dense(c: &mut Criterion) {
    let (rho0, h, g) = dense_setup(3);
    let params = StepParams::auto(stiffness_bound(&h, &g), 0.5, Some(0.1)).unwrap();
    c.bench_function("integrate_dense_n3_horizon0.5", |b| {
        b.iter(|| integrate(black_box(&rho0), &h, &g, &params).unwrap())
    });
}

fn bench_integrate_orbits(c: &mut Criterion) {
    let (rho0, h, g) = dense_setup(3);
    let params = StepParams::auto(stiffness_bound(&h, &g), 0.5, Some(0.1)).unwrap();
    c.bench_function("integrate_orbits_n3_horizon0.5", |b| {
        b.iter(|| integrate_by_orbits(black_box(&rho0), &h, &g, &params, false).unwrap())
    });
}

fn bench_orbit_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("all_orbits");
    for n in [4usize, 6] {
        let (_, _, g) = dense_setup(n);
        group.bench_function(format!("n{n}_complete"), |b| {
            b.iter(|| all_orbits(black_box(&g)))
        });
    }
    group.finish();
}

fn bench_classical(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 8;
    let edges = random_connected_edges(n, 0.6, &mut rng);
    let thetas = random_distinct_thetas(n, 2.0, 0.1, &mut rng);
    let sys = ClassicalSystem::new(thetas, edges).unwrap();
    let x0: Vec<Complex64> = random_state(n, &mut rng);
    let params = StepParams::auto(sys.stiffness_bound(), 5.0, Some(0.5)).unwrap();
    c.bench_function("integrate_classical_n8_horizon5", |b| {
        b.iter(|| integrate_classical(black_box(&sys), &x0, &params).unwrap())
    });
}

criterion_group!(
    benches,
    bench_master_rhs,
    bench_integrate_dense,
    bench_integrate_orbits,
    bench_orbit_enumeration,
    bench_classical
);
criterion_main!(benches);
