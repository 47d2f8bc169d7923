use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use novikov_core::besov::{BesovParams, DyadicPartition};
use novikov_core::counterexamples::build_pairs;
use novikov_core::integrator::step_rk4;
use novikov_core::rhs::rhs;
use novikov_core::spectral::Grid;

fn kernels(c: &mut Criterion) {
    let grid = Grid::new(1 << 16, 50.0).unwrap();
    let fam = build_pairs(&grid, 6, 2.0).unwrap();
    let part = DyadicPartition::new(&grid).unwrap();
    let params = BesovParams::default();
    let values = fam.f_n.values().to_vec();

    c.bench_function("fft_round_trip_2^16", |b| {
        b.iter(|| {
            let spec = grid.forward_transform(black_box(&values));
            grid.inverse_transform(&spec)
        })
    });
    c.bench_function("triple_product_2^16", |b| {
        b.iter(|| fam.f_n.triple(black_box(&fam.g_n), &fam.pair_pert.u).unwrap())
    });
    c.bench_function("rhs_2^16", |b| b.iter(|| rhs(black_box(&fam.pair_pert)).unwrap()));
    c.bench_function("rk4_step_2^16", |b| {
        b.iter(|| step_rk4(black_box(&fam.pair_pert), 0.01).unwrap())
    });
    c.bench_function("besov_norm_2^16", |b| {
        b.iter(|| part.besov_norm(black_box(&fam.w0), &params).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = kernels
}
criterion_main!(benches);
