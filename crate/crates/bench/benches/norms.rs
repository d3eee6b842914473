use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sparselb::gso::convolution_norm;
use sparselb::sparse_norms::{gauge_norm, ksupport_norm};
use sparselb::GroupStructure;
use std::hint::black_box;

fn vector(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn sparse_norms(c: &mut Criterion) {
    let mut group = c.benchmark_group("sparse_norms");
    for d in [16, 256, 4096] {
        let x = vector(d, d as u64);
        let k = d / 4;
        group.bench_with_input(BenchmarkId::new("gauge", d), &x, |b, x| b.iter(|| gauge_norm(black_box(x), k)));
        group.bench_with_input(BenchmarkId::new("ksupport", d), &x, |b, x| b.iter(|| ksupport_norm(black_box(x), k)));
    }
    group.finish();
}

fn group_norms(c: &mut Criterion) {
    let mut group = c.benchmark_group("convolution_norm");
    group.sample_size(20);
    for d in [4, 6] {
        let gs = GroupStructure::ksupport(d, 2).unwrap();
        let x = vector(d, 7);
        group.bench_with_input(BenchmarkId::new("ksupport_groups", d), &x, |b, x| {
            b.iter(|| convolution_norm(&gs, black_box(x), 1e-8))
        });
    }
    group.finish();
}

criterion_group!(benches, sparse_norms, group_norms);
criterion_main!(benches);
