use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sparselb::lower_bound::{exact_sparse_lsq, LsqSphereSup};
use sparselb::LsqInstance;
use std::hint::black_box;

fn exact_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_enumeration");
    for (d, k) in [(8, 3), (12, 4), (16, 4)] {
        let inst = LsqInstance::random(d, d, k, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("d{d}_k{k}")), &inst, |b, inst| {
            b.iter(|| exact_sparse_lsq(black_box(inst)))
        });
    }
    group.finish();
}

fn certified_sup(c: &mut Criterion) {
    let mut group = c.benchmark_group("certified_sphere_sup");
    group.sample_size(20);
    for d in [3, 6, 8] {
        let inst = LsqInstance::random(d, d, 2, 3).unwrap();
        let sup = LsqSphereSup::new(inst.a(), inst.z()).unwrap();
        let y: Vec<f64> = (0..d).map(|i| 0.3 * (i as f64 - 1.5)).collect();
        group.bench_with_input(BenchmarkId::from_parameter(d), &y, |b, y| b.iter(|| sup.certify(black_box(y), 1e-9)));
    }
    group.finish();
}

criterion_group!(benches, exact_enumeration, certified_sup);
criterion_main!(benches);
