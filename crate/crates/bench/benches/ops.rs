use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use simgroup::{fixtures, RandomParams, Structure};
use simgroup_bench::{elements, structures};
use std::hint::black_box;

fn element_ops(c: &mut Criterion) {
    let params = RandomParams { max_depth: 5, max_regions: 8 };
    let mut group = c.benchmark_group("element");
    for (name, st) in structures() {
        let es = elements(&st, 64, 1, params);
        group.bench_function(BenchmarkId::new("compose", name), |b| {
            b.iter(|| es.windows(2).map(|w| st.compose(&w[0], &w[1]).len()).sum::<usize>())
        });
        group.bench_function(BenchmarkId::new("inverse", name), |b| {
            b.iter(|| es.iter().map(|g| st.inverse(g).len()).sum::<usize>())
        });
    }
    group.finish();
}

fn cocycle_ops(c: &mut Criterion) {
    let mut group = c.benchmark_group("cocycle");
    for (name, st) in structures() {
        let es = elements(&st, 32, 2, RandomParams::default());
        group.bench_function(BenchmarkId::new("vector", name), |b| {
            b.iter(|| es.iter().map(|g| st.cocycle_vector(g).len()).sum::<usize>())
        });
        group.bench_function(BenchmarkId::new("identity", name), |b| {
            b.iter(|| es.windows(2).filter(|w| st.verify_cocycle_identity(&w[0], &w[1])).count())
        });
    }
    group.finish();
}

fn constructions(c: &mut Criterion) {
    let st = Structure::canonical(fixtures::binary());
    let mut group = c.benchmark_group("construction");
    group.sample_size(10);
    group.bench_function("paradox_data", |b| b.iter(|| st.paradox_data().unwrap()));
    let pp = st.pingpong_pair(0).unwrap();
    group.bench_function("pingpong_len6", |b| b.iter(|| st.verify_pingpong(black_box(&pp), 6).words_checked));
    let g = elements(&st, 1, 3, RandomParams::default()).pop().unwrap();
    let g = if st.is_identity(&g) { st.pingpong_pair(0).unwrap().g } else { g };
    group.bench_function("icc_25", |b| b.iter(|| st.icc_conjugates(black_box(&g), 25).unwrap().len()));
    group.finish();
}

criterion_group!(benches, element_ops, cocycle_ops, constructions);
criterion_main!(benches);
