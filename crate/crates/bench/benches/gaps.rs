use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use softgap::{
    bounded_cluster_gap, build_phenomenological, cluster_gap, decode, extra_cluster_gap, extra_cluster_gap_cg,
    sample_errors, syndrome_of, ClusterState, ContractedView, DecodingGraph, SeedSpec, Syndrome, Weight,
};

const SAMPLES: u64 = 64;

fn syndromes(g: &DecodingGraph) -> Vec<Syndrome> {
    (0..SAMPLES)
        .map(|i| syndrome_of(g, &sample_errors(g, SeedSpec::new(17, i)).unwrap()))
        .collect()
}

fn bench_decode(c: &mut Criterion) {
    let mut group = c.benchmark_group("decode");
    for d in [5, 9, 13] {
        let g = build_phenomenological(d, d, 0.005).unwrap();
        let s = syndromes(&g);
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, _| {
            b.iter(|| s.iter().map(|s| decode(&g, s).merges()).sum::<usize>())
        });
    }
    group.finish();
}

fn bench_gaps(c: &mut Criterion) {
    let eps = Weight::from_db(20.0);
    for p in [0.001, 0.01] {
        let mut group = c.benchmark_group(format!("gap p={p}"));
        for d in [5, 9, 13] {
            let g = build_phenomenological(d, d, p).unwrap();
            let states: Vec<ClusterState> = syndromes(&g).iter().map(|s| decode(&g, s)).collect();
            let run = |f: &dyn Fn(&ContractedView<'_>) -> Option<Weight>| {
                states.iter().filter_map(|cs| f(&ContractedView::new(&g, cs))).count()
            };
            group.bench_with_input(BenchmarkId::new("cluster", d), &d, |b, _| {
                b.iter(|| run(&|v| cluster_gap(v).value))
            });
            group.bench_with_input(BenchmarkId::new("bounded", d), &d, |b, _| {
                b.iter(|| run(&|v| bounded_cluster_gap(v, eps).value))
            });
            group.bench_with_input(BenchmarkId::new("extra", d), &d, |b, _| {
                b.iter(|| run(&|v| extra_cluster_gap(v, eps).value))
            });
            group.bench_with_input(BenchmarkId::new("extra-cg", d), &d, |b, _| {
                b.iter(|| run(&|v| extra_cluster_gap_cg(v, eps).value))
            });
        }
        group.finish();
    }
}

criterion_group!(benches, bench_decode, bench_gaps);
criterion_main!(benches);
