use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use simnerve_bench::{random_corpus, random_edges};
use simnerve_core::community::{louvain, Graph};
use simnerve_core::mapper::{single_linkage, FunctionalDistance};
use simnerve_core::simdecomp::{all_profiles, decompose, ProfileOptions};

fn bench_decompose(c: &mut Criterion) {
    let set = random_corpus(2, 25, 1);
    let (a, b) = (&set.interactions()[0], &set.interactions()[1]);
    c.bench_function("decompose_d25", |bench| {
        bench.iter(|| decompose(black_box(a), black_box(b)).unwrap())
    });
}

fn bench_all_profiles(c: &mut Criterion) {
    let mut group = c.benchmark_group("all_profiles");
    group.sample_size(10);
    for n in [500usize, 2000] {
        let set = random_corpus(n, 25, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &set, |bench, set| {
            bench.iter(|| all_profiles(set, ProfileOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn bench_single_linkage(c: &mut Criterion) {
    let set = random_corpus(400, 25, 3);
    let dist = FunctionalDistance::new(&set);
    c.bench_function("single_linkage_400", |bench| {
        bench.iter(|| single_linkage(400, |a, b| dist.distance(a, b)))
    });
}

fn bench_louvain(c: &mut Criterion) {
    let graph = Graph::from_edges(1000, &random_edges(1000, 0.01, 4)).unwrap();
    c.bench_function("louvain_1000", |bench| {
        bench.iter(|| louvain(&graph, 1.0, 0).unwrap())
    });
}

criterion_group!(
    benches,
    bench_decompose,
    bench_all_profiles,
    bench_single_linkage,
    bench_louvain
);
criterion_main!(benches);
