use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use treesample::swor::swor;
use treesample::{Algorithm, PreparedSampler, RandomSource, TreeKind};
use treesample_bench::{complete_graph, SIZES};

fn single_samples(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample");
    for n in SIZES {
        let g = complete_graph(n, n as u64);
        for algorithm in [Algorithm::Colbourn, Algorithm::WilsonRc, Algorithm::WilsonReject] {
            let sampler = PreparedSampler::new(&g, algorithm, TreeKind::Dependency).unwrap();
            let mut rng = RandomSource::new(1);
            group.bench_with_input(BenchmarkId::new(algorithm.as_str(), n), &n, |b, _| {
                b.iter(|| black_box(sampler.draw(&mut rng).unwrap()))
            });
        }
        let sampler = PreparedSampler::new(&g, Algorithm::Wilson, TreeKind::Spanning).unwrap();
        let mut rng = RandomSource::new(2);
        group.bench_with_input(BenchmarkId::new("wilson", n), &n, |b, _| {
            b.iter(|| black_box(sampler.draw(&mut rng).unwrap()))
        });
    }
    group.finish();
}

fn without_replacement(c: &mut Criterion) {
    let mut group = c.benchmark_group("swor-k4");
    group.sample_size(20);
    for n in [5, 10, 20] {
        let g = complete_graph(n, n as u64);
        let mut rng = RandomSource::new(3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| black_box(swor(&g, TreeKind::Dependency, 4, &mut rng).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, single_samples, without_replacement);
criterion_main!(benches);
