use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dockspec_bench::{random_spec, rng};
use dockspec_core::retrieval::{vector_retrieve, Bm25Params, RetrievalIndex, VectorIndex};

fn bench_retrieve(c: &mut Criterion) {
    let mut group = c.benchmark_group("retrieve_top10");
    for docs in [200, 2_000, 20_000] {
        let mut r = rng(docs as u64);
        let corpus: Vec<_> = (0..docs).map(|i| (random_spec(&mut r), format!("doc {i}"))).collect();
        let bm25 = RetrievalIndex::build(corpus.clone(), Bm25Params::default()).unwrap();
        let vectors = VectorIndex::build(corpus).unwrap();
        let query = random_spec(&mut r);
        group.bench_with_input(BenchmarkId::new("bm25", docs), &query, |bch, q| {
            bch.iter(|| black_box(bm25.retrieve(q, 10)))
        });
        group.bench_with_input(BenchmarkId::new("tfidf_cosine", docs), &query, |bch, q| {
            bch.iter(|| black_box(vector_retrieve(q, 10, &vectors)))
        });
    }
    group.finish();
}

fn bench_build(c: &mut Criterion) {
    let mut r = rng(9);
    let corpus: Vec<_> = (0..2_000).map(|i| (random_spec(&mut r), format!("doc {i}"))).collect();
    c.bench_function("index_build_2000", |bch| {
        bch.iter(|| black_box(RetrievalIndex::build(corpus.clone(), Bm25Params::default())))
    });
}

criterion_group!(benches, bench_retrieve, bench_build);
criterion_main!(benches);
