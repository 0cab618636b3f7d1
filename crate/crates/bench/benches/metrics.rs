use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dockspec_bench::{random_dockerfile, rng};
use dockspec_core::evaluation::{bleu4_text, mann_whitney_u, tree_edit_distance};
use dockspec_core::{build_ast, parse_dockerfile};
use rand::Rng;

fn bench_ted(c: &mut Criterion) {
    let mut group = c.benchmark_group("tree_edit_distance");
    for runs in [2, 8, 32] {
        let mut r = rng(runs as u64);
        let a = build_ast(&parse_dockerfile(&random_dockerfile(&mut r, runs)).unwrap()).unwrap();
        let b = build_ast(&parse_dockerfile(&random_dockerfile(&mut r, runs)).unwrap()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(runs), &(a, b), |bch, (a, b)| {
            bch.iter(|| black_box(tree_edit_distance(a, b)))
        });
    }
    group.finish();
}

fn bench_bleu(c: &mut Criterion) {
    let mut r = rng(1);
    let a = random_dockerfile(&mut r, 20);
    let b = random_dockerfile(&mut r, 20);
    c.bench_function("bleu4_20_runs", |bch| bch.iter(|| black_box(bleu4_text(&a, &b))));
}

fn bench_mann_whitney(c: &mut Criterion) {
    let mut r = rng(2);
    let small: Vec<f64> = (0..16).map(|_| r.gen_range(0.0..1.0)).collect();
    let large: Vec<f64> = (0..2000).map(|_| r.gen_range(0.0..1.0)).collect();
    c.bench_function("mann_whitney_exact_8v8", |bch| {
        bch.iter(|| black_box(mann_whitney_u(&small[..8], &small[8..])))
    });
    c.bench_function("mann_whitney_normal_1000v1000", |bch| {
        bch.iter(|| black_box(mann_whitney_u(&large[..1000], &large[1000..])))
    });
}

criterion_group!(benches, bench_ted, bench_bleu, bench_mann_whitney);
criterion_main!(benches);
