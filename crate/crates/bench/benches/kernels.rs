use std::hint::black_box;

use commsq::catalog;
use commsq::factorization::enumerate_factorizations;
use commsq::fourstar::family_connection;
use commsq::fusion::SearchOptions;
use commsq::graph::SPECTRAL_TOL;
use commsq::{spectral, verify};
use commsq_bench::{regular_triple, star3333, stars};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn spectral_bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectral_star");
    for (k, graph) in stars() {
        g.bench_with_input(BenchmarkId::from_parameter(k), &graph, |b, graph| {
            b.iter(|| spectral(black_box(graph), SPECTRAL_TOL).unwrap())
        });
    }
    g.finish();
}

fn catalog_bench(c: &mut Criterion) {
    for name in catalog::CATALOG_NAMES {
        c.bench_function(&format!("catalog_{name}"), |b| b.iter(|| catalog::by_name(black_box(name)).unwrap()));
    }
    let e = catalog::by_name("quipu").unwrap();
    c.bench_function("verify_quipu", |b| b.iter(|| verify(black_box(&e.connection), 1e-10)));
}

fn factorization_bench(c: &mut Criterion) {
    let g = star3333();
    c.bench_function("factorize_star3333", |b| b.iter(|| enumerate_factorizations(black_box(&g)).unwrap()));
}

fn fourstar_bench(c: &mut Criterion) {
    c.bench_function("fourstar_connection_4_4", |b| b.iter(|| family_connection(4, 4, black_box(0.7)).unwrap()));
}

fn multmaps_bench(c: &mut Criterion) {
    for name in ["Z3", "fib", "su2_2"] {
        let t = regular_triple(name);
        c.bench_function(&format!("multmaps_{name}"), |b| {
            b.iter(|| t.find_multiplication_maps(SearchOptions::default()))
        });
    }
}

criterion_group!(benches, spectral_bench, catalog_bench, factorization_bench, fourstar_bench, multmaps_bench);
criterion_main!(benches);
