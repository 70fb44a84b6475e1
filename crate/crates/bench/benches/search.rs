use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use prunedirect_bench::fixture;
use prunedirect_core::permtest::{run_permutation_test, PermutationEngine};
use prunedirect_core::search::{exhaustive_scan, run_prunedirect, ScanConfig, DEFAULT_BUDGET};

fn scans(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    for (d, h2) in [(1, 0.3), (1, 0.0), (2, 0.3)] {
        let pop = fixture(d, h2, 1);
        let label = format!("d{d}_h{h2}");
        group.bench_with_input(BenchmarkId::new("prunedirect", &label), &pop, |b, pop| {
            b.iter(|| run_prunedirect(pop, d, &ScanConfig::default()).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("exhaustive", &label), &pop, |b, pop| {
            b.iter(|| exhaustive_scan(pop, d, DEFAULT_BUDGET).unwrap())
        });
    }
    group.finish();
}

fn permutations(c: &mut Criterion) {
    let pop = fixture(2, 0.3, 2);
    let candidate = run_prunedirect(&pop, 2, &ScanConfig::default()).unwrap().best_rss;
    let mut group = c.benchmark_group("permutations_d2");
    group.sample_size(10);
    group.bench_function("shortcut_x10", |b| {
        b.iter(|| run_permutation_test(&pop, 2, candidate, 10, 0, PermutationEngine::Shortcut, 1e-9).unwrap())
    });
    group.finish();
}

criterion_group!(benches, scans, permutations);
criterion_main!(benches);
