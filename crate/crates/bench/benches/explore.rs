use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use labelc_core::labeling::Criterion as Cov;
use labelc_core::symexec::{path_predicate, PathPrefix};
use labelc_core::{corpus, direct_instrument, explore, explore_idl, lc_score, solve, tight_instrument, ExploreConfig, Idl};

fn instrumentation(c: &mut Criterion) {
    let mut group = c.benchmark_group("explore trityp mcc");
    group.sample_size(10);
    let t = corpus::get("trityp").unwrap();
    let ap = t.annotate(Cov::Mcc).unwrap();
    let cfg = ExploreConfig::with_k(t.k);
    let direct = direct_instrument(&ap, false).program;
    let tight = tight_instrument(&ap).program;
    group.bench_function("P", |b| b.iter(|| explore(black_box(&ap.program), cfg)));
    group.bench_function("P'", |b| b.iter(|| explore(black_box(&direct), cfg)));
    group.bench_function("P*", |b| b.iter(|| explore(black_box(&tight), cfg)));
    group.bench_function("P* idl2", |b| b.iter(|| explore_idl(black_box(&ap), cfg, Idl::Idl2)));
    group.finish();
}

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    for name in ["trityp", "utf8_5", "tcas"] {
        let p = corpus::get(name).unwrap();
        let suite = explore(&p.program, ExploreConfig::with_k(p.k));
        // The deepest path gives the largest predicate.
        let entry = suite.entries.iter().max_by_key(|e| e.path.len()).unwrap();
        let prefix = PathPrefix::from_branches(&entry.path).unwrap();
        let f = path_predicate(&p.program, &prefix).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(name), &f, |b, f| b.iter(|| solve(f, labelc_core::solver::DEFAULT_BUDGET)));
    }
    group.finish();
}

fn scoring(c: &mut Criterion) {
    let t = corpus::get("trityp").unwrap();
    let ap = t.annotate(Cov::Wm).unwrap();
    let suite = explore(&tight_instrument(&ap).program, ExploreConfig::with_k(t.k));
    c.bench_function("lc_score trityp wm", |b| b.iter(|| lc_score(black_box(&ap), &suite)));
}

criterion_group!(benches, instrumentation, solver, scoring);
criterion_main!(benches);
