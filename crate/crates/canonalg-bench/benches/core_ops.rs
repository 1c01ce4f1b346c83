//! Benchmarks for the hot paths: scheme evaluation, distinct-row scans,
//! profile construction, canonicalization, isomorphism testing, and the
//! Jacobian rank measurement.

use canonalg::{
    act, build_profile, canonical_form, distinct_rows, enumerate_schemes, evaluate_scheme,
    iso_test, jacobian_rank, JacobianMap, ScalarKind, SymmetryClass, PROBE_PRIME,
};
use canonalg_bench::{basis_change, fp_kind, m2_profile, m3_profile, tensor};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn bench_scheme_evaluation(c: &mut Criterion) {
    let a = tensor(3, fp_kind(), 11);
    let schemes = enumerate_schemes(2);
    c.bench_function("evaluate_scheme k=2 m=3 fp", |b| {
        b.iter(|| {
            for s in &schemes {
                black_box(evaluate_scheme(s, &a).unwrap());
            }
        })
    });
}

fn bench_distinct_rows(c: &mut Criterion) {
    c.bench_function("distinct_rows k=3 m=2 general", |b| {
        b.iter(|| black_box(distinct_rows(3, 2, SymmetryClass::General, 1).unwrap()))
    });
}

fn bench_build_profile(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_profile");
    g.sample_size(10);
    g.bench_function("m3 general", |b| {
        b.iter(|| black_box(build_profile(3, SymmetryClass::General, 1, None).unwrap()))
    });
    g.finish();
}

fn bench_canonical_form(c: &mut Criterion) {
    let p2 = m2_profile();
    let p3 = m3_profile();
    let a2 = tensor(2, ScalarKind::Rational, 5);
    let a3 = tensor(3, fp_kind(), 5);
    c.bench_function("canonical_form m=2 rational", |b| {
        b.iter(|| black_box(canonical_form(&p2, &a2).unwrap()))
    });
    c.bench_function("canonical_form m=3 fp", |b| {
        b.iter(|| black_box(canonical_form(&p3, &a3).unwrap()))
    });
}

fn bench_iso_test(c: &mut Criterion) {
    let p2 = m2_profile();
    let a = tensor(2, ScalarKind::Rational, 5);
    let g = basis_change(2, ScalarKind::Rational, 6);
    let b_t = act(&g, &a).unwrap();
    c.bench_function("iso_test m=2 rational conjugate pair", |b| {
        b.iter(|| black_box(iso_test(&p2, &a, &b_t).unwrap()))
    });
}

fn bench_jacobian_rank(c: &mut Criterion) {
    let p2 = m2_profile();
    let mut g = c.benchmark_group("jacobian_rank");
    g.sample_size(10);
    g.bench_function("m=2 canonical", |b| {
        b.iter(|| black_box(jacobian_rank(&p2, JacobianMap::Canonical, 1, PROBE_PRIME).unwrap()))
    });
    g.finish();
}

criterion_group!(
    benches,
    bench_scheme_evaluation,
    bench_distinct_rows,
    bench_build_profile,
    bench_canonical_form,
    bench_iso_test,
    bench_jacobian_rank
);
criterion_main!(benches);
