use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use trifree_core::audit::{sample_families, Family};
use trifree_core::spectral::extreme_eigs;
use trifree_core::*;

fn field(c: &mut Criterion) {
    let mut group = c.benchmark_group("field_mul");
    for q in [256u64, 65521] {
        let f = FieldSpec::new(q).unwrap();
        let xs: Vec<FieldElement> = (1..1024).map(|v| f.element(v as u32 % f.order()).unwrap()).collect();
        group.bench_with_input(BenchmarkId::from_parameter(q), &f, |b, f| {
            b.iter(|| xs.iter().fold(f.element(1).unwrap(), |acc, &x| f.mul(acc, black_box(x))))
        });
    }
    group.finish();
}

fn construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("construction");
    group.sample_size(10);
    for q in [8u64, 16] {
        group.bench_with_input(BenchmarkId::new("quadrangle", q), &q, |b, &q| b.iter(|| Quadrangle::new(q).unwrap()));
        let gq = Quadrangle::new(q).unwrap();
        group.bench_with_input(BenchmarkId::new("g1", q), &gq, |b, gq| b.iter(|| build_g1(gq).unwrap()));
        let cover = build_g1(&gq).unwrap();
        group.bench_with_input(BenchmarkId::new("g", q), &cover, |b, cover| {
            b.iter(|| build_g(cover, &assign_signs(cover, black_box(7))).unwrap())
        });
    }
    group.finish();
}

fn certification(c: &mut Criterion) {
    let mut group = c.benchmark_group("certify");
    group.sample_size(10);
    let cover = build_g1(&Quadrangle::new(16).unwrap()).unwrap();
    let signs = assign_signs(&cover, 7);
    let g = build_g(&cover, &signs).unwrap();
    group.bench_function("triangle_scan_q16", |b| b.iter(|| check_triangle_free(&g)));
    group.bench_function("structural_q16", |b| b.iter(|| check_structural(&cover, &signs, &g)));
    group.finish();
}

fn spectra_and_audit(c: &mut Criterion) {
    let mut group = c.benchmark_group("analysis");
    group.sample_size(10);
    let cover = build_g1(&Quadrangle::new(8).unwrap()).unwrap();
    group.bench_function("lanczos_g1_q8", |b| b.iter(|| extreme_eigs(cover.graph(), 2, 1e-8).unwrap()));

    let cover = build_g1(&Quadrangle::new(16).unwrap()).unwrap();
    let signs = assign_signs(&cover, 7);
    let g = build_g(&cover, &signs).unwrap();
    let sets = sample_families(&g, &cover, &signs, 200, &Family::ALL, 1).unwrap();
    group.bench_function("subset_stats_q16_x200", |b| {
        b.iter(|| sets.iter().map(|s| subset_stats(&s.set, &cover, &signs, &g).e_g).sum::<u64>())
    });
    group.finish();
}

criterion_group!(benches, field, construction, certification, spectra_and_audit);
criterion_main!(benches);
