use std::hint::black_box;

use acyclic_core::hierarchy;
use acyclic_core::testkit::canonical;
use acyclic_core::{pair, phi, psi, psi_inv, CertifiedSeq, EvConstSeq, OrdinalExpr, Side, Word};
use criterion::{criterion_group, criterion_main, Criterion};

fn codings(c: &mut Criterion) {
    c.bench_function("phi_pair_1e4", |b| {
        b.iter(|| {
            for q in 0..10_000u128 {
                let p = phi(black_box(q));
                black_box(pair(p.first, p.second).unwrap());
            }
        })
    });
    c.bench_function("psi_round_trip_1e4", |b| {
        b.iter(|| {
            for q in 0..10_000u128 {
                black_box(psi_inv(&psi(black_box(q))).unwrap());
            }
        })
    });
    c.bench_function("canonical_bit_deep_level", |b| {
        let level = (1u128 << 100) + 12345;
        b.iter(|| {
            for i in (0..64u128).map(|k| k << 93) {
                black_box(canonical::bit(black_box(level), Side::One, i));
            }
        })
    });
}

fn rho(c: &mut Criterion) {
    let seq = EvConstSeq::new(
        Word::from_bits((0..64).map(|i| i % 7 == 3).collect()),
        false,
    );
    let e = CertifiedSeq::new(seq);
    c.bench_function("rho0_prefix64", |b| {
        b.iter(|| black_box(hierarchy::rho0(black_box(&e))))
    });
    c.bench_function("rho0_pow3_prefix64", |b| {
        b.iter(|| black_box(hierarchy::rho0_pow(&OrdinalExpr::Finite(3), black_box(&e)).unwrap()))
    });
}

criterion_group!(benches, codings, rho);
criterion_main!(benches);
