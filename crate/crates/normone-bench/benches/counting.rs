//! Benchmarks for the hot paths of the counting pipeline: the Moebius
//! sieve, the brute-force enumeration, the aggregate census, and the raw
//! lattice walk they all sit on.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use normone::aggregate;
use normone::angle::{Angle, Arc};
use normone::domain::full_region;
use normone::field::{FieldDescriptor, HeightBound};
use normone::lattice::LatticeBasis;
use normone::{oracle, sieve, IdealHnf};

fn bench_sieve_count(c: &mut Criterion) {
    let qi = FieldDescriptor::imag_quadratic(1).unwrap();
    let region = full_region(&qi).unwrap();
    let hb = HeightBound::parse("50").unwrap();
    c.bench_function("sieve_count_gaussian_h50", |b| {
        b.iter(|| {
            let (n, _) =
                sieve::count_norm_one(black_box(&qi), black_box(&region), black_box(&hb), false)
                    .unwrap();
            black_box(n)
        })
    });
}

fn bench_enumeration(c: &mut Criterion) {
    let qi = FieldDescriptor::imag_quadratic(1).unwrap();
    let region = full_region(&qi).unwrap();
    let hb = HeightBound::parse("20").unwrap();
    c.bench_function("enumerate_gaussian_h20", |b| {
        b.iter(|| {
            let pts =
                oracle::enumerate_norm_one(black_box(&qi), black_box(&region), black_box(&hb))
                    .unwrap();
            black_box(pts.len())
        })
    });
}

fn bench_aggregate(c: &mut Criterion) {
    let upper = Arc::new(Angle::zero(), Angle::from_pi(1, 1)).unwrap();
    let hb = HeightBound::parse("15").unwrap();
    c.bench_function("aggregate_census_h15", |b| {
        b.iter(|| black_box(aggregate::count_aggregate(black_box(&upper), black_box(&hb)).unwrap()))
    });
}

fn bench_lattice_walk(c: &mut Criterion) {
    let qi = FieldDescriptor::imag_quadratic(1).unwrap();
    let unit = IdealHnf::unit(normone::ideal::Ring::Top, qi.dim);
    let basis = LatticeBasis::from_ideal(&qi, &unit).unwrap();
    let bound = normone::exact::rat(2500, 1);
    c.bench_function("lattice_ball_norm2500", |b| {
        b.iter(|| {
            let pts = basis.enumerate_ball(black_box(&bound)).unwrap();
            black_box(pts.len())
        })
    });
}

criterion_group!(
    benches,
    bench_sieve_count,
    bench_enumeration,
    bench_aggregate,
    bench_lattice_walk
);
criterion_main!(benches);
