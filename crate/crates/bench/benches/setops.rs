use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use growthlab::cayley::diameter;
use growthlab::setgrowth::{ball, product};
use growthlab_bench::{generators, random_set};

fn bench_product(c: &mut Criterion) {
    let small = random_set(3, 5, 300, 1);
    let sparse = random_set(3, 101, 1000, 2);
    c.bench_function("product sl3 f5 300x300", |b| {
        b.iter(|| product(black_box(&small), black_box(&small)).unwrap())
    });
    c.bench_function("product sl3 f101 1000x1000", |b| {
        b.iter(|| product(black_box(&sparse), black_box(&sparse)).unwrap())
    });
}

fn bench_ball(c: &mut Criterion) {
    let a = random_set(3, 13, 4, 3);
    c.bench_function("ball sl3 f13 radius 6", |b| b.iter(|| ball(black_box(&a), 6).unwrap()));
}

fn bench_diameter(c: &mut Criterion) {
    let gens = generators(2, 31);
    c.bench_function("diameter sl2 f31", |b| b.iter(|| diameter(black_box(&gens)).unwrap()));
}

criterion_group!(benches, bench_product, bench_ball, bench_diameter);
criterion_main!(benches);
