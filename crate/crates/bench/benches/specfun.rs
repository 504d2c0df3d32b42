use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use qbx::specfun::{bessel_j_seq, hankel1_seq};

fn sequences(c: &mut Criterion) {
    let mut group = c.benchmark_group("sequences");
    for &n in &[8usize, 16, 32] {
        group.bench_with_input(BenchmarkId::new("bessel_j", n), &n, |b, &n| {
            b.iter(|| bessel_j_seq(n, black_box(3.7)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("hankel1", n), &n, |b, &n| {
            b.iter(|| hankel1_seq(n, black_box(3.7)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sequences);
criterion_main!(benches);
