use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qbx_bench::{single_layer, starfish};

fn on_surface_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("on_surface_apply");
    group.sample_size(10);
    let spec = single_layer(0.5);
    for &panels in &[16usize, 32] {
        let (potential, density, targets) = starfish(panels);
        group.bench_with_input(BenchmarkId::from_parameter(targets.len()), &panels, |b, _| {
            b.iter(|| potential.apply(&spec, &density, &targets, 8).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, on_surface_apply);
criterion_main!(benches);
