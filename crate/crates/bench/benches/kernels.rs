use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use levy_spectra::{
    count_in, ldl_inertia, panjer_pmf, sample_disorder, EnergyWindow, HamiltonianTemplate,
    LevyWeights,
};
use levy_spectra_bench::{anderson, realization};
use std::hint::black_box;

fn inertia(c: &mut Criterion) {
    let mut group = c.benchmark_group("ldl_inertia");
    for (dim, l) in [(1, 500), (1, 5000), (2, 15), (2, 40), (3, 5)] {
        let (spec, lattice) = anderson(dim, l);
        let h = realization(&spec, &lattice);
        let id = format!("d{dim}_n{}_b{}", h.order(), h.bandwidth());
        group.bench_with_input(BenchmarkId::from_parameter(id), &h, |b, h| {
            b.iter(|| ldl_inertia(black_box(h), black_box(2.5)))
        });
    }
    group.finish();
}

fn window_count(c: &mut Criterion) {
    let (spec, lattice) = anderson(1, 1000);
    let h = realization(&spec, &lattice);
    let window = EnergyWindow::centered(2.5, 1.0, &lattice).expect("valid window");
    c.bench_function("count_in/d1_n2001", |b| {
        b.iter(|| count_in(black_box(&h), black_box(&window)))
    });
}

fn assemble(c: &mut Criterion) {
    let (spec, lattice) = anderson(2, 20);
    let template = HamiltonianTemplate::new(&spec, &lattice).expect("valid model");
    let mut r = 0;
    c.bench_function("sample_and_assemble/d2_n1681", |b| {
        b.iter_batched(
            || {
                r += 1;
                r
            },
            |r| {
                let omega = sample_disorder(&spec, &lattice, 1, r);
                template.assemble(&omega)
            },
            BatchSize::SmallInput,
        )
    });
}

fn panjer(c: &mut Criterion) {
    let law = LevyWeights::new(vec![0.8, 0.5, 0.3, 0.2]).expect("valid weights");
    c.bench_function("panjer_pmf/m4_n200", |b| {
        b.iter(|| panjer_pmf(black_box(&law), 200))
    });
}

criterion_group!(benches, inertia, window_count, assemble, panjer);
criterion_main!(benches);
