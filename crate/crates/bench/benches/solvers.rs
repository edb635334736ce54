use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use qhm_core::poly::RootConfig;
use qhm_core::{
    forward_target, hp_invariant, in_local_bifurcation, in_semilocal_bifurcation, solve_fiber, ComplexPoly,
    FiberTarget, GermType, QHFunction, SolverConfig, Weights,
};

fn sample_lambdas(n: usize) -> Vec<Complex64> {
    // deterministic, well spread roots
    (0..n)
        .map(|k| {
            let t = k as f64 + 0.37;
            Complex64::new((1.3 * t).cos() * (1.0 + 0.1 * t), (0.7 * t).sin() * (1.0 + 0.05 * t))
        })
        .collect()
}

fn roots(c: &mut Criterion) {
    let mut group = c.benchmark_group("roots");
    for n in [4, 8, 16, 32] {
        let p = ComplexPoly::from_roots(&sample_lambdas(n), Complex64::new(1.0, 0.0)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| black_box(p).roots(&RootConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn invariant(c: &mut Criterion) {
    let mut group = c.benchmark_group("hp_invariant");
    for n in [3, 6, 12] {
        let f = QHFunction::commode(Weights::new(2, 3).unwrap(), sample_lambdas(n)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| {
            b.iter(|| hp_invariant(black_box(f)).unwrap())
        });
    }
    group.finish();
}

fn bifurcation(c: &mut Criterion) {
    let q = ComplexPoly::from_roots(&sample_lambdas(8), Complex64::new(1.0, 0.0)).unwrap();
    c.bench_function("bifurcation/local_n8", |b| b.iter(|| in_local_bifurcation(black_box(&q))));
    c.bench_function("bifurcation/semilocal_n8", |b| b.iter(|| in_semilocal_bifurcation(black_box(&q))));
}

fn fibers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_fiber");
    group.sample_size(10);
    let cfg = SolverConfig::default();
    let cubic =
        FiberTarget::new(GermType::III, 3, vec![Complex64::new(-21.0 / 9.0, 0.0), Complex64::new(-329.0 / 729.0, 0.0)])
            .unwrap();
    group.bench_function("type_iii_n3_cubic", |b| b.iter(|| solve_fiber(black_box(&cubic), &cfg).unwrap()));
    for (label, w, n) in [("type_ii_n4", (1, 2), 4), ("type_iii_n4", (2, 3), 4), ("type_ii_n5", (1, 2), 5)] {
        let f = QHFunction::commode(Weights::new(w.0, w.1).unwrap(), sample_lambdas(n)).unwrap();
        let target = forward_target(&f).unwrap().target;
        group.bench_function(label, |b| b.iter(|| solve_fiber(black_box(&target), &cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, roots, invariant, bifurcation, fibers);
criterion_main!(benches);
