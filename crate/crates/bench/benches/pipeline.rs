//! End-to-end timings for the pieces that dominate real runs: canonical
//! construction, scoring, scramble/extract round trips, the exact oracle,
//! and the eigensolver that everything leans on.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pom_core::extract::extract_unitary;
use pom_core::matrix::{ComplexMatrix, HermitianOperator};
use pom_core::optimal::{canonical_observables, optimal_strategy, scramble};
use pom_core::oracle::{build_lp, solve_exact};
use pom_core::task::success_probability;
use pom_core::tol::Tolerances;

fn bench_canonical(c: &mut Criterion) {
    let mut group = c.benchmark_group("canonical_observables");
    for n in [4u32, 8, 12] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| canonical_observables(n).unwrap())
        });
    }
    group.finish();
}

fn bench_scoring(c: &mut Criterion) {
    let tols = Tolerances::default();
    let mut group = c.benchmark_group("success_probability");
    for n in [4u32, 6, 8] {
        let strategy = optimal_strategy(n, &tols).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &strategy, |b, s| {
            b.iter(|| success_probability(s))
        });
    }
    group.finish();
}

fn bench_extraction(c: &mut Criterion) {
    let tols = Tolerances::default();
    let mut group = c.benchmark_group("extract_unitary");
    for (n, junk) in [(3u32, 2usize), (5, 2), (6, 3)] {
        let base = optimal_strategy(n, &tols).unwrap();
        let (hidden, _) = scramble(&base, junk, 7, &tols).unwrap();
        let id = format!("n{n}_J{junk}");
        group.bench_with_input(
            BenchmarkId::from_parameter(id),
            hidden.measurements(),
            |b, set| b.iter(|| extract_unitary(set, &tols).unwrap()),
        );
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_solve_exact");
    group.sample_size(10);
    for n in [2u32, 3, 4] {
        let lp = build_lp(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &lp, |b, lp| {
            b.iter(|| solve_exact(lp).unwrap())
        });
    }
    group.finish();
}

fn bench_eig(c: &mut Criterion) {
    let mut group = c.benchmark_group("hermitian_eig");
    for dim in [16usize, 64] {
        let mut rng = ChaCha8Rng::seed_from_u64(dim as u64);
        let g = ComplexMatrix::from_fn(dim, |_, _| {
            num_complex::Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let h = HermitianOperator::new(g.add(&g.adjoint()).unwrap().scale_re(0.5), 1e-9).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(dim), &h, |b, h| {
            b.iter(|| h.eig().unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_canonical,
    bench_scoring,
    bench_extraction,
    bench_oracle,
    bench_eig
);
criterion_main!(benches);
