use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use iadmmn_bench::fixture;
use iadmmn_core::logmf::{run_gd, update_u, update_w, LogMfProblem};
use iadmmn_core::solver::{Budget, Extrapolation};
use iadmmn_core::{run, BlockVector, InitialPoint, SolverConfig};

const ITERS: usize = 10;

fn solver_runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("ten_iterations");
    group.sample_size(10);
    for &(m, r) in &[(50, 10), (200, 100)] {
        let (inst, u, v) = fixture(m, m, r, 1);
        let p = LogMfProblem::new(inst.clone());
        let cfg = SolverConfig::new(2)
            .with_taus(0.1, 0.1)
            .with_budget(Budget::iterations(ITERS))
            .with_extrapolation(Extrapolation::NesterovCapped);
        let x0 = BlockVector::new(vec![u.clone(), v.clone()]);
        group.bench_with_input(BenchmarkId::new("iADMMn", m), &x0, |b, x0| {
            b.iter(|| run(&p, &cfg, InitialPoint::primal(x0.clone())).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("GD", m), &(u, v), |b, (u, v)| {
            b.iter(|| run_gd(&inst, u.clone(), v.clone(), Budget::iterations(ITERS)).unwrap())
        });
    }
    group.finish();
}

fn closed_form_steps(c: &mut Criterion) {
    let (inst, u, v) = fixture(200, 200, 100, 2);
    let uv = u.dot(&v);
    let w = uv.clone();
    let omega = w.mapv(|x| 0.1 * x);
    c.bench_function("update_u_200x100", |b| {
        b.iter(|| update_u(&u, &v, &w, &omega, 1.0, inst.lambda_d).unwrap())
    });
    c.bench_function("update_w_200x200", |b| {
        b.iter(|| update_w(&inst, &uv, &w, &omega, 1.0).unwrap())
    });
    c.bench_function("g_value_and_grad_200x200", |b| {
        b.iter(|| inst.g_value_and_grad(&w).unwrap())
    });
}

criterion_group!(benches, solver_runs, closed_form_steps);
criterion_main!(benches);
