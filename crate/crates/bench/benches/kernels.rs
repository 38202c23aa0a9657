use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use interplab_bench::{cli_grid, test_function, unit_vector};
use interplab_core::couples::k_method_norm;
use interplab_core::hardy::HardyOp;
use interplab_core::maxreg::solve_cauchy;
use interplab_core::rearrangement::decreasing_rearrangement;
use interplab_core::ri_spaces::phi_norm;
use interplab_core::sectorial::{calc, HolFunction, SectorialOperator};
use interplab_core::{CauchyProblem, PhiSpace, RiSpace, VecNorm, Weight};

fn rearrangement(c: &mut Criterion) {
    let g = cli_grid();
    let f = test_function(&g);
    let w = Weight::power(-0.5);
    c.bench_function("rearrangement/4800 cells", |b| {
        b.iter(|| decreasing_rearrangement(black_box(&f), &w).unwrap())
    });
    let phi = PhiSpace::new(RiSpace::lorentz(3.0, 2.0).unwrap(), Weight::power(0.5));
    c.bench_function("phi_norm/lorentz weighted", |b| {
        b.iter(|| phi_norm(&phi, black_box(&f)).unwrap())
    });
}

fn hardy(c: &mut Criterion) {
    let g = cli_grid();
    let f = test_function(&g);
    c.bench_function("hardy/S on 4800 cells", |b| {
        b.iter(|| HardyOp::S.apply_truncated(black_box(&f)).unwrap())
    });
}

fn couples(c: &mut Criterion) {
    let g = std::sync::Arc::new(interplab_core::LogGrid::per_decade(1e-4, 1e4, 20).unwrap());
    let op = SectorialOperator::jordan(5.0).unwrap();
    let couple = op.domain_couple(VecNorm::L2);
    let phi = PhiSpace::classical(0.5, 2.0).unwrap();
    let x = unit_vector(2);
    c.bench_function("k_method_norm/domain couple 160 nodes", |b| {
        b.iter(|| k_method_norm(&couple, &phi, black_box(&x), &g).unwrap())
    });
}

fn calculus(c: &mut Criterion) {
    let op = SectorialOperator::rotated(0.4).unwrap();
    let f = HolFunction::mobius_power(3);
    c.bench_function("calc/mobius on rotated", |b| {
        b.iter(|| calc(black_box(&f), &op).unwrap())
    });
}

fn cauchy(c: &mut Criterion) {
    let g = cli_grid();
    let op = SectorialOperator::jordan(5.0).unwrap();
    let p = CauchyProblem::homogeneous(op, g, unit_vector(2)).unwrap();
    c.bench_function("solve_cauchy/4800 cells", |b| {
        b.iter(|| solve_cauchy(black_box(&p)).unwrap())
    });
}

criterion_group!(benches, rearrangement, hardy, couples, calculus, cauchy);
criterion_main!(benches);
