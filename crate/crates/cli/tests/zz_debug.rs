use interplab_core::couples::*;
use interplab_core::sectorial::*;
use interplab_core::*;
use std::sync::Arc;
use std::time::Instant;
#[test]
fn dbg() {
    let coarse = Arc::new(LogGrid::per_decade(1e-6, 1e6, 10).unwrap());
    let g = Arc::new(coarse.refine(4).unwrap());
    let op = SectorialOperator::positive_diagonal(&[1.0, 4.0]).unwrap();
    let phi = PhiSpace::classical(0.5, 3.0).unwrap();
    let x = vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
    let c = op.domain_couple(VecNorm::L2);
    let w = op.working_angle();
    let t = Instant::now();
    k_method_norm(&c, &phi, &x, &g).unwrap();
    eprintln!("KK {:?}", t.elapsed());
    let t = Instant::now();
    trace_method_norm(&c, &phi, &x, &g).unwrap();
    eprintln!("TR {:?}", t.elapsed());
    let t = Instant::now();
    psi_rep_norm(
        &phi,
        &op,
        &HolFunction::psi_exp(w).unwrap(),
        &x,
        false,
        &g,
        &VecNorm::L2,
    )
    .unwrap();
    eprintln!("PSI {:?}", t.elapsed());
    let t = Instant::now();
    psi_rep_norm(
        &phi,
        &op,
        &HolFunction::regulariser(w),
        &x,
        false,
        &g,
        &VecNorm::L2,
    )
    .unwrap();
    eprintln!("REG {:?}", t.elapsed());
}
