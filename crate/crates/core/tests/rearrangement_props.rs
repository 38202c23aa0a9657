use std::sync::Arc;

use interplab_core::rearrangement::{decreasing_rearrangement, distribution_function};
use interplab_core::ri_spaces::phi_norm;
use interplab_core::{LogGrid, PhiSpace, RiSpace, SampledFunction, Weight};
use proptest::prelude::*;

const CELLS: usize = 24;

fn grid() -> Arc<LogGrid> {
    Arc::new(LogGrid::new(1e-2, 1e2, CELLS).unwrap())
}

fn weights() -> impl Strategy<Value = Weight> {
    prop_oneof![
        Just(Weight::one()),
        (-0.9f64..1.5).prop_map(Weight::power),
        (-0.9f64..1.0, -0.9f64..1.0).prop_map(|(a, b)| Weight::piecewise_power(a, b)),
    ]
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), -5.0f64..5.0], CELLS)
}

fn spaces() -> impl Strategy<Value = PhiSpace> {
    prop_oneof![
        (1.0f64..5.0).prop_map(|p| PhiSpace::unweighted(RiSpace::lp(p).unwrap())),
        (1.2f64..4.0, 1.0f64..4.0)
            .prop_map(|(p, q)| PhiSpace::unweighted(RiSpace::lorentz(p, q).unwrap())),
        (1.0f64..4.0, -0.5f64..1.0)
            .prop_map(|(p, a)| PhiSpace::new(RiSpace::lp(p).unwrap(), Weight::power(a))),
    ]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rearrangement_is_nonincreasing_and_equimeasurable(v in values(), w in weights()) {
        let f = SampledFunction::new(grid(), v.clone()).unwrap();
        let r = decreasing_rearrangement(&f, &w).unwrap();
        prop_assert!(r.levels().windows(2).all(|p| p[0] > p[1]));
        for &lambda in r.levels().iter().chain(&[0.5, 2.5]) {
            let mu = distribution_function(&f, &w, lambda).unwrap();
            prop_assert!(close(r.measure_above(lambda), mu, 1e-12), "λ={lambda}: {} vs {mu}", r.measure_above(lambda));
        }
    }

    #[test]
    fn rearrangement_scales_with_modulus(v in values(), w in weights(), c in -4.0f64..4.0) {
        let f = SampledFunction::new(grid(), v.clone()).unwrap();
        let g = f.scale(c);
        let rf = decreasing_rearrangement(&f, &w).unwrap();
        let rg = decreasing_rearrangement(&g, &w).unwrap();
        for s in [1e-3, 0.1, 1.0, 10.0, 50.0] {
            prop_assert!(close(rg.eval(s), c.abs() * rf.eval(s), 1e-12));
        }
    }

    #[test]
    fn pointwise_domination_is_preserved(v in values(), w in weights(), bump in prop::collection::vec(0.0f64..2.0, CELLS)) {
        let f = SampledFunction::new(grid(), v.clone()).unwrap();
        let g = SampledFunction::new(grid(), v.iter().zip(&bump).map(|(a, b)| a.abs() + b).collect()).unwrap();
        let rf = decreasing_rearrangement(&f, &w).unwrap();
        let rg = decreasing_rearrangement(&g, &w).unwrap();
        for s in [1e-3, 0.1, 1.0, 10.0, 50.0] {
            prop_assert!(rf.eval(s) <= rg.eval(s) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn norm_axioms(phi in spaces(), a in values(), b in values(), c in -3.0f64..3.0) {
        let f = SampledFunction::new(grid(), a).unwrap();
        let g = SampledFunction::new(grid(), b).unwrap();
        let nf = phi_norm(&phi, &f).unwrap().value;
        let ng = phi_norm(&phi, &g).unwrap().value;
        prop_assert!(nf >= 0.0);
        prop_assert!(close(phi_norm(&phi, &f.scale(c)).unwrap().value, c.abs() * nf, 1e-10));
        let sum = f.zip_with(&g, |x, y| x + y).unwrap();
        let ns = phi_norm(&phi, &sum).unwrap().value;
        // Lorentz spaces with q > p are only quasi-normed
        if !phi.base.is_quasi_norm() {
            prop_assert!(ns <= (nf + ng) * (1.0 + 1e-10), "{ns} > {nf} + {ng}");
        }
        prop_assert_eq!(phi_norm(&phi, &SampledFunction::zeros(grid())).unwrap().value, 0.0);
    }
}
