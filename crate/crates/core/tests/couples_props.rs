use interplab_core::{Complex64, Couple, VecNorm};
use proptest::prelude::*;

fn vector(d: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(
        (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| Complex64::new(a, b)),
        d,
    )
    .prop_filter("nonzero", |v| v.iter().any(|z| z.norm() > 1e-3))
}

fn diagonal_case() -> impl Strategy<Value = (Couple, Vec<Complex64>)> {
    (1usize..5).prop_flat_map(|d| {
        (
            prop::collection::vec(0.05f64..20.0, d),
            prop_oneof![Just(1.0), Just(2.0), 1.0f64..4.0],
            vector(d),
        )
            .prop_map(|(mu, p, x)| (Couple::diagonal(mu, p).unwrap(), x))
    })
}

fn domain_case() -> impl Strategy<Value = (Couple, Vec<Complex64>)> {
    (prop::collection::vec(-2.0f64..2.0, 4), vector(2)).prop_map(|(m, x)| {
        let a = interplab_core::DenseMatrix::from_real_rows(&[
            vec![1.0 + m[0].abs(), m[1]],
            vec![m[2], 1.0 + m[3].abs()],
        ])
        .unwrap();
        (Couple::domain(a, VecNorm::L2), x)
    })
}

const TS: [f64; 9] = [1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0, 1000.0];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn k_is_monotone_concave_and_bounded((c, x) in prop_oneof![diagonal_case(), domain_case()]) {
        let ks = c.k_curve(&x, &TS).unwrap();
        let (nx, ny) = (c.x_norm(&x), c.y_norm(&x));
        for (d, &t) in ks.iter().zip(&TS) {
            prop_assert!(d.lower <= d.value * (1.0 + 1e-12));
            prop_assert!(d.value <= nx.min(t * ny) * (1.0 + 1e-9), "K({t}) = {} above min(|x|, t|x|_Y)", d.value);
        }
        for w in ks.windows(2) {
            prop_assert!(w[1].lower <= w[1].value && w[0].lower <= w[1].value * (1.0 + 1e-9));
        }
        // concavity against certified lower bounds: K(t₂) ≥ interpolation of lower bounds at t₁, t₃
        for i in 0..TS.len() - 2 {
            let (t1, t2, t3) = (TS[i], TS[i + 1], TS[i + 2]);
            let s = (t2 - t1) / (t3 - t1);
            let chord = (1.0 - s) * ks[i].lower + s * ks[i + 2].lower;
            prop_assert!(ks[i + 1].value >= chord * (1.0 - 1e-9), "concavity fails at t = {t2}");
        }
    }

    #[test]
    fn k_is_a_norm_in_x((c, x) in diagonal_case(), s in -3.0f64..3.0, t in 1e-2f64..1e2) {
        let k = c.k_functional(&x, t).unwrap();
        let sx: Vec<Complex64> = x.iter().map(|z| z * s).collect();
        let ks = c.k_functional(&sx, t).unwrap();
        prop_assert!((ks - s.abs() * k).abs() <= 1e-9 * k.max(1e-300));
        let y: Vec<Complex64> = x.iter().rev().cloned().collect();
        let ky = c.k_functional(&y, t).unwrap();
        let sum: Vec<Complex64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        prop_assert!(c.k_functional(&sum, t).unwrap() <= (k + ky) * (1.0 + 1e-9));
    }
}
