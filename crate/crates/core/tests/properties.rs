use approx::assert_relative_eq;
use fpconv::format::{fmt17, parse17};
use fpconv::freeconv::ConvolutionPair;
use fpconv::rtransform::RTransformReal;
use fpconv::stieltjes::{g_inverse, g_value};
use fpconv::Measure;
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Measure> {
    prop_oneof![
        (0.2f64..3.0).prop_map(|b| Measure::semicircle(b).unwrap()),
        (0.1f64..4.0).prop_map(|b| Measure::marchenko_pastur(b).unwrap()),
        (-2.0f64..2.0, 0.3f64..3.0, 0.0f64..2.0, 0.0f64..2.0)
            .prop_map(|(a, w, p, q)| Measure::jacobi(a, a + w, p, q).unwrap()),
    ]
}

fn target() -> impl Strategy<Value = Measure> {
    prop_oneof![
        family(),
        (-2.0f64..0.0, 0.1f64..3.0, 0.05f64..0.95).prop_map(|(x, d, w)| Measure::atomic(vec![
            (x, w),
            (x + d, 1.0 - w)
        ])
        .unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stieltjes_inverse_round_trip(m in family(), d in 1e-6f64..50.0) {
        let z = m.support().lower - d;
        let g = g_value(&m, z).unwrap();
        let back = g_inverse(&m, g).unwrap();
        prop_assert!((back - z).abs() <= 1e-9 * z.abs().max(1.0) + 1e-6 * d, "{z} -> {g} -> {back}");
    }

    #[test]
    fn r_transform_is_increasing(m in family(), s in 0.01f64..0.99) {
        let rt = RTransformReal::new(&m);
        let dom = rt.domain();
        let t = if dom.lo.is_finite() { dom.lo * s } else { -10.0 * s };
        prop_assert!(rt.r_deriv(t).unwrap() > 0.0);
    }

    #[test]
    fn convolution_fixed_point(mu in family(), nu in target(), d in 1e-3f64..10.0) {
        let pair = ConvolutionPair::new(&mu, &nu).unwrap();
        let s = pair.endpoint_summary().unwrap();
        let z = s.z_star - d;
        let (g, _) = pair.conv_stieltjes(z).unwrap();
        prop_assert!(g > 0.0 && g <= s.g_star);
        prop_assert!(pair.fixed_point_residual(z, g).unwrap().abs() <= 1e-9 * g.max(1.0));
    }

    #[test]
    fn formatting_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(parse17(&fmt17(x)).unwrap().to_bits(), x.to_bits());
    }
}

#[test]
fn measure_json_round_trip() {
    for m in [
        Measure::semicircle(1.5).unwrap(),
        Measure::marchenko_pastur(0.5).unwrap(),
        Measure::atomic(vec![(-1.0, 0.25), (2.0, 0.75)]).unwrap(),
        Measure::jacobi(-1.0, 1.0, 0.5, 0.5).unwrap(),
    ] {
        let s = serde_json::to_string(&m).unwrap();
        let back: Measure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m, "{s}");
    }
}

#[test]
fn semicircle_sum_potential() {
    // sc(1) ⊞ sc(1) = sc(sqrt 2)
    let pair = ConvolutionPair::new(
        &Measure::semicircle(1.0).unwrap(),
        &Measure::semicircle(1.0).unwrap(),
    )
    .unwrap();
    let u = pair.u_variational(-3.0).unwrap();
    let direct =
        fpconv::potential::u_direct(&Measure::semicircle(2f64.sqrt()).unwrap(), -3.0).unwrap();
    assert_relative_eq!(u.u, direct, max_relative = 1e-12);
    assert_relative_eq!(
        pair.endpoint_summary().unwrap().z_star,
        -2.0 * 2f64.sqrt(),
        max_relative = 1e-12
    );
}
