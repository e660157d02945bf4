use proptest::prelude::*;

use yamabe_lab::curvature::*;
use yamabe_lab::pohozaev::*;
use yamabe_lab::sphere::{radial_mean, FloatPolynomial};
use yamabe_lab::Dimension;

fn small_poly(n: usize) -> impl Strategy<Value = FloatPolynomial> {
    prop::collection::vec((prop::collection::vec(0u8..3, n), -2.0f64..2.0), 1..6).prop_map(move |terms| {
        let mut p = FloatPolynomial::zero(n);
        for (a, c) in terms {
            p.add_term(a, c);
        }
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn projection_is_idempotent(n in 4usize..7, seed in 0u64..1000) {
        let jet = generate_jet(&JetSpec::new(n, seed, ProjectionMode::General)).unwrap();
        prop_assert!(validate_jet(&jet).passed);
        let again = project_symmetries(&jet, ProjectionMode::General).unwrap();
        for (a, b) in jet.rm2().iter().zip(again.rm2()) {
            prop_assert!((a - b).abs() <= 1e-13);
        }
    }

    #[test]
    fn operator_has_no_radial_part(n in 4usize..7, seed in 0u64..1000) {
        let jet = generate_jet(&JetSpec::new(n, seed, ProjectionMode::General)).unwrap();
        let (trace, comps) = OperatorPolynomials::new(&jet).radial_defects();
        prop_assert!(trace.max_abs_coefficient() < 1e-12);
        for c in comps {
            prop_assert!(c.max_abs_coefficient() < 1e-12);
        }
    }

    #[test]
    fn product_means_match_formed_products(p in small_poly(4), q in small_poly(4), r in 0.1f64..3.0) {
        let direct = radial_mean(&p.mul(&q).sphere_means(), r);
        let fused = radial_mean(&p.sphere_mean_of_product(&q), r);
        prop_assert!((direct - fused).abs() <= 1e-12 * (1.0 + direct.abs()));
    }

    #[test]
    fn bubble_family_balances(n in 10usize..12, radius in 0.5f64..20.0, scale in 0.2f64..5.0) {
        let mut input = PohozaevInput::bubble(CurvatureJet::zero(Dimension::new(n).unwrap()), 1.0, radius);
        input.field = PohozaevField::Bubble { scale };
        let rep = eval_pohozaev(&input).unwrap();
        prop_assert!(rep.normalized_defect.abs() <= 1e-8);
    }

    #[test]
    fn rate_constant_is_linear_in_the_norms(t in 0.1f64..10.0, w in 0.0f64..1.0, g in 0.0f64..1.0) {
        let entries = |k: f64| -> Vec<RateEntry> {
            [2.0, 5.0, 9.0].iter().map(|&h| RateEntry { height: h, weyl: k * w, weyl_gradient: k * g, weyl_hessian: k }).collect()
        };
        let n = Dimension::new(10).unwrap();
        let a = weyl_rate_check(&RateSequence::new(entries(1.0)).unwrap(), n, 1.0).unwrap();
        let b = weyl_rate_check(&RateSequence::new(entries(t)).unwrap(), n, 1.0).unwrap();
        prop_assert!((b.minimal_constant - t * a.minimal_constant).abs() <= 1e-12 * b.minimal_constant);
    }
}
