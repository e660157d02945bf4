use std::time::Instant;

use yamabe_lab::curvature::*;
use yamabe_lab::sphere::{rational, to_f64};
use yamabe_lab::Dimension;

fn dim(n: usize) -> Dimension {
    Dimension::new(n).unwrap()
}

fn idx(n: usize, ix: &[usize]) -> usize {
    ix.iter().fold(0, |a, &v| a * n + v)
}

#[test]
fn zero_jet_passes_every_constraint() {
    let rep = validate_jet(&CurvatureJet::zero(dim(10)));
    assert!(rep.passed, "{:?}", rep.failures().collect::<Vec<_>>());
}

#[test]
fn sectional_pattern_fails_only_the_trace_constraints() {
    let n = 10;
    let mut jet = CurvatureJet::zero(dim(n));
    for (ix, v) in [([0, 1, 0, 1], 1.0), ([1, 0, 1, 0], 1.0), ([1, 0, 0, 1], -1.0), ([0, 1, 1, 0], -1.0)] {
        jet.rm0_mut()[idx(n, &ix)] = v;
    }
    let rep = validate_jet(&jet);
    for name in ["rm0 antisymmetry ab", "rm0 antisymmetry cd", "rm0 pair symmetry", "rm0 first Bianchi"] {
        assert!(rep.check(name).unwrap().passed, "{name}");
    }
    assert!(!rep.check("Ricci Ric(0) = 0").unwrap().passed);
    assert_eq!(rep.check("Ricci Ric(0) = 0").unwrap().max_violation, 1.0);
    assert!(!rep.passed);
}

#[test]
fn general_projection_validates_and_is_idempotent() {
    for n in [4, 10] {
        let jet = generate_jet(&JetSpec::new(n, 11, ProjectionMode::General)).unwrap();
        let rep = validate_jet(&jet);
        assert!(rep.passed, "n={n} {:?}", rep.failures().collect::<Vec<_>>());
        let again = project_symmetries(&jet, ProjectionMode::General).unwrap();
        for (a, b) in jet.rm2().iter().zip(again.rm2()) {
            assert!((a - b).abs() <= 1e-14, "{a} vs {b}");
        }
        for (a, b) in jet.rm0().iter().zip(again.rm0()) {
            assert!((a - b).abs() <= 1e-14);
        }
        assert!(weyl_norms(&jet).weyl > 0.0);
    }
}

#[test]
fn projection_of_zero_is_zero() {
    let z = CurvatureJet::zero(dim(6));
    let p = project_symmetries(&z, ProjectionMode::General).unwrap();
    assert!(p.rm2().iter().chain(p.rm0()).all(|v| *v == 0.0));
}

#[test]
fn weyl_pattern_quadratic_average() {
    let n = 10;
    let mut raw = CurvatureJet::zero(dim(n));
    raw.rm0_mut()[idx(n, &[0, 1, 0, 1])] = 1.0;
    let jet = project_symmetries(&raw, ProjectionMode::General).unwrap();
    let rep = rbar2_weyl(&jet).unwrap();
    let w2 = weyl_norms(&jet).weyl;
    assert!(w2 > 0.0);
    assert!((rep.formula + w2 / 120.0).abs() < 1e-15);
    assert!((rep.block_average.moment_path - rep.formula).abs() < 1e-10);
    assert!((rep.laplacian_form - rep.formula).abs() < 1e-10);
}

#[test]
fn hypothesis_jets_satisfy_identities() {
    for n in [10, 11] {
        for seed in 0..3 {
            let jet = generate_jet(&JetSpec::new(n, seed, ProjectionMode::Hypothesis)).unwrap();
            let rep = validate_jet(&jet);
            assert!(rep.passed, "{:?}", rep.failures().collect::<Vec<_>>());
            let hv = check_hv_inequalities(&jet).unwrap();
            assert!(hv.in_class);
            assert!(hv.full_norm.margin >= -1e-12, "{hv:?}");
            let sr = hv.square_route;
            assert!((sr.direct_norm - sr.expanded).abs() <= 1e-10 * sr.direct_norm);
            assert!((sr.expanded - sr.reduced).abs() <= 1e-10 * sr.direct_norm);
            let six = check_sextic_identity(&jet).unwrap();
            assert!(six.relative_residual <= 1e-10, "{six:?}");
            assert!(six.average_gap <= 1e-10);
            assert!(six.radial_identity_exact);
            assert!(jet.scalar_laplacian().abs() < 1e-10);
        }
    }
}

#[test]
fn rbar6_is_quadratic_under_scaling() {
    let jet = generate_jet(&JetSpec::new(10, 5, ProjectionMode::Hypothesis)).unwrap();
    let a = rbar6_formula(&jet).unwrap();
    let b = rbar6_formula(&jet.scaled(3.0)).unwrap();
    assert!((b - 9.0 * a).abs() <= 1e-12 * b.abs());
    assert_eq!(rbar6_formula(&CurvatureJet::zero(dim(10)).with_hypothesis(HypothesisClass::VANISHING)).unwrap(), 0.0);
}

#[test]
fn rbar6_rejects_jets_outside_the_class() {
    let jet = generate_jet(&JetSpec::new(10, 5, ProjectionMode::General)).unwrap();
    assert!(rbar6_formula(&jet).is_err());
    let flagged = jet.with_hypothesis(HypothesisClass::VANISHING);
    assert!(rbar6_formula(&flagged).is_err());
}

#[test]
fn gate_holds_only_for_ten_and_eleven() {
    let zero = rational(0, 1);
    let g10 = dimension_gate(10, &zero).unwrap();
    assert!(g10.holds);
    assert!((g10.lhs - 1.6778e-5).abs() < 1e-9);
    assert!((g10.rhs - 2.0 / 77760.0).abs() < 1e-15);
    assert!((g10.margin - 8.94e-6).abs() < 1e-8);
    let g11 = dimension_gate(11, &zero).unwrap();
    assert!(g11.holds);
    assert!((g11.lhs - 1.8245e-5).abs() < 1e-9 && (g11.rhs - 1.8731e-5).abs() < 1e-9);
    assert!((g11.margin - 4.9e-7).abs() < 1e-8);
    for n in 12..=25 {
        assert!(!dimension_gate(n, &zero).unwrap().holds, "n = {n}");
    }
    let g12 = dimension_gate(12, &zero).unwrap();
    assert!((g12.lhs - 1.7810e-5).abs() < 1e-9 && (g12.rhs - 1.40918e-5).abs() < 1e-9);
    assert!(dimension_gate(9, &zero).is_err());
}

#[test]
fn sextic_radial_laplacian_closed_form() {
    for n in [3, 10, 11] {
        let (a, b) = sextic_radial_laplacian(n);
        assert_eq!(a, b);
    }
}

#[test]
fn operator_coefficients_annihilate_radial_functions() {
    let n = 10;
    let jet = generate_jet(&JetSpec::new(n, 3, ProjectionMode::General)).unwrap();
    let x: Vec<f64> = (0..n).map(|i| 0.05 * (i as f64 - 4.3)).collect();
    let c = cnc_operator_coeffs(&jet, &x).unwrap();
    let bx: f64 = (0..n).map(|i| c.b[i] * x[i]).sum();
    let tr: f64 = (0..n).map(|i| c.d[i * n + i]).sum();
    let mut dxx = 0.0;
    let mut scale = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            dxx += c.d[i * n + j] * x[i] * x[j];
            scale = scale.max(c.d[i * n + j].abs());
            assert!((c.d[i * n + j] - c.d[j * n + i]).abs() < 1e-15);
        }
    }
    assert!(scale > 0.0);
    assert!((bx + tr).abs() < 1e-13, "{}", bx + tr);
    assert!(dxx.abs() < 1e-13);
}

#[test]
fn metric_single_component() {
    let n = 10;
    let mut jet = CurvatureJet::zero(dim(n));
    let kappa = 0.3;
    for (ix, v) in [([0, 1, 1, 0], kappa), ([1, 0, 0, 1], kappa), ([0, 1, 0, 1], -kappa), ([1, 0, 1, 0], -kappa)] {
        jet.rm0_mut()[idx(n, &ix)] = v;
    }
    let mut x = vec![0.0; n];
    x[1] = 0.2;
    let (g, warn) = cnc_metric_expansion(&jet, &x, 2).unwrap();
    assert!(warn.is_none());
    assert!((g[0] - (1.0 + kappa / 3.0 * 0.04)).abs() < 1e-15);
    assert!(cnc_metric_expansion(&jet, &x, 5).is_err());
    let (g0, _) = cnc_metric_expansion(&jet, &vec![0.0; n], 4).unwrap();
    assert_eq!(g0[0], 1.0);
    assert!(cnc_operator_coeffs(&jet, &vec![0.6; n]).unwrap().warning.is_some());
}

#[test]
fn quadratic_block_example() {
    // d_11 R = 2: average 1/n, tilde block mean-free
    let n = 10;
    let mut jet = CurvatureJet::zero(dim(n));
    jet.rm2_mut()[idx(n, &[0, 1, 0, 1, 0, 0])] = 1.0;
    jet.rm2_mut()[idx(n, &[1, 0, 1, 0, 0, 0])] = 1.0;
    let (bar, tilde) = build_r_bar_tilde(&jet, 2).unwrap();
    assert_eq!(bar, rational(1, 10));
    assert_eq!(yamabe_lab::sphere::sphere_mean(&tilde), rational(0, 1));
    assert!((to_f64(&bar) - 0.1).abs() < 1e-15);
}

#[test]
fn json_round_trip() {
    let jet = generate_jet(&JetSpec::new(4, 2, ProjectionMode::General)).unwrap();
    let v = jet.to_json(Some(2));
    let back = CurvatureJet::from_json(&v).unwrap();
    assert_eq!(jet, back);
    assert_eq!(CurvatureJet::seed_from_json(&v), Some(2));
}

#[test]
fn two_hundred_hypothesis_jets_per_dimension() {
    let t = Instant::now();
    for n in [10, 11] {
        let mut worst_res = 0.0f64;
        let mut worst_margin = f64::INFINITY;
        for seed in 0..200 {
            let jet = generate_jet(&JetSpec::new(n, 1000 + seed, ProjectionMode::Hypothesis)).unwrap();
            let six = check_sextic_identity(&jet).unwrap();
            let hv = check_hv_inequalities(&jet).unwrap();
            worst_res = worst_res.max(six.relative_residual);
            worst_margin = worst_margin.min(hv.full_norm.margin);
        }
        eprintln!("n={n} residual {worst_res:e} margin {worst_margin:e} after {:?}", t.elapsed());
        assert!(worst_res <= 1e-10 && worst_margin >= -1e-12);
    }
}
