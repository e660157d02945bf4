use std::sync::OnceLock;

use yamabe_lab::curvature::{generate_jet, CurvatureJet, JetSpec, OperatorPolynomials, ProjectionMode};
use yamabe_lab::profile::*;
use yamabe_lab::radial::RadialFunction;
use yamabe_lab::sturm_liouville::{solve_f2, solve_f3, FamilyOptions};
use yamabe_lab::{bubble, Dimension, LabError};

fn dim(n: usize) -> Dimension {
    Dimension::new(n).unwrap()
}

fn radial_solutions() -> &'static (RadialFunction, RadialFunction) {
    static CELL: OnceLock<(RadialFunction, RadialFunction)> = OnceLock::new();
    CELL.get_or_init(|| {
        let opts = FamilyOptions::default();
        (solve_f2(dim(10), &opts).unwrap().profile, solve_f3(dim(10), &opts).unwrap().profile)
    })
}

fn hypothesis_jet(seed: u64) -> CurvatureJet {
    let mut spec = JetSpec::new(10, seed, ProjectionMode::Hypothesis);
    spec.sextic_block = false;
    generate_jet(&spec).unwrap()
}

fn profile_for(jet: &CurvatureJet, height: f64) -> ProfileApprox {
    let (f2, f3) = radial_solutions();
    build_profile(jet, height, Some(f2), Some(f3)).unwrap()
}

#[test]
fn zero_jet_gives_the_bubble() {
    let jet = CurvatureJet::zero(dim(10));
    let p = profile_for(&jet, 1e3);
    for y in [vec![0.3; 10], vec![2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]] {
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert_eq!(p.eval(&y).unwrap(), bubble::bubble(dim(10), r));
    }
    let grid = SampleGrid::new(SampleGrid::log_radii(0.05, 5.0, 8), SampleGrid::standard_directions(10, 4, 0)).unwrap();
    let rep = pde_residual(&p, &jet, &grid).unwrap();
    assert!(rep.max_abs < 1e-12, "{}", rep.max_abs);
}

#[test]
fn missing_radial_solution_is_a_dependency_error() {
    let (f2, _) = radial_solutions();
    let err = build_profile(&CurvatureJet::zero(dim(10)), 1e3, Some(f2), None).unwrap_err();
    assert!(matches!(err, LabError::Dependency(_)));
}

#[test]
fn operator_annihilates_radial_functions() {
    let jet = generate_jet(&JetSpec::new(10, 4, ProjectionMode::Hypothesis)).unwrap();
    let (trace, components) = OperatorPolynomials::new(&jet).radial_defects();
    assert!(trace.max_abs_coefficient() < 1e-12);
    assert!(components.iter().all(|c| c.max_abs_coefficient() < 1e-12));
}

#[test]
fn corrections_factor_into_angle_times_radius() {
    let jet = hypothesis_jet(7);
    let p = profile_for(&jet, 1e3);
    let theta = SampleGrid::standard_directions(10, 1, 5).pop().unwrap();
    let u = |r: f64| bubble::bubble(dim(10), r);
    let at = |r: f64| p.eval(&theta.iter().map(|t| t * r).collect::<Vec<_>>()).unwrap() - u(r);
    let (f2, f3) = radial_solutions();
    let a2 = p.v2_angular().compile().eval(&theta) * p.v2_weight();
    let a3 = p.v3_angular().compile().eval(&theta) * p.v3_weight();
    for r in [0.1, 1.0, 7.0] {
        let expected = a2 * f2.eval(r).unwrap() + a3 * f3.eval(r).unwrap();
        assert!((at(r) - expected).abs() <= 1e-15, "r={r}");
    }
}

#[test]
fn second_order_amplitude_scales_with_height() {
    let jet = hypothesis_jet(2);
    let p = profile_for(&jet, 1e3);
    assert!((p.v2_weight() - 1e-3).abs() < 1e-15);
    let q = profile_for(&jet, 1e3f64.powi(2));
    assert!((q.v2_weight() / p.v2_weight() - 1e-3).abs() < 1e-15);
}

/// For hypothesis jets the leading residual is `-c(n) M^{-12/(n-2)} T4(y) U(y)`.
#[test]
fn residual_is_led_by_the_quartic_block() {
    let jet = hypothesis_jet(7);
    let height = 1e4;
    let p = profile_for(&jet, height);
    let dirs = SampleGrid::standard_directions(10, 3, 9);
    let grid = SampleGrid::new(vec![0.5, 1.0, 2.0], dirs.clone()).unwrap();
    let rep = pde_residual(&p, &jet, &grid).unwrap();
    let t4 = jet.block(4).unwrap().compile();
    let c = dim(10).conformal_constant();
    let w = height.powf(-12.0 / 8.0);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (i, &r) in grid.radii.iter().enumerate() {
        for j in 0..dirs.len() {
            let y = grid.point(i, j);
            let predicted = -c * w * t4.eval(&y) * bubble::bubble(dim(10), r);
            worst = worst.max((rep.values[i * dirs.len() + j] - predicted).abs());
            scale = scale.max(predicted.abs());
        }
    }
    assert!(worst <= 0.02 * scale, "{worst} vs {scale}");
}

#[test]
fn fitted_constant_is_stable_across_heights_and_grids() {
    let jet = hypothesis_jet(7);
    let dirs = SampleGrid::standard_directions(10, 8, 1);
    let mut fits = Vec::new();
    for height in [1e3, 1e4] {
        let p = profile_for(&jet, height);
        let limit = residual_radius_limit(10, height, DEFAULT_RADIUS_EPS);
        for count in [16, 32] {
            let grid = SampleGrid::new(SampleGrid::log_radii(0.05, limit, count), dirs.clone()).unwrap();
            fits.push(pde_residual(&p, &jet, &grid).unwrap().fitted_constant);
        }
    }
    let mean = fits.iter().sum::<f64>() / fits.len() as f64;
    assert!(fits.iter().all(|f| (f / mean - 1.0).abs() <= 0.3), "{fits:?}");
}

fn envelope_grid() -> SampleGrid {
    SampleGrid::new(SampleGrid::log_radii(0.1, 30.0, 12), SampleGrid::standard_directions(10, 2, 3)).unwrap()
}

#[test]
fn exact_samples_have_zero_envelope() {
    let p = profile_for(&hypothesis_jet(1), 1e3);
    let v = SampledSolution::from_profile(&p, &envelope_grid()).unwrap();
    let rep = error_envelope_check(&v, &p, EnvelopeRegime::Improved, Some(1.0)).unwrap();
    assert_eq!(rep.fitted_constant, 0.0);
    assert!(!rep.violation);
}

#[test]
fn envelope_shaped_perturbation_fits_its_constant() {
    let height = 1e3;
    let p = profile_for(&hypothesis_jet(1), height);
    let w = height.powf(-12.0 / 8.0);
    let v = SampledSolution::perturbed(&p, &envelope_grid(), "envelope", |r, _| w * (1.0 + r).powf(-2.0)).unwrap();
    let rep = error_envelope_check(&v, &p, EnvelopeRegime::Improved, Some(1.5)).unwrap();
    assert!((rep.fitted_constant - 1.0).abs() < 1e-6, "{}", rep.fitted_constant);
    assert!(!rep.violation);

    let bump = SampledSolution::perturbed(&p, &envelope_grid(), "bump", |r, _| {
        if (r - 10.0).abs() < 3.0 { 50.0 * w * (1.0 + r).powf(-2.0) } else { 0.0 }
    })
    .unwrap();
    let rep = error_envelope_check(&bump, &p, EnvelopeRegime::Improved, Some(1.5)).unwrap();
    assert!(rep.violation);
    assert!((rep.worst_radius - 10.0).abs() < 3.0);
}

#[test]
fn coarse_envelope_exponent() {
    let p = profile_for(&hypothesis_jet(1), 1e3);
    let v = SampledSolution::from_profile(&p, &envelope_grid()).unwrap();
    let rep = error_envelope_check(&v, &p, EnvelopeRegime::Coarse { eps: 0.25 }, None).unwrap();
    assert!((rep.exponent - (-2.0 + 0.375)).abs() < 1e-14);
    assert!(error_envelope_check(&v, &p, EnvelopeRegime::Coarse { eps: 0.0 }, None).is_err());
}

#[test]
fn samples_round_trip_through_csv() {
    let p = profile_for(&hypothesis_jet(3), 1e3);
    let v = SampledSolution::from_profile(&p, &envelope_grid()).unwrap();
    let (mut csv, mut side) = (Vec::new(), Vec::new());
    v.write_csv(&mut csv).unwrap();
    v.write_sidecar(&mut side).unwrap();
    let back = SampledSolution::read(csv.as_slice(), side.as_slice(), "file").unwrap();
    assert_eq!(back.grid, v.grid);
    for (a, b) in back.values.iter().zip(&v.values) {
        assert!((a - b).abs() <= 1e-15 * a.abs());
    }
    assert!(SampledSolution::read(&b"r,theta_index,value\n"[..], side.as_slice(), "x").is_err());
}

#[test]
fn eigen_mode_drops_the_non_harmonic_part() {
    let p = profile_for(&hypothesis_jet(5), 1e3);
    assert!(p.v3_eigen().laplacian().is_zero());
    let gap = p.v3_eigen_gap().unwrap();
    let q = p.clone().with_v3_mode(V3Mode::Eigen);
    assert_eq!(q.v3_angular(), p.v3_eigen());
    assert!(gap >= 0.0);
}

#[test]
fn xi_tilde_reduces_to_xi_for_zero_blocks() {
    let (f2, f3) = radial_solutions();
    let jet = CurvatureJet::zero(dim(10));
    let q = vec![0.1; 10];
    let p: Vec<f64> = (0..10).map(|i| 0.05 * i as f64).collect();
    let base = bubble::xi(dim(10), &q, 2.0, &p).unwrap();
    assert_eq!(eval_xi_tilde(dim(10), &q, 2.0, &p, &jet, f2, f3).unwrap(), base);
}

