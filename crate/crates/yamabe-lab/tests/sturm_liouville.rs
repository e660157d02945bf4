use yamabe_lab::bubble::Dimension;
use yamabe_lab::radial::LogGrid;
use yamabe_lab::sturm_liouville::*;

/// `a(r) = r^2 (1+r^2)^{-m}` together with `T a` for `delta0 = 2n`.
fn manufactured(n: Dimension) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
    let nf = n.as_f64();
    let m = (nf - 4.0) / 2.0;
    let a = move |r: f64| r * r * (1.0 + r * r).powf(-m);
    let ta = move |r: f64| {
        let q = 1.0 + r * r;
        let a0 = r * r * q.powf(-m);
        let a1 = 2.0 * r * q.powf(-m) - 2.0 * m * r.powi(3) * q.powf(-m - 1.0);
        let a2 = 2.0 * q.powf(-m) - 10.0 * m * r * r * q.powf(-m - 1.0)
            + 4.0 * m * (m + 1.0) * r.powi(4) * q.powf(-m - 2.0);
        a2 + (nf - 1.0) / r * a1 + (nf * (nf + 2.0) / (q * q) - 2.0 * nf / (r * r)) * a0
    };
    (a, ta)
}

fn manufactured_problem(n: Dimension, ppd: usize, closure: Closure) -> SturmLiouvilleProblem {
    let (_, ta) = manufactured(n);
    let nf = n.as_f64();
    let mut p = SturmLiouvilleProblem::new(n, 2.0 * nf, Rhs::new("manufactured", move |r| -ta(r)), 2.0, nf - 4.0, 1.5);
    p.grid = LogGrid { r_lo: 1e-4, r_hi: 1e4, points_per_decade: ppd };
    p.closure = closure;
    p.require_nonnegative_rhs = false;
    p.tol = 1e-6;
    p
}

fn max_rel_error(sol: &BvpSolution, exact: &dyn Fn(f64) -> f64) -> f64 {
    let grid = sol.profile.grid();
    let scale = grid.iter().map(|&r| exact(r).abs()).fold(0.0, f64::max);
    grid.iter()
        .zip(sol.profile.values())
        .map(|(&r, &v)| (v - exact(r)).abs())
        .fold(0.0, f64::max)
        / scale
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    let n = Dimension::new(10).unwrap();
    let (a, _) = manufactured(n);
    let errs: Vec<f64> = [1024usize, 2048, 4096]
        .iter()
        .map(|&ppd| {
            let sol = solve_bvp(&manufactured_problem(n, ppd, Closure::Robin)).unwrap();
            max_rel_error(&sol, &a)
        })
        .collect();
    let order = (errs[1] / errs[2]).log2();
    assert!((1.8..=2.2).contains(&order), "order {order}");
    assert!(errs[2] <= 1e-6, "{errs:?}");
}

#[test]
fn robin_and_truncated_dirichlet_closures_agree() {
    let n = Dimension::new(10).unwrap();
    let robin = solve_bvp(&manufactured_problem(n, 512, Closure::Robin)).unwrap();
    let trunc = solve_bvp(&manufactured_problem(n, 512, Closure::TruncatedDirichlet { decades: 3.0 })).unwrap();
    let scale = robin.profile.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = robin
        .profile
        .values()
        .iter()
        .zip(trunc.profile.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(gap / scale <= 1e-6, "closure gap {}", gap / scale);
}

#[test]
fn solution_is_linear_in_the_right_hand_side() {
    let n = Dimension::new(10).unwrap();
    let mk = |c: f64| {
        let mut p = manufactured_problem(n, 128, Closure::Robin);
        let base = p.rhs.clone();
        p.rhs = Rhs::new("scaled", move |r| c * base.eval(r).unwrap());
        solve_bvp(&p).unwrap()
    };
    let one = mk(1.0);
    let three = mk(3.0);
    for (a, b) in one.profile.values().iter().zip(three.profile.values()) {
        assert!((3.0 * a - b).abs() <= 1e-12 * b.abs().max(1e-300) + 1e-300);
    }
}

#[test]
fn f2_is_positive_and_certified() {
    for n in [10, 11] {
        let n = Dimension::new(n).unwrap();
        let sol = solve_f2(n, &FamilyOptions::default()).unwrap();
        assert!(sol.is_nonnegative(0.0));
        let cert = sol.bound_certificate.unwrap();
        assert!(cert.c0.is_finite() && cert.c0 > 0.0);
        assert!(sol.residual_norm < DEFAULT_SOLVE_TOL);
    }
}

#[test]
fn f2_lower_envelope_spot_value() {
    let n = Dimension::new(10).unwrap();
    assert!((f2_lower_envelope(n, 1.0) - 4.25 / 576.0).abs() < 1e-15);
}

#[test]
fn f2_bounds_hold() {
    for n in [10, 11] {
        let n = Dimension::new(n).unwrap();
        let sol = solve_f2(n, &FamilyOptions::default()).unwrap();
        let rep = check_f2_bounds(&sol, n, 1e-3, 1e3).unwrap();
        assert!(rep.lower_bound_ok, "{rep:?}");
        assert!(rep.upper_finite);
        assert!((rep.inner_slope - 2.0).abs() < 0.05, "{}", rep.inner_slope);
        assert!((rep.outer_slope - (6.0 - n.as_f64())).abs() < 0.05, "{}", rep.outer_slope);
    }
}

#[test]
fn f2_lambda_bounds_hold() {
    for n in [10, 11] {
        let n = Dimension::new(n).unwrap();
        for lam in [0.99, 1.0, 1.01] {
            let kp = yamabe_lab::bubble::KelvinParams::new(lam).unwrap();
            let sol = solve_f2_lambda(n, kp, &FamilyOptions::default()).unwrap();
            let rep = check_f2lambda_bounds(&sol, n, kp, 0.1, None).unwrap();
            assert!(rep.lower_bound_ok, "{rep:?}");
            assert!(rep.upper_finite);
        }
    }
}

#[test]
fn supersolution_signs_hold() {
    for n in [10, 11] {
        let n = Dimension::new(n).unwrap();
        let rep = check_supersolutions(n, &LogGrid::default()).unwrap();
        assert!(rep.phi1_ok && rep.comparison_ok, "{rep:?}");
        assert!(rep.g_identity_error < 1e-6, "{rep:?}");
        assert!(rep.phi2_identity_error < 1e-6, "{rep:?}");
        assert!((rep.far_ratio - 1.0).abs() < 1e-6);
    }
}

#[test]
fn hypothesis_failures_name_the_inequality() {
    let n = Dimension::new(10).unwrap();
    let mut p = f2_problem(n, &FamilyOptions::default()).unwrap();
    p.delta0 = 5.0;
    let err = p.validate().unwrap_err().to_string();
    assert!(err.contains("δ₀ < n"), "{err}");
    let mut p = f2_problem(n, &FamilyOptions::default()).unwrap();
    p.alpha = 2.0;
    assert!(p.validate().unwrap_err().to_string().contains("α ≤ 2"));
    assert!(f2_problem(Dimension::new(9).unwrap(), &FamilyOptions::default()).is_err());
}

#[test]
fn split_and_direct_f2_solves_agree() {
    let n = Dimension::new(10).unwrap();
    let split = solve_f2(n, &FamilyOptions::default()).unwrap();
    let opts = FamilyOptions { split_comparison: false, ..FamilyOptions::default() };
    let direct = solve_f2(n, &opts).unwrap();
    let gap = split
        .profile
        .values()
        .iter()
        .zip(direct.profile.values())
        .map(|(a, b)| (a - b).abs() / a.abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-3, "relative gap {gap}");
}
