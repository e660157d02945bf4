//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
//! Tolerances and runtime budgets are pinned below.

use std::process::Command;
use std::time::{Duration, Instant};

use yamabe_lab::bubble::KelvinParams;
use yamabe_lab::curvature::{
    check_hv_inequalities, check_sextic_identity, dimension_gate, generate_jet, rbar2_weyl, CurvatureJet, JetSpec,
    ProjectionMode,
};
use yamabe_lab::pohozaev::{eval_pohozaev, r2_u_f2_integral, PohozaevInput};
use yamabe_lab::profile::{build_profile, pde_residual, residual_radius_limit, SampleGrid, DEFAULT_RADIUS_EPS};
use yamabe_lab::radial::LogGrid;
use yamabe_lab::sphere::{random_polynomial, rational, sphere_monomial_moment, taylor_block_average, verify_odd_moment};
use yamabe_lab::sturm_liouville::{
    check_f2_bounds, check_f2lambda_bounds, check_supersolutions, f2_lower_envelope, manufactured_study, solve_f2,
    solve_f2_lambda, solve_f3, FamilyOptions,
};
use yamabe_lab::Dimension;

const LADDER_GAP: f64 = 1e-10;
const RANDOM_POLYNOMIALS: u64 = 100;
const GATE_MARGIN_10: f64 = 8.94e-6;
const GATE_MARGIN_11: f64 = 4.9e-7;
const GATE_MARGIN_DIGITS: f64 = 5e-9;
const F2_RANGE: (f64, f64) = (1e-3, 1e3);
const F2_ENVELOPE_AT_ONE: f64 = 4.25 / 576.0;
const F2_ENVELOPE_APPROX: f64 = 7.3785e-3;
const F2LAMBDA_EPS: f64 = 0.1;
const MANUFACTURED_ERROR: f64 = 1e-6;
const ORDER_RANGE: (f64, f64) = (1.8, 2.2);
const CLOSURE_GAP: f64 = 1e-6;
const JETS_PER_DIMENSION: u64 = 200;
const SEXTIC_RESIDUAL: f64 = 1e-10;
const INEQUALITY_MARGIN: f64 = -1e-12;
const WEYL_CROSS_CHECK: f64 = 1e-10;
const FLAT_DEFECT: f64 = 1e-8;
const LOG_RATIO_TOLERANCE: f64 = 0.15;
const CONVERGENT_DRIFT: f64 = 0.01;
const FIT_SPREAD: f64 = 0.3;

fn dim(n: usize) -> Dimension {
    Dimension::new(n).unwrap()
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn moments() -> Outcome {
    for n in 3..=15usize {
        let mut mixed = vec![0u8; n];
        mixed[0] = 2;
        mixed[1] = 2;
        let mut pure = vec![0u8; n];
        pure[0] = 4;
        let d = (n * (n + 2)) as i64;
        if sphere_monomial_moment(n, &mixed) != rational(1, d) || sphere_monomial_moment(n, &pure) != rational(3, d) {
            return Err(format!("mismatch at n = {n}"));
        }
    }
    Ok("exact for n = 3..15".into())
}

fn ladders() -> Outcome {
    let mut worst = 0.0f64;
    for n in [10, 11] {
        for k in 1..=2 {
            for i in 0..RANDOM_POLYNOMIALS {
                let even = random_polynomial(n, 2 * k, 16, 7000 + i);
                let a = taylor_block_average(&even, k).map_err(|e| e.to_string())?;
                worst = worst.max((a.moment_path - a.ladder_path).abs());
                let odd = random_polynomial(n, 2 * k + 1, 16, 9000 + i);
                let checks = verify_odd_moment(&odd, k).map_err(|e| e.to_string())?;
                if !checks.iter().all(|c| c.exact_match) {
                    return Err(format!("odd moment inexact: n = {n}, k = {k}, polynomial {i}"));
                }
            }
        }
    }
    ensure(worst <= LADDER_GAP, format!("ladder gap {worst:.2e}; odd moments exact on 400 polynomials"))
}

fn gate() -> Outcome {
    let zero = rational(0, 1);
    let g = |n| dimension_gate(n, &zero).map_err(|e| e.to_string());
    let (g10, g11) = (g(10)?, g(11)?);
    let tail_fails = (12..=25).map(g).collect::<Result<Vec<_>, _>>()?.iter().all(|r| !r.holds);
    ensure(
        g10.holds
            && g11.holds
            && tail_fails
            && (g10.margin - GATE_MARGIN_10).abs() < GATE_MARGIN_DIGITS
            && (g11.margin - GATE_MARGIN_11).abs() < GATE_MARGIN_DIGITS,
        format!("margins {:.4e} (n=10), {:.4e} (n=11); n = 12..25 fail: {tail_fails}", g10.margin, g11.margin),
    )
}

fn f2_envelope() -> Outcome {
    let spot = f2_lower_envelope(dim(10), 1.0);
    if (spot - F2_ENVELOPE_AT_ONE).abs() > 1e-15 || (spot - F2_ENVELOPE_APPROX).abs() > 5e-8 {
        return Err(format!("spot value {spot}"));
    }
    let mut detail = format!("spot {spot:.5e}");
    for n in [10, 11] {
        let sol = solve_f2(dim(n), &FamilyOptions::default()).map_err(|e| e.to_string())?;
        let rep = check_f2_bounds(&sol, dim(n), F2_RANGE.0, F2_RANGE.1).map_err(|e| e.to_string())?;
        if !(rep.lower_bound_ok && rep.upper_finite) {
            return Err(format!("n = {n}: {} violations, upper {}", rep.violation_count, rep.upper_constant));
        }
        detail += &format!("; n={n} upper C {:.4}", rep.upper_constant);
    }
    Ok(detail)
}

fn f2lambda() -> Outcome {
    for n in [10, 11] {
        for lam in [0.99, 1.0, 1.01] {
            let kp = KelvinParams::new(lam).map_err(|e| e.to_string())?;
            let sol = solve_f2_lambda(dim(n), kp, &FamilyOptions::default()).map_err(|e| e.to_string())?;
            let rep = check_f2lambda_bounds(&sol, dim(n), kp, F2LAMBDA_EPS, None).map_err(|e| e.to_string())?;
            if !(rep.lower_bound_ok && rep.upper_finite) {
                return Err(format!("n = {n}, lambda = {lam}"));
            }
        }
    }
    Ok("6 solves within the envelope".into())
}

fn supersolutions() -> Outcome {
    for n in [10, 11] {
        let rep = check_supersolutions(dim(n), &LogGrid::default()).map_err(|e| e.to_string())?;
        if !(rep.phi1_ok && rep.comparison_ok) {
            return Err(format!("n = {n}: {rep:?}"));
        }
    }
    Ok("both sign conditions node-wise for n = 10, 11".into())
}

fn solver_quality() -> Outcome {
    let s = manufactured_study(dim(10), &[1024, 2048, 4096]).map_err(|e| e.to_string())?;
    let err = *s.errors.last().unwrap();
    ensure(
        err <= MANUFACTURED_ERROR
            && (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&s.observed_order)
            && s.closure_gap <= CLOSURE_GAP,
        format!("error {err:.2e}, order {:.3}, closure gap {:.2e}", s.observed_order, s.closure_gap),
    )
}

fn curvature() -> Outcome {
    let (mut res, mut margin, mut cross) = (0.0f64, f64::INFINITY, 0.0f64);
    for n in [10, 11] {
        for seed in 0..JETS_PER_DIMENSION {
            let jet = generate_jet(&JetSpec::new(n, 50_000 + seed, ProjectionMode::Hypothesis)).map_err(|e| e.to_string())?;
            res = res.max(check_sextic_identity(&jet).map_err(|e| e.to_string())?.relative_residual);
            margin = margin.min(check_hv_inequalities(&jet).map_err(|e| e.to_string())?.full_norm.margin);
        }
        for seed in 0..5 {
            let jet = generate_jet(&JetSpec::new(n, seed, ProjectionMode::General)).map_err(|e| e.to_string())?;
            let r = rbar2_weyl(&jet).map_err(|e| e.to_string())?;
            cross = cross.max((r.formula - r.laplacian_form).abs()).max((r.formula - r.block_average.moment_path).abs());
        }
    }
    ensure(
        res <= SEXTIC_RESIDUAL && margin >= INEQUALITY_MARGIN && cross <= WEYL_CROSS_CHECK,
        format!("sextic residual {res:.2e}, min margin {margin:.4e}, Weyl cross-check {cross:.2e}"),
    )
}

fn flat_pohozaev() -> Outcome {
    let mut worst = 0.0f64;
    for n in [10, 11] {
        for radius in [1.0, 2.0, 5.0, 10.0] {
            let rep = eval_pohozaev(&PohozaevInput::bubble(CurvatureJet::zero(dim(n)), 1e3, radius))
                .map_err(|e| e.to_string())?;
            if rep.i1 != 0.0 || rep.i2 != 0.0 || rep.i3 != 0.0 {
                return Err(format!("n = {n}, R' = {radius}: curvature terms nonzero"));
            }
            worst = worst.max(rep.normalized_defect.abs());
        }
    }
    ensure(worst <= FLAT_DEFECT, format!("max normalized defect {worst:.2e}"))
}

fn log_divergence() -> Outcome {
    let f10 = solve_f2(dim(10), &FamilyOptions::default()).map_err(|e| e.to_string())?.profile;
    let at10 = |r| r2_u_f2_integral(dim(10), &f10, r).map_err(|e| e.to_string());
    let ratio = at10(1e4)? / at10(1e2)?;
    let f11 = solve_f2(dim(11), &FamilyOptions::default()).map_err(|e| e.to_string())?.profile;
    let at11 = |r| r2_u_f2_integral(dim(11), &f11, r).map_err(|e| e.to_string());
    let lo = at11(1e3)?;
    let drift = (at11(1e4)? - lo) / lo;
    ensure(
        (ratio - 2.0).abs() <= LOG_RATIO_TOLERANCE * 2.0 && drift.abs() <= CONVERGENT_DRIFT,
        format!("n=10 ratio {ratio:.4}, n=11 drift {drift:.2e}"),
    )
}

fn residual_order() -> Outcome {
    let n = dim(10);
    let f2 = solve_f2(n, &FamilyOptions::default()).map_err(|e| e.to_string())?.profile;
    let f3 = solve_f3(n, &FamilyOptions::default()).map_err(|e| e.to_string())?.profile;
    let mut spec = JetSpec::new(10, 7, ProjectionMode::Hypothesis);
    spec.sextic_block = false;
    let jet = generate_jet(&spec).map_err(|e| e.to_string())?;
    let dirs = SampleGrid::standard_directions(10, 8, 1);
    let mut fits = Vec::new();
    for height in [1e3, 1e4] {
        let profile = build_profile(&jet, height, Some(&f2), Some(&f3)).map_err(|e| e.to_string())?;
        let limit = residual_radius_limit(10, height, DEFAULT_RADIUS_EPS);
        for count in [16, 32] {
            let grid = SampleGrid::new(SampleGrid::log_radii(0.05, limit, count), dirs.clone()).map_err(|e| e.to_string())?;
            fits.push(pde_residual(&profile, &jet, &grid).map_err(|e| e.to_string())?.fitted_constant);
        }
    }
    let mean = fits.iter().sum::<f64>() / fits.len() as f64;
    let spread = fits.iter().map(|f| (f / mean - 1.0).abs()).fold(0.0, f64::max);
    ensure(spread <= FIT_SPREAD, format!("constants {fits:.4?}, spread {spread:.3}"))
}

fn determinism() -> Outcome {
    let run = || -> Result<(Vec<u8>, Vec<u8>, Vec<u8>), String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let out = Command::new(env!("CARGO_BIN_EXE_yamabe"))
            .args(["report", "--dim", "10", "--seed", "3", "--out"])
            .arg(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("report exited with {:?}", out.status.code()));
        }
        let json = std::fs::read(dir.path().join("report.json")).map_err(|e| e.to_string())?;
        let md = std::fs::read(dir.path().join("report.md")).map_err(|e| e.to_string())?;
        Ok((out.stdout, json, md))
    };
    let (a, b) = (run()?, run()?);
    ensure(a == b, format!("two runs, {} bytes of JSON, identical: {}", a.1.len(), a == b))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 12] = [
        ("sphere fourth moments", moments, 1),
        ("block-average ladder and odd moments", ladders, 10),
        ("dimension gate", gate, 1),
        ("f2 envelope", f2_envelope, 30),
        ("f2lambda envelope", f2lambda, 60),
        ("comparison-function signs", supersolutions, 10),
        ("radial solver quality", solver_quality, 60),
        ("curvature identities on hypothesis jets", curvature, 120),
        ("flat Pohozaev balance", flat_pohozaev, 60),
        ("log-divergence signature", log_divergence, 60),
        ("profile residual order", residual_order, 120),
        ("report determinism", determinism, 120),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= Duration::from_secs(*budget);
        let (ok, detail) = match outcome {
            Ok(d) => (in_budget, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.2}s of {budget}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
