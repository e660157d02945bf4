//! The aggregated reproducibility report: one named check per verifiable
//! statement, written as JSON and Markdown.

use std::fs;

use serde::Serialize;
use yamabe_lab::bubble::KelvinParams;
use yamabe_lab::curvature::{
    check_hv_inequalities, check_sextic_identity, dimension_gate, generate_jet, rbar2_weyl, CurvatureJet, JetSpec,
    ProjectionMode,
};
use yamabe_lab::pohozaev::{eval_pohozaev, r2_u_f2_integral, PohozaevInput};
use yamabe_lab::profile::{build_profile, pde_residual, residual_radius_limit, SampleGrid, DEFAULT_RADIUS_EPS};
use yamabe_lab::radial::RadialFunction;
use yamabe_lab::sphere::{random_polynomial, rational, sphere_monomial_moment, taylor_block_average, verify_odd_moment};
use yamabe_lab::sturm_liouville::{
    check_f2_bounds, check_f2lambda_bounds, check_supersolutions, manufactured_study, solve_f2, solve_f2_lambda,
    solve_f3, FamilyOptions,
};
use yamabe_lab::Dimension;

use crate::commands::{dimension, family_options, jet_or_generated, out_dir, pretty};
use crate::{CliError, Outcome, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Fails as predicted for this configuration; not an error.
    ExpectedFail,
    /// A dependency failed or the check does not apply.
    Skipped,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::ExpectedFail => "expected_fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub dim: usize,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn to_markdown(&self) -> String {
        let mut s = format!("# Verification report\n\nn = {}, seed = {}\n\n", self.dim, self.seed);
        s.push_str("| check | status | detail |\n|---|---|---|\n");
        for c in &self.checks {
            s.push_str(&format!("| {} | {} | {} |\n", c.name, c.status.as_str(), c.detail.replace('|', "\\|")));
        }
        let verdict = if self.passed { "all checks passed" } else { "some checks failed" };
        s.push_str(&format!("\n{verdict}\n"));
        s
    }
}

type CheckResult = Result<(bool, String), CliError>;

struct Builder {
    checks: Vec<Check>,
}

impl Builder {
    fn push(&mut self, name: &str, r: CheckResult) -> bool {
        let (status, detail) = match r {
            Ok((true, d)) => (Status::Pass, d),
            Ok((false, d)) => (Status::Fail, d),
            Err(e) => (Status::Fail, format!("error: {e}")),
        };
        self.checks.push(Check { name: name.into(), status, detail });
        status == Status::Pass
    }

    fn skip(&mut self, name: &str, why: &str) {
        self.checks.push(Check { name: name.into(), status: Status::Skipped, detail: why.into() });
    }
}

fn fourth_moments() -> CheckResult {
    for n in 3..=15usize {
        let mut mixed = vec![0u8; n];
        mixed[0] = 2;
        mixed[1] = 2;
        let mut pure = vec![0u8; n];
        pure[0] = 4;
        let d = (n * (n + 2)) as i64;
        if sphere_monomial_moment(n, &mixed) != rational(1, d) || sphere_monomial_moment(n, &pure) != rational(3, d) {
            return Ok((false, format!("mismatch at n = {n}")));
        }
    }
    Ok((true, "exact for n = 3..15".into()))
}

fn ladder(n: usize, seed: u64) -> CheckResult {
    let mut worst = 0.0f64;
    for k in 1..=2 {
        for i in 0..20 {
            let p = random_polynomial(n, 2 * k, 12, seed * 1000 + i);
            let a = taylor_block_average(&p, k)?;
            worst = worst.max((a.moment_path - a.ladder_path).abs());
        }
    }
    Ok((worst <= 1e-10, format!("max path gap {worst:.3e} over 40 blocks")))
}

fn odd_moments(n: usize, seed: u64) -> CheckResult {
    for k in 1..=2 {
        for i in 0..20 {
            let p = random_polynomial(n, 2 * k + 1, 12, seed * 1000 + 500 + i);
            if !verify_odd_moment(&p, k)?.iter().all(|c| c.exact_match) {
                return Ok((false, format!("inexact at k = {k}, polynomial {i}")));
            }
        }
    }
    Ok((true, "exact on 40 random odd blocks".into()))
}

fn gate(n: usize) -> Result<(Status, String), CliError> {
    let g = dimension_gate(n, &rational(0, 1))?;
    let detail = format!("lhs {:.6e}, rhs {:.6e}, margin {:.4e}", g.lhs, g.rhs, g.margin);
    let status = match (n == 10 || n == 11, g.holds) {
        (true, true) => Status::Pass,
        (false, false) => Status::ExpectedFail,
        _ => Status::Fail,
    };
    Ok((status, detail))
}

fn f2lambda(n: Dimension, opts: &FamilyOptions) -> CheckResult {
    for lam in [0.99, 1.0, 1.01] {
        let kp = KelvinParams::new(lam)?;
        let rep = check_f2lambda_bounds(&solve_f2_lambda(n, kp, opts)?, n, kp, 0.1, None)?;
        if !(rep.lower_bound_ok && rep.upper_finite) {
            return Ok((false, format!("envelope violated at lambda = {lam}")));
        }
    }
    Ok((true, "holds for lambda in {0.99, 1, 1.01}, eps = 0.1".into()))
}

fn convergence(n: Dimension) -> CheckResult {
    let s = manufactured_study(n, &[1024, 2048, 4096])?;
    let err = *s.errors.last().expect("three resolutions");
    let ok = (1.8..=2.2).contains(&s.observed_order) && err <= 1e-6 && s.closure_gap <= 1e-6;
    Ok((ok, format!("order {:.3}, error {err:.3e}, closure gap {:.3e}", s.observed_order, s.closure_gap)))
}

fn identities(n: usize, seed: u64, count: u64) -> CheckResult {
    let (mut res, mut margin) = (0.0f64, f64::INFINITY);
    for i in 0..count {
        let jet = generate_jet(&JetSpec::new(n, seed * 10_000 + i, ProjectionMode::Hypothesis))?;
        res = res.max(check_sextic_identity(&jet)?.relative_residual);
        margin = margin.min(check_hv_inequalities(&jet)?.full_norm.margin);
    }
    Ok((
        res <= 1e-10 && margin >= -1e-12,
        format!("{count} jets: sextic residual {res:.3e}, inequality margin {margin:.4e}"),
    ))
}

fn weyl_average(n: usize, seed: u64) -> CheckResult {
    let jet = generate_jet(&JetSpec::new(n, seed, ProjectionMode::General))?;
    let r = rbar2_weyl(&jet)?;
    let gap = (r.formula - r.laplacian_form).abs().max((r.formula - r.block_average.moment_path).abs());
    Ok((gap <= 1e-10, format!("quadratic average {:.6e}, gap {gap:.3e}", r.formula)))
}

fn flat_balance(n: Dimension) -> CheckResult {
    let mut worst = 0.0f64;
    for radius in [1.0, 2.0, 5.0, 10.0] {
        let rep = eval_pohozaev(&PohozaevInput::bubble(CurvatureJet::zero(n), 1e3, radius))?;
        if rep.i1 != 0.0 || rep.i2 != 0.0 || rep.i3 != 0.0 {
            return Ok((false, format!("curvature terms nonzero at R' = {radius}")));
        }
        worst = worst.max(rep.normalized_defect.abs());
    }
    Ok((worst <= 1e-8, format!("max normalized defect {worst:.3e} over R' in {{1, 2, 5, 10}}")))
}

fn log_growth(n: Dimension, f2: &RadialFunction) -> Option<CheckResult> {
    match n.get() {
        10 => Some((|| {
            let ratio = r2_u_f2_integral(n, f2, 1e4)? / r2_u_f2_integral(n, f2, 1e2)?;
            Ok(((ratio - 2.0).abs() <= 0.3, format!("I(1e4)/I(1e2) = {ratio:.4}")))
        })()),
        11 => Some((|| {
            let lo = r2_u_f2_integral(n, f2, 1e3)?;
            let drift = (r2_u_f2_integral(n, f2, 1e4)? - lo) / lo;
            Ok((drift.abs() <= 0.01, format!("relative drift {drift:.3e} from 1e3 to 1e4")))
        })()),
        _ => None,
    }
}

fn residual_fit(jet: &CurvatureJet, f2: &RadialFunction, f3: &RadialFunction, seed: u64) -> CheckResult {
    let n = jet.n().get();
    let dirs = SampleGrid::standard_directions(n, 8, seed);
    let mut fits = Vec::new();
    for height in [1e3, 1e4] {
        let profile = build_profile(jet, height, Some(f2), Some(f3))?;
        let limit = residual_radius_limit(n, height, DEFAULT_RADIUS_EPS);
        for count in [16, 32] {
            let grid = SampleGrid::new(SampleGrid::log_radii(0.05, limit, count), dirs.clone())?;
            fits.push(pde_residual(&profile, jet, &grid)?.fitted_constant);
        }
    }
    let mean = fits.iter().sum::<f64>() / fits.len() as f64;
    let spread = fits.iter().map(|f| (f / mean - 1.0).abs()).fold(0.0, f64::max);
    Ok((spread <= 0.3, format!("fitted constants {fits:.4?}, spread {spread:.3}")))
}

pub fn build_report(cfg: &RunConfig) -> Result<Report, CliError> {
    let n = dimension(cfg)?;
    if n.get() < 10 {
        return Err(CliError::config(format!("the report covers n ≥ 10, got n = {n}")));
    }
    let seed: u64 = cfg.get("seed")?;
    let opts = family_options(cfg)?;
    let nu = n.get();
    let mut b = Builder { checks: Vec::new() };

    b.push("sphere_fourth_moments", fourth_moments());
    b.push("block_average_ladder", ladder(nu, seed));
    b.push("odd_moment_constant", odd_moments(nu, seed));
    match gate(nu) {
        Ok((status, detail)) => b.checks.push(Check { name: "dimension_gate".into(), status, detail }),
        Err(e) => {
            b.push("dimension_gate", Err(e));
        }
    }

    let f2 = solve_f2(n, &opts);
    match &f2 {
        Ok(sol) => {
            let rep = check_f2_bounds(sol, n, cfg.get("bounds.lo")?, cfg.get("bounds.hi")?);
            match rep {
                Ok(r) => {
                    let worst = r.worst_node.as_ref().map(|m| m.relative_margin).unwrap_or(f64::NAN);
                    b.push("f2_lower_envelope", Ok((r.lower_bound_ok, format!("worst relative margin {worst:.4e}"))));
                    b.push("f2_upper_constant", Ok((r.upper_finite, format!("C = {:.6e}", r.upper_constant))));
                }
                Err(e) => {
                    let msg = e.to_string();
                    b.push("f2_lower_envelope", Err(e.into()));
                    b.skip("f2_upper_constant", &format!("bound check failed: {msg}"));
                }
            }
        }
        Err(e) => {
            let why = format!("f2 solve failed: {e}");
            b.push("f2_solve", Ok((false, why.clone())));
            b.skip("f2_lower_envelope", &why);
            b.skip("f2_upper_constant", &why);
        }
    }
    b.push("f2lambda_envelope", f2lambda(n, &opts));
    b.push(
        "supersolution_signs",
        check_supersolutions(n, &opts.grid)
            .map(|r| {
                (
                    r.phi1_ok && r.comparison_ok,
                    format!("min margins {:.4e}, {:.4e}", r.phi1_min_relative, r.comparison_min_relative),
                )
            })
            .map_err(Into::into),
    );
    b.push("solver_convergence", convergence(n));
    b.push("curvature_identities", identities(nu, seed, cfg.get("jets")?));
    b.push("weyl_average_cross_check", weyl_average(nu, seed));
    b.push("flat_pohozaev_balance", flat_balance(n));

    match &f2 {
        Ok(sol) => match log_growth(n, &sol.profile) {
            Some(r) => {
                b.push("log_growth_signature", r);
            }
            None => b.skip("log_growth_signature", "applies to n = 10, 11"),
        },
        Err(_) => b.skip("log_growth_signature", "needs f2"),
    }

    let jet = if cfg.raw("jet").is_some() {
        match jet_or_generated(cfg) {
            Ok(j) => {
                b.push("jet_load", Ok((true, "loaded".into())));
                Some(j)
            }
            Err(e) => {
                b.push("jet_load", Ok((false, e.message)));
                None
            }
        }
    } else {
        Some(jet_or_generated(cfg)?)
    };
    match (jet, &f2) {
        (Some(jet), Ok(sol)) => {
            let fit = solve_f3(n, &opts).map_err(CliError::from).and_then(|f3| residual_fit(&jet, &sol.profile, &f3.profile, seed));
            b.push("profile_residual_fit", fit);
        }
        (None, _) => b.skip("profile_residual_fit", "jet_load failed"),
        (_, Err(_)) => b.skip("profile_residual_fit", "needs f2"),
    }

    let passed = b.checks.iter().all(|c| c.status != Status::Fail);
    Ok(Report { dim: nu, seed, passed, checks: b.checks })
}

pub fn cmd_report(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let report = build_report(cfg)?;
    let dir = out_dir(cfg)?;
    let json = pretty(&report)?;
    let md = report.to_markdown();
    fs::write(dir.join("report.json"), &json)?;
    fs::write(dir.join("report.md"), &md)?;
    let stdout = match cfg.raw("format").unwrap_or("json") {
        "json" => json,
        "md" => md,
        other => return Err(CliError::config(format!("key `format`: expected json or md, got `{other}`"))),
    };
    Ok(Outcome { stdout, passed: report.passed })
}
