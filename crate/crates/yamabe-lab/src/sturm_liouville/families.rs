use serde::Serialize;

use super::{
    fit_envelope_constant, solve_bvp, BvpSolution, Certificate, Closure, InnerEnd, OuterEnd, Potential, Rhs, SturmLiouvilleProblem,
};
use crate::bubble::{bubble, Dimension, KelvinParams};
use crate::error::{precondition, Result};
use crate::radial::LogGrid;

/// Default half-width of the admissible window `|lambda - 1|`.
pub const DEFAULT_LAMBDA_WINDOW: f64 = 0.05;
/// Default `delta(eps)` for `eps = 0.1`.
pub const DEFAULT_DELTA_FOR_EPS_0_1: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyOptions {
    pub grid: LogGrid,
    pub closure: Closure,
    pub lambda_window: f64,
    /// Solve `f2` as the comparison function `phi1 + phi2` plus a remainder.
    pub split_comparison: bool,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        Self {
            grid: LogGrid::default(),
            closure: Closure::Robin,
            lambda_window: DEFAULT_LAMBDA_WINDOW,
            split_comparison: true,
        }
    }
}

impl FamilyOptions {
    pub fn with_grid(grid: LogGrid) -> Self {
        Self { grid, ..Self::default() }
    }
}

/// Highest harmonic degree kept in the truncated family: 6 for n = 10, 7 for n = 11.
pub fn max_harmonic_degree(n: Dimension) -> Option<usize> {
    match n.get() {
        10 => Some(6),
        11 => Some(7),
        _ => None,
    }
}

fn check_window(kp: KelvinParams, window: f64) -> Result<()> {
    if (kp.lambda() - 1.0).abs() > window {
        return Err(precondition(format!(
            "|λ − 1| > {window} (λ = {})",
            kp.lambda()
        )));
    }
    Ok(())
}

/// `delta0 = 2n`, `H = r^2 U`.
pub fn f2_problem(n: Dimension, opts: &FamilyOptions) -> Result<SturmLiouvilleProblem> {
    if n.get() < 10 {
        return Err(precondition(format!("f2 requires n ≥ 10, got n = {n}")));
    }
    let nf = n.as_f64();
    let mut p = SturmLiouvilleProblem::new(n, 2.0 * nf, Rhs::power_times_bubble(n, 2), 2.0, nf - 4.0, 1.5);
    p.grid = opts.grid;
    p.closure = opts.closure;
    Ok(p)
}

/// `delta0 = 3(n+1)`, `H = r^3 U`.
pub fn f3_problem(n: Dimension, opts: &FamilyOptions) -> Result<SturmLiouvilleProblem> {
    if n.get() < 8 {
        return Err(precondition(format!("f3 requires n ≥ 8, got n = {n}")));
    }
    let nf = n.as_f64();
    let mut p =
        SturmLiouvilleProblem::new(n, 3.0 * (nf + 1.0), Rhs::power_times_bubble(n, 3), 3.0, nf - 5.0, 2.5);
    p.grid = opts.grid;
    p.closure = opts.closure;
    Ok(p)
}

/// On `(lambda, r_hi)` with potential `V_lambda`, `H = r^2 U^lambda (1 - (lambda/r)^8)`.
pub fn f2_lambda_problem(
    n: Dimension,
    kp: KelvinParams,
    opts: &FamilyOptions,
) -> Result<SturmLiouvilleProblem> {
    if n.get() < 10 {
        return Err(precondition(format!("f2_lambda requires n ≥ 10, got n = {n}")));
    }
    check_window(kp, opts.lambda_window)?;
    let nf = n.as_f64();
    let mut p =
        SturmLiouvilleProblem::new(n, 2.0 * nf, Rhs::kelvin_cutoff(n, kp, 2, 8), 2.0, nf - 4.0, 1.5);
    p.potential = Potential::Interpolated(kp);
    p.grid = LogGrid::new(kp.lambda(), opts.grid.r_hi, opts.grid.points_per_decade);
    p.inner = InnerEnd::Dirichlet;
    p.closure = opts.closure;
    Ok(p)
}

/// On `(lambda, r_hi)`, Dirichlet at both ends, potential `V_lambda`,
/// `H = r^l U^lambda (1 - (lambda/r)^{2l+4})`, `delta0` defaulting to `l(l+n-2)`.
pub fn fpl_problem(
    n: Dimension,
    kp: KelvinParams,
    l: usize,
    delta0: Option<f64>,
    r_hi: f64,
    opts: &FamilyOptions,
) -> Result<SturmLiouvilleProblem> {
    let lbar = max_harmonic_degree(n)
        .ok_or_else(|| precondition(format!("harmonic family defined for n = 10, 11 only, got n = {n}")))?;
    if !(3..=lbar).contains(&l) {
        return Err(precondition(format!("l must satisfy 3 ≤ l ≤ {lbar}, got l = {l}")));
    }
    check_window(kp, opts.lambda_window)?;
    if !(r_hi > kp.lambda()) {
        return Err(precondition(format!("r_hi = {r_hi} must exceed λ = {}", kp.lambda())));
    }
    let nf = n.as_f64();
    let lf = l as f64;
    let d0 = delta0.unwrap_or(lf * (lf + nf - 2.0));
    let rhs = Rhs::kelvin_cutoff(n, kp, l as i32, 2 * l as i32 + 4);
    let mut p = SturmLiouvilleProblem::new(n, d0, rhs, lf, nf - 2.0 - lf, 1.0);
    p.potential = Potential::Interpolated(kp);
    p.grid = LogGrid::new(kp.lambda(), r_hi, opts.grid.points_per_decade);
    p.inner = InnerEnd::Dirichlet;
    p.outer = OuterEnd::Dirichlet;
    p.closure = Closure::Robin;
    Ok(p)
}

/// `phi1 + phi2 = U/(6(n-4)) (r^4 + (3n-4)/(n-2) r^2)`.
pub fn f2_comparison(n: Dimension, r: f64) -> f64 {
    super::f2_lower_envelope(n, r)
}

/// Remainder problem for `f2 - phi1 - phi2`, whose source `g + T phi2` is
/// positive and decays like `r^{-n}`.
pub fn f2_remainder_problem(n: Dimension, opts: &FamilyOptions) -> Result<SturmLiouvilleProblem> {
    let base = f2_problem(n, opts)?;
    let nf = n.as_f64();
    let rhs = Rhs::new("g + T phi2", move |r| bubble(n, r) * super::supersolution_margin_closed_form(n, r));
    let mut p = SturmLiouvilleProblem::new(n, base.delta0, rhs, 2.0, nf, 1.5);
    p.grid = base.grid;
    p.closure = base.closure;
    Ok(p)
}

/// Solve for `f2`, by default as `phi1 + phi2` plus the remainder solve, otherwise directly.
pub fn solve_f2(n: Dimension, opts: &FamilyOptions) -> Result<BvpSolution> {
    let direct = f2_problem(n, opts)?;
    if !opts.split_comparison {
        return solve_bvp(&direct);
    }
    let rem = solve_bvp(&f2_remainder_problem(n, opts)?)?;
    let profile = rem
        .profile
        .map(|r, d| f2_comparison(n, r) + d)
        .with_exponents(Some(direct.inner_closure_exponent()), Some(direct.outer_closure_exponent()));
    let min_value = profile.values().iter().copied().fold(f64::INFINITY, f64::min);
    let (p, alpha) = (direct.growth_exponent, direct.alpha);
    let c0 = fit_envelope_constant(&profile, 0.0, f64::INFINITY, |r| r.powf(p) * (1.0 + r).powf(-p + 2.0 - alpha));
    Ok(BvpSolution {
        profile,
        residual_norm: rem.residual_norm,
        min_value,
        bound_certificate: Some(Certificate { c0, p, alpha }),
        closure: rem.closure,
    })
}

pub fn solve_f3(n: Dimension, opts: &FamilyOptions) -> Result<BvpSolution> {
    solve_bvp(&f3_problem(n, opts)?)
}

pub fn solve_f2_lambda(n: Dimension, kp: KelvinParams, opts: &FamilyOptions) -> Result<BvpSolution> {
    solve_bvp(&f2_lambda_problem(n, kp, opts)?)
}

pub fn solve_fpl(
    n: Dimension,
    kp: KelvinParams,
    l: usize,
    delta0: Option<f64>,
    r_hi: f64,
    opts: &FamilyOptions,
) -> Result<BvpSolution> {
    solve_bvp(&fpl_problem(n, kp, l, delta0, r_hi, opts)?)
}
