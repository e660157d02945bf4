use serde::Serialize;

use super::{fit_envelope_constant, solve_f2_lambda, BvpSolution, FamilyOptions};
use crate::bubble::{bubble, bubble_derivatives, kelvin_bubble, Dimension, KelvinParams};
use crate::error::{precondition, Result};
use crate::radial::LogGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeMargin {
    pub r: f64,
    pub value: f64,
    pub envelope: f64,
    pub relative_margin: f64,
}

const MAX_LISTED: usize = 20;

/// `U/(6(n-4)) (r^4 + (3n-4)/(n-2) r^2)`.
pub fn f2_lower_envelope(n: Dimension, r: f64) -> f64 {
    let nf = n.as_f64();
    bubble(n, r) / (6.0 * (nf - 4.0)) * (r.powi(4) + (3.0 * nf - 4.0) / (nf - 2.0) * r * r)
}

/// `(1-eps)/(6(n-4)) U^lambda (r^4 (1-(lambda/r)^8) + (3n-4)/(n-2) r^2 (1-(lambda/r)^4))`.
pub fn f2lambda_lower_envelope(n: Dimension, kp: KelvinParams, eps: f64, r: f64) -> f64 {
    let nf = n.as_f64();
    let q = kp.lambda() / r;
    (1.0 - eps) / (6.0 * (nf - 4.0))
        * kelvin_bubble(n, kp, r)
        * (r.powi(4) * (1.0 - q.powi(8)) + (3.0 * nf - 4.0) / (nf - 2.0) * r * r * (1.0 - q.powi(4)))
}

struct LowerScan {
    ok: bool,
    worst: Option<NodeMargin>,
    violations: Vec<NodeMargin>,
    violation_count: usize,
}

fn scan_lower(sol: &BvpSolution, lo: f64, hi: f64, tol: f64, env: impl Fn(f64) -> f64) -> LowerScan {
    let mut worst: Option<NodeMargin> = None;
    let mut violations = Vec::new();
    let mut count = 0;
    for (&r, &v) in sol.profile.grid().iter().zip(sol.profile.values()) {
        if r < lo || r > hi {
            continue;
        }
        let e = env(r);
        if e <= 0.0 {
            if v < -tol * sol.profile.values().iter().fold(0.0f64, |m, x| m.max(x.abs())) {
                count += 1;
            }
            continue;
        }
        let m = NodeMargin { r, value: v, envelope: e, relative_margin: (v - e) / e };
        if worst.map_or(true, |w| m.relative_margin < w.relative_margin) {
            worst = Some(m);
        }
        if m.relative_margin < -tol {
            count += 1;
            if violations.len() < MAX_LISTED {
                violations.push(m);
            }
        }
    }
    LowerScan { ok: count == 0, worst, violations, violation_count: count }
}

#[derive(Debug, Clone, Serialize)]
pub struct F2BoundReport {
    pub n: usize,
    pub range: (f64, f64),
    pub tolerance: f64,
    pub lower_bound_ok: bool,
    pub worst_node: Option<NodeMargin>,
    pub violation_count: usize,
    pub violations: Vec<NodeMargin>,
    /// Fitted `C` in `f2 <= C r^{3/2} (1+r)^{9/2-n}`.
    pub upper_constant: f64,
    pub upper_finite: bool,
    pub inner_slope: f64,
    pub outer_slope: f64,
    pub envelope_at_one: f64,
}

/// Lower envelope at every node of `[lo, hi]` (violation tolerance
/// `10 x residual_norm`, relative) and the fitted upper constant.
pub fn check_f2_bounds(sol: &BvpSolution, n: Dimension, lo: f64, hi: f64) -> Result<F2BoundReport> {
    if n.get() < 10 {
        return Err(precondition(format!("f2 bounds need n ≥ 10, got n = {n}")));
    }
    let tol = 10.0 * sol.residual_norm;
    let scan = scan_lower(sol, lo, hi, tol, |r| f2_lower_envelope(n, r));
    let nf = n.as_f64();
    let upper = fit_envelope_constant(&sol.profile, lo, hi, |r| r.powf(1.5) * (1.0 + r).powf(4.5 - nf));
    let r0 = sol.profile.r_min();
    let r1 = sol.profile.r_max();
    Ok(F2BoundReport {
        n: n.get(),
        range: (lo, hi),
        tolerance: tol,
        lower_bound_ok: scan.ok,
        worst_node: scan.worst,
        violation_count: scan.violation_count,
        violations: scan.violations,
        upper_constant: upper,
        upper_finite: upper.is_finite() && upper > 0.0,
        inner_slope: sol.profile.loglog_slope(r0, r0 * 10.0)?,
        outer_slope: sol.profile.loglog_slope(r1 / 10.0, r1)?,
        envelope_at_one: f2_lower_envelope(n, 1.0),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct F2LambdaBoundReport {
    pub n: usize,
    pub lambda: f64,
    pub eps: f64,
    pub delta: f64,
    pub tolerance: f64,
    pub lower_bound_ok: bool,
    pub worst_node: Option<NodeMargin>,
    pub violation_count: usize,
    pub violations: Vec<NodeMargin>,
    /// Fitted `C` in `f_{2,lambda} <= C r^{6-n}`.
    pub upper_constant: f64,
    pub upper_finite: bool,
}

fn default_delta(eps: f64) -> Option<f64> {
    ((eps - 0.1).abs() < 1e-12).then_some(super::DEFAULT_DELTA_FOR_EPS_0_1)
}

pub fn check_f2lambda_bounds(
    sol: &BvpSolution,
    n: Dimension,
    kp: KelvinParams,
    eps: f64,
    delta: Option<f64>,
) -> Result<F2LambdaBoundReport> {
    let delta = delta
        .or_else(|| default_delta(eps))
        .ok_or_else(|| precondition(format!("no default δ(ε) for ε = {eps}; pass one explicitly")))?;
    if (kp.lambda() - 1.0).abs() > delta {
        return Err(precondition(format!("|λ − 1| > δ(ε) (λ = {}, δ = {delta})", kp.lambda())));
    }
    let tol = 10.0 * sol.residual_norm;
    let scan = scan_lower(sol, 0.0, f64::INFINITY, tol, |r| f2lambda_lower_envelope(n, kp, eps, r));
    let nf = n.as_f64();
    let upper = fit_envelope_constant(&sol.profile, 0.0, f64::INFINITY, |r| r.powf(6.0 - nf));
    Ok(F2LambdaBoundReport {
        n: n.get(),
        lambda: kp.lambda(),
        eps,
        delta,
        tolerance: tol,
        lower_bound_ok: scan.ok,
        worst_node: scan.worst,
        violation_count: scan.violation_count,
        violations: scan.violations,
        upper_constant: upper,
        upper_finite: upper.is_finite() && upper > 0.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaWindowScan {
    pub eps: f64,
    pub step: f64,
    /// Largest `d` such that the envelope holds at `1 - d` and `1 + d` and at
    /// every smaller step.
    pub largest_admissible: f64,
    pub tested: Vec<(f64, bool, f64)>,
}

pub fn scan_lambda_window(n: Dimension, eps: f64, opts: &FamilyOptions, step: f64) -> Result<LambdaWindowScan> {
    if !(step > 0.0) {
        return Err(precondition("scan step must be positive"));
    }
    let mut tested = Vec::new();
    let mut largest = 0.0;
    let mut k = 0usize;
    loop {
        let d = step * k as f64;
        if d > opts.lambda_window + 1e-12 {
            break;
        }
        let mut all = true;
        for lam in if k == 0 { vec![1.0] } else { vec![1.0 - d, 1.0 + d] } {
            let kp = KelvinParams::new(lam)?;
            let sol = solve_f2_lambda(n, kp, opts)?;
            let rep = check_f2lambda_bounds(&sol, n, kp, eps, Some(opts.lambda_window))?;
            let m = rep.worst_node.map_or(0.0, |w| w.relative_margin);
            tested.push((lam, rep.lower_bound_ok, m));
            all &= rep.lower_bound_ok;
        }
        if !all {
            break;
        }
        largest = d;
        k += 1;
    }
    Ok(LambdaWindowScan { eps, step, largest_admissible: largest, tested })
}

#[derive(Debug, Clone, Serialize)]
pub struct SupersolutionReport {
    pub n: usize,
    /// `T phi1 + r^2 U > 0` at every node.
    pub phi1_ok: bool,
    pub phi1_min_relative: f64,
    /// Max relative gap between `T phi1 + r^2 U` and the closed form `g`.
    pub g_identity_error: f64,
    /// Max relative gap between `T phi2` and its closed form.
    pub phi2_identity_error: f64,
    /// `g` exceeds the `phi2` right-hand side at every node.
    pub comparison_ok: bool,
    pub comparison_min_relative: f64,
    /// `g / (-T phi2)` at the last node, which tends to 1.
    pub far_ratio: f64,
}

/// `r^2 U (4(n-2)/(3(n-4)) / (1+r^2) + 2n/(3(n-4)) r^2 U^{4/(n-2)})`.
fn g_closed_form(n: Dimension, r: f64) -> f64 {
    let nf = n.as_f64();
    let q = 1.0 + r * r;
    r * r * bubble(n, r) * (4.0 * (nf - 2.0) / (3.0 * (nf - 4.0)) / q + 2.0 * nf / (3.0 * (nf - 4.0)) * r * r / (q * q))
}

/// `-2(3n-4)/(3(n-4)) U (r^2/(1+r^2) - n/(n-2) r^2 U^{4/(n-2)})`.
fn t_phi2_closed_form(n: Dimension, r: f64) -> f64 {
    let nf = n.as_f64();
    let q = 1.0 + r * r;
    -2.0 * (3.0 * nf - 4.0) / (3.0 * (nf - 4.0)) * bubble(n, r) * (r * r / q - nf / (nf - 2.0) * r * r / (q * q))
}

/// `(g + T phi2) / U` in simplified form, `4n(n-1) r^2 / (3(n-4)(n-2)(1+r^2)^2)`.
pub fn supersolution_margin_closed_form(n: Dimension, r: f64) -> f64 {
    let nf = n.as_f64();
    4.0 * nf * (nf - 1.0) * r * r / (3.0 * (nf - 4.0) * (nf - 2.0) * (1.0 + r * r).powi(2))
}

/// `T (c r^k U)` with `delta0 = 2n` and the bubble potential.
fn t_of_power_bubble(n: Dimension, c: f64, k: i32, r: f64) -> f64 {
    let nf = n.as_f64();
    let (u, du, ddu) = bubble_derivatives(n, r);
    let kf = k as f64;
    let rk = r.powi(k);
    let phi = c * rk * u;
    let dphi = c * (kf * r.powi(k - 1) * u + rk * du);
    let ddphi = c * (kf * (kf - 1.0) * r.powi(k - 2) * u + 2.0 * kf * r.powi(k - 1) * du + rk * ddu);
    ddphi + (nf - 1.0) / r * dphi + (nf * (nf + 2.0) / (1.0 + r * r).powi(2) - 2.0 * nf / (r * r)) * phi
}

pub fn check_supersolutions(n: Dimension, grid: &LogGrid) -> Result<SupersolutionReport> {
    if n.get() < 10 {
        return Err(precondition(format!("comparison functions need n ≥ 10, got n = {n}")));
    }
    grid.validate()?;
    let nf = n.as_f64();
    let c1 = 1.0 / (6.0 * (nf - 4.0));
    let c2 = (3.0 * nf - 4.0) / (6.0 * (nf - 4.0) * (nf - 2.0));
    let mut phi1_min = f64::INFINITY;
    let mut g_err = 0.0f64;
    let mut phi2_err = 0.0f64;
    let mut cmp_min = f64::INFINITY;
    let mut far_ratio = f64::NAN;
    for r in grid.nodes() {
        let u = bubble(n, r);
        let lhs1 = t_of_power_bubble(n, c1, 4, r) + r * r * u;
        let g = g_closed_form(n, r);
        phi1_min = phi1_min.min(lhs1 / (r * r * u));
        g_err = g_err.max((lhs1 - g).abs() / g);
        let tphi2 = t_of_power_bubble(n, c2, 2, r);
        let tphi2_cf = t_phi2_closed_form(n, r);
        phi2_err = phi2_err.max((tphi2 - tphi2_cf).abs() / (u * r * r / (1.0 + r * r)));
        cmp_min = cmp_min.min((g + tphi2) / g);
        far_ratio = g / -tphi2;
    }
    Ok(SupersolutionReport {
        n: n.get(),
        phi1_ok: phi1_min > 0.0,
        phi1_min_relative: phi1_min,
        g_identity_error: g_err,
        phi2_identity_error: phi2_err,
        comparison_ok: cmp_min > 0.0,
        comparison_min_relative: cmp_min,
        far_ratio,
    })
}
