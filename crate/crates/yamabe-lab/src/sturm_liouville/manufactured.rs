use serde::Serialize;

use super::{solve_bvp, BvpSolution, Closure, Rhs, SturmLiouvilleProblem};
use crate::bubble::Dimension;
use crate::error::{precondition, Result};
use crate::radial::LogGrid;

/// `a(r) = r^2 (1+r^2)^{-(n-4)/2}` and `T a` for `delta0 = 2n`.
pub fn manufactured_pair(n: Dimension) -> (impl Fn(f64) -> f64 + Clone, impl Fn(f64) -> f64 + Clone + Send + Sync) {
    let nf = n.as_f64();
    let m = (nf - 4.0) / 2.0;
    let a = move |r: f64| r * r * (1.0 + r * r).powf(-m);
    let ta = move |r: f64| {
        let q = 1.0 + r * r;
        let a0 = r * r * q.powf(-m);
        let a1 = 2.0 * r * q.powf(-m) - 2.0 * m * r.powi(3) * q.powf(-m - 1.0);
        let a2 = 2.0 * q.powf(-m) - 10.0 * m * r * r * q.powf(-m - 1.0) + 4.0 * m * (m + 1.0) * r.powi(4) * q.powf(-m - 2.0);
        a2 + (nf - 1.0) / r * a1 + (nf * (nf + 2.0) / (q * q) - 2.0 * nf / (r * r)) * a0
    };
    (a, ta)
}

fn problem(n: Dimension, ppd: usize, closure: Closure) -> SturmLiouvilleProblem {
    let (_, ta) = manufactured_pair(n);
    let nf = n.as_f64();
    let mut p = SturmLiouvilleProblem::new(n, 2.0 * nf, Rhs::new("manufactured", move |r| -ta(r)), 2.0, nf - 4.0, 1.5);
    p.grid = LogGrid { r_lo: 1e-4, r_hi: 1e4, points_per_decade: ppd };
    p.closure = closure;
    p.require_nonnegative_rhs = false;
    p.tol = 1e-6;
    p
}

fn max_relative_error(sol: &BvpSolution, exact: &dyn Fn(f64) -> f64) -> f64 {
    let grid = sol.profile.grid();
    let scale = grid.iter().map(|&r| exact(r).abs()).fold(0.0, f64::max);
    let err = grid.iter().zip(sol.profile.values()).map(|(&r, &v)| (v - exact(r)).abs()).fold(0.0, f64::max);
    err / scale
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy {
    pub n: usize,
    pub points_per_decade: Vec<usize>,
    pub errors: Vec<f64>,
    /// `log2` of the last two errors' ratio; meaningful when resolutions double.
    pub observed_order: f64,
    /// Max relative gap between the Robin and truncated-Dirichlet closures at
    /// the coarsest resolution.
    pub closure_gap: f64,
}

/// Solve the manufactured problem at each resolution and compare with the
/// known solution.
pub fn manufactured_study(n: Dimension, resolutions: &[usize]) -> Result<ConvergenceStudy> {
    if resolutions.len() < 2 {
        return Err(precondition("a convergence study needs at least two resolutions"));
    }
    let (a, _) = manufactured_pair(n);
    let mut errors = Vec::with_capacity(resolutions.len());
    for &ppd in resolutions {
        errors.push(max_relative_error(&solve_bvp(&problem(n, ppd, Closure::Robin))?, &a));
    }
    let k = errors.len();
    let observed_order = (errors[k - 2] / errors[k - 1]).log2();
    let robin = solve_bvp(&problem(n, resolutions[0], Closure::Robin))?;
    let trunc = solve_bvp(&problem(n, resolutions[0], Closure::TruncatedDirichlet { decades: 3.0 }))?;
    let scale = robin.profile.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = robin
        .profile
        .values()
        .iter()
        .zip(trunc.profile.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(ConvergenceStudy {
        n: n.get(),
        points_per_decade: resolutions.to_vec(),
        errors,
        observed_order,
        closure_gap: gap / scale,
    })
}
