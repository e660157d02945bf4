use serde::Serialize;

use super::{Closure, InnerEnd, OuterEnd, SturmLiouvilleProblem};
use crate::error::{LabError, Result};
use crate::radial::{LogGrid, RadialFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    /// Smallest `C0` with `a <= C0 r^p (1+r)^{-p+2-alpha}` at every node.
    pub c0: f64,
    pub p: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub profile: RadialFunction,
    /// Max of `|T_h a + H| (1+r)^alpha` relative to max of `|H| (1+r)^alpha`.
    pub residual_norm: f64,
    pub min_value: f64,
    pub bound_certificate: Option<Certificate>,
    pub closure: Closure,
}

impl BvpSolution {
    /// Values are nonnegative up to `tol` times the largest value.
    pub fn is_nonnegative(&self, tol: f64) -> bool {
        let scale = self.profile.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.min_value >= -tol * scale
    }
}

/// `max_i a_i / envelope(r_i)` over nodes in `[lo, hi]` where the envelope is positive.
pub fn fit_envelope_constant(
    profile: &RadialFunction,
    lo: f64,
    hi: f64,
    envelope: impl Fn(f64) -> f64,
) -> f64 {
    profile
        .grid()
        .iter()
        .zip(profile.values())
        .filter(|(r, _)| **r >= lo && **r <= hi)
        .filter_map(|(&r, &v)| {
            let e = envelope(r);
            (e > 0.0).then(|| v / e)
        })
        .fold(0.0, f64::max)
}

struct Tridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiagonal {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.upper[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = rhs.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut beta = self.diag[0];
        if beta == 0.0 {
            return Err(LabError::Singular(0));
        }
        c[0] = self.upper[0] / beta;
        d[0] = rhs[0] / beta;
        for i in 1..n {
            beta = self.diag[i] - self.lower[i] * c[i - 1];
            if beta == 0.0 || !beta.is_finite() {
                return Err(LabError::Singular(i));
            }
            c[i] = if i + 1 < n { self.upper[i] / beta } else { 0.0 };
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / beta;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }
}

struct Discrete {
    nodes: Vec<f64>,
    matrix: Tridiagonal,
    rhs: Vec<f64>,
    h_values: Vec<f64>,
}

/// In `s = ln r` the equation reads `A'' + (n-2) A' + (r^2 V - delta0) A = -r^2 H`.
fn assemble(
    prob: &SturmLiouvilleProblem,
    grid: &LogGrid,
    inner_robin: Option<f64>,
    outer_robin: Option<f64>,
) -> Result<Discrete> {
    let nodes = grid.nodes();
    let m = nodes.len();
    let h = grid.step();
    let drift = prob.n.as_f64() - 2.0;
    let lo = 1.0 / (h * h) - drift / (2.0 * h);
    let up = 1.0 / (h * h) + drift / (2.0 * h);
    let mut lower = vec![lo; m];
    let mut upper = vec![up; m];
    let mut diag = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut h_values = Vec::with_capacity(m);
    for &r in &nodes {
        let v = prob.potential.eval(prob.n, r)?;
        diag.push(-2.0 / (h * h) + r * r * v - prob.delta0);
        let hv = prob.rhs.eval(r)?;
        h_values.push(hv);
        rhs.push(-r * r * hv);
    }
    lower[0] = 0.0;
    upper[m - 1] = 0.0;
    match inner_robin {
        // ghost node A_{-1} = A_1 - 2 h k A_0
        Some(k) => {
            upper[0] += lo;
            diag[0] -= 2.0 * h * k * lo;
        }
        None => {
            diag[0] = 1.0;
            upper[0] = 0.0;
            rhs[0] = 0.0;
        }
    }
    match outer_robin {
        // ghost node A_m = A_{m-2} + 2 h k A_{m-1}
        Some(k) => {
            lower[m - 1] += up;
            diag[m - 1] += 2.0 * h * k * up;
        }
        None => {
            diag[m - 1] = 1.0;
            lower[m - 1] = 0.0;
            rhs[m - 1] = 0.0;
        }
    }
    Ok(Discrete { nodes, matrix: Tridiagonal { lower, diag, upper }, rhs, h_values })
}

fn residual_norm(prob: &SturmLiouvilleProblem, d: &Discrete, a: &[f64]) -> f64 {
    let la = d.matrix.apply(a);
    let weight = |r: f64| (1.0 + r).powf(prob.alpha.max(0.0));
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (i, &r) in d.nodes.iter().enumerate() {
        let w = weight(r);
        num = num.max(w * (la[i] - d.rhs[i]).abs() / (r * r));
        den = den.max(w * d.h_values[i].abs());
    }
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Solve `T a = -H` with the closure chosen in the problem.
pub fn solve_bvp(prob: &SturmLiouvilleProblem) -> Result<BvpSolution> {
    prob.validate()?;
    let inner_exp = (prob.inner == InnerEnd::Origin).then(|| prob.inner_closure_exponent());
    let outer_exp = (prob.outer == OuterEnd::Decay).then(|| prob.outer_closure_exponent());
    let (profile, residual) = match prob.closure {
        Closure::Robin => {
            let d = assemble(prob, &prob.grid, inner_exp, outer_exp)?;
            let a = d.matrix.solve(&d.rhs)?;
            let res = residual_norm(prob, &d, &a);
            (RadialFunction::new(d.nodes, a)?, res)
        }
        Closure::TruncatedDirichlet { decades } => {
            let factor = 10f64.powf(decades);
            let mut ext = prob.grid;
            if inner_exp.is_some() {
                ext.r_lo /= factor;
            }
            if outer_exp.is_some() {
                ext.r_hi *= factor;
            }
            let d = assemble(prob, &ext, None, None)?;
            let a = d.matrix.solve(&d.rhs)?;
            let res = residual_norm(prob, &d, &a);
            let wide = RadialFunction::new(d.nodes, a)?;
            let nodes = prob.grid.nodes();
            let values = nodes.iter().map(|&r| wide.eval(r)).collect::<Result<Vec<_>>>()?;
            (RadialFunction::new(nodes, values)?, res)
        }
    };
    let profile = profile.with_exponents(inner_exp, outer_exp);
    if !(residual <= prob.tol) {
        return Err(LabError::Consistency {
            what: "weighted residual of the discrete solve exceeds tolerance".into(),
            lhs: residual,
            rhs: prob.tol,
        });
    }
    let min_value = profile.values().iter().copied().fold(f64::INFINITY, f64::min);
    let bound_certificate = (prob.inner == InnerEnd::Origin && prob.outer == OuterEnd::Decay).then(|| {
        let (p, alpha) = (prob.growth_exponent, prob.alpha);
        let c0 = fit_envelope_constant(&profile, 0.0, f64::INFINITY, |r| {
            r.powf(p) * (1.0 + r).powf(-p + 2.0 - alpha)
        });
        Certificate { c0, p, alpha }
    });
    Ok(BvpSolution { profile, residual_norm: residual, min_value, bound_certificate, closure: prob.closure })
}
