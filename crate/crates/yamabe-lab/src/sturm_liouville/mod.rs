//! Radial boundary-value problems `a'' + (n-1)/r a' + (V - delta0/r^2) a = -H`
//! around the bubble, solved by second-order differences on a log grid.

mod bounds;
mod families;
mod manufactured;
mod solver;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::bubble::{bubble, bubble_potential, kelvin_bubble, v_lambda, Dimension, KelvinParams};
use crate::error::{precondition, Result};
use crate::radial::{LogGrid, RadialFunction};

pub use bounds::{
    check_f2_bounds, check_f2lambda_bounds, check_supersolutions, f2_lower_envelope,
    f2lambda_lower_envelope, scan_lambda_window, supersolution_margin_closed_form, F2BoundReport,
    F2LambdaBoundReport, LambdaWindowScan, NodeMargin, SupersolutionReport,
};
pub use families::{
    f2_comparison, f2_problem, f2_lambda_problem, f2_remainder_problem, f3_problem, fpl_problem, max_harmonic_degree, solve_f2,
    solve_f2_lambda, solve_f3, solve_fpl, FamilyOptions, DEFAULT_DELTA_FOR_EPS_0_1,
    DEFAULT_LAMBDA_WINDOW,
};
pub use manufactured::{manufactured_pair, manufactured_study, ConvergenceStudy};
pub use solver::{fit_envelope_constant, solve_bvp, BvpSolution, Certificate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Potential {
    /// `n(n+2) U^{4/(n-2)}`.
    Bubble,
    /// `V_lambda`, the interpolated potential between `U` and its Kelvin image.
    Interpolated(KelvinParams),
}

impl Potential {
    pub fn eval(&self, n: Dimension, r: f64) -> Result<f64> {
        match self {
            Self::Bubble => Ok(bubble_potential(n, r)),
            Self::Interpolated(kp) => v_lambda(n, *kp, r),
        }
    }
}

/// Right-hand side `H(r)`.
#[derive(Clone)]
pub struct Rhs {
    label: String,
    f: Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>,
}

impl fmt::Debug for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rhs({})", self.label)
    }
}

impl Rhs {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), f: Arc::new(move |r| Ok(f(r))) }
    }

    pub fn zero() -> Self {
        Self::new("zero", |_| 0.0)
    }

    /// `r^k U(r)`.
    pub fn power_times_bubble(n: Dimension, k: i32) -> Self {
        Self::new(format!("r^{k} U"), move |r| r.powi(k) * bubble(n, r))
    }

    /// `r^k U^lambda (1 - (lambda/r)^m)`.
    pub fn kelvin_cutoff(n: Dimension, kp: KelvinParams, k: i32, m: i32) -> Self {
        Self::new(format!("r^{k} U^lambda (1 - (lambda/r)^{m})"), move |r| {
            r.powi(k) * kelvin_bubble(n, kp, r) * (1.0 - (kp.lambda() / r).powi(m))
        })
    }

    pub fn tabulated(f: RadialFunction) -> Self {
        Self { label: "tabulated".into(), f: Arc::new(move |r| f.eval(r)) }
    }

    pub fn sum(a: &Rhs, b: &Rhs) -> Self {
        let (fa, fb) = (a.f.clone(), b.f.clone());
        Self { label: format!("{} + {}", a.label, b.label), f: Arc::new(move |r| Ok(fa(r)? + fb(r)?)) }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        (self.f)(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InnerEnd {
    /// Regular singular point at the origin; the grid starts at a small `r_lo`.
    Origin,
    /// Homogeneous Dirichlet condition at the first grid node.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OuterEnd {
    /// Decay at infinity; the grid is truncated at `r_hi`.
    Decay,
    /// Homogeneous Dirichlet condition at the last grid node.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Closure {
    /// Robin conditions from the asymptotic exponents at singular ends.
    Robin,
    /// Zero Dirichlet data on a domain extended by this many decades at every
    /// singular end.
    TruncatedDirichlet { decades: f64 },
}

#[derive(Debug, Clone)]
pub struct SturmLiouvilleProblem {
    pub n: Dimension,
    pub delta0: f64,
    pub potential: Potential,
    pub rhs: Rhs,
    pub grid: LogGrid,
    pub inner: InnerEnd,
    pub outer: OuterEnd,
    /// `H <= C r^beta (1+r)^{-beta-alpha}`.
    pub beta: f64,
    pub alpha: f64,
    /// Growth exponent `p` of the certificate `a <= C0 r^p (1+r)^{-p+2-alpha}`.
    pub growth_exponent: f64,
    pub closure: Closure,
    /// Bound on the relative weighted residual.
    pub tol: f64,
    /// Reject right-hand sides that are negative somewhere on the grid.
    pub require_nonnegative_rhs: bool,
}

pub const DEFAULT_SOLVE_TOL: f64 = 1e-8;

impl SturmLiouvilleProblem {
    pub fn new(n: Dimension, delta0: f64, rhs: Rhs, beta: f64, alpha: f64, p: f64) -> Self {
        Self {
            n,
            delta0,
            potential: Potential::Bubble,
            rhs,
            grid: LogGrid::default(),
            inner: InnerEnd::Origin,
            outer: OuterEnd::Decay,
            beta,
            alpha,
            growth_exponent: p,
            closure: Closure::Robin,
            tol: DEFAULT_SOLVE_TOL,
            require_nonnegative_rhs: true,
        }
    }

    /// Positive root of `x^2 + (n-2) x - delta0 = 0`.
    pub fn regular_root(&self) -> f64 {
        let m = self.n.as_f64() - 2.0;
        0.5 * (-m + (m * m + 4.0 * self.delta0).sqrt())
    }

    /// Negative root of `x^2 + (n-2) x - delta0 = 0`.
    pub fn decaying_root(&self) -> f64 {
        -(self.n.as_f64() - 2.0) - self.regular_root()
    }

    /// Exponent imposed by the Robin closure at the origin.
    pub fn inner_closure_exponent(&self) -> f64 {
        self.regular_root().min(self.beta + 2.0)
    }

    /// Exponent imposed by the Robin closure at infinity.
    pub fn outer_closure_exponent(&self) -> f64 {
        (2.0 - self.alpha).max(self.decaying_root())
    }

    /// Check the solvability hypotheses; the error names the inequality that fails.
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let n = self.n.as_f64();
        let (d0, a, b, p) = (self.delta0, self.alpha, self.beta, self.growth_exponent);
        if d0 < n {
            return Err(precondition(format!("δ₀ < n (δ₀ = {d0}, n = {n})")));
        }
        if self.outer == OuterEnd::Decay {
            if a <= 2.0 {
                return Err(precondition(format!("α ≤ 2 (α = {a})")));
            }
            if d0 + (a - 2.0) * (n - a) <= 0.0 {
                return Err(precondition(format!(
                    "δ₀ + (α−2)(n−α) ≤ 0 (value {})",
                    d0 + (a - 2.0) * (n - a)
                )));
            }
        }
        if self.inner == InnerEnd::Origin {
            if b < 0.0 {
                return Err(precondition(format!("β < 0 (β = {b})")));
            }
            if !(p > 0.0 && p <= b + 2.0) {
                return Err(precondition(format!("p outside (0, β+2] (p = {p}, β = {b})")));
            }
            if p * (p + n - 2.0) >= d0 {
                return Err(precondition(format!(
                    "p(p+n−2) ≥ δ₀ ({} ≥ {d0})",
                    p * (p + n - 2.0)
                )));
            }
        }
        if self.require_nonnegative_rhs {
            for r in self.grid.nodes() {
                let h = self.rhs.eval(r)?;
                if !(h >= -1e-300) {
                    return Err(precondition(format!("H < 0 at r = {r} (H = {h})")));
                }
            }
        }
        if !(self.tol > 0.0) {
            return Err(precondition("solve tolerance must be positive"));
        }
        Ok(())
    }
}
