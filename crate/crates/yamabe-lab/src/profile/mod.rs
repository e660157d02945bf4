//! The three-term blow-up profile `U + M^{-8/(n-2)} v2 + M^{-10/(n-2)} v3`,
//! its PDE residual in the rescaled equation and the error envelopes.

mod residual;
mod sampled;

pub use residual::{pde_residual, residual_radius_limit, ResidualReport, SampleGrid, DEFAULT_RADIUS_EPS};
pub use sampled::{
    error_envelope_check, EnvelopeRegime, EnvelopeReport, RadiusMargin, SampleSource, SampledSolution,
};

use serde::Serialize;

use crate::bubble::{bubble, bubble_derivatives, Dimension};
use crate::curvature::{build_r_bar_tilde, validate_jet, CurvatureJet};
use crate::error::{precondition, LabError, Result};
use crate::radial::RadialFunction;
use crate::sphere::{exact, harmonic_projection, sphere_inner, to_f64, CompiledPolynomial, SphericalPolynomial};

/// Which cubic angular factor the composite profile uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum V3Mode {
    /// `-c(n)` times the whole mean-free cubic block.
    Full,
    /// Only its harmonic (degree-three eigenfunction) component.
    Eigen,
}

/// One separable piece `P(y) f(r) / r^l` of a profile correction, with `P`
/// homogeneous of degree `l` and already carrying its height weight.
#[derive(Debug, Clone)]
pub struct SeparableTerm {
    pub angular: SphericalPolynomial,
    pub radial: RadialFunction,
    pub weight: f64,
}

impl SeparableTerm {
    pub fn degree(&self) -> usize {
        self.angular.degree()
    }

    /// `g(r) = weight f(r) / r^l` and its first two derivatives.
    pub fn radial_factor(&self, r: f64) -> Result<(f64, f64, f64)> {
        radial_factor(&self.radial, self.degree() as i32, self.weight, r)
    }
}

fn radial_factor(f: &RadialFunction, l: i32, weight: f64, r: f64) -> Result<(f64, f64, f64)> {
    let (f0, f1, f2) = f.eval_derivatives(r)?;
    let lf = l as f64;
    let inv = r.powi(-l);
    let g = f0 * inv;
    let g1 = (f1 - lf * f0 / r) * inv;
    let g2 = (f2 - 2.0 * lf * f1 / r + lf * (lf + 1.0) * f0 / (r * r)) * inv;
    Ok((weight * g, weight * g1, weight * g2))
}

#[derive(Debug, Clone)]
pub struct ProfileApprox {
    n: Dimension,
    height: f64,
    v2_angular: SphericalPolynomial,
    v3_full: SphericalPolynomial,
    v3_eigen: SphericalPolynomial,
    v2_radial: RadialFunction,
    v3_radial: RadialFunction,
    v3_mode: V3Mode,
    compiled: [CompiledPolynomial; 2],
}

/// Assemble the profile for a jet at blow-up height `height = M`.
///
/// The angular factors are `-c(n) R~(2)` and `-c(n) R~(3)` (or the harmonic part
/// of the latter); `f2` and `f3` are the radial solutions.
pub fn build_profile(
    jet: &CurvatureJet,
    height: f64,
    f2: Option<&RadialFunction>,
    f3: Option<&RadialFunction>,
) -> Result<ProfileApprox> {
    let f2 = f2.ok_or_else(|| LabError::Dependency("the profile needs the solved f2".into()))?;
    let f3 = f3.ok_or_else(|| LabError::Dependency("the profile needs the solved f3".into()))?;
    if !(height >= 1.0 && height.is_finite()) {
        return Err(precondition(format!("blow-up height must be at least 1, got {height}")));
    }
    let report = validate_jet(jet);
    if !report.passed {
        let names: Vec<_> = report.failures().map(|c| c.name.clone()).collect();
        return Err(precondition(format!("jet violates: {}", names.join(", "))));
    }
    let n = jet.n();
    let c = exact(-n.conformal_constant());
    let v2_angular = build_r_bar_tilde(jet, 2)?.1.scale(&c);
    let v3_full = build_r_bar_tilde(jet, 3)?.1.scale(&c);
    let v3_eigen = harmonic_projection(&v3_full);
    let compiled = [v2_angular.compile(), v3_full.compile()];
    Ok(ProfileApprox {
        n,
        height,
        v2_angular,
        v3_full,
        v3_eigen,
        v2_radial: f2.clone(),
        v3_radial: f3.clone(),
        v3_mode: V3Mode::Full,
        compiled,
    })
}

impl ProfileApprox {
    pub fn with_v3_mode(mut self, mode: V3Mode) -> Self {
        self.v3_mode = mode;
        self.compiled[1] = self.v3_angular().compile();
        self
    }

    pub fn n(&self) -> Dimension {
        self.n
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn v3_mode(&self) -> V3Mode {
        self.v3_mode
    }

    fn exponent(&self) -> f64 {
        self.n.as_f64() - 2.0
    }

    /// `s = M^{-2/(n-2)}`, the ratio of physical to blow-up coordinates.
    pub fn scale(&self) -> f64 {
        self.height.powf(-2.0 / self.exponent())
    }

    pub fn v2_weight(&self) -> f64 {
        self.height.powf(-8.0 / self.exponent())
    }

    pub fn v3_weight(&self) -> f64 {
        self.height.powf(-10.0 / self.exponent())
    }

    pub fn v2_angular(&self) -> &SphericalPolynomial {
        &self.v2_angular
    }

    pub fn v3_angular(&self) -> &SphericalPolynomial {
        match self.v3_mode {
            V3Mode::Full => &self.v3_full,
            V3Mode::Eigen => &self.v3_eigen,
        }
    }

    pub fn v3_full(&self) -> &SphericalPolynomial {
        &self.v3_full
    }

    pub fn v3_eigen(&self) -> &SphericalPolynomial {
        &self.v3_eigen
    }

    pub fn v2_radial(&self) -> &RadialFunction {
        &self.v2_radial
    }

    pub fn v3_radial(&self) -> &RadialFunction {
        &self.v3_radial
    }

    /// Sphere `L^2` norm of `v3_full - v3_eigen` (normalised measure).
    pub fn v3_eigen_gap(&self) -> Result<f64> {
        let diff = self.v3_full.sub(&self.v3_eigen)?;
        Ok(to_f64(&sphere_inner(&diff, &diff)?).sqrt())
    }

    /// The two corrections as separable terms, weights included.
    pub fn separable_terms(&self) -> Vec<SeparableTerm> {
        vec![
            SeparableTerm { angular: self.v2_angular.clone(), radial: self.v2_radial.clone(), weight: self.v2_weight() },
            SeparableTerm {
                angular: self.v3_angular().clone(),
                radial: self.v3_radial.clone(),
                weight: self.v3_weight(),
            },
        ]
    }

    fn check_point(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.n.get() {
            return Err(precondition(format!("point has {} components, expected {}", y.len(), self.n.get())));
        }
        Ok(y.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// The composite `v(y)` in blow-up coordinates.
    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        let r = self.check_point(y)?;
        let u = bubble(self.n, r);
        if r == 0.0 {
            return Ok(u);
        }
        let mut v = u;
        for (poly, (f, l, w)) in self.compiled.iter().zip(self.radial_parts()) {
            let p = poly.eval(y);
            if p != 0.0 {
                v += w * p * f.eval(r)? / r.powi(l);
            }
        }
        Ok(v)
    }

    fn radial_parts(&self) -> [(&RadialFunction, i32, f64); 2] {
        [(&self.v2_radial, 2, self.v2_weight()), (&self.v3_radial, 3, self.v3_weight())]
    }

    /// Value, gradient and row-major Hessian of `v` at `y != 0`.
    pub fn jet2(&self, y: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let r = self.check_point(y)?;
        if r == 0.0 {
            return Err(precondition("derivatives of the profile are evaluated away from the origin"));
        }
        let n = self.n.get();
        let (u, u1, u2) = bubble_derivatives(self.n, r);
        let mut val = u;
        let mut grad: Vec<f64> = y.iter().map(|yi| u1 * yi / r).collect();
        let mut hess = vec![0.0; n * n];
        add_radial_hessian(&mut hess, y, r, 1.0, u1, u2);
        for (poly, (f, l, w)) in self.compiled.iter().zip(self.radial_parts()) {
            let (p, dp, ddp) = poly.jet2(y);
            if p == 0.0 && dp.iter().all(|v| *v == 0.0) {
                continue;
            }
            let (g, g1, g2) = radial_factor(f, l, w, r)?;
            val += p * g;
            for i in 0..n {
                grad[i] += dp[i] * g + p * g1 * y[i] / r;
                for j in 0..n {
                    hess[i * n + j] += ddp[i][j] * g + (dp[i] * y[j] + dp[j] * y[i]) * g1 / r;
                }
            }
            add_radial_hessian(&mut hess, y, r, p, g1, g2);
        }
        Ok((val, grad, hess))
    }

    /// The physical-scale profile `M v(M^{2/(n-2)} x)`.
    pub fn physical(&self, x: &[f64]) -> Result<f64> {
        let t = self.height.powf(2.0 / self.exponent());
        let y: Vec<f64> = x.iter().map(|v| v * t).collect();
        Ok(self.height * self.eval(&y)?)
    }
}

/// `hess += p * Hess(g(|y|))` for a radial `g` with derivatives `g1`, `g2`.
fn add_radial_hessian(hess: &mut [f64], y: &[f64], r: f64, p: f64, g1: f64, g2: f64) {
    if p == 0.0 {
        return;
    }
    let n = y.len();
    for i in 0..n {
        for j in 0..n {
            let yy = y[i] * y[j] / (r * r);
            let delta = if i == j { 1.0 } else { 0.0 };
            hess[i * n + j] += p * (g2 * yy + g1 * (delta - yy) / r);
        }
    }
}

/// The manifold stand-in `xi~`: `xi` minus the two curvature corrections, with
/// Euclidean distance in place of the geodesic one.
pub fn eval_xi_tilde(
    n: Dimension,
    q: &[f64],
    mu: f64,
    p: &[f64],
    jet: &CurvatureJet,
    f2: &RadialFunction,
    f3: &RadialFunction,
) -> Result<f64> {
    let base = crate::bubble::xi(n, q, mu, p)?;
    if jet.n() != n {
        return Err(precondition("jet dimension does not match"));
    }
    let diff: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
    let d = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
    if d == 0.0 {
        return Ok(base);
    }
    let theta: Vec<f64> = diff.iter().map(|v| v / d).collect();
    let c = n.conformal_constant();
    let nf = n.as_f64();
    let r2 = build_r_bar_tilde(jet, 2)?.1.compile().eval(&theta);
    let r3 = build_r_bar_tilde(jet, 3)?.1.compile().eval(&theta);
    let mut out = base;
    if r2 != 0.0 {
        out -= c * r2 * f2.eval(mu * d)? * mu.powf((nf - 10.0) / 2.0);
    }
    if r3 != 0.0 {
        out -= c * r3 * f3.eval(mu * d)? * mu.powf((nf - 12.0) / 2.0);
    }
    Ok(out)
}
