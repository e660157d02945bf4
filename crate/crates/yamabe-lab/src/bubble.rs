//! The standard bubble, Kelvin inversion and the interpolated potential.

use serde::{Deserialize, Serialize};

use crate::error::{precondition, LabError, Result};
use crate::quadrature;
use crate::radial::RadialFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(precondition(format!("dimension must be at least 3, got {n}")));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// Conformal Laplacian constant `(n-2) / (4(n-1))`.
    pub fn conformal_constant(self) -> f64 {
        let n = self.as_f64();
        (n - 2.0) / (4.0 * (n - 1.0))
    }

    /// Exponent `4 / (n-2)` of the linearised nonlinearity.
    pub fn linear_power(self) -> f64 {
        4.0 / (self.as_f64() - 2.0)
    }

    /// Critical exponent `(n+2) / (n-2)`.
    pub fn critical_power(self) -> f64 {
        (self.as_f64() + 2.0) / (self.as_f64() - 2.0)
    }
}

impl TryFrom<usize> for Dimension {
    type Error = LabError;
    fn try_from(n: usize) -> Result<Self> {
        Self::new(n)
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.0
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// `U(r) = (1 + r^2)^{-(n-2)/2}`.
pub fn bubble(n: Dimension, r: f64) -> f64 {
    (1.0 + r * r).powf(-0.5 * (n.as_f64() - 2.0))
}

/// `(U, U', U'')` at `r`.
pub fn bubble_derivatives(n: Dimension, r: f64) -> (f64, f64, f64) {
    let m = n.as_f64() - 2.0;
    let q = 1.0 + r * r;
    let u = q.powf(-0.5 * m);
    let du = -m * r * u / q;
    let ddu = -m * u / q + m * (m + 2.0) * r * r * u / (q * q);
    (u, du, ddu)
}

/// `n(n+2) U^{4/(n-2)} = n(n+2) / (1 + r^2)^2`.
pub fn bubble_potential(n: Dimension, r: f64) -> f64 {
    let nf = n.as_f64();
    nf * (nf + 2.0) / (1.0 + r * r).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KelvinParams {
    lambda: f64,
}

impl KelvinParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(precondition(format!("Kelvin radius must be positive, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(self) -> f64 {
        self.lambda
    }

    /// Image radius `lambda^2 / r`.
    pub fn image(self, r: f64) -> f64 {
        self.lambda * self.lambda / r
    }
}

/// Something radial that can be sampled pointwise.
pub trait RadialEval {
    fn eval_at(&self, r: f64) -> Result<f64>;
}

impl RadialEval for RadialFunction {
    fn eval_at(&self, r: f64) -> Result<f64> {
        self.eval(r)
    }
}

/// A closed-form radial function.
pub struct ClosedForm<F>(pub F);

impl<F: Fn(f64) -> f64> RadialEval for ClosedForm<F> {
    fn eval_at(&self, r: f64) -> Result<f64> {
        Ok((self.0)(r))
    }
}

/// The bubble as a [`RadialEval`].
#[derive(Debug, Clone, Copy)]
pub struct Bubble(pub Dimension);

impl RadialEval for Bubble {
    fn eval_at(&self, r: f64) -> Result<f64> {
        Ok(bubble(self.0, r))
    }
}

/// `(lambda / r)^{n-2} f(lambda^2 / r)`.
pub fn kelvin_transform(
    n: Dimension,
    f: &impl RadialEval,
    kp: KelvinParams,
    r: f64,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(precondition(format!("Kelvin transform needs r > 0, got {r}")));
    }
    let v = f.eval_at(kp.image(r))?;
    Ok((kp.lambda() / r).powf(n.as_f64() - 2.0) * v)
}

/// Closed form of the Kelvin transform of the bubble,
/// `(lambda^2 / (r^2 + lambda^4))^{(n-2)/2}`.
pub fn kelvin_bubble(n: Dimension, kp: KelvinParams, r: f64) -> f64 {
    let l2 = kp.lambda() * kp.lambda();
    (l2 / (r * r + l2 * l2)).powf(0.5 * (n.as_f64() - 2.0))
}

pub const V_LAMBDA_REL_TOL: f64 = 1e-12;
pub const V_LAMBDA_MAX_NODES: usize = 1 << 16;

/// `n(n+2) \int_0^1 (t U + (1-t) U^lambda)^{4/(n-2)} dt`.
pub fn v_lambda(n: Dimension, kp: KelvinParams, r: f64) -> Result<f64> {
    v_lambda_with(n, kp, r, false)
}

/// Same integral with `t` and `1 - t` exchanged in the integrand.
pub fn v_lambda_swapped(n: Dimension, kp: KelvinParams, r: f64) -> Result<f64> {
    v_lambda_with(n, kp, r, true)
}

fn v_lambda_with(n: Dimension, kp: KelvinParams, r: f64, swapped: bool) -> Result<f64> {
    if !(r > 0.0) {
        return Err(precondition(format!("V_lambda needs r > 0, got {r}")));
    }
    let u = bubble(n, r);
    let uk = kelvin_bubble(n, kp, r);
    let nf = n.as_f64();
    let pw = n.linear_power();
    if (u - uk).abs() <= 1e-15 * u {
        return Ok(nf * (nf + 2.0) * u.powf(pw));
    }
    let integrand = |t: f64| {
        let mix = if swapped { (1.0 - t) * u + t * uk } else { t * u + (1.0 - t) * uk };
        mix.powf(pw)
    };
    let res = quadrature::adaptive(integrand, 0.0, 1.0, V_LAMBDA_REL_TOL, V_LAMBDA_MAX_NODES)?;
    Ok(nf * (nf + 2.0) * res.value)
}

/// `(mu / (1 + mu^2 d^2))^{(n-2)/2}` with `d` the Euclidean distance.
pub fn xi(n: Dimension, q: &[f64], mu: f64, p: &[f64]) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(precondition(format!("mu must be positive, got {mu}")));
    }
    if q.len() != p.len() {
        return Err(precondition("points have different lengths"));
    }
    let d2: f64 = q.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((mu / (1.0 + mu * mu * d2)).powf(0.5 * (n.as_f64() - 2.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(bubble(dim(10), 0.0), 1.0);
        assert_eq!(bubble(dim(10), 1.0), 0.0625);
    }

    #[test]
    fn outer_slope_of_bubble() {
        let n = dim(11);
        let h = 1e-4;
        let slope = (bubble(n, 1e3 * (1.0 + h)).ln() - bubble(n, 1e3 * (1.0 - h)).ln())
            / ((1.0 + h).ln() - (1.0 - h).ln());
        assert!((slope + 9.0).abs() < 1e-3);
    }

    #[test]
    fn dimension_rejects_small_n() {
        assert!(Dimension::new(2).is_err());
        assert!((dim(10).conformal_constant() - 8.0 / 36.0).abs() < 1e-16);
    }

    #[test]
    fn bubble_derivatives_match_differences() {
        let n = dim(10);
        for r in [0.1, 1.0, 3.0] {
            let (_, d1, d2) = bubble_derivatives(n, r);
            let h = 1e-4;
            let fd1 = (bubble(n, r + h) - bubble(n, r - h)) / (2.0 * h);
            let fd2 = (bubble(n, r + h) - 2.0 * bubble(n, r) + bubble(n, r - h)) / (h * h);
            assert!((d1 - fd1).abs() < 1e-7);
            assert!((d2 - fd2).abs() < 1e-5);
        }
    }

    #[test]
    fn kelvin_of_fundamental_solution_is_constant() {
        let n = dim(10);
        let f = ClosedForm(|r: f64| r.powf(2.0 - 10.0));
        let kp = KelvinParams::new(1.0).unwrap();
        for r in [0.5, 3.0, 17.0] {
            assert!((kelvin_transform(n, &f, kp, r).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_of_radius_lambda_is_fixed() {
        let n = dim(10);
        let kp = KelvinParams::new(2.0).unwrap();
        let v = kelvin_transform(n, &Bubble(n), kp, 2.0).unwrap();
        assert!((v - bubble(n, 2.0)).abs() < 1e-15);
        assert!((kelvin_bubble(n, kp, 2.0) - bubble(n, 2.0)).abs() < 1e-15);
    }

    #[test]
    fn v_lambda_on_the_fixed_sphere() {
        let n = dim(10);
        let kp = KelvinParams::new(1.3).unwrap();
        let v = v_lambda(n, kp, 1.3).unwrap();
        assert!((v - bubble_potential(n, 1.3)).abs() < 1e-12 * v);
    }

    #[test]
    fn xi_at_center_and_example() {
        let n = dim(10);
        assert!((xi(n, &[0.0; 3], 4.0, &[0.0; 3]).unwrap() - 256.0).abs() < 1e-12);
        let v = xi(n, &[0.0, 0.0], 100.0, &[0.1, 0.0]).unwrap();
        assert!((v - (100.0f64 / 101.0).powi(4)).abs() < 1e-14);
        assert!((v - 0.961).abs() < 1e-3);
    }
}
