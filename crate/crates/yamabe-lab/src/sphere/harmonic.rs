use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use super::poly::SphericalPolynomial;
use crate::error::{precondition, LabError, Result};

pub const DEFAULT_MAX_DEGREE: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicComponent {
    pub degree: usize,
    #[serde(serialize_with = "ser_poly")]
    pub polynomial: SphericalPolynomial,
    /// Eigenvalue `d(d+n-2)` of minus the sphere Laplacian.
    pub eigenvalue: usize,
}

fn ser_poly<S: serde::Serializer>(p: &SphericalPolynomial, s: S) -> std::result::Result<S::Ok, S::Error> {
    p.to_json().serialize(s)
}

impl HarmonicComponent {
    pub fn is_harmonic(&self) -> bool {
        self.polynomial.laplacian().is_zero()
    }
}

/// Harmonic projection `sum_j c_j |x|^{2j} Delta^j P` of a degree-`m`
/// homogeneous polynomial, with
/// `c_j = (-1)^j / prod_{i=1}^{j} 2i (n + 2m - 2 - 2i)`.
pub fn harmonic_projection(p: &SphericalPolynomial) -> SphericalPolynomial {
    let n = p.n() as i64;
    let m = p.degree() as i64;
    let mut out = p.clone();
    let mut lap = p.clone();
    let mut coef = BigRational::one();
    for j in 1..=m / 2 {
        lap = lap.laplacian();
        if lap.is_zero() {
            break;
        }
        coef = -coef / BigRational::from_integer(BigInt::from(2 * j * (n + 2 * m - 2 - 2 * j)));
        let mut term = lap.scale(&coef);
        for _ in 0..j {
            term = term.mul_r2();
        }
        out = out.add(&term).expect("same shape");
    }
    out
}

/// Split a homogeneous polynomial into harmonic pieces,
/// `P = sum_j |x|^{2j} h_{l-2j}`, highest degree first.
pub fn decompose_harmonic(p: &SphericalPolynomial) -> Result<Vec<HarmonicComponent>> {
    decompose_harmonic_capped(p, DEFAULT_MAX_DEGREE)
}

pub fn decompose_harmonic_capped(
    p: &SphericalPolynomial,
    max_degree: usize,
) -> Result<Vec<HarmonicComponent>> {
    if p.degree() > max_degree {
        return Err(LabError::Unsupported(format!(
            "harmonic decomposition of degree {} exceeds the cap {max_degree}",
            p.degree()
        )));
    }
    let n = p.n();
    let mut rest = p.clone();
    let mut out = Vec::new();
    loop {
        let d = rest.degree();
        let h = harmonic_projection(&rest);
        if !h.laplacian().is_zero() {
            return Err(LabError::Consistency {
                what: format!("projected degree-{d} piece is not harmonic"),
                lhs: h.laplacian().max_abs_coefficient(),
                rhs: 0.0,
            });
        }
        if !h.is_zero() {
            out.push(HarmonicComponent { degree: d, polynomial: h.clone(), eigenvalue: d * (d + n - 2) });
        }
        if d < 2 {
            break;
        }
        rest = rest.sub(&h)?.div_r2()?;
    }
    Ok(out)
}

/// Re-sum components into a degree-`l` homogeneous polynomial.
pub fn reconstruct(n: usize, degree: usize, parts: &[HarmonicComponent]) -> Result<SphericalPolynomial> {
    let mut out = SphericalPolynomial::zero(n, degree);
    for c in parts {
        if c.degree > degree || (degree - c.degree) % 2 == 1 {
            return Err(precondition(format!(
                "component of degree {} cannot sit in degree {degree}",
                c.degree
            )));
        }
        let mut t = c.polynomial.clone();
        for _ in 0..(degree - c.degree) / 2 {
            t = t.mul_r2();
        }
        out = out.add(&t)?;
    }
    Ok(out)
}
