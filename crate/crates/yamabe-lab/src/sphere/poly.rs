use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{precondition, LabError, Result};

pub type Exponents = Vec<u8>;

/// Homogeneous polynomial in `n` variables with exact rational coefficients.
///
/// On the unit sphere it is read as a function of the direction `theta`.
#[derive(Clone, PartialEq, Eq)]
pub struct SphericalPolynomial {
    n: usize,
    degree: usize,
    terms: BTreeMap<Exponents, BigRational>,
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact rational value of a finite float.
pub fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

impl SphericalPolynomial {
    pub fn zero(n: usize, degree: usize) -> Self {
        Self { n, degree, terms: BTreeMap::new() }
    }

    /// The monomial `x^alpha`.
    pub fn monomial(alpha: &[u8]) -> Self {
        let mut p = Self::zero(alpha.len(), alpha.iter().map(|&a| a as usize).sum());
        p.terms.insert(alpha.to_vec(), BigRational::one());
        p
    }

    /// `c * |x|^{2k}` expanded in monomials.
    pub fn radial_power(n: usize, k: usize, c: BigRational) -> Self {
        let mut p = Self::zero(n, 0);
        p.terms.insert(vec![0; n], c);
        for _ in 0..k {
            p = p.mul_r2();
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, alpha: &[u8]) -> BigRational {
        self.terms.get(alpha).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add_term(&mut self, alpha: Exponents, c: BigRational) -> Result<()> {
        if alpha.len() != self.n {
            return Err(precondition(format!(
                "multi-index has {} entries, expected {}",
                alpha.len(),
                self.n
            )));
        }
        let deg: usize = alpha.iter().map(|&a| a as usize).sum();
        if deg != self.degree {
            return Err(precondition(format!(
                "multi-index of degree {deg} in a degree-{} polynomial",
                self.degree
            )));
        }
        self.accumulate(alpha, c);
        Ok(())
    }

    fn accumulate(&mut self, alpha: Exponents, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(alpha) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || (self.degree != other.degree && !self.is_zero() && !other.is_zero())
        {
            return Err(precondition(format!(
                "shape mismatch: (n={}, deg={}) vs (n={}, deg={})",
                self.n, self.degree, other.n, other.degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = if self.is_zero() { other.clone() } else { self.clone() };
        if !self.is_zero() {
            for (a, c) in &other.terms {
                out.accumulate(a.clone(), c.clone());
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        let mut out = Self::zero(self.n, self.degree);
        if s.is_zero() {
            return out;
        }
        for (a, c) in &self.terms {
            out.terms.insert(a.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(precondition("cannot multiply polynomials in different dimensions"));
        }
        let mut out = Self::zero(self.n, self.degree + other.degree);
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                let e: Exponents = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.accumulate(e, c * d);
            }
        }
        Ok(out)
    }

    /// Multiply by `|x|^2`.
    pub fn mul_r2(&self) -> Self {
        let mut out = Self::zero(self.n, self.degree + 2);
        for (a, c) in &self.terms {
            for i in 0..self.n {
                let mut e = a.clone();
                e[i] += 2;
                out.accumulate(e, c.clone());
            }
        }
        out
    }

    /// Exact division by `|x|^2`; fails if there is a remainder.
    pub fn div_r2(&self) -> Result<Self> {
        if self.degree < 2 {
            return if self.is_zero() {
                Ok(Self::zero(self.n, 0))
            } else {
                Err(precondition("polynomial is not divisible by |x|^2"))
            };
        }
        let mut rem = self.clone();
        let mut quot = Self::zero(self.n, self.degree - 2);
        loop {
            let pick = rem
                .terms
                .iter()
                .filter(|(a, _)| a[0] >= 2)
                .max_by_key(|(a, _)| a[0])
                .map(|(a, c)| (a.clone(), c.clone()));
            let Some((a, c)) = pick else { break };
            let mut q = a.clone();
            q[0] -= 2;
            for i in 0..self.n {
                let mut e = q.clone();
                e[i] += 2;
                rem.accumulate(e, -c.clone());
            }
            quot.accumulate(q, c);
        }
        if rem.is_zero() {
            Ok(quot)
        } else {
            Err(precondition("polynomial is not divisible by |x|^2"))
        }
    }

    /// Flat Laplacian.
    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.n, self.degree.saturating_sub(2));
        for (a, c) in &self.terms {
            for i in 0..self.n {
                if a[i] >= 2 {
                    let mut e = a.clone();
                    let k = a[i] as i64;
                    e[i] -= 2;
                    out.accumulate(e, c * BigRational::from_integer(BigInt::from(k * (k - 1))));
                }
            }
        }
        out
    }

    /// Partial derivative in variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n, self.degree.saturating_sub(1));
        for (a, c) in &self.terms {
            if a[i] >= 1 {
                let mut e = a.clone();
                let k = a[i] as i64;
                e[i] -= 1;
                out.accumulate(e, c * BigRational::from_integer(BigInt::from(k)));
            }
        }
        out
    }

    /// The constant left after the polynomial has been differentiated down to
    /// degree 0, or zero for a nonconstant polynomial.
    pub fn constant_value(&self) -> BigRational {
        if self.degree == 0 {
            self.coefficient(&vec![0; self.n])
        } else {
            BigRational::zero()
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.compile().eval(x)
    }

    pub fn compile(&self) -> CompiledPolynomial {
        CompiledPolynomial {
            n: self.n,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), to_f64(c))).collect(),
        }
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| to_f64(c).abs()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> PolynomialJson {
        PolynomialJson {
            n: self.n,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| TermJson {
                    alpha: a.clone(),
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PolynomialJson) -> Result<Self> {
        let mut p = Self::zero(j.n, j.degree);
        for t in &j.terms {
            let num: BigInt = t
                .num
                .parse()
                .map_err(|e| LabError::Parse(format!("numerator {:?}: {e}", t.num)))?;
            let den: BigInt = t
                .den
                .parse()
                .map_err(|e| LabError::Parse(format!("denominator {:?}: {e}", t.den)))?;
            if den.is_zero() {
                return Err(LabError::Parse("zero denominator".into()));
            }
            p.add_term(t.alpha.clone(), BigRational::new(num, den))?;
        }
        Ok(p)
    }
}

impl fmt::Debug for SphericalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SphericalPolynomial(n={}, deg={}, ", self.n, self.degree)?;
        let mut first = true;
        for (a, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &e) in a.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "·x{}", i + 1)?,
                    _ => write!(f, "·x{}^{e}", i + 1)?,
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub alpha: Vec<u8>,
    pub num: String,
    pub den: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub n: usize,
    pub degree: usize,
    pub terms: Vec<TermJson>,
}

/// Floating-point copy of a polynomial for fast pointwise evaluation.
#[derive(Debug, Clone)]
pub struct CompiledPolynomial {
    n: usize,
    terms: Vec<(Exponents, f64)>,
}

impl CompiledPolynomial {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, c)| c * a.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product::<f64>())
            .sum()
    }

    /// Value, gradient and Hessian at `x`.
    pub fn jet2(&self, x: &[f64]) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
        let n = self.n;
        let mut v = 0.0;
        let mut g = vec![0.0; n];
        let mut h = vec![vec![0.0; n]; n];
        let pw = |xi: f64, e: i32| if e < 0 { 0.0 } else { xi.powi(e) };
        for (a, c) in &self.terms {
            let mono: Vec<f64> = a.iter().zip(x).map(|(&e, &xi)| pw(xi, e as i32)).collect();
            let d1: Vec<f64> =
                a.iter().zip(x).map(|(&e, &xi)| e as f64 * pw(xi, e as i32 - 1)).collect();
            let d2: Vec<f64> = a
                .iter()
                .zip(x)
                .map(|(&e, &xi)| (e as f64) * (e as f64 - 1.0) * pw(xi, e as i32 - 2))
                .collect();
            let active: Vec<usize> = (0..n).filter(|&i| a[i] > 0).collect();
            let prod_except = |skip: &[usize]| -> f64 {
                active
                    .iter()
                    .filter(|i| !skip.contains(i))
                    .map(|&i| mono[i])
                    .product::<f64>()
            };
            v += c * prod_except(&[]);
            for &i in &active {
                g[i] += c * d1[i] * prod_except(&[i]);
                h[i][i] += c * d2[i] * prod_except(&[i]);
                for &j in &active {
                    if j != i {
                        h[i][j] += c * d1[i] * d1[j] * prod_except(&[i, j]);
                    }
                }
            }
        }
        (v, g, h)
    }
}

/// Sparse homogeneous polynomial with `terms` random monomials and integer
/// coefficients in `[-9, 9]`, drawn from a ChaCha8 stream.
pub fn random_polynomial(n: usize, degree: usize, terms: usize, seed: u64) -> SphericalPolynomial {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut p = SphericalPolynomial::zero(n, degree);
    for _ in 0..terms {
        let mut alpha = vec![0u8; n];
        for _ in 0..degree {
            alpha[rng.gen_range(0..n)] += 1;
        }
        let c: i64 = rng.gen_range(-9..=9);
        p.add_term(alpha, rational(c, 1)).expect("degree matches");
    }
    p
}
