use std::collections::BTreeMap;

use super::poly::{to_f64, Exponents, SphericalPolynomial};

/// Polynomial with floating-point coefficients and terms of any degree.
///
/// Used where exact products would be too slow: operator coefficients and
/// integrands built from the jet's `f64` entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FloatPolynomial {
    n: usize,
    terms: BTreeMap<Exponents, f64>,
}

/// Sphere average of `theta^alpha` in floating point.
pub fn monomial_moment_f64(n: usize, alpha: &[u8]) -> f64 {
    let mut total = 0u32;
    let mut num = 1.0;
    for &a in alpha {
        if a % 2 == 1 {
            return 0.0;
        }
        total += a as u32;
        let mut k = 1;
        while k < a {
            num *= k as f64;
            k += 2;
        }
    }
    let den: f64 = (0..total / 2).map(|i| n as f64 + 2.0 * i as f64).product();
    num / den
}

impl FloatPolynomial {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(vec![0; n], c);
        p
    }

    /// The coordinate function `x_i`.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut a = vec![0; n];
        a[i] = 1;
        let mut p = Self::zero(n);
        p.add_term(a, 1.0);
        p
    }

    pub fn from_exact(p: &SphericalPolynomial) -> Self {
        let mut out = Self::zero(p.n());
        for (a, c) in p.terms() {
            out.add_term(a.clone(), to_f64(c));
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &f64)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, alpha: Exponents, c: f64) {
        if c != 0.0 {
            *self.terms.entry(alpha).or_insert(0.0) += c;
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Self, c: f64) {
        if c == 0.0 {
            return;
        }
        for (a, v) in &other.terms {
            self.add_term(a.clone(), c * v);
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = Self::zero(self.n);
        out.add_scaled(self, c);
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                let e: Exponents = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, c * d);
            }
        }
        out
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (a, c) in &self.terms {
            if a[i] > 0 {
                let mut e = a.clone();
                e[i] -= 1;
                out.add_term(e, c * a[i] as f64);
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, c)| c * a.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product::<f64>())
            .sum()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Sphere averages of the homogeneous components, keyed by degree, so that
    /// the average over `|y| = r` is `sum_d r^d means[d]`.
    pub fn sphere_means(&self) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for (a, c) in &self.terms {
            let m = monomial_moment_f64(self.n, a);
            if m != 0.0 {
                let d: usize = a.iter().map(|&e| e as usize).sum();
                *out.entry(d).or_insert(0.0) += c * m;
            }
        }
        out
    }

    /// Sphere average of `self * other` without forming the product.
    pub fn sphere_mean_of_product(&self, other: &Self) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        let mut e = vec![0u8; self.n];
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                let mut odd = false;
                for i in 0..self.n {
                    e[i] = a[i] + b[i];
                    odd |= e[i] % 2 == 1;
                }
                if odd {
                    continue;
                }
                let deg: usize = e.iter().map(|&v| v as usize).sum();
                *out.entry(deg).or_insert(0.0) += c * d * monomial_moment_f64(self.n, &e);
            }
        }
        out
    }
}

/// `sum_d r^d means[d]`.
pub fn radial_mean(means: &BTreeMap<usize, f64>, r: f64) -> f64 {
    means.iter().map(|(&d, &m)| m * r.powi(d as i32)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{sphere_mean, sphere_monomial_moment};

    #[test]
    fn float_moments_match_exact_ones() {
        for alpha in [vec![2u8, 2, 0, 0, 0], vec![4, 0, 0, 0, 0], vec![2, 4, 2, 0, 0], vec![1, 1, 0, 0, 0]] {
            let exact = to_f64(&sphere_monomial_moment(5, &alpha));
            assert!((monomial_moment_f64(5, &alpha) - exact).abs() < 1e-16);
        }
    }

    #[test]
    fn product_mean_matches_formed_product() {
        let n = 4;
        let mut p = FloatPolynomial::zero(n);
        p.add_term(vec![2, 0, 0, 0], 1.5);
        p.add_term(vec![1, 1, 0, 0], -0.5);
        p.add_term(vec![0, 0, 0, 2], 2.0);
        let q = p.mul(&FloatPolynomial::coordinate(n, 0)).mul(&FloatPolynomial::coordinate(n, 0));
        let direct = p.mul(&q).sphere_means();
        let fused = p.sphere_mean_of_product(&q);
        assert_eq!(direct.keys().collect::<Vec<_>>(), fused.keys().collect::<Vec<_>>());
        for (k, v) in direct {
            assert!((v - fused[&k]).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_and_float_means_agree() {
        let p = SphericalPolynomial::radial_power(6, 2, crate::sphere::rational(3, 7));
        let f = FloatPolynomial::from_exact(&p);
        assert!((f.sphere_means()[&4] - to_f64(&sphere_mean(&p))).abs() < 1e-16);
    }
}
