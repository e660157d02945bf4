use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::poly::{exact, to_f64, SphericalPolynomial};
use crate::error::{precondition, LabError, Result};

fn int(k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

fn factorial(k: u64) -> BigRational {
    (1..=k).fold(BigRational::one(), |acc, i| acc * int(i as i64))
}

/// `(k-1)!!` for even `k`, i.e. `1·3·5···(k-1)`.
fn odd_double_factorial_below(k: u32) -> BigRational {
    (1..k as i64).step_by(2).fold(BigRational::one(), |acc, i| acc * int(i))
}

/// Surface area of the unit sphere in `R^n`, stored as `coef * pi^pi_power`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SphereArea {
    pub coef: BigRational,
    pub pi_power: u32,
}

impl SphereArea {
    pub fn new(n: usize) -> Self {
        let n = n as i64;
        if n % 2 == 0 {
            // 2 pi^{n/2} / (n/2 - 1)!
            Self { coef: int(2) / factorial((n / 2 - 1) as u64), pi_power: (n / 2) as u32 }
        } else {
            // 2^{(n+1)/2} pi^{(n-1)/2} / (n-2)!!
            let dfact = (1..=n - 2).rev().step_by(2).fold(BigRational::one(), |a, i| a * int(i));
            let two_pow = (0..(n + 1) / 2).fold(BigRational::one(), |a, _| a * int(2));
            Self { coef: two_pow / dfact, pi_power: ((n - 1) / 2) as u32 }
        }
    }

    pub fn value(&self) -> f64 {
        to_f64(&self.coef) * std::f64::consts::PI.powi(self.pi_power as i32)
    }
}

/// Normalised average `\int theta^alpha / |S^{n-1}|`, exactly.
///
/// ```
/// use yamabe_lab::sphere::sphere_monomial_moment;
/// use yamabe_lab::sphere::rational;
/// let mut alpha = vec![0u8; 10];
/// alpha[0] = 4;
/// assert_eq!(sphere_monomial_moment(10, &alpha), rational(1, 40));
/// ```
pub fn sphere_monomial_moment(n: usize, alpha: &[u8]) -> BigRational {
    if alpha.iter().any(|a| a % 2 == 1) {
        return BigRational::zero();
    }
    let total: u32 = alpha.iter().map(|&a| a as u32).sum();
    let num = alpha
        .iter()
        .fold(BigRational::one(), |acc, &a| acc * odd_double_factorial_below(a as u32));
    let den = (0..total / 2).fold(BigRational::one(), |acc, i| acc * int(n as i64 + 2 * i as i64));
    num / den
}

/// Unnormalised moment via the Gamma-product rule
/// `2 prod Gamma((a_i+1)/2) / Gamma((|a|+n)/2)`, evaluated in floating point.
pub fn sphere_monomial_integral_gamma(n: usize, alpha: &[u8]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let padded = alpha.iter().chain(std::iter::repeat(&0u8)).take(n);
    let mut log = (2.0f64).ln();
    let mut total = 0.0;
    for &a in padded {
        log += ln_gamma_half(a as u32 + 1);
        total += a as f64;
    }
    log -= ln_gamma_half(total as u32 + n as u32);
    log.exp()
}

/// `ln Gamma(k / 2)` for positive integer `k`.
fn ln_gamma_half(k: u32) -> f64 {
    let mut acc = 0.0;
    if k % 2 == 0 {
        for i in 1..k / 2 {
            acc += (i as f64).ln();
        }
    } else {
        acc += std::f64::consts::PI.sqrt().ln();
        let mut x = 0.5;
        while x < k as f64 / 2.0 - 0.25 {
            acc += x.ln();
            x += 1.0;
        }
    }
    acc
}

/// Exact sphere average of a homogeneous polynomial.
pub fn sphere_mean(p: &SphericalPolynomial) -> BigRational {
    p.terms()
        .map(|(a, c)| c * sphere_monomial_moment(p.n(), a))
        .fold(BigRational::zero(), |acc, x| acc + x)
}

/// Normalised `L^2(S^{n-1})` inner product.
pub fn sphere_inner(p: &SphericalPolynomial, q: &SphericalPolynomial) -> Result<BigRational> {
    Ok(sphere_mean(&p.mul(q)?))
}

/// `2^k k! prod_{i<k} (n + 2i)`, the denominator of the average ladder.
pub fn ladder_denominator(n: usize, k: usize) -> BigRational {
    let mut d = factorial(k as u64);
    for i in 0..k {
        d *= int(2) * int(n as i64 + 2 * i as i64);
    }
    d
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockAverage {
    pub k: usize,
    pub moment_path: f64,
    pub ladder_path: f64,
    pub laplacian_power: f64,
}

pub const LADDER_TOLERANCE: f64 = 1e-10;

/// Average of a degree-`2k` Taylor block over the sphere, by direct moment
/// contraction and by the `Delta^k` ladder; the two must agree.
pub fn taylor_block_average(block: &SphericalPolynomial, k: usize) -> Result<BlockAverage> {
    if k == 0 || block.degree() != 2 * k {
        return Err(precondition(format!(
            "expected a degree-{} block, got degree {}",
            2 * k,
            block.degree()
        )));
    }
    let moment = sphere_mean(block);
    let mut lap = block.clone();
    for _ in 0..k {
        lap = lap.laplacian();
    }
    let delta_k = lap.constant_value();
    let ladder = &delta_k / ladder_denominator(block.n(), k);
    let (m, l) = (to_f64(&moment), to_f64(&ladder));
    let scale = m.abs().max(l.abs()).max(1.0);
    if (m - l).abs() > LADDER_TOLERANCE * scale {
        return Err(LabError::Consistency {
            what: format!("degree-{} sphere average: moment path vs ladder", 2 * k),
            lhs: m,
            rhs: l,
        });
    }
    Ok(BlockAverage { k, moment_path: m, ladder_path: l, laplacian_power: to_f64(&delta_k) })
}

/// `C(n,k) / |S^{n-1}| = (2k+1)! / ((2k+n) 2^k k! prod_{i<k}(n+2i))`.
pub fn odd_moment_constant(n: usize, k: usize) -> Result<BigRational> {
    if k == 0 {
        return Err(precondition("odd moment constant needs k >= 1"));
    }
    Ok(factorial(2 * k as u64 + 1) / (int(2 * k as i64 + n as i64) * ladder_denominator(n, k)))
}

#[derive(Debug, Clone, Serialize)]
pub struct OddMomentCheck {
    pub j: usize,
    /// Both sides divided by `|S^{n-1}|`.
    pub contraction: f64,
    pub gradient_side: f64,
    pub exact_match: bool,
}

/// Check the contraction of a degree-`(2k+1)` Taylor block against `x^j`
/// equals `C(n,k) d_j(Delta^k R)(0)` for every `j`.
pub fn verify_odd_moment(block: &SphericalPolynomial, k: usize) -> Result<Vec<OddMomentCheck>> {
    if block.degree() != 2 * k + 1 {
        return Err(precondition(format!(
            "expected a degree-{} block, got degree {}",
            2 * k + 1,
            block.degree()
        )));
    }
    let n = block.n();
    let c = odd_moment_constant(n, k)?;
    let mut lap = block.clone();
    for _ in 0..k {
        lap = lap.laplacian();
    }
    let full_sum = factorial(2 * k as u64 + 1);
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0u8; n];
        e[j] = 1;
        let lhs = &full_sum * sphere_mean(&block.mul(&SphericalPolynomial::monomial(&e))?);
        let rhs = &c * lap.coefficient(&e);
        out.push(OddMomentCheck {
            j,
            contraction: to_f64(&lhs),
            gradient_side: to_f64(&rhs),
            exact_match: lhs == rhs,
        });
    }
    Ok(out)
}

/// Quadratic form `sum_{i<j} H_ij x_i x_j + 1/2 sum_i H_ii x_i^2`.
pub fn hessian_block(hessian: &[Vec<f64>]) -> Result<SphericalPolynomial> {
    let n = hessian.len();
    let mut p = SphericalPolynomial::zero(n, 2);
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    for i in 0..n {
        if hessian[i].len() != n {
            return Err(precondition("Hessian must be square"));
        }
        let mut e = vec![0u8; n];
        e[i] = 2;
        p.add_term(e, exact(hessian[i][i]) * &half)?;
        for j in i + 1..n {
            let mut e = vec![0u8; n];
            e[i] = 1;
            e[j] = 1;
            p.add_term(e, exact(hessian[i][j]))?;
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, Serialize)]
pub struct SquareExpansion {
    /// Direct moment contraction of the squared block.
    pub direct: f64,
    /// `(1/(n(n+2))) sum_{i<j} H_ij^2`.
    pub off_diagonal: f64,
    /// `(1/(4n(n+2))) sum_{i != j} H_ii H_jj`.
    pub mixed_diagonal: f64,
    /// `(3/(4n(n+2))) sum_i H_ii^2`.
    pub pure_diagonal: f64,
    /// `(1/(2n(n+2)))[sum_{i<j} 2 H_ij^2 + sum_i H_ii^2]`.
    pub norm_part: f64,
    /// `(1/(4n(n+2))) (sum_i H_ii)^2`.
    pub trace_part: f64,
}

pub const SQUARE_TOLERANCE: f64 = 1e-12;

/// Sphere average of the squared second-order block, split into the
/// norm and trace pieces, and cross-checked against direct contraction.
pub fn expand_square(hessian: &[Vec<f64>]) -> Result<SquareExpansion> {
    let n = hessian.len();
    let block = hessian_block(hessian)?;
    let direct = sphere_mean(&block.mul(&block)?);
    let nn = int(n as i64) * int(n as i64 + 2);
    let h = |i: usize, j: usize| exact(hessian[i][j]);
    let mut off = BigRational::zero();
    let mut mixed = BigRational::zero();
    let mut diag = BigRational::zero();
    let mut trace = BigRational::zero();
    for i in 0..n {
        diag += h(i, i) * h(i, i);
        trace += h(i, i);
        for j in 0..n {
            if j > i {
                off += h(i, j) * h(i, j);
            }
            if j != i {
                mixed += h(i, i) * h(j, j);
            }
        }
    }
    let off_diagonal = &off / &nn;
    let mixed_diagonal = &mixed / (int(4) * &nn);
    let pure_diagonal = int(3) * &diag / (int(4) * &nn);
    let norm_part = (int(2) * &off + &diag) / (int(2) * &nn);
    let trace_part = &trace * &trace / (int(4) * &nn);
    let term_form = &off_diagonal + &mixed_diagonal + &pure_diagonal;
    let split_form = &norm_part + &trace_part;
    for (what, rhs) in [("term-by-term form", &term_form), ("norm plus trace form", &split_form)] {
        let (l, r) = (to_f64(&direct), to_f64(rhs));
        if (l - r).abs() > SQUARE_TOLERANCE * l.abs().max(1.0) {
            return Err(LabError::Consistency {
                what: format!("average of squared Hessian block vs {what}"),
                lhs: l,
                rhs: r,
            });
        }
    }
    Ok(SquareExpansion {
        direct: to_f64(&direct),
        off_diagonal: to_f64(&off_diagonal),
        mixed_diagonal: to_f64(&mixed_diagonal),
        pure_diagonal: to_f64(&pure_diagonal),
        norm_part: to_f64(&norm_part),
        trace_part: to_f64(&trace_part),
    })
}
