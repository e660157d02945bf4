use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::jet::{norm2, CurvatureJet};
use super::tensor::idx6;
use super::validate::{hypothesis_holds, HYPOTHESIS_TOLERANCE};
use crate::error::{precondition, LabError, Result};
use crate::sphere::{exact, rational, taylor_block_average, to_f64, BlockAverage, SphericalPolynomial};

/// Full index-contraction norms `(|W|^2, |grad Rm|^2, |grad^2 Rm|^2)` at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylNorms {
    pub weyl: f64,
    pub gradient: f64,
    pub hessian: f64,
}

pub fn weyl_norms(jet: &CurvatureJet) -> WeylNorms {
    WeylNorms { weyl: norm2(&jet.rm0), gradient: norm2(&jet.rm1), hessian: norm2(&jet.rm2) }
}

/// The three quadratic contractions of the second-derivative block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticTerms {
    /// `R_{abcd,ef} R_{abcd,ef}`.
    pub full: f64,
    /// `R_{ab,cd} (R_{ab,cd} + R_{cd,ab})`.
    pub ricci_cross: f64,
    /// `sum_{ij} (d_{ij} R)^2`.
    pub scalar_hessian: f64,
}

pub fn quadratic_terms(jet: &CurvatureJet) -> QuadraticTerms {
    let n = jet.n().get();
    let ric = jet.ricci2();
    let nn = n * n;
    let mut cross = 0.0;
    for ab in 0..nn {
        for cd in 0..nn {
            let x = ric[ab * nn + cd];
            cross += x * (x + ric[cd * nn + ab]);
        }
    }
    QuadraticTerms { full: norm2(&jet.rm2), ricci_cross: cross, scalar_hessian: norm2(&jet.scalar_hessian()) }
}

fn require_hypothesis(jet: &CurvatureJet) -> Result<()> {
    if !jet.hypothesis().is_vanishing() {
        return Err(precondition("jet is not flagged W(0) = 0 and grad W(0) = 0"));
    }
    if !hypothesis_holds(jet) {
        return Err(precondition(format!(
            "jet flagged W(0) = grad W(0) = 0 but rm0 or rm1 exceeds {HYPOTHESIS_TOLERANCE}"
        )));
    }
    Ok(())
}

fn sextic_denominator(n: usize) -> f64 {
    let nf = n as f64;
    nf * (nf + 2.0) * (nf + 4.0)
}

/// Sphere average of the sextic Taylor block when `W(0) = grad W(0) = 0`:
/// `-F/(40N) - X/(8N) + Y/(8N)` with `N = n(n+2)(n+4)` and `F, X, Y` the
/// [`QuadraticTerms`].
pub fn rbar6_formula(jet: &CurvatureJet) -> Result<f64> {
    require_hypothesis(jet)?;
    let q = quadratic_terms(jet);
    let d = sextic_denominator(jet.n().get());
    Ok(-q.full / (40.0 * d) - q.ricci_cross / (8.0 * d) + q.scalar_hessian / (8.0 * d))
}

/// `Delta^3 R(0)` implied by the quadratic terms through the degree-six identity.
pub fn laplacian_cubed_from_identity(q: &QuadraticTerms) -> f64 {
    -(1.2 * q.full + 6.0 * q.ricci_cross - 6.0 * q.scalar_hessian)
}

/// `Q + s |x|^6` with `s` the value of [`rbar6_formula`], so that the block
/// satisfies the degree-six identity. `Q` must be a mean-free sextic.
pub fn realize_sextic_block(jet: &CurvatureJet, remainder: &SphericalPolynomial) -> Result<SphericalPolynomial> {
    let n = jet.n().get();
    if remainder.n() != n || remainder.degree() != 6 {
        return Err(precondition("remainder must be a sextic in the jet's dimension"));
    }
    if !crate::sphere::sphere_mean(remainder).is_zero() {
        return Err(precondition("remainder must have zero sphere mean"));
    }
    let s = rbar6_formula(jet)?;
    remainder.add(&SphericalPolynomial::radial_power(n, 3, exact(s)))
}

/// `Delta^3 |x|^6` computed exactly, and the closed form `48 n (n+2)(n+4)`.
pub fn sextic_radial_laplacian(n: usize) -> (BigRational, BigRational) {
    let mut p = SphericalPolynomial::radial_power(n, 3, rational(1, 1));
    for _ in 0..3 {
        p = p.laplacian();
    }
    let nn = n as i64;
    (p.constant_value(), BigRational::from_integer(BigInt::from(48 * nn * (nn + 2) * (nn + 4))))
}

#[derive(Debug, Clone, Serialize)]
pub struct SexticIdentityCheck {
    /// `Delta^3 R(0)` from the supplied sextic block by iterated Laplacian.
    pub laplacian_cubed: f64,
    pub terms: QuadraticTerms,
    /// `Delta^3 R + (6/5) F + 6 X - 6 Y`.
    pub residual: f64,
    /// Residual over `(6/5) F + 6 |X| + 6 Y`.
    pub relative_residual: f64,
    pub rbar6_formula: f64,
    pub block_average: BlockAverage,
    /// `|rbar6_formula - block average|` over `max(1, |rbar6_formula|)`.
    pub average_gap: f64,
    pub radial_identity_exact: bool,
}

/// Degree-six identity at the origin, evaluated from two sides: the sextic
/// Taylor block and the quadratic contractions of `rm2`.
pub fn check_sextic_identity(jet: &CurvatureJet) -> Result<SexticIdentityCheck> {
    require_hypothesis(jet)?;
    let block = jet
        .block(6)
        .ok_or_else(|| LabError::Dependency("the degree-six identity needs a sextic Taylor block".into()))?;
    let mut lap = block.clone();
    for _ in 0..3 {
        lap = lap.laplacian();
    }
    let laplacian_cubed = to_f64(&lap.constant_value());
    let terms = quadratic_terms(jet);
    let residual = laplacian_cubed - laplacian_cubed_from_identity(&terms);
    let scale = 1.2 * terms.full + 6.0 * terms.ricci_cross.abs() + 6.0 * terms.scalar_hessian;
    let rb = rbar6_formula(jet)?;
    let avg = taylor_block_average(block, 3)?;
    let (num, den) = sextic_radial_laplacian(jet.n().get());
    Ok(SexticIdentityCheck {
        laplacian_cubed,
        terms,
        residual,
        relative_residual: if scale > 0.0 { residual.abs() / scale } else { residual.abs() },
        rbar6_formula: rb,
        average_gap: (rb - avg.moment_path).abs() / rb.abs().max(1.0),
        block_average: avg,
        radial_identity_exact: num == den,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityMargin {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`.
    pub margin: f64,
    /// Margin over `max(|lhs|, |rhs|)`, zero when both vanish.
    pub relative_margin: f64,
    pub holds: bool,
}

impl InequalityMargin {
    fn new(lhs: f64, rhs: f64) -> Self {
        let margin = lhs - rhs;
        let scale = lhs.abs().max(rhs.abs());
        let relative_margin = if scale > 0.0 { margin / scale } else { 0.0 };
        Self { lhs, rhs, margin, relative_margin, holds: relative_margin >= -1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquareRoute {
    pub alpha: f64,
    /// `|R_{ikmj,pq} - alpha R_{,ij} delta_kp delta_mq|^2` summed directly.
    pub direct_norm: f64,
    /// `|rm2|^2 - 2 alpha R_{ikmj,km} R_{,ij} + alpha^2 n^2 |d^2 R|^2`.
    pub expanded: f64,
    /// `|rm2|^2 + (alpha^2 n^2 - 7 alpha) |d^2 R|^2`, valid under the contraction identity.
    pub reduced: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HvReport {
    /// Max over `(i,j)` of `|sum_{km} R_{ikmj,km} - (7/2) R_{,ij}|`.
    pub contraction_residual: f64,
    /// The jet satisfies the contraction identity (to `1e-10` relative); otherwise
    /// it is outside the hypothesis class and the margins are not meaningful.
    pub in_class: bool,
    pub ricci_cross: InequalityMargin,
    pub full_norm: InequalityMargin,
    /// `full_norm` with `49/(4n^2)` replaced by the weaker `9/n^2`.
    pub full_norm_weak: InequalityMargin,
    pub square_route: SquareRoute,
}

/// Both curvature inequalities and the completing-the-square route.
pub fn check_hv_inequalities(jet: &CurvatureJet) -> Result<HvReport> {
    require_hypothesis(jet)?;
    let n = jet.n().get();
    let nf = n as f64;
    let q = quadratic_terms(jet);
    let hess = jet.scalar_hessian();
    let mut contracted = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                for m in 0..n {
                    s += jet.rm2[idx6(n, i, k, m, j, k, m)];
                }
            }
            contracted[i * n + j] = s;
        }
    }
    let contraction_residual =
        (0..n * n).map(|k| (contracted[k] - 3.5 * hess[k]).abs()).fold(0.0, f64::max);
    let scale = contracted.iter().chain(&hess).fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let alpha = 7.0 / (2.0 * nf * nf);
    let mut direct = 0.0;
    for i in 0..n {
        for k in 0..n {
            for m in 0..n {
                for j in 0..n {
                    for p in 0..n {
                        for qq in 0..n {
                            let mut v = jet.rm2[idx6(n, i, k, m, j, p, qq)];
                            if k == p && m == qq {
                                v -= alpha * hess[i * n + j];
                            }
                            direct += v * v;
                        }
                    }
                }
            }
        }
    }
    let cross: f64 = (0..n * n).map(|k| contracted[k] * hess[k]).sum();
    let expanded = q.full - 2.0 * alpha * cross + alpha * alpha * nf * nf * q.scalar_hessian;
    let reduced = q.full + (alpha * alpha * nf * nf - 7.0 * alpha) * q.scalar_hessian;
    Ok(HvReport {
        contraction_residual,
        in_class: contraction_residual <= 1e-10 * scale,
        ricci_cross: InequalityMargin::new(q.ricci_cross, 6.0 / (nf - 2.0) * q.scalar_hessian),
        full_norm: InequalityMargin::new(q.full, 49.0 / (4.0 * nf * nf) * q.scalar_hessian),
        full_norm_weak: InequalityMargin::new(q.full, 9.0 / (nf * nf) * q.scalar_hessian),
        square_route: SquareRoute { alpha, direct_norm: direct, expanded, reduced },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GateReport {
    pub n: usize,
    pub eps: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    /// Exact values as `num/den` strings.
    pub lhs_exact: String,
    pub rhs_exact: String,
}

/// Exact comparison of
/// `(1/(8(n+4)(n+2)n)) ((n-8)/(n-2) - 49/(20 n^2) + eps)` against
/// `(c(n)/(2n(n+2))) (1/(6(n-4)))`, `c(n) = (n-2)/(4(n-1))`.
pub fn dimension_gate(n: usize, eps: &BigRational) -> Result<GateReport> {
    if n < 10 {
        return Err(precondition(format!("dimension gate needs n ≥ 10, got n = {n}")));
    }
    if eps.is_negative() {
        return Err(precondition("ε must be nonnegative"));
    }
    let ni = n as i64;
    let r = |a: i64, b: i64| rational(a, b);
    let lhs = r(1, 8 * (ni + 4) * (ni + 2) * ni) * (r(ni - 8, ni - 2) - r(49, 20 * ni * ni) + eps);
    let cn = r(ni - 2, 4 * (ni - 1));
    let rhs = cn * r(1, 2 * ni * (ni + 2)) * r(1, 6 * (ni - 4));
    let margin = &rhs - &lhs;
    Ok(GateReport {
        n,
        eps: to_f64(eps),
        lhs: to_f64(&lhs),
        rhs: to_f64(&rhs),
        margin: to_f64(&margin),
        holds: lhs <= rhs,
        lhs_exact: lhs.to_string(),
        rhs_exact: rhs.to_string(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Rbar2Report {
    /// `-|W|^2/(12n)`.
    pub formula: f64,
    /// `Delta R(0)/(2n)`.
    pub laplacian_form: f64,
    pub block_average: BlockAverage,
}

pub const RBAR2_TOLERANCE: f64 = 1e-10;

/// Sphere average of the quadratic block, checked against `-|W|^2/(12n)`.
pub fn rbar2_weyl(jet: &CurvatureJet) -> Result<Rbar2Report> {
    let n = jet.n().get() as f64;
    let w2 = norm2(&jet.rm0);
    let formula = -w2 / (12.0 * n);
    let avg = taylor_block_average(&jet.quadratic_block(), 1)?;
    if (avg.moment_path - formula).abs() > RBAR2_TOLERANCE * w2.max(1.0) {
        return Err(LabError::Consistency {
            what: "quadratic-block average vs -|W|^2/(12n); CNC trace constraint broken".into(),
            lhs: avg.moment_path,
            rhs: formula,
        });
    }
    Ok(Rbar2Report { formula, laplacian_form: jet.scalar_laplacian() / (2.0 * n), block_average: avg })
}

/// `(R-bar^(l), R-tilde^(l))`: the sphere average of the degree-`l` Taylor
/// block and the block minus that average times `|x|^l` (odd `l` has zero average).
pub fn build_r_bar_tilde(jet: &CurvatureJet, l: usize) -> Result<(BigRational, SphericalPolynomial)> {
    if l < 2 {
        return Err(precondition("Taylor blocks of degree < 2 vanish in conformal normal coordinates"));
    }
    let block = jet.taylor_block(l);
    let mean = crate::sphere::sphere_mean(&block);
    let tilde = if l % 2 == 0 {
        block.sub(&SphericalPolynomial::radial_power(block.n(), l / 2, mean.clone()))?
    } else {
        block
    };
    Ok((mean, tilde))
}
