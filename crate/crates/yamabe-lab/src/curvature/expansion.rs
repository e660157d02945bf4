use serde::Serialize;

use super::jet::CurvatureJet;
use super::tensor::{idx4, idx6};
use crate::error::{precondition, LabError, Result};
use crate::sphere::FloatPolynomial;

/// Above this radius the dropped `O(|x|^5)` terms are no longer small.
pub const EXPANSION_WARNING_RADIUS: f64 = 0.5;

/// Homogeneous pieces of the metric and operator coefficients along a unit
/// direction: a quantity `q(r theta) = sum_k r^k q_k(theta)`.
#[derive(Debug, Clone, Serialize)]
pub struct DirectionalExpansion {
    pub theta: Vec<f64>,
    pub metric: [Vec<f64>; 3],
    pub b: [Vec<f64>; 2],
    pub d: [Vec<f64>; 3],
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorCoeffs {
    pub b: Vec<f64>,
    /// Row-major `n x n`, symmetric.
    pub d: Vec<f64>,
    pub warning: Option<String>,
}

fn unit(x: &[f64]) -> (f64, Vec<f64>) {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return (0.0, vec![0.0; x.len()]);
    }
    (r, x.iter().map(|v| v / r).collect())
}

impl DirectionalExpansion {
    pub fn new(jet: &CurvatureJet, theta: &[f64]) -> Result<Self> {
        let n = jet.n().get();
        if theta.len() != n {
            return Err(precondition(format!("direction has {} components, expected {n}", theta.len())));
        }
        let (r, v) = unit(theta);
        if r == 0.0 {
            return Err(precondition("direction must be nonzero"));
        }
        let rm0 = &jet.rm0;
        let rm1 = &jet.rm1;
        let rm2 = &jet.rm2;
        // s_{im} = R_{ipqm} v^p v^q
        let mut s = vec![0.0; n * n];
        for i in 0..n {
            for p in 0..n {
                for q in 0..n {
                    let w = v[p] * v[q];
                    if w == 0.0 {
                        continue;
                    }
                    for m in 0..n {
                        s[i * n + m] += rm0[idx4(n, i, p, q, m)] * w;
                    }
                }
            }
        }
        let mut s1 = vec![0.0; n * n];
        let mut s2 = vec![0.0; n * n];
        let mut sst = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut a1 = 0.0;
                let mut a2 = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        let w = v[p] * v[q];
                        if w == 0.0 {
                            continue;
                        }
                        let base1 = idx4(n, i, p, q, j) * n;
                        for k in 0..n {
                            a1 += rm1[base1 + k] * w * v[k];
                        }
                        let base2 = idx6(n, i, p, q, j, 0, 0);
                        for k in 0..n {
                            for l in 0..n {
                                a2 += rm2[base2 + k * n + l] * w * v[k] * v[l];
                            }
                        }
                    }
                }
                s1[i * n + j] = a1;
                s2[i * n + j] = a2;
                sst[i * n + j] = (0..n).map(|m| s[i * n + m] * s[j * n + m]).sum();
            }
        }
        let g2: Vec<f64> = s.iter().map(|x| x / 3.0).collect();
        let g3: Vec<f64> = s1.iter().map(|x| x / 6.0).collect();
        let g4: Vec<f64> = (0..n * n).map(|k| s2[k] / 20.0 + 2.0 / 45.0 * sst[k]).collect();
        let d2: Vec<f64> = s.iter().map(|x| -x / 3.0).collect();
        let d3: Vec<f64> = s1.iter().map(|x| -x / 6.0).collect();
        let d4: Vec<f64> = (0..n * n).map(|k| -(s2[k] / 20.0 - sst[k] / 15.0)).collect();

        let ric1 = jet.ricci1();
        let ric2 = jet.ricci2();
        // vpd_{pd} = R_{pbcd} v^b v^c
        let mut vpd = vec![0.0; n * n];
        for p in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let w = v[b] * v[c];
                    if w == 0.0 {
                        continue;
                    }
                    for d in 0..n {
                        vpd[p * n + d] += rm0[idx4(n, p, b, c, d)] * w;
                    }
                }
            }
        }
        let mut b2 = vec![0.0; n];
        let mut b3 = vec![0.0; n];
        for i in 0..n {
            let mut q2 = 0.0;
            let mut q3 = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let w = v[a] * v[b];
                    if w == 0.0 {
                        continue;
                    }
                    q2 -= ric1[(i * n + a) * n + b] * w / 6.0;
                    let mut t = 0.0;
                    for p in 0..n {
                        t += rm1[idx4(n, i, a, b, p) * n + p];
                    }
                    q2 -= t * w / 6.0;
                    for c in 0..n {
                        let w3 = w * v[c];
                        if w3 == 0.0 {
                            continue;
                        }
                        let mut tail = 0.0;
                        for p in 0..n {
                            tail += rm2[idx6(n, i, a, b, p, p, c)];
                        }
                        q3 -= (ric2[((i * n + a) * n + b) * n + c] / 20.0 + tail / 10.0) * w3;
                    }
                }
            }
            // + 1/15 (R_{ipad} + R_{iapd}) v^a R_{pbcd} v^b v^c
            for a in 0..n {
                if v[a] == 0.0 {
                    continue;
                }
                for p in 0..n {
                    for d in 0..n {
                        let t = rm0[idx4(n, i, p, a, d)] + rm0[idx4(n, i, a, p, d)];
                        q3 += t * v[a] * vpd[p * n + d] / 15.0;
                    }
                }
            }
            b2[i] = q2;
            b3[i] = q3;
        }
        Ok(Self { theta: v, metric: [g2, g3, g4], b: [b2, b3], d: [d2, d3, d4] })
    }

    /// `(b, d)` at radius `r` along this direction.
    pub fn coeffs_at(&self, r: f64) -> (Vec<f64>, Vec<f64>) {
        let b = (0..self.b[0].len()).map(|i| r * r * self.b[0][i] + r.powi(3) * self.b[1][i]).collect();
        let d = (0..self.d[0].len())
            .map(|k| r * r * self.d[0][k] + r.powi(3) * self.d[1][k] + r.powi(4) * self.d[2][k])
            .collect();
        (b, d)
    }

    /// Metric truncated after degree `order`.
    pub fn metric_at(&self, r: f64, order: usize) -> Vec<f64> {
        let nn = self.metric[0].len();
        let n = self.theta.len();
        (0..nn)
            .map(|k| {
                let mut g = if k / n == k % n { 1.0 } else { 0.0 };
                for (deg, piece) in self.metric.iter().enumerate() {
                    if deg + 2 <= order {
                        g += r.powi(deg as i32 + 2) * piece[k];
                    }
                }
                g
            })
            .collect()
    }
}

fn radius_warning(r: f64) -> Option<String> {
    (r > EXPANSION_WARNING_RADIUS)
        .then(|| format!("|x| = {r} exceeds {EXPANSION_WARNING_RADIUS}; truncation error may dominate"))
}

/// Metric `g_pq(x)` truncated after degree `order` (at most 4), row-major.
pub fn cnc_metric_expansion(jet: &CurvatureJet, x: &[f64], order: usize) -> Result<(Vec<f64>, Option<String>)> {
    if order > 4 {
        return Err(LabError::Unsupported(format!("metric expansion of order {order} (at most 4)")));
    }
    let n = jet.n().get();
    let (r, _) = unit(x);
    if r == 0.0 {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        return Ok((id, None));
    }
    let e = DirectionalExpansion::new(jet, x)?;
    Ok((e.metric_at(r, order), radius_warning(r)))
}

/// `b_i(x)` and `d_ij(x)` in `Delta_g = Delta + b_i d_i + d_ij d_ij`.
pub fn cnc_operator_coeffs(jet: &CurvatureJet, x: &[f64]) -> Result<OperatorCoeffs> {
    let n = jet.n().get();
    let (r, _) = unit(x);
    if r == 0.0 {
        return Ok(OperatorCoeffs { b: vec![0.0; n], d: vec![0.0; n * n], warning: None });
    }
    let e = DirectionalExpansion::new(jet, x)?;
    let (b, d) = e.coeffs_at(r);
    Ok(OperatorCoeffs { b, d, warning: radius_warning(r) })
}

/// Coefficients in the blow-up variable: `b(y) = s b(s y)`, `d(y) = d(s y)`,
/// `s = M^{-2/(n-2)}`.
pub fn rescaled_coeffs(e: &DirectionalExpansion, height: f64, rho: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let s = height.powf(-2.0 / (n as f64 - 2.0));
    let (mut b, d) = e.coeffs_at(s * rho);
    for v in &mut b {
        *v *= s;
    }
    (b, d)
}

/// The operator coefficients as polynomials in `x`: `b_i = sum_k b[k]_i` with
/// `b[k]` homogeneous of degree `k + 2`, and `d_ij = sum_k d[k]_ij` with `d[k]`
/// homogeneous of degree `k + 2`. Row-major in `(i, j)`.
#[derive(Debug, Clone)]
pub struct OperatorPolynomials {
    pub n: usize,
    pub b: [Vec<FloatPolynomial>; 2],
    pub d: [Vec<FloatPolynomial>; 3],
}

fn monomial(n: usize, idx: &[usize]) -> Vec<u8> {
    let mut a = vec![0u8; n];
    for &i in idx {
        a[i] += 1;
    }
    a
}

impl OperatorPolynomials {
    pub fn new(jet: &CurvatureJet) -> Self {
        let n = jet.n().get();
        let zero = || vec![FloatPolynomial::zero(n); n * n];
        let (rm0, rm1, rm2) = (&jet.rm0, &jet.rm1, &jet.rm2);
        let mut s = zero();
        let mut s1 = zero();
        let mut s2 = zero();
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                for p in 0..n {
                    for q in 0..n {
                        let c = rm0[idx4(n, i, p, q, j)];
                        s[k].add_term(monomial(n, &[p, q]), c);
                        let base1 = idx4(n, i, p, q, j) * n;
                        let base2 = idx6(n, i, p, q, j, 0, 0);
                        for e in 0..n {
                            s1[k].add_term(monomial(n, &[p, q, e]), rm1[base1 + e]);
                            for f in 0..n {
                                s2[k].add_term(monomial(n, &[p, q, e, f]), rm2[base2 + e * n + f]);
                            }
                        }
                    }
                }
            }
        }
        let mut sst = zero();
        for i in 0..n {
            for j in 0..n {
                for m in 0..n {
                    if s[i * n + m].is_empty() || s[j * n + m].is_empty() {
                        continue;
                    }
                    let prod = s[i * n + m].mul(&s[j * n + m]);
                    sst[i * n + j].add_scaled(&prod, 1.0);
                }
            }
        }
        let d2: Vec<_> = s.iter().map(|p| p.scaled(-1.0 / 3.0)).collect();
        let d3: Vec<_> = s1.iter().map(|p| p.scaled(-1.0 / 6.0)).collect();
        let d4: Vec<_> = (0..n * n)
            .map(|k| {
                let mut p = s2[k].scaled(-1.0 / 20.0);
                p.add_scaled(&sst[k], 1.0 / 15.0);
                p
            })
            .collect();

        let ric1 = jet.ricci1();
        let ric2 = jet.ricci2();
        let mut b2 = vec![FloatPolynomial::zero(n); n];
        let mut b3 = vec![FloatPolynomial::zero(n); n];
        for i in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let t: f64 = (0..n).map(|p| rm1[idx4(n, i, a, b, p) * n + p]).sum();
                    b2[i].add_term(monomial(n, &[a, b]), -(ric1[(i * n + a) * n + b] + t) / 6.0);
                    for c in 0..n {
                        let tail: f64 = (0..n).map(|p| rm2[idx6(n, i, a, b, p, p, c)]).sum();
                        let coef = ric2[((i * n + a) * n + b) * n + c] / 20.0 + tail / 10.0;
                        b3[i].add_term(monomial(n, &[a, b, c]), -coef);
                    }
                }
            }
            // + 1/15 (R_{ipad} + R_{iapd}) x^a R_{pbcd} x^b x^c
            for a in 0..n {
                for p in 0..n {
                    for d in 0..n {
                        let t = rm0[idx4(n, i, p, a, d)] + rm0[idx4(n, i, a, p, d)];
                        if t == 0.0 {
                            continue;
                        }
                        for b in 0..n {
                            for c in 0..n {
                                let w = rm0[idx4(n, p, b, c, d)];
                                b3[i].add_term(monomial(n, &[a, b, c]), t * w / 15.0);
                            }
                        }
                    }
                }
            }
        }
        Self { n, b: [b2, b3], d: [d2, d3, d4] }
    }

    /// `b(y) . grad P + d(y) : Hess P` in the blow-up variable, where the
    /// coefficients are `s b(s y)` and `d(s y)`.
    pub fn apply_rescaled(&self, p: &FloatPolynomial, s: f64) -> FloatPolynomial {
        let n = self.n;
        let grad: Vec<FloatPolynomial> = (0..n).map(|i| p.derivative(i)).collect();
        let mut out = FloatPolynomial::zero(n);
        for (k, bk) in self.b.iter().enumerate() {
            let w = s.powi(k as i32 + 3);
            for i in 0..n {
                if !grad[i].is_empty() {
                    out.add_scaled(&bk[i].mul(&grad[i]), w);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let h = grad[i].derivative(j);
                if h.is_empty() {
                    continue;
                }
                for (k, dk) in self.d.iter().enumerate() {
                    out.add_scaled(&dk[i * n + j].mul(&h), s.powi(k as i32 + 2));
                }
            }
        }
        out
    }

    /// `b . x + tr d` and the components of `d x`; all vanish identically in
    /// conformal normal coordinates.
    pub fn radial_defects(&self) -> (FloatPolynomial, Vec<FloatPolynomial>) {
        let n = self.n;
        let mut trace = FloatPolynomial::zero(n);
        for k in 0..2 {
            for i in 0..n {
                trace.add_scaled(&self.b[k][i].mul(&FloatPolynomial::coordinate(n, i)), 1.0);
            }
        }
        for k in 0..3 {
            for i in 0..n {
                trace.add_scaled(&self.d[k][i * n + i], 1.0);
            }
        }
        let dx = (0..n)
            .map(|i| {
                let mut p = FloatPolynomial::zero(n);
                for k in 0..3 {
                    for j in 0..n {
                        p.add_scaled(&self.d[k][i * n + j].mul(&FloatPolynomial::coordinate(n, j)), 1.0);
                    }
                }
                p
            })
            .collect();
        (trace, dx)
    }
}
