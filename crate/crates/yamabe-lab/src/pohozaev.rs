//! The Pohozaev-type balance `I1 + I2 + I3 + I4 = I5` on a ball `|y| <= R'`,
//! the term-by-term breakdown of `I2`, and the Weyl vanishing-rate fit.
//!
//! Every angular dependence is polynomial, so sphere integrals are exact
//! moment sums and only the radial direction is integrated numerically.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bubble::{bubble, bubble_derivatives, Dimension};
use crate::curvature::{CurvatureJet, OperatorPolynomials};
use crate::error::{precondition, LabError, Result};
use crate::profile::{ProfileApprox, SeparableTerm};
use crate::quadrature::CompositeRule;
use crate::radial::RadialFunction;
use crate::sphere::{radial_mean, FloatPolynomial, SphereArea};

/// The function `v` the identity is evaluated on.
#[derive(Debug, Clone)]
pub enum PohozaevField {
    /// `mu^{(n-2)/2} U(mu y)`, an exact solution of the flat equation.
    Bubble { scale: f64 },
    /// The three-term profile.
    Profile(Box<ProfileApprox>),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PohozaevOptions {
    pub panels_per_decade: usize,
    pub order: usize,
    /// Relative change of the volume terms allowed between the rule and its
    /// refinement.
    pub refinement_tolerance: f64,
}

impl Default for PohozaevOptions {
    fn default() -> Self {
        Self { panels_per_decade: 16, order: 8, refinement_tolerance: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct PohozaevInput {
    pub field: PohozaevField,
    pub jet: CurvatureJet,
    /// Blow-up height `M >= 1`.
    pub height: f64,
    /// Cutoff radius `R'`.
    pub radius: f64,
    pub options: PohozaevOptions,
}

impl PohozaevInput {
    pub fn bubble(jet: CurvatureJet, height: f64, radius: f64) -> Self {
        Self { field: PohozaevField::Bubble { scale: 1.0 }, jet, height, radius, options: PohozaevOptions::default() }
    }

    pub fn profile(profile: ProfileApprox, jet: CurvatureJet, radius: f64) -> Self {
        let height = profile.height();
        Self { field: PohozaevField::Profile(Box::new(profile)), jet, height, radius, options: PohozaevOptions::default() }
    }

    pub fn n(&self) -> Dimension {
        self.jet.n()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PohozaevReport {
    pub n: usize,
    pub height: f64,
    pub radius: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub i5: f64,
    /// `I1 + I2 + I3 + I4 - I5`.
    pub defect: f64,
    /// `defect` over the bubble energy `int |grad U|^2`.
    pub normalized_defect: f64,
    /// `I5 M^2`, the quantity stated to stay bounded.
    pub i5_height_scaled: f64,
    /// Largest relative change of `I1`, `I2` under panel refinement.
    pub refinement_change: f64,
}

/// `int_{R^n} |grad U|^2 = n(n-2) |S^{n-1}| Gamma(n/2)^2 / (2 Gamma(n))`.
pub fn bubble_energy(n: Dimension) -> f64 {
    let nf = n.as_f64();
    let k = n.get();
    let ln_gamma_half = |m: usize| -> f64 {
        // ln Gamma(m / 2)
        if m % 2 == 0 {
            (1..m / 2).map(|i| (i as f64).ln()).sum()
        } else {
            let mut acc = std::f64::consts::PI.sqrt().ln();
            let mut x = 0.5;
            while x < m as f64 / 2.0 - 0.25 {
                acc += f64::ln(x);
                x += 1.0;
            }
            acc
        }
    };
    let beta = (2.0 * ln_gamma_half(k) - ln_gamma_half(2 * k)).exp();
    nf * (nf - 2.0) * SphereArea::new(k).value() * beta / 2.0
}

struct Piece {
    poly: FloatPolynomial,
    degree: usize,
    term: SeparableTerm,
}

type Means = BTreeMap<usize, f64>;

/// Sphere averages of every product the integrands need.
struct Angular {
    pieces: Vec<Piece>,
    blocks: Vec<(usize, Means, Vec<Means>, Vec<Vec<Means>>)>,
    p: Vec<Means>,
    pp: Vec<Vec<Means>>,
    gg: Vec<Vec<Means>>,
    a: Vec<Means>,
    ap: Vec<Vec<Means>>,
}

impl Angular {
    fn new(input: &PohozaevInput) -> Self {
        let n = input.n().get();
        let pieces: Vec<Piece> = match &input.field {
            PohozaevField::Bubble { .. } => Vec::new(),
            PohozaevField::Profile(p) => p
                .separable_terms()
                .into_iter()
                .filter(|t| !t.angular.is_zero())
                .map(|t| Piece { poly: FloatPolynomial::from_exact(&t.angular), degree: t.degree(), term: t })
                .collect(),
        };
        let k = pieces.len();
        let square = |f: &dyn Fn(&Piece, &Piece) -> Means| -> Vec<Vec<Means>> {
            pieces.iter().map(|a| pieces.iter().map(|b| f(a, b)).collect()).collect()
        };
        let p: Vec<Means> = pieces.iter().map(|x| x.poly.sphere_means()).collect();
        let pp = square(&|a, b| a.poly.sphere_mean_of_product(&b.poly));
        let grads: Vec<Vec<FloatPolynomial>> =
            pieces.iter().map(|x| (0..n).map(|i| x.poly.derivative(i)).collect()).collect();
        let gg: Vec<Vec<Means>> = (0..k)
            .map(|a| {
                (0..k)
                    .map(|b| {
                        let mut acc = Means::new();
                        for i in 0..n {
                            for (d, v) in grads[a][i].sphere_mean_of_product(&grads[b][i]) {
                                *acc.entry(d).or_insert(0.0) += v;
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();

        let s = input.height.powf(-2.0 / (input.n().as_f64() - 2.0));
        let ops = (!pieces.is_empty()).then(|| OperatorPolynomials::new(&input.jet));
        let applied: Vec<FloatPolynomial> = pieces
            .iter()
            .map(|x| ops.as_ref().map(|o| o.apply_rescaled(&x.poly, s)).unwrap_or_else(|| FloatPolynomial::zero(n)))
            .collect();
        let a = applied.iter().map(|q| q.sphere_means()).collect();
        let ap = applied.iter().map(|q| pieces.iter().map(|b| q.sphere_mean_of_product(&b.poly)).collect()).collect();

        let mut block_list = vec![(2usize, input.jet.taylor_block(2))];
        block_list.extend(input.jet.blocks().map(|(l, b)| (l, b.clone())));
        let products: Vec<Vec<FloatPolynomial>> =
            pieces.iter().map(|a| pieces.iter().map(|b| a.poly.mul(&b.poly)).collect()).collect();
        let blocks = block_list
            .into_iter()
            .map(|(l, b)| {
                let t = FloatPolynomial::from_exact(&b);
                let tm = t.sphere_means();
                let tp = pieces.iter().map(|x| t.sphere_mean_of_product(&x.poly)).collect();
                let tpp = products.iter().map(|row| row.iter().map(|q| t.sphere_mean_of_product(q)).collect()).collect();
                (l, tm, tp, tpp)
            })
            .collect();
        Self { pieces, blocks, p, pp, gg, a, ap }
    }
}

/// Radial data at one radius: the radial base `psi` and each piece's `g`.
struct RadialSample {
    psi: (f64, f64, f64),
    g: Vec<(f64, f64, f64)>,
}

struct Evaluator<'a> {
    input: &'a PohozaevInput,
    ang: Angular,
    area: f64,
    nf: f64,
}

impl<'a> Evaluator<'a> {
    fn new(input: &'a PohozaevInput) -> Result<Self> {
        let n = input.n();
        if !(input.height >= 1.0 && input.height.is_finite()) {
            return Err(precondition(format!("blow-up height must be at least 1, got {}", input.height)));
        }
        if !(input.radius > 0.0 && input.radius.is_finite()) {
            return Err(precondition(format!("cutoff radius must be positive, got {}", input.radius)));
        }
        match &input.field {
            PohozaevField::Bubble { scale } if !(*scale > 0.0) => {
                return Err(precondition("bubble scale must be positive"));
            }
            PohozaevField::Profile(p) => {
                if p.n() != n {
                    return Err(precondition("profile and jet dimensions differ"));
                }
                if (p.height() - input.height).abs() > 1e-12 * input.height {
                    return Err(precondition("profile height differs from the input height"));
                }
                for f in [p.v2_radial(), p.v3_radial()] {
                    if !f.contains(input.radius) {
                        return Err(LabError::OutOfDomain { radius: input.radius, lo: f.r_min(), hi: f.r_max() });
                    }
                }
            }
            _ => {}
        }
        Ok(Self { input, ang: Angular::new(input), area: SphereArea::new(n.get()).value(), nf: n.as_f64() })
    }

    fn sample(&self, r: f64) -> Result<RadialSample> {
        let n = self.input.n();
        let psi = match &self.input.field {
            PohozaevField::Bubble { scale } => {
                let (u, u1, u2) = bubble_derivatives(n, scale * r);
                let a = scale.powf((self.nf - 2.0) / 2.0);
                (a * u, a * scale * u1, a * scale * scale * u2)
            }
            PohozaevField::Profile(_) => bubble_derivatives(n, r),
        };
        let g = self.ang.pieces.iter().map(|p| p.term.radial_factor(r)).collect::<Result<_>>()?;
        Ok(RadialSample { psi, g })
    }

    /// Integral of the polynomial with these means over `|y| = r`.
    fn sphere(&self, m: &Means, r: f64) -> f64 {
        self.area * r.powf(self.nf - 1.0) * radial_mean(m, r)
    }

    fn shell(&self, r: f64) -> f64 {
        self.area * r.powf(self.nf - 1.0)
    }

    fn weights(&self) -> (f64, f64, f64) {
        let m = self.input.height;
        let c = self.input.n().conformal_constant();
        let s = m.powf(-2.0 / (self.nf - 2.0));
        (c, m.powf(-4.0 / (self.nf - 2.0)), s)
    }

    /// `sum over |y| = r of T_l v^2`, split into `U^2`, cross and quadratic parts.
    fn block_terms(&self, b: usize, r: f64, rs: &RadialSample) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
        let (_, tm, tp, tpp) = &self.ang.blocks[b];
        let psi = rs.psi.0;
        let mean = psi * psi * self.sphere(tm, r);
        let cross = rs.g.iter().zip(tp).map(|(g, m)| 2.0 * psi * g.0 * self.sphere(m, r)).collect();
        let quad = rs
            .g
            .iter()
            .zip(tpp)
            .map(|(ga, row)| rs.g.iter().zip(row).map(|(gb, m)| ga.0 * gb.0 * self.sphere(m, r)).collect())
            .collect();
        (mean, cross, quad)
    }

    fn i2_density(&self, r: f64, rs: &RadialSample) -> f64 {
        let (c, m4, s) = self.weights();
        let mut total = 0.0;
        for (b, (l, ..)) in self.ang.blocks.iter().enumerate() {
            let (mean, cross, quad) = self.block_terms(b, r, rs);
            let sum = mean + cross.iter().sum::<f64>() + quad.iter().flatten().sum::<f64>();
            total += (*l as f64 + 2.0) * s.powi(*l as i32) * sum;
        }
        -0.5 * c * m4 * total
    }

    fn i1_density(&self, r: f64, rs: &RadialSample) -> f64 {
        let half = (self.nf - 2.0) / 2.0;
        let (_, psi1, _) = rs.psi;
        let utilde = r * psi1 + half * rs.psi.0;
        let mut total = 0.0;
        for (m, g) in rs.g.iter().enumerate() {
            let mut inner = utilde * self.sphere(&self.ang.a[m], r);
            for (k, gk) in rs.g.iter().enumerate() {
                let h = r * gk.1 + (self.ang.pieces[k].degree as f64 + half) * gk.0;
                inner += h * self.sphere(&self.ang.ap[m][k], r);
            }
            total -= g.0 * inner;
        }
        total
    }

    fn rule(&self, ppd: usize) -> CompositeRule {
        let lo = self
            .ang
            .pieces
            .iter()
            .map(|p| p.term.radial.r_min())
            .fold(0.0f64, f64::max);
        CompositeRule::log_panels(lo, self.input.radius, ppd, self.input.options.order)
    }

    fn volume(&self, ppd: usize) -> Result<(f64, f64)> {
        let rule = self.rule(ppd);
        let (mut i1, mut i2) = (0.0, 0.0);
        for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
            let rs = self.sample(r)?;
            i1 += w * self.i1_density(r, &rs);
            i2 += w * self.i2_density(r, &rs);
        }
        Ok((i1, i2))
    }

    fn surface(&self) -> Result<(f64, f64, f64)> {
        let rr = self.input.radius;
        let rs = self.sample(rr)?;
        let (c, m4, s) = self.weights();
        let mut ring = 0.0;
        for (b, (l, ..)) in self.ang.blocks.iter().enumerate() {
            let (mean, cross, quad) = self.block_terms(b, rr, &rs);
            ring += s.powi(*l as i32) * (mean + cross.iter().sum::<f64>() + quad.iter().flatten().sum::<f64>());
        }
        let i3 = 0.5 * c * m4 * rr * ring;

        let q = 2.0 * self.nf / (self.nf - 2.0);
        let (psi, psi1, _) = rs.psi;
        let shell = self.shell(rr);
        let k = self.ang.pieces.len();
        let mut pow_int = psi.powf(q) * shell;
        for a in 0..k {
            pow_int += q * psi.powf(q - 1.0) * rs.g[a].0 * self.sphere(&self.ang.p[a], rr);
            for b in 0..k {
                pow_int += 0.5 * q * (q - 1.0) * psi.powf(q - 2.0) * rs.g[a].0 * rs.g[b].0
                    * self.sphere(&self.ang.pp[a][b], rr);
            }
        }
        let i4 = -0.5 * (self.nf - 2.0).powi(2) * rr * pow_int;

        // normal derivative: psi' + sum_m P_m (l_m g_m / R + g_m')
        let kn: Vec<f64> =
            (0..k).map(|a| self.ang.pieces[a].degree as f64 * rs.g[a].0 / rr + rs.g[a].1).collect();
        let mut normal_sq = psi1 * psi1 * shell;
        let mut tangential_sq = 0.0;
        let mut v_normal = psi * psi1 * shell;
        for a in 0..k {
            let pa = self.sphere(&self.ang.p[a], rr);
            normal_sq += 2.0 * psi1 * kn[a] * pa;
            v_normal += (psi * kn[a] + psi1 * rs.g[a].0) * pa;
            for b in 0..k {
                let ppab = self.sphere(&self.ang.pp[a][b], rr);
                normal_sq += kn[a] * kn[b] * ppab;
                v_normal += rs.g[a].0 * kn[b] * ppab;
                let la = self.ang.pieces[a].degree as f64;
                let lb = self.ang.pieces[b].degree as f64;
                tangential_sq +=
                    rs.g[a].0 * rs.g[b].0 * (self.sphere(&self.ang.gg[a][b], rr) - la * lb / (rr * rr) * ppab);
            }
        }
        let i5 = rr * (0.5 * normal_sq - 0.5 * tangential_sq) + 0.5 * (self.nf - 2.0) * v_normal;
        Ok((i3, i4, i5))
    }
}

/// `I1 ... I5` and the defect of the balance.
pub fn eval_pohozaev(input: &PohozaevInput) -> Result<PohozaevReport> {
    let ev = Evaluator::new(input)?;
    let ppd = input.options.panels_per_decade;
    let (i1, i2) = ev.volume(ppd)?;
    let (j1, j2) = ev.volume(2 * ppd)?;
    let rel = |a: f64, b: f64| {
        let scale = a.abs().max(b.abs());
        if scale == 0.0 { 0.0 } else { (a - b).abs() / scale }
    };
    let change = rel(i1, j1).max(rel(i2, j2));
    if change > input.options.refinement_tolerance {
        return Err(LabError::Quadrature { achieved: change, nodes: ev.rule(2 * ppd).nodes.len() });
    }
    let (i3, i4, i5) = ev.surface()?;
    let defect = j1 + j2 + i3 + i4 - i5;
    Ok(PohozaevReport {
        n: input.n().get(),
        height: input.height,
        radius: input.radius,
        i1: j1,
        i2: j2,
        i3,
        i4,
        i5,
        defect,
        normalized_defect: defect / bubble_energy(input.n()),
        i5_height_scaled: i5 * input.height.powi(2),
        refinement_change: change,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum I2TermKind {
    /// `T_l U^2`.
    Mean,
    /// `T_l 2 U F_m`.
    Cross(usize),
    /// `T_l F_m F_k`.
    Quadratic(usize, usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct I2Term {
    pub label: String,
    pub block_degree: usize,
    pub kind: I2TermKind,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct I2Breakdown {
    pub terms: Vec<I2Term>,
    pub sum_of_terms: f64,
    /// `I2` from a single quadrature of the summed integrand.
    pub direct: f64,
    /// `int_{|y| <= R'} r^{2s+2} U^2` for `s = 0, 1, 2`.
    pub u2_moments: Vec<(usize, f64)>,
    /// `int_{|y| <= R'} r^2 U f2`, when the field carries `f2`.
    pub r2_u_f2: Option<f64>,
    /// `2 c^2 / (n(n+2)) (|Hess R|^2 - (Delta R)^2 / n) M^{-16/(n-2)}`.
    pub key_prefactor: Option<f64>,
    /// `key_prefactor * r2_u_f2`, the closed form of the `T_2 x 2 U F_2` term.
    pub key_closed_form: Option<f64>,
    /// For `n = 10`: `d/d(ln R)` of `r2_u_f2` at `R'`, the coefficient of its
    /// logarithmic growth.
    pub log_growth_rate: Option<f64>,
}

/// Each block of `I2` integrated on its own.
pub fn i2_breakdown(input: &PohozaevInput) -> Result<I2Breakdown> {
    let ev = Evaluator::new(input)?;
    let rule = ev.rule(input.options.panels_per_decade);
    let (c, m4, s) = ev.weights();
    let nb = ev.ang.blocks.len();
    let k = ev.ang.pieces.len();
    let mut mean = vec![0.0; nb];
    let mut cross = vec![vec![0.0; k]; nb];
    let mut quad = vec![vec![vec![0.0; k]; k]; nb];
    let mut direct = 0.0;
    for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
        let rs = ev.sample(r)?;
        direct += w * ev.i2_density(r, &rs);
        for (b, (l, ..)) in ev.ang.blocks.iter().enumerate() {
            let f = -0.5 * c * m4 * (*l as f64 + 2.0) * s.powi(*l as i32) * w;
            let (m0, c0, q0) = ev.block_terms(b, r, &rs);
            mean[b] += f * m0;
            for a in 0..k {
                cross[b][a] += f * c0[a];
                for bb in 0..k {
                    quad[b][a][bb] += f * q0[a][bb];
                }
            }
        }
    }
    let name = |a: usize| format!("F{}", ev.ang.pieces[a].degree);
    let mut terms = Vec::new();
    for (b, (l, ..)) in ev.ang.blocks.iter().enumerate() {
        terms.push(I2Term { label: format!("T{l} U^2"), block_degree: *l, kind: I2TermKind::Mean, value: mean[b] });
        for a in 0..k {
            terms.push(I2Term {
                label: format!("T{l} 2U {}", name(a)),
                block_degree: *l,
                kind: I2TermKind::Cross(a),
                value: cross[b][a],
            });
            for bb in 0..k {
                terms.push(I2Term {
                    label: format!("T{l} {} {}", name(a), name(bb)),
                    block_degree: *l,
                    kind: I2TermKind::Quadratic(a, bb),
                    value: quad[b][a][bb],
                });
            }
        }
    }
    let sum_of_terms = terms.iter().map(|t| t.value).sum();

    let n = input.n();
    let nf = n.as_f64();
    let u2_moments = (0..3)
        .map(|sx| {
            let full = CompositeRule::log_panels(0.0, input.radius, input.options.panels_per_decade, input.options.order);
            let v = full.integrate(|r| ev.shell(r) * r.powi(2 * sx as i32 + 2) * bubble(n, r).powi(2));
            (sx, v)
        })
        .collect();
    let (mut r2_u_f2, mut key_prefactor, mut key_closed_form, mut log_growth_rate) = (None, None, None, None);
    if let PohozaevField::Profile(p) = &input.field {
        let integral = r2_u_f2_integral(n, p.v2_radial(), input.radius)?;
        let h = input.jet.scalar_hessian();
        let lap = input.jet.scalar_laplacian();
        let h2: f64 = h.iter().map(|v| v * v).sum();
        let pref = 2.0 * c * c / (nf * (nf + 2.0)) * (h2 - lap * lap / nf) * input.height.powf(-16.0 / (nf - 2.0));
        r2_u_f2 = Some(integral);
        key_prefactor = Some(pref);
        key_closed_form = Some(pref * integral);
        if n.get() == 10 {
            let rr = input.radius;
            log_growth_rate = Some(ev.shell(rr) * rr.powi(3) * bubble(n, rr) * p.v2_radial().eval(rr)?);
        }
    }
    Ok(I2Breakdown { terms, sum_of_terms, direct, u2_moments, r2_u_f2, key_prefactor, key_closed_form, log_growth_rate })
}

/// `int_{|y| <= R} r^2 U f2 dy = |S^{n-1}| int_0^R r^{n+1} U f2 dr`; the part
/// below the first grid node is dropped (`f2 ~ r^2` there).
pub fn r2_u_f2_integral(n: Dimension, f2: &RadialFunction, radius: f64) -> Result<f64> {
    if !f2.contains(radius) {
        return Err(LabError::OutOfDomain { radius, lo: f2.r_min(), hi: f2.r_max() });
    }
    let rule = CompositeRule::log_panels(f2.r_min(), radius, 16, 8);
    let area = SphereArea::new(n.get()).value();
    let nf = n.as_f64();
    let mut total = 0.0;
    for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
        total += w * r.powf(nf + 1.0) * bubble(n, r) * f2.eval(r)?;
    }
    Ok(area * total)
}

/// One member of a blow-up sequence: height and the squared norms of the Weyl
/// tensor and its first two derivatives at the blow-up point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEntry {
    pub height: f64,
    pub weyl: f64,
    pub weyl_gradient: f64,
    pub weyl_hessian: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateSequence {
    entries: Vec<RateEntry>,
}

impl RateSequence {
    pub fn new(entries: Vec<RateEntry>) -> Result<Self> {
        if entries.len() < 3 {
            return Err(precondition("a rate sequence needs at least three entries"));
        }
        if entries.windows(2).any(|w| w[1].height <= w[0].height) {
            return Err(precondition("heights must be strictly increasing"));
        }
        if entries.iter().any(|e| e.weyl < 0.0 || e.weyl_gradient < 0.0 || e.weyl_hessian < 0.0 || e.height <= 1.0) {
            return Err(precondition("norms must be nonnegative and heights above 1"));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[RateEntry] {
        &self.entries
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RateMargin {
    pub height: f64,
    /// `lhs M^2` for this entry.
    pub constant: f64,
    /// `constant / reference`.
    pub margin: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub n: usize,
    /// Smallest `C` satisfying every entry.
    pub minimal_constant: f64,
    pub reference: f64,
    pub margins: Vec<RateMargin>,
}

/// Fit `C` in `|W|^2 M^{-8/(n-2)} + |grad W|^2 M^{-12/(n-2)} + |grad^2 W|^2
/// M^{-16/(n-2)} (ln M if n = 10) <= C M^{-2}`; entries whose constant exceeds
/// `reference` are flagged.
pub fn weyl_rate_check(seq: &RateSequence, n: Dimension, reference: f64) -> Result<RateReport> {
    if !(reference > 0.0) {
        return Err(precondition("reference constant must be positive"));
    }
    let m = n.as_f64() - 2.0;
    let margins: Vec<RateMargin> = seq
        .entries
        .iter()
        .map(|e| {
            let log = if n.get() == 10 { e.height.ln() } else { 1.0 };
            let lhs = e.weyl * e.height.powf(-8.0 / m)
                + e.weyl_gradient * e.height.powf(-12.0 / m)
                + e.weyl_hessian * e.height.powf(-16.0 / m) * log;
            let constant = lhs * e.height.powi(2);
            RateMargin { height: e.height, constant, margin: constant / reference, flagged: constant > reference }
        })
        .collect();
    let minimal_constant = margins.iter().map(|x| x.constant).fold(0.0, f64::max);
    Ok(RateReport { n: n.get(), minimal_constant, reference, margins })
}
