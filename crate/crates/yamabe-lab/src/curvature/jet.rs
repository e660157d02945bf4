use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::constraints::{project_rm2_symmetries, ConstraintKind, ConstraintSystem};
use super::tensor::{idx4, idx6, riemann_project, weyl_project};
use crate::bubble::Dimension;
use crate::error::{precondition, LabError, Result};
use crate::sphere::{exact, harmonic_projection, rational, sphere_mean, PolynomialJson, SphericalPolynomial};

/// Claimed vanishing of `W(0)` and `grad W(0)`; checked against the arrays by
/// [`super::validate_jet`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisClass {
    pub w0_zero: bool,
    pub grad_w0_zero: bool,
}

impl HypothesisClass {
    pub const VANISHING: Self = Self { w0_zero: true, grad_w0_zero: true };

    pub fn is_vanishing(self) -> bool {
        self.w0_zero && self.grad_w0_zero
    }
}

/// Curvature data at the center of conformal normal coordinates.
///
/// `rm0[a,b,c,d] = R_{abcd}(0)`, `rm1[a,b,c,d,e] = R_{abcd,e}(0)`,
/// `rm2[a,b,c,d,e,f] = R_{abcd,ef}(0)`, all row-major. Scalar-curvature Taylor
/// blocks of degree 3 and higher cannot be recovered from these arrays and are
/// carried separately as homogeneous polynomials `sum_{|alpha|=l} d^alpha R / alpha! x^alpha`.
#[derive(Clone, PartialEq)]
pub struct CurvatureJet {
    n: Dimension,
    pub(crate) rm0: Vec<f64>,
    pub(crate) rm1: Vec<f64>,
    pub(crate) rm2: Vec<f64>,
    pub(crate) blocks: BTreeMap<usize, SphericalPolynomial>,
    pub(crate) hypothesis: HypothesisClass,
}

impl std::fmt::Debug for CurvatureJet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CurvatureJet")
            .field("n", &self.n.get())
            .field("|rm0|", &norm2(&self.rm0).sqrt())
            .field("|rm1|", &norm2(&self.rm1).sqrt())
            .field("|rm2|", &norm2(&self.rm2).sqrt())
            .field("blocks", &self.blocks.keys().collect::<Vec<_>>())
            .field("hypothesis", &self.hypothesis)
            .finish()
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

impl CurvatureJet {
    /// Wrap arrays without projecting them; shapes are checked.
    pub fn from_arrays(n: Dimension, rm0: Vec<f64>, rm1: Vec<f64>, rm2: Vec<f64>) -> Result<Self> {
        let m = n.get();
        for (name, arr, rank) in [("rm0", &rm0, 4u32), ("rm1", &rm1, 5), ("rm2", &rm2, 6)] {
            if arr.len() != m.pow(rank) {
                return Err(precondition(format!(
                    "{name} has {} entries, expected n^{rank} = {}",
                    arr.len(),
                    m.pow(rank)
                )));
            }
            if arr.iter().any(|v| !v.is_finite()) {
                return Err(precondition(format!("{name} has non-finite entries")));
            }
        }
        Ok(Self { n, rm0, rm1, rm2, blocks: BTreeMap::new(), hypothesis: HypothesisClass::default() })
    }

    pub fn zero(n: Dimension) -> Self {
        let m = n.get();
        Self {
            n,
            rm0: vec![0.0; m.pow(4)],
            rm1: vec![0.0; m.pow(5)],
            rm2: vec![0.0; m.pow(6)],
            blocks: BTreeMap::new(),
            hypothesis: HypothesisClass::default(),
        }
    }

    pub fn n(&self) -> Dimension {
        self.n
    }

    pub fn rm0(&self) -> &[f64] {
        &self.rm0
    }

    pub fn rm1(&self) -> &[f64] {
        &self.rm1
    }

    pub fn rm2(&self) -> &[f64] {
        &self.rm2
    }

    pub fn rm0_mut(&mut self) -> &mut [f64] {
        &mut self.rm0
    }

    pub fn rm1_mut(&mut self) -> &mut [f64] {
        &mut self.rm1
    }

    pub fn rm2_mut(&mut self) -> &mut [f64] {
        &mut self.rm2
    }

    pub fn hypothesis(&self) -> HypothesisClass {
        self.hypothesis
    }

    pub fn with_hypothesis(mut self, h: HypothesisClass) -> Self {
        self.hypothesis = h;
        self
    }

    /// Scalar-curvature Taylor block of degree `l >= 3`, if supplied.
    pub fn block(&self, l: usize) -> Option<&SphericalPolynomial> {
        self.blocks.get(&l)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (usize, &SphericalPolynomial)> {
        self.blocks.iter().map(|(k, v)| (*k, v))
    }

    pub fn set_block(&mut self, block: SphericalPolynomial) -> Result<()> {
        if block.n() != self.n.get() {
            return Err(precondition("block dimension differs from the jet"));
        }
        if block.degree() < 3 {
            return Err(precondition("degree-2 block is derived from rm2 and cannot be set"));
        }
        self.blocks.insert(block.degree(), block);
        Ok(())
    }

    pub fn remove_block(&mut self, l: usize) -> Option<SphericalPolynomial> {
        self.blocks.remove(&l)
    }

    #[inline]
    pub fn r0(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.rm0[idx4(self.n.get(), a, b, c, d)]
    }

    #[inline]
    pub fn r1(&self, a: usize, b: usize, c: usize, d: usize, e: usize) -> f64 {
        self.rm1[idx4(self.n.get(), a, b, c, d) * self.n.get() + e]
    }

    #[inline]
    pub fn r2(&self, a: usize, b: usize, c: usize, d: usize, e: usize, f: usize) -> f64 {
        self.rm2[idx6(self.n.get(), a, b, c, d, e, f)]
    }

    /// Every curvature array and block multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        let s = exact(t);
        Self {
            n: self.n,
            rm0: self.rm0.iter().map(|v| t * v).collect(),
            rm1: self.rm1.iter().map(|v| t * v).collect(),
            rm2: self.rm2.iter().map(|v| t * v).collect(),
            blocks: self.blocks.iter().map(|(k, p)| (*k, p.scale(&s))).collect(),
            hypothesis: self.hypothesis,
        }
    }

    /// `Ric_{ab}(0) = sum_k R_{kakb}(0)`.
    pub fn ricci0(&self) -> Vec<f64> {
        let n = self.n.get();
        let mut out = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                out[a * n + b] = (0..n).map(|k| self.r0(k, a, k, b)).sum();
            }
        }
        out
    }

    /// `Ric_{ab,c}(0)`, flat `n^3`.
    pub fn ricci1(&self) -> Vec<f64> {
        let n = self.n.get();
        let mut out = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    out[(a * n + b) * n + c] = (0..n).map(|k| self.r1(k, a, k, b, c)).sum();
                }
            }
        }
        out
    }

    /// `Ric_{ab,cd}(0)`, flat `n^4`.
    pub fn ricci2(&self) -> Vec<f64> {
        let n = self.n.get();
        let mut out = vec![0.0; n.pow(4)];
        for k in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let base = idx6(n, k, a, k, b, 0, 0);
                    let o = (a * n + b) * n * n;
                    for cd in 0..n * n {
                        out[o + cd] += self.rm2[base + cd];
                    }
                }
            }
        }
        out
    }

    /// `R_{,a}(0)`.
    pub fn scalar_gradient(&self) -> Vec<f64> {
        let n = self.n.get();
        (0..n).map(|e| (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| self.r1(a, b, a, b, e)).sum()).collect()
    }

    /// `d_{ij} R(0) = R_{,ij}(0)`, flat `n^2`.
    pub fn scalar_hessian(&self) -> Vec<f64> {
        let n = self.n.get();
        let mut out = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                let base = idx6(n, a, b, a, b, 0, 0);
                for ij in 0..n * n {
                    out[ij] += self.rm2[base + ij];
                }
            }
        }
        out
    }

    /// `Delta R(0)`.
    pub fn scalar_laplacian(&self) -> f64 {
        let n = self.n.get();
        let h = self.scalar_hessian();
        (0..n).map(|i| h[i * n + i]).sum()
    }

    /// Degree-2 Taylor block `(1/2) R_{,ij} x^i x^j` as an exact polynomial of the f64 entries.
    pub fn quadratic_block(&self) -> SphericalPolynomial {
        let n = self.n.get();
        let h = self.scalar_hessian();
        let rows: Vec<Vec<f64>> = (0..n).map(|i| h[i * n..(i + 1) * n].to_vec()).collect();
        crate::sphere::hessian_block(&rows).expect("square Hessian")
    }

    /// Taylor block of degree `l`: derived for `l = 2`, supplied for `l >= 3`,
    /// zero for `l < 2` (CNC forces `R(0) = 0`, `grad R(0) = 0`) and for absent blocks.
    pub fn taylor_block(&self, l: usize) -> SphericalPolynomial {
        match l {
            2 => self.quadratic_block(),
            _ => self.blocks.get(&l).cloned().unwrap_or_else(|| SphericalPolynomial::zero(self.n.get(), l)),
        }
    }
}

/// How [`project_symmetries`] treats the arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionMode {
    /// Curvature symmetries, Weyl parts of `rm0` and `rm1`, contracted Bianchi
    /// on `rm2` and `Delta R(0) = -|W|^2/6`.
    General,
    /// `rm0 = rm1 = 0` and the additional contraction identity on `rm2`;
    /// the cubic block is made harmonic and the quartic block mean-free.
    Hypothesis,
}

/// Project raw arrays onto the constraint set. Idempotent.
pub fn project_symmetries(raw: &CurvatureJet, mode: ProjectionMode) -> Result<CurvatureJet> {
    let n = raw.n.get();
    let mut out = CurvatureJet::zero(raw.n);
    let kind = match mode {
        ProjectionMode::General => {
            out.rm0 = weyl_project(n, &riemann_project(n, &raw.rm0, 1), 1);
            out.rm1 = weyl_project(n, &riemann_project(n, &raw.rm1, n), n);
            ConstraintKind::General
        }
        ProjectionMode::Hypothesis => ConstraintKind::Hypothesis,
    };
    let target = -norm2(&out.rm0) / 6.0;
    out.rm2 = project_rm2_symmetries(n, &raw.rm2);
    if out.rm2.iter().any(|v| *v != 0.0) || target != 0.0 {
        ConstraintSystem::shared(n, kind).correct(&mut out.rm2, target);
    }
    for (l, block) in &raw.blocks {
        let b = match (mode, *l) {
            (ProjectionMode::Hypothesis, 3) => harmonic_projection(block),
            (ProjectionMode::Hypothesis, 4) => remove_mean(block)?,
            _ => block.clone(),
        };
        out.blocks.insert(*l, b);
    }
    out.hypothesis = match mode {
        ProjectionMode::General => raw.hypothesis,
        ProjectionMode::Hypothesis => HypothesisClass::VANISHING,
    };
    if mode == ProjectionMode::Hypothesis {
        if let Some(b6) = out.blocks.get(&6).cloned() {
            out.blocks.insert(6, super::identities::realize_sextic_block(&out, &remove_radial_sextic(&b6)?)?);
        }
    }
    Ok(out)
}

fn remove_mean(p: &SphericalPolynomial) -> Result<SphericalPolynomial> {
    if p.degree() % 2 == 1 {
        return Ok(p.clone());
    }
    let mean = sphere_mean(p);
    p.sub(&SphericalPolynomial::radial_power(p.n(), p.degree() / 2, mean))
}

/// Remove the `|x|^6` component that carries `Delta^3`.
pub(crate) fn remove_radial_sextic(p: &SphericalPolynomial) -> Result<SphericalPolynomial> {
    if p.degree() != 6 {
        return Err(precondition("sextic block expected"));
    }
    remove_mean(p)
}

/// Options for seeded random jets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JetSpec {
    pub n: usize,
    pub seed: u64,
    pub mode: ProjectionMode,
    /// Multiplies the raw uniform entries of `rm0`, `rm1`, `rm2`.
    pub curvature_scale: f64,
    /// Multiplies the supplied cubic and quartic blocks; zero omits them.
    pub block_scale: f64,
    /// Include a sextic block consistent with the degree-six identity (hypothesis mode only).
    pub sextic_block: bool,
}

impl JetSpec {
    pub fn new(n: usize, seed: u64, mode: ProjectionMode) -> Self {
        Self { n, seed, mode, curvature_scale: 1.0, block_scale: 1.0, sextic_block: mode == ProjectionMode::Hypothesis }
    }
}

fn random_block(rng: &mut ChaCha8Rng, n: usize, degree: usize, scale: f64) -> Result<SphericalPolynomial> {
    let mut p = SphericalPolynomial::zero(n, degree);
    let mut alpha = vec![0u8; n];
    fill_monomials(n, degree, 0, &mut alpha, &mut |a| {
        let c: f64 = rng.gen_range(-1.0..1.0) * scale;
        p.add_term(a.to_vec(), exact(c)).expect("degree matches");
    });
    Ok(p)
}

fn fill_monomials(n: usize, remaining: usize, pos: usize, alpha: &mut [u8], f: &mut dyn FnMut(&[u8])) {
    if pos == n - 1 {
        alpha[pos] = remaining as u8;
        f(alpha);
        alpha[pos] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        alpha[pos] = k as u8;
        fill_monomials(n, remaining - k, pos + 1, alpha, f);
    }
    alpha[pos] = 0;
}

/// A sparse sextic polynomial with small integer coefficients.
fn random_sextic(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> SphericalPolynomial {
    let mut p = SphericalPolynomial::zero(n, 6);
    for _ in 0..terms {
        let mut alpha = vec![0u8; n];
        for _ in 0..6 {
            alpha[rng.gen_range(0..n)] += 1;
        }
        let c: i64 = rng.gen_range(-5..=5);
        p.add_term(alpha, rational(c, 1)).expect("degree 6");
    }
    p
}

/// Deterministic random jet: ChaCha8 stream seeded by `spec.seed`, raw
/// entries uniform on `[-1, 1]`, then [`project_symmetries`].
pub fn generate_jet(spec: &JetSpec) -> Result<CurvatureJet> {
    let dim = Dimension::new(spec.n)?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut draw = |len: usize, s: f64| -> Vec<f64> { (0..len).map(|_| s * rng.gen_range(-1.0..1.0)).collect() };
    let (s0, s1) = match spec.mode {
        ProjectionMode::General => (spec.curvature_scale, spec.curvature_scale),
        ProjectionMode::Hypothesis => (0.0, 0.0),
    };
    let rm0 = draw(n.pow(4), s0);
    let rm1 = draw(n.pow(5), s1);
    let rm2 = draw(n.pow(6), spec.curvature_scale);
    let mut raw = CurvatureJet::from_arrays(dim, rm0, rm1, rm2)?;
    if spec.block_scale != 0.0 {
        raw.set_block(random_block(&mut rng, n, 3, spec.block_scale)?)?;
        raw.set_block(random_block(&mut rng, n, 4, spec.block_scale)?)?;
    }
    if spec.sextic_block {
        if spec.mode != ProjectionMode::Hypothesis {
            return Err(precondition("a sextic block is only generated for hypothesis jets"));
        }
        raw.set_block(random_sextic(&mut rng, n, 24))?;
    }
    project_symmetries(&raw, spec.mode)
}

fn nested(n: usize, data: &[f64], rank: usize) -> Value {
    if rank == 0 {
        return serde_json::json!(data[0]);
    }
    let stride = n.pow(rank as u32 - 1);
    Value::Array((0..n).map(|i| nested(n, &data[i * stride..(i + 1) * stride], rank - 1)).collect())
}

fn flat_from(v: &Value, n: usize, rank: usize, out: &mut Vec<f64>, name: &str) -> Result<()> {
    if rank == 0 {
        let x = v.as_f64().ok_or_else(|| LabError::Parse(format!("{name}: expected a number")))?;
        out.push(x);
        return Ok(());
    }
    let arr = v.as_array().ok_or_else(|| LabError::Parse(format!("{name}: expected an array")))?;
    if arr.len() != n {
        return Err(LabError::Parse(format!("{name}: expected length {n}, found {}", arr.len())));
    }
    for item in arr {
        flat_from(item, n, rank - 1, out, name)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JetMetadata {
    pub n: usize,
    pub hypothesis_flags: HypothesisClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl CurvatureJet {
    /// JSON document `{metadata, rm0, rm1, rm2, taylor_blocks}` with dense nested arrays.
    pub fn to_json(&self, seed: Option<u64>) -> Value {
        let n = self.n.get();
        let blocks: BTreeMap<String, PolynomialJson> =
            self.blocks.iter().map(|(k, p)| (k.to_string(), p.to_json())).collect();
        serde_json::json!({
            "metadata": JetMetadata { n, hypothesis_flags: self.hypothesis, seed },
            "rm0": nested(n, &self.rm0, 4),
            "rm1": nested(n, &self.rm1, 5),
            "rm2": nested(n, &self.rm2, 6),
            "taylor_blocks": blocks,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let meta: JetMetadata = serde_json::from_value(
            v.get("metadata").cloned().ok_or_else(|| LabError::Parse("missing metadata".into()))?,
        )?;
        let dim = Dimension::new(meta.n)?;
        let n = meta.n;
        let mut arrays = Vec::new();
        for (name, rank) in [("rm0", 4), ("rm1", 5), ("rm2", 6)] {
            let mut flat = Vec::with_capacity(n.pow(rank as u32));
            match v.get(name) {
                Some(x) => flat_from(x, n, rank, &mut flat, name)?,
                None => flat.resize(n.pow(rank as u32), 0.0),
            }
            arrays.push(flat);
        }
        let rm2 = arrays.pop().expect("three arrays");
        let rm1 = arrays.pop().expect("three arrays");
        let rm0 = arrays.pop().expect("three arrays");
        let mut jet = Self::from_arrays(dim, rm0, rm1, rm2)?.with_hypothesis(meta.hypothesis_flags);
        if let Some(blocks) = v.get("taylor_blocks") {
            let map: BTreeMap<String, PolynomialJson> = serde_json::from_value(blocks.clone())?;
            for (k, pj) in map {
                let p = SphericalPolynomial::from_json(&pj)?;
                if k.parse::<usize>().ok() != Some(p.degree()) {
                    return Err(LabError::Parse(format!("taylor block key {k} does not match degree {}", p.degree())));
                }
                jet.set_block(p)?;
            }
        }
        Ok(jet)
    }

    pub fn seed_from_json(v: &Value) -> Option<u64> {
        v.get("metadata")?.get("seed")?.as_u64()
    }
}

