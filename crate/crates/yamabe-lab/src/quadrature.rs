//! Adaptive Gauss–Kronrod and composite Gauss–Legendre rules.

use crate::error::{LabError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub nodes: usize,
}

fn kronrod15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive 15-point Kronrod integration to a relative tolerance, refining
/// the worst interval first until the node budget is spent.
pub fn adaptive(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_nodes: usize,
) -> Result<Integral> {
    let (v, e) = kronrod15(&mut f, a, b);
    let mut nodes = 15;
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= rel_tol * total.abs() || err <= f64::MIN_POSITIVE {
            return Ok(Integral { value: total, error: err, nodes });
        }
        if nodes + 30 > max_nodes {
            return Err(LabError::Quadrature {
                achieved: err / total.abs().max(f64::MIN_POSITIVE),
                nodes,
            });
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod15(&mut f, lo, mid);
        let (v2, e2) = kronrod15(&mut f, mid, hi);
        nodes += 30;
        if mid <= lo || mid >= hi {
            return Err(LabError::Quadrature { achieved: err / total.abs(), nodes });
        }
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    let m = order.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 0 { 1.0 } else { p1 };
            dp = order as f64 * (z * p - p0) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[order - 1 - i] = w[i];
    }
    (x, w)
}

/// A fixed composite rule: Gauss–Legendre panels on geometrically spaced
/// breakpoints, plus one uniform panel from 0 when `a == 0`.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    pub fn log_panels(a: f64, b: f64, panels_per_decade: usize, order: usize) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let mut breaks = Vec::new();
        let start = if a > 0.0 { a } else { (b * 1e-6).min(1e-3) };
        if a == 0.0 {
            breaks.push(0.0);
        }
        let decades = (b / start).log10().max(1e-12);
        let count = ((decades * panels_per_decade as f64).ceil() as usize).max(1);
        for i in 0..=count {
            breaks.push(start * (b / start).powf(i as f64 / count as f64));
        }
        let mut nodes = Vec::with_capacity(breaks.len() * order);
        let mut weights = Vec::with_capacity(breaks.len() * order);
        for pair in breaks.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let c = 0.5 * (lo + hi);
            let h = 0.5 * (hi - lo);
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(c + h * x);
                weights.push(h * w);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}
