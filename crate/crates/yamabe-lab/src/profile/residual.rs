use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ProfileApprox;
use crate::curvature::{rescaled_coeffs, CurvatureJet, DirectionalExpansion};
use crate::error::{precondition, Result};

/// The `epsilon` in the trusted radius `M^{(16 - epsilon)/(n-2)^2}`.
pub const DEFAULT_RADIUS_EPS: f64 = 1.0;

/// Product grid of radii and unit directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub radii: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

impl SampleGrid {
    pub fn new(radii: Vec<f64>, directions: Vec<Vec<f64>>) -> Result<Self> {
        if radii.is_empty() || directions.is_empty() {
            return Err(precondition("sample grid needs at least one radius and one direction"));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 || !radii.iter().all(|r| r.is_finite()) {
            return Err(precondition("sample radii must be positive, finite and strictly increasing"));
        }
        let n = directions[0].len();
        for d in &directions {
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if d.len() != n || (norm - 1.0).abs() > 1e-12 {
                return Err(precondition("sample directions must be unit vectors of equal length"));
            }
        }
        Ok(Self { radii, directions })
    }

    /// The `2n` signed coordinate axes followed by `random` seeded directions.
    pub fn standard_directions(n: usize, random: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(2 * n + random);
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = s;
                out.push(e);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while out.len() < 2 * n + random {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (0.1..=1.0).contains(&norm) {
                out.push(v.iter().map(|x| x / norm).collect());
            }
        }
        out
    }

    /// `count` log-spaced radii on `[lo, hi]`.
    pub fn log_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
        let count = count.max(2);
        (0..count).map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64)).collect()
    }

    pub fn dimension(&self) -> usize {
        self.directions[0].len()
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node `(i, j)` is `radii[i] * directions[j]`, stored row-major.
    pub fn point(&self, i: usize, j: usize) -> Vec<f64> {
        self.directions[j].iter().map(|t| t * self.radii[i]).collect()
    }
}

/// `M^{(16 - eps)/(n-2)^2}`: radius up to which the coarse estimates are claimed.
pub fn residual_radius_limit(n: usize, height: f64, eps: f64) -> f64 {
    let m = n as f64 - 2.0;
    height.powf((16.0 - eps) / (m * m))
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub height: f64,
    /// Row-major over `(radius, direction)`.
    pub values: Vec<f64>,
    /// Smallest `C` with `|residual| <= C M^{-12/(n-2)} (1+r)^{6-n}` at every node.
    pub fitted_constant: f64,
    pub worst_radius: f64,
    pub worst_direction: usize,
    pub max_abs: f64,
    pub radius_limit: f64,
    pub warnings: Vec<String>,
}

/// `(Delta_g - c_bar)(v) + n(n-2) v^{(n+2)/(n-2)}` on the grid, with
/// `Delta_g = Delta + b_bar . grad + d_bar : Hess` and `c_bar` from the jet's
/// scalar-curvature blocks, followed by a fit of the envelope constant.
pub fn pde_residual(profile: &ProfileApprox, jet: &CurvatureJet, grid: &SampleGrid) -> Result<ResidualReport> {
    let n = profile.n().get();
    if jet.n() != profile.n() || grid.dimension() != n {
        return Err(precondition("profile, jet and grid dimensions differ"));
    }
    let nf = n as f64;
    let m = profile.height();
    let c = profile.n().conformal_constant();
    let crit = profile.n().critical_power();
    let mut blocks = vec![(2usize, jet.taylor_block(2).compile())];
    for (l, b) in jet.blocks() {
        blocks.push((l, b.compile()));
    }
    let block_weights: Vec<f64> = blocks.iter().map(|(l, _)| c * m.powf(-(4.0 + 2.0 * *l as f64) / (nf - 2.0))).collect();
    let envelope_scale = m.powf(-12.0 / (nf - 2.0));
    let limit = residual_radius_limit(n, m, DEFAULT_RADIUS_EPS);
    let mut warnings = Vec::new();
    if grid.radii.last().copied().unwrap_or(0.0) > limit {
        warnings.push(format!("sample radii extend past the trusted radius {limit:.4}"));
    }
    let expansions: Vec<DirectionalExpansion> =
        grid.directions.iter().map(|d| DirectionalExpansion::new(jet, d)).collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(grid.len());
    let (mut fitted, mut worst_r, mut worst_d, mut max_abs) = (0.0f64, 0.0, 0, 0.0f64);
    for &r in &grid.radii {
        for (j, e) in expansions.iter().enumerate() {
            let y: Vec<f64> = grid.directions[j].iter().map(|t| t * r).collect();
            let (v, grad, hess) = profile.jet2(&y)?;
            let (b, d) = rescaled_coeffs(e, m, r, n);
            let mut lap = 0.0;
            let mut extra = 0.0;
            for i in 0..n {
                lap += hess[i * n + i];
                extra += b[i] * grad[i];
                for k in 0..n {
                    extra += d[i * n + k] * hess[i * n + k];
                }
            }
            let cbar: f64 = blocks.iter().zip(&block_weights).map(|((_, p), w)| w * p.eval(&y)).sum();
            let res = lap + extra - cbar * v + nf * (nf - 2.0) * v.abs().powf(crit) * v.signum();
            let ratio = res.abs() / (envelope_scale * (1.0 + r).powf(6.0 - nf));
            if ratio > fitted {
                fitted = ratio;
                worst_r = r;
                worst_d = j;
            }
            max_abs = max_abs.max(res.abs());
            values.push(res);
        }
    }
    Ok(ResidualReport {
        height: m,
        values,
        fitted_constant: fitted,
        worst_radius: worst_r,
        worst_direction: worst_d,
        max_abs,
        radius_limit: limit,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_directions_are_unit_and_deterministic() {
        let a = SampleGrid::standard_directions(10, 5, 3);
        let b = SampleGrid::standard_directions(10, 5, 3);
        assert_eq!(a, b);
        assert_eq!(a.len(), 25);
        assert!(SampleGrid::new(vec![1.0, 2.0], a).is_ok());
    }

    #[test]
    fn radius_limit_example() {
        assert!((residual_radius_limit(10, 1e3, 1.0) - 1e3f64.powf(15.0 / 64.0)).abs() < 1e-12);
    }

    #[test]
    fn grid_rejects_bad_radii() {
        let d = SampleGrid::standard_directions(3, 0, 0);
        assert!(SampleGrid::new(vec![2.0, 1.0], d.clone()).is_err());
        assert!(SampleGrid::new(vec![0.0, 1.0], d).is_err());
    }
}
