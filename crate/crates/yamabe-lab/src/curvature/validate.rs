use serde::Serialize;

use super::jet::CurvatureJet;
use super::tensor::{idx4, idx6};

pub const VALIDATION_TOLERANCE: f64 = 1e-12;
pub const HYPOTHESIS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub max_violation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintReport {
    pub n: usize,
    /// Violations are compared against this times `max(1, largest entry)`.
    pub tolerance: f64,
    pub checks: Vec<ConstraintCheck>,
    pub passed: bool,
}

impl ConstraintReport {
    pub fn check(&self, name: &str) -> Option<&ConstraintCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub(crate) fn hypothesis_holds(jet: &CurvatureJet) -> bool {
    max_abs(&jet.rm0) <= HYPOTHESIS_TOLERANCE && max_abs(&jet.rm1) <= HYPOTHESIS_TOLERANCE
}

/// Max violation of the algebraic symmetries over every 4-index slice.
fn symmetry_violations(n: usize, x: &[f64], block: usize) -> [f64; 4] {
    let at = |a, b, c, d, t| x[idx4(n, a, b, c, d) * block + t];
    let mut v = [0.0f64; 4];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    for t in 0..block {
                        let r = at(a, b, c, d, t);
                        v[0] = v[0].max((r + at(b, a, c, d, t)).abs());
                        v[1] = v[1].max((r + at(a, b, d, c, t)).abs());
                        v[2] = v[2].max((r - at(c, d, a, b, t)).abs());
                        v[3] = v[3].max((r + at(a, c, d, b, t) + at(a, d, b, c, t)).abs());
                    }
                }
            }
        }
    }
    v
}

/// Every structural and CNC constraint, with the largest violation of each.
pub fn validate_jet(jet: &CurvatureJet) -> ConstraintReport {
    let n = jet.n().get();
    let scale = max_abs(&jet.rm0).max(max_abs(&jet.rm1)).max(max_abs(&jet.rm2)).max(1.0);
    let tol = VALIDATION_TOLERANCE * scale;
    let mut checks = Vec::new();
    let mut push = |name: &str, v: f64, limit: f64| {
        checks.push(ConstraintCheck { name: name.to_string(), max_violation: v, passed: v <= limit });
    };
    for (label, arr, block) in [("rm0", &jet.rm0, 1), ("rm1", &jet.rm1, n), ("rm2", &jet.rm2, n * n)] {
        let [ab, cd, pair, bianchi] = symmetry_violations(n, arr, block);
        push(&format!("{label} antisymmetry ab"), ab, tol);
        push(&format!("{label} antisymmetry cd"), cd, tol);
        push(&format!("{label} pair symmetry"), pair, tol);
        push(&format!("{label} first Bianchi"), bianchi, tol);
    }
    let mut ef = 0.0f64;
    for chunk in jet.rm2.chunks(n * n) {
        for e in 0..n {
            for f in 0..n {
                ef = ef.max((chunk[e * n + f] - chunk[f * n + e]).abs());
            }
        }
    }
    push("rm2 derivative symmetry", ef, tol);

    let ric0 = jet.ricci0();
    let scal0: f64 = (0..n).map(|i| ric0[i * n + i]).sum();
    push("scalar curvature R(0) = 0", scal0.abs(), tol);
    push("Ricci Ric(0) = 0", max_abs(&ric0), tol);

    let ric1 = jet.ricci1();
    let grad = jet.scalar_gradient();
    let mut cb1 = 0.0f64;
    for a in 0..n {
        let s: f64 = (0..n).map(|b| ric1[(a * n + b) * n + b]).sum();
        cb1 = cb1.max((s - 0.5 * grad[a]).abs());
    }
    push("contracted Bianchi R_ab,b = R,a/2", cb1, tol);

    let ric2 = jet.ricci2();
    let hess = jet.scalar_hessian();
    let mut cb2 = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let s: f64 = (0..n).map(|m| ric2[((i * n + m) * n + m) * n + j]).sum();
            cb2 = cb2.max((s - 0.5 * hess[i * n + j]).abs());
        }
    }
    push("contracted Bianchi R_im,mj = R,ij/2", cb2, tol * n as f64);

    let w2: f64 = jet.rm0.iter().map(|v| v * v).sum();
    push("Laplacian trace Delta R(0) = -|W|^2/6", (jet.scalar_laplacian() + w2 / 6.0).abs(), tol * (n * n) as f64);

    let h = jet.hypothesis();
    if h.w0_zero {
        push("hypothesis W(0) = 0", max_abs(&jet.rm0), HYPOTHESIS_TOLERANCE);
    }
    if h.grad_w0_zero {
        push("hypothesis grad W(0) = 0", max_abs(&jet.rm1), HYPOTHESIS_TOLERANCE);
    }
    if h.is_vanishing() {
        let mut c = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    for m in 0..n {
                        s += jet.rm2[idx6(n, i, k, m, j, k, m)];
                    }
                }
                c = c.max((s - 3.5 * hess[i * n + j]).abs());
            }
        }
        push("hypothesis R_ikmj,km = (7/2) R,ij", c, tol * n as f64);
    }
    let passed = checks.iter().all(|c| c.passed);
    ConstraintReport { n, tolerance: VALIDATION_TOLERANCE, checks, passed }
}
