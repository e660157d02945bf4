//! Linear constraints on the second-derivative block and the least-squares
//! projection onto their intersection with the curvature symmetries.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use super::tensor::{flatten, riemann_project, signed_permutations, symmetrize_last_pair, unflatten, PAIR_GROUP};

type Sparse = Vec<(usize, f64)>;

/// Which constraint family a projection enforces on `rm2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    /// Contracted Bianchi and a prescribed value of `Delta R(0)`.
    General,
    /// Additionally `sum_{km} R_{ikmj,km} = (7/2) R_{,ij}`, which forces `Delta R(0) = 0`.
    Hypothesis,
}

pub(crate) struct ConstraintSystem {
    n: usize,
    rows: Vec<Sparse>,
    projected_rows: Vec<Sparse>,
    gram_pinv: DMatrix<f64>,
    laplacian_row: usize,
}

fn compress(map: HashMap<usize, f64>) -> Sparse {
    let mut v: Sparse = map.into_iter().filter(|(_, x)| *x != 0.0).collect();
    v.sort_unstable_by_key(|e| e.0);
    v
}

fn build_rows(n: usize, kind: ConstraintKind) -> (Vec<Sparse>, usize) {
    let mut rows = Vec::new();
    let scalar_hessian = |map: &mut HashMap<usize, f64>, i: usize, j: usize, c: f64| {
        for a in 0..n {
            for b in 0..n {
                *map.entry(flatten(n, &[a, b, a, b, i, j])).or_default() += c;
            }
        }
    };
    // sum_m Ric_{im,mj} - R_{,ij} / 2
    for i in 0..n {
        for j in 0..n {
            let mut m = HashMap::new();
            for k in 0..n {
                for l in 0..n {
                    *m.entry(flatten(n, &[k, i, k, l, l, j])).or_default() += 1.0;
                }
            }
            scalar_hessian(&mut m, i, j, -0.5);
            rows.push(compress(m));
        }
    }
    if kind == ConstraintKind::Hypothesis {
        for i in 0..n {
            for j in 0..n {
                let mut m = HashMap::new();
                for k in 0..n {
                    for l in 0..n {
                        *m.entry(flatten(n, &[i, k, l, j, k, l])).or_default() += 1.0;
                    }
                }
                scalar_hessian(&mut m, i, j, -3.5);
                rows.push(compress(m));
            }
        }
    }
    let mut m = HashMap::new();
    for i in 0..n {
        scalar_hessian(&mut m, i, i, 1.0);
    }
    rows.push(compress(m));
    let lap = rows.len() - 1;
    (rows, lap)
}

/// `P e_t` for the symmetry projector `P`, which is symmetric, so this is the
/// scatter of one column.
fn project_unit(n: usize, t: usize, scale: f64, acc: &mut HashMap<usize, f64>, perms: &[([usize; 4], f64)]) {
    let ix = unflatten(n, t, 6);
    for (e, f) in [(ix[4], ix[5]), (ix[5], ix[4])] {
        let abcd = [ix[0], ix[1], ix[2], ix[3]];
        for (p, s) in PAIR_GROUP {
            let k = flatten(n, &[abcd[p[0]], abcd[p[1]], abcd[p[2]], abcd[p[3]], e, f]);
            *acc.entry(k).or_default() += 0.5 * 0.125 * s * scale;
        }
        for (p, s) in perms {
            let k = flatten(n, &[abcd[p[0]], abcd[p[1]], abcd[p[2]], abcd[p[3]], e, f]);
            *acc.entry(k).or_default() -= 0.5 * s * scale / 24.0;
        }
    }
}

fn sparse_dot(a: &Sparse, b: &Sparse) -> f64 {
    let (mut i, mut j, mut s) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    s
}

/// Pseudo-inverse of a symmetric positive semidefinite matrix through its
/// eigendecomposition, dropping eigenvalues below `1e-10` of the largest.
fn symmetric_pinv(g: DMatrix<f64>) -> DMatrix<f64> {
    let eig = nalgebra::SymmetricEigen::new(g);
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let inv = eig.eigenvalues.map(|v| if v.abs() > 1e-10 * top { 1.0 / v } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

impl ConstraintSystem {
    fn new(n: usize, kind: ConstraintKind) -> Self {
        let (rows, laplacian_row) = build_rows(n, kind);
        let perms = signed_permutations();
        let projected_rows: Vec<Sparse> = rows
            .iter()
            .map(|row| {
                let mut acc = HashMap::new();
                for &(t, v) in row {
                    project_unit(n, t, v, &mut acc, &perms);
                }
                compress(acc.into_iter().filter(|(_, v)| v.abs() > 1e-15).collect())
            })
            .collect();
        let m = rows.len();
        let gram = DMatrix::from_fn(m, m, |i, j| sparse_dot(&rows[i], &projected_rows[j]));
        let gram_pinv = symmetric_pinv(gram);
        Self { n, rows, projected_rows, gram_pinv, laplacian_row }
    }

    pub(crate) fn shared(n: usize, kind: ConstraintKind) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, ConstraintKind), Arc<ConstraintSystem>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(s) = cache.lock().expect("constraint cache").get(&(n, kind)) {
            return s.clone();
        }
        let built = Arc::new(Self::new(n, kind));
        cache.lock().expect("constraint cache").entry((n, kind)).or_insert(built).clone()
    }

    /// Residuals `C x - target`, the target being zero except on the `Delta R` row.
    pub(crate) fn residuals(&self, x: &[f64], laplacian_target: f64) -> Vec<f64> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let v: f64 = row.iter().map(|&(k, c)| c * x[k]).sum();
                if i == self.laplacian_row {
                    v - laplacian_target
                } else {
                    v
                }
            })
            .collect()
    }

    /// Minimal-norm correction of a symmetry-projected `x` onto the constraint set.
    pub(crate) fn correct(&self, x: &mut [f64], laplacian_target: f64) {
        debug_assert_eq!(x.len(), self.n.pow(6));
        let r = nalgebra::DVector::from_vec(self.residuals(x, laplacian_target));
        let w = &self.gram_pinv * r;
        for (row, &wi) in self.projected_rows.iter().zip(w.iter()) {
            if wi == 0.0 {
                continue;
            }
            for &(k, c) in row {
                x[k] -= wi * c;
            }
        }
    }
}

/// Symmetry projection of a raw second-derivative block: curvature symmetries
/// in the first four indices, symmetry in the two derivative indices.
pub(crate) fn project_rm2_symmetries(n: usize, raw: &[f64]) -> Vec<f64> {
    let mut x = riemann_project(n, raw, n * n);
    symmetrize_last_pair(n, &mut x);
    x
}

