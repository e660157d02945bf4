//! Dense index arithmetic for curvature arrays stored row-major.

#[inline]
pub(crate) fn idx4(n: usize, a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * n + b) * n + c) * n + d
}

#[inline]
pub(crate) fn idx5(n: usize, a: usize, b: usize, c: usize, d: usize, e: usize) -> usize {
    idx4(n, a, b, c, d) * n + e
}

#[inline]
pub(crate) fn idx6(n: usize, a: usize, b: usize, c: usize, d: usize, e: usize, f: usize) -> usize {
    idx5(n, a, b, c, d, e) * n + f
}

pub(crate) fn unflatten(n: usize, mut i: usize, rank: usize) -> [usize; 6] {
    let mut out = [0; 6];
    for k in (0..rank).rev() {
        out[k] = i % n;
        i /= n;
    }
    out
}

pub(crate) fn flatten(n: usize, ix: &[usize]) -> usize {
    ix.iter().fold(0, |acc, &v| acc * n + v)
}

/// Signed permutations of `(a, b, c, d)` generated by antisymmetry in each
/// pair and the pair swap.
pub(crate) const PAIR_GROUP: [([usize; 4], f64); 8] = [
    ([0, 1, 2, 3], 1.0),
    ([1, 0, 2, 3], -1.0),
    ([0, 1, 3, 2], -1.0),
    ([1, 0, 3, 2], 1.0),
    ([2, 3, 0, 1], 1.0),
    ([3, 2, 0, 1], -1.0),
    ([2, 3, 1, 0], -1.0),
    ([3, 2, 1, 0], 1.0),
];

/// All 24 permutations of four slots with their signs.
pub(crate) fn signed_permutations() -> Vec<([usize; 4], f64)> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    if p.iter().any(|&x| std::mem::replace(&mut seen[x], true)) {
                        continue;
                    }
                    let mut inv = 0;
                    for i in 0..4 {
                        for j in i + 1..4 {
                            if p[i] > p[j] {
                                inv += 1;
                            }
                        }
                    }
                    out.push((p, if inv % 2 == 0 { 1.0 } else { -1.0 }));
                }
            }
        }
    }
    out
}

/// Orthogonal projection of a 4-index block (with `block` trailing entries
/// per index tuple) onto algebraic curvature tensors: the pair-group average
/// followed by removal of the totally antisymmetric part.
pub(crate) fn riemann_project(n: usize, x: &[f64], block: usize) -> Vec<f64> {
    let stride = |a: usize, b: usize, c: usize, d: usize| idx4(n, a, b, c, d) * block;
    let mut y = vec![0.0; x.len()];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let ix = [a, b, c, d];
                    let out = stride(a, b, c, d);
                    for (p, s) in PAIR_GROUP {
                        let src = stride(ix[p[0]], ix[p[1]], ix[p[2]], ix[p[3]]);
                        for t in 0..block {
                            y[out + t] += 0.125 * s * x[src + t];
                        }
                    }
                }
            }
        }
    }
    let mut z = vec![0.0; x.len()];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let o = stride(a, b, c, d);
                    let s1 = stride(a, c, d, b);
                    let s2 = stride(a, d, b, c);
                    for t in 0..block {
                        z[o + t] = (2.0 * y[o + t] - y[s1 + t] - y[s2 + t]) / 3.0;
                    }
                }
            }
        }
    }
    z
}

/// Symmetrize the last two indices of a flat array whose trailing block is `n x n`.
pub(crate) fn symmetrize_last_pair(n: usize, x: &mut [f64]) {
    let nn = n * n;
    for chunk in x.chunks_mut(nn) {
        for e in 0..n {
            for f in e + 1..n {
                let m = 0.5 * (chunk[e * n + f] + chunk[f * n + e]);
                chunk[e * n + f] = m;
                chunk[f * n + e] = m;
            }
        }
    }
}

/// `Ric_{bd} = sum_a R_{abad}` for one 4-index slice read through `get`.
pub(crate) fn ricci_of(n: usize, get: impl Fn(usize, usize, usize, usize) -> f64) -> Vec<f64> {
    let mut ric = vec![0.0; n * n];
    for b in 0..n {
        for d in 0..n {
            ric[b * n + d] = (0..n).map(|a| get(a, b, a, d)).sum();
        }
    }
    ric
}

/// Remove the Ricci part of every 4-index slice, leaving the Weyl part.
pub(crate) fn weyl_project(n: usize, x: &[f64], block: usize) -> Vec<f64> {
    let mut out = x.to_vec();
    let nf = n as f64;
    for t in 0..block {
        let get = |a, b, c, d| x[idx4(n, a, b, c, d) * block + t];
        let ric = ricci_of(n, get);
        let scal: f64 = (0..n).map(|i| ric[i * n + i]).sum();
        let schouten: Vec<f64> = (0..n * n)
            .map(|k| {
                let diag = if k / n == k % n { 1.0 } else { 0.0 };
                (ric[k] - scal / (2.0 * (nf - 1.0)) * diag) / (nf - 2.0)
            })
            .collect();
        let p = |i: usize, j: usize| schouten[i * n + j];
        let dl = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let kn = p(a, c) * dl(b, d) + p(b, d) * dl(a, c) - p(a, d) * dl(b, c) - p(b, c) * dl(a, d);
                        out[idx4(n, a, b, c, d) * block + t] -= kn;
                    }
                }
            }
        }
    }
    out
}
