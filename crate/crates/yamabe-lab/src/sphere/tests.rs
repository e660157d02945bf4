use num_rational::BigRational;
use num_traits::{One, Zero};

use super::*;

fn e(n: usize, idx: &[(usize, u8)]) -> Vec<u8> {
    let mut a = vec![0u8; n];
    for &(i, k) in idx {
        a[i] = k;
    }
    a
}

#[test]
fn quartic_moments_n10() {
    assert_eq!(sphere_monomial_moment(10, &e(10, &[(0, 2), (1, 2)])), rational(1, 120));
    assert_eq!(sphere_monomial_moment(10, &e(10, &[(0, 4)])), rational(1, 40));
    assert!(sphere_monomial_moment(10, &e(10, &[(0, 3), (1, 1)])).is_zero());
}

#[test]
fn moments_agree_with_gamma_rule() {
    for n in 3..=12 {
        let area = SphereArea::new(n).value();
        for alpha in [e(n, &[(0, 2)]), e(n, &[(0, 2), (2, 4)]), e(n, &[(1, 6)]), e(n, &[])] {
            let exact = to_f64(&sphere_monomial_moment(n, &alpha));
            let gamma = sphere_monomial_integral_gamma(n, &alpha) / area;
            assert!((exact - gamma).abs() < 1e-13 * exact.abs().max(1e-300), "n={n} {alpha:?}");
        }
    }
}

#[test]
fn sphere_area_known_values() {
    assert!((SphereArea::new(3).value() - 4.0 * std::f64::consts::PI).abs() < 1e-13);
    assert!((SphereArea::new(2).value() - 2.0 * std::f64::consts::PI).abs() < 1e-13);
    let s9 = SphereArea::new(10);
    assert_eq!(s9.coef, rational(1, 12));
    assert_eq!(s9.pi_power, 5);
    assert!((s9.value() - 25.5016).abs() < 1e-4);
}

#[test]
fn odd_constant_k1() {
    let c = odd_moment_constant(10, 1).unwrap();
    assert_eq!(c, rational(1, 40));
    let cval = to_f64(&c) * SphereArea::new(10).value();
    assert!((cval - 0.63754).abs() < 1e-5);
    let block = SphericalPolynomial::monomial(&e(10, &[(0, 3)]));
    let checks = verify_odd_moment(&block, 1).unwrap();
    assert!(checks.iter().all(|c| c.exact_match));
    assert!((checks[0].contraction - 6.0 * 3.0 / 120.0).abs() < 1e-15);
}

#[test]
fn ladder_examples() {
    let x1sq = SphericalPolynomial::monomial(&e(10, &[(0, 2)]));
    let avg = taylor_block_average(&x1sq, 1).unwrap();
    assert!((avg.moment_path - 0.1).abs() < 1e-15);
    assert_eq!(ladder_denominator(10, 3), BigRational::from_integer((48 * 14 * 12 * 10).into()));
    assert_eq!(ladder_denominator(7, 1), BigRational::from_integer(14.into()));
}

#[test]
fn harmonic_examples() {
    let n = 10;
    let xy = SphericalPolynomial::monomial(&e(n, &[(0, 1), (1, 1)]));
    let parts = decompose_harmonic(&xy).unwrap();
    assert_eq!(parts.len(), 1);
    assert_eq!(parts[0].eigenvalue, 2 * n);

    let x2 = SphericalPolynomial::monomial(&e(n, &[(0, 2)]));
    let parts = decompose_harmonic(&x2).unwrap();
    assert_eq!(parts.len(), 2);
    let expect_h2 = x2.sub(&SphericalPolynomial::radial_power(n, 1, rational(1, n as i64))).unwrap();
    assert_eq!(parts[0].polynomial, expect_h2);
    assert_eq!(parts[1].degree, 0);
    assert_eq!(parts[1].polynomial.coefficient(&vec![0; n]), rational(1, n as i64));
}

#[test]
fn degree_cap_is_enforced() {
    let p = SphericalPolynomial::monomial(&e(3, &[(0, 9)]));
    assert!(matches!(decompose_harmonic(&p), Err(crate::LabError::Unsupported(_))));
    assert!(decompose_harmonic_capped(&p, 9).is_ok());
}

/// Dense rational Gaussian elimination: solve for the harmonic pieces in the
/// monomial basis, independent of the projection formula.
fn linear_solve_decomposition(p: &SphericalPolynomial) -> Vec<SphericalPolynomial> {
    let n = p.n();
    let l = p.degree();
    let monos = |d: usize| -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let mut cur = vec![0u8; n];
        fn rec(i: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            if i + 1 == cur.len() {
                cur[i] = left as u8;
                out.push(cur.clone());
                return;
            }
            for k in (0..=left).rev() {
                cur[i] = k as u8;
                rec(i + 1, left - k, cur, out);
            }
        }
        rec(0, d, &mut cur, &mut out);
        out
    };
    // unknowns: coefficients of h_{l-2j} for each j; equations: P = sum |x|^{2j} h, and
    // Delta h_{l-2j} = 0.
    let mut cols: Vec<(usize, Vec<u8>)> = Vec::new();
    for j in 0..=l / 2 {
        for m in monos(l - 2 * j) {
            cols.push((j, m));
        }
    }
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    let mut rhs: Vec<BigRational> = Vec::new();
    let target = monos(l);
    let col_polys: Vec<SphericalPolynomial> = cols
        .iter()
        .map(|(j, m)| {
            let mut t = SphericalPolynomial::monomial(m);
            for _ in 0..*j {
                t = t.mul_r2();
            }
            t
        })
        .collect();
    for m in &target {
        rows.push(col_polys.iter().map(|c| c.coefficient(m)).collect());
        rhs.push(p.coefficient(m));
    }
    for j in 0..=l / 2 {
        let d = l - 2 * j;
        if d < 2 {
            continue;
        }
        for m in monos(d - 2) {
            let row = cols
                .iter()
                .map(|(jj, mm)| {
                    if *jj == j {
                        SphericalPolynomial::monomial(mm).laplacian().coefficient(&m)
                    } else {
                        BigRational::zero()
                    }
                })
                .collect();
            rows.push(row);
            rhs.push(BigRational::zero());
        }
    }
    let ncol = cols.len();
    let mut a: Vec<Vec<BigRational>> = rows
        .into_iter()
        .zip(rhs)
        .map(|(mut r, b)| {
            r.push(b);
            r
        })
        .collect();
    let mut piv_row = 0;
    let mut pivots = Vec::new();
    for c in 0..ncol {
        let Some(pr) = (piv_row..a.len()).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(piv_row, pr);
        let inv = BigRational::one() / a[piv_row][c].clone();
        for k in c..=ncol {
            a[piv_row][k] = &a[piv_row][k] * &inv;
        }
        for r in 0..a.len() {
            if r != piv_row && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for k in c..=ncol {
                    let v = &a[piv_row][k] * &f;
                    a[r][k] -= v;
                }
            }
        }
        pivots.push((piv_row, c));
        piv_row += 1;
    }
    assert_eq!(pivots.len(), ncol, "ansatz must be uniquely solvable");
    let mut sol = vec![BigRational::zero(); ncol];
    for (r, c) in pivots {
        sol[c] = a[r][ncol].clone();
    }
    (0..=l / 2)
        .map(|j| {
            let mut h = SphericalPolynomial::zero(n, l - 2 * j);
            for (k, (jj, m)) in cols.iter().enumerate() {
                if *jj == j {
                    h.add_term(m.clone(), sol[k].clone()).unwrap();
                }
            }
            h
        })
        .collect()
}

#[test]
fn projection_matches_linear_solve_oracle() {
    let n = 3;
    let mut p = SphericalPolynomial::zero(n, 4);
    p.add_term(vec![4, 0, 0], rational(3, 1)).unwrap();
    p.add_term(vec![1, 2, 1], rational(-2, 5)).unwrap();
    p.add_term(vec![0, 2, 2], rational(7, 3)).unwrap();
    p.add_term(vec![2, 1, 1], rational(1, 1)).unwrap();
    let oracle = linear_solve_decomposition(&p);
    let parts = decompose_harmonic(&p).unwrap();
    for h in &oracle {
        if h.is_zero() {
            continue;
        }
        let found = parts.iter().find(|c| c.degree == h.degree()).expect("degree present");
        assert_eq!(&found.polynomial, h);
    }
    assert_eq!(parts.len(), oracle.iter().filter(|h| !h.is_zero()).count());
}

#[test]
fn json_round_trip() {
    let mut p = SphericalPolynomial::zero(4, 3);
    p.add_term(vec![1, 1, 1, 0], rational(-7, 3)).unwrap();
    p.add_term(vec![3, 0, 0, 0], rational(1, 9)).unwrap();
    let j = serde_json::to_string(&p.to_json()).unwrap();
    let back = SphericalPolynomial::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
    assert_eq!(back, p);
}

#[test]
fn square_expansion_examples() {
    let n = 10;
    let mut h = vec![vec![0.0; n]; n];
    h[0][0] = 1.0;
    h[1][1] = -1.0;
    let s = expand_square(&h).unwrap();
    let nn = (n * (n + 2)) as f64;
    assert!((s.direct - 2.0 / (2.0 * nn)).abs() < 1e-15);
    assert_eq!(s.trace_part, 0.0);

    let mut h = vec![vec![0.0; n]; n];
    h[0][1] = 1.0;
    h[1][0] = 1.0;
    let s = expand_square(&h).unwrap();
    assert!((s.direct - 1.0 / nn).abs() < 1e-15);

    let s = expand_square(&vec![vec![0.0; n]; n]).unwrap();
    assert_eq!(s.direct, 0.0);
}

#[test]
fn compiled_jet_matches_exact_derivatives() {
    let mut p = SphericalPolynomial::zero(3, 3);
    p.add_term(vec![2, 1, 0], rational(2, 1)).unwrap();
    p.add_term(vec![0, 0, 3], rational(-1, 2)).unwrap();
    p.add_term(vec![1, 1, 1], rational(1, 1)).unwrap();
    let x = [0.3, -0.7, 1.1];
    let (v, g, h) = p.compile().jet2(&x);
    assert!((v - p.eval(&x)).abs() < 1e-15);
    for i in 0..3 {
        assert!((g[i] - p.derivative(i).eval(&x)).abs() < 1e-14);
        for j in 0..3 {
            assert!((h[i][j] - p.derivative(i).derivative(j).eval(&x)).abs() < 1e-14);
        }
    }
}
