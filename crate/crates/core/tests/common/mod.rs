//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's algorithms; the oracles use plain
//! dense maps, brute-force enumeration, and textbook determinant formulas.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

pub type Q = BigRational;
pub type DensePoly = HashMap<Vec<u32>, Q>;

pub fn q(p: i64, d: i64) -> Q {
    Q::new(p.into(), d.into())
}

pub fn qi(p: i64) -> Q {
    Q::from_integer(p.into())
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_symsos"))
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

// ---- dense polynomial arithmetic ----

pub fn dense_mul(a: &DensePoly, b: &DensePoly) -> DensePoly {
    let mut out = DensePoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert_with(Q::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

pub fn dense_one(n: usize) -> DensePoly {
    DensePoly::from([(vec![0; n], Q::one())])
}

pub fn dense_sub(a: &DensePoly, b: &DensePoly) -> DensePoly {
    let mut out = a.clone();
    for (e, c) in b {
        *out.entry(e.clone()).or_insert_with(Q::zero) -= c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

pub fn dense_scale(a: &DensePoly, c: &Q) -> DensePoly {
    a.iter().map(|(e, v)| (e.clone(), v * c)).filter(|(_, v)| !v.is_zero()).collect()
}

pub fn dense_at_ones(a: &DensePoly) -> Q {
    a.values().fold(Q::zero(), |acc, c| acc + c)
}

pub fn dense_square_vars(a: &DensePoly) -> DensePoly {
    a.iter().map(|(e, c)| (e.iter().map(|x| 2 * x).collect(), c.clone())).collect()
}

pub fn dense_eval_f64(a: &DensePoly, x: &[f64]) -> f64 {
    a.iter()
        .map(|(e, c)| {
            let c = num_traits::ToPrimitive::to_f64(c).unwrap();
            c * e.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product::<f64>()
        })
        .sum()
}

/// Every exponent vector of total degree `d` in `n` variables.
pub fn compositions(n: usize, d: u32) -> Vec<Vec<u32>> {
    if n == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::new();
    for first in 0..=d {
        for mut rest in compositions(n - 1, d - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `h_d`: every monomial of degree `d` with coefficient 1.
pub fn oracle_h(d: u32, n: usize) -> DensePoly {
    compositions(n, d).into_iter().map(|e| (e, Q::one())).collect()
}

/// `e_d`: square-free monomials of degree `d`.
pub fn oracle_e(d: u32, n: usize) -> DensePoly {
    compositions(n, d)
        .into_iter()
        .filter(|e| e.iter().all(|&x| x <= 1))
        .map(|e| (e, Q::one()))
        .collect()
}

pub fn oracle_p(d: u32, n: usize) -> DensePoly {
    (0..n)
        .map(|i| {
            let mut e = vec![0; n];
            e[i] = d;
            (e, Q::one())
        })
        .collect()
}

/// `m_λ`: monomials whose sorted exponent vector is `λ` padded with zeros.
pub fn oracle_m(parts: &[u32], n: usize) -> DensePoly {
    let d: u32 = parts.iter().sum();
    let mut target = parts.to_vec();
    target.resize(n.max(parts.len()), 0);
    compositions(n, d)
        .into_iter()
        .filter(|e| {
            let mut s = e.clone();
            s.sort_unstable_by(|a, b| b.cmp(a));
            s.resize(target.len(), 0);
            s == target
        })
        .map(|e| (e, Q::one()))
        .collect()
}

/// `s_λ` as the generating function of semistandard Young tableaux with
/// entries in `1..=n`.
pub fn oracle_schur(parts: &[u32], n: usize) -> DensePoly {
    let cells: Vec<(usize, usize)> = parts
        .iter()
        .enumerate()
        .flat_map(|(r, &len)| (0..len as usize).map(move |c| (r, c)))
        .collect();
    let mut grid: Vec<Vec<usize>> = parts.iter().map(|&l| vec![0; l as usize]).collect();
    let mut out = DensePoly::new();
    fn fill(
        k: usize,
        cells: &[(usize, usize)],
        grid: &mut Vec<Vec<usize>>,
        n: usize,
        out: &mut DensePoly,
    ) {
        if k == cells.len() {
            let mut e = vec![0u32; n];
            for row in grid.iter() {
                for &v in row {
                    e[v - 1] += 1;
                }
            }
            *out.entry(e).or_insert_with(Q::zero) += Q::one();
            return;
        }
        let (r, c) = cells[k];
        let lo_row = if c > 0 { grid[r][c - 1] } else { 1 };
        let lo_col = if r > 0 { grid[r - 1][c] + 1 } else { 1 };
        for v in lo_row.max(lo_col)..=n {
            grid[r][c] = v;
            fill(k + 1, cells, grid, n, out);
        }
        grid[r][c] = 0;
    }
    fill(0, &cells, &mut grid, n, &mut out);
    out
}

pub fn oracle_product(factors: impl Iterator<Item = DensePoly>, n: usize) -> DensePoly {
    factors.fold(dense_one(n), |acc, f| dense_mul(&acc, &f))
}

/// Basis element by symbol `m e p h s`.
pub fn oracle_basis(symbol: char, parts: &[u32], n: usize) -> DensePoly {
    match symbol {
        'h' => oracle_product(parts.iter().map(|&d| oracle_h(d, n)), n),
        'e' => oracle_product(parts.iter().map(|&d| oracle_e(d, n)), n),
        'p' => oracle_product(parts.iter().map(|&d| oracle_p(d, n)), n),
        'm' => oracle_m(parts, n),
        's' => oracle_schur(parts, n),
        _ => panic!("unknown basis"),
    }
}

/// `(H_μ − H_λ)(x²)` by brute-force expansion.
pub fn oracle_target(mu: &[u32], lambda: &[u32], n: usize) -> DensePoly {
    let norm = |parts: &[u32]| {
        let g = oracle_basis('h', parts, n);
        let at_ones = dense_at_ones(&g);
        dense_scale(&g, &at_ones.recip())
    };
    dense_square_vars(&dense_sub(&norm(mu), &norm(lambda)))
}

pub fn dense_of(p: &symsos::polyring::SparsePoly) -> DensePoly {
    p.terms().map(|(e, c)| (e.exponents().to_vec(), c.clone())).collect()
}

// ---- exact linear algebra ----

pub fn det(mut m: Vec<Vec<Q>>) -> Q {
    let n = m.len();
    let mut sign = Q::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return Q::zero();
        };
        if p != k {
            m.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            let f = &m[i][k] / &m[k][k];
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                let delta = &f * &m[k][j];
                m[i][j] -= delta;
            }
        }
    }
    (0..n).fold(sign, |acc, i| acc * &m[i][i])
}

pub fn rank(mut m: Vec<Vec<Q>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(p, r);
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[r][c];
                for j in c..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        r += 1;
    }
    r
}

/// Coefficients `c_0..c_n` of `det(tI − A)` by exact interpolation at
/// `t = 0..n`.
pub fn char_poly(a: &[Vec<Q>]) -> Vec<Q> {
    let n = a.len();
    let ts: Vec<Q> = (0..=n as i64).map(qi).collect();
    let values: Vec<Q> = ts
        .iter()
        .map(|t| {
            let m: Vec<Vec<Q>> = (0..n)
                .map(|i| (0..n).map(|j| if i == j { t - &a[i][j] } else { -a[i][j].clone() }).collect())
                .collect();
            det(m)
        })
        .collect();
    // Lagrange interpolation into monomial coefficients
    let mut coeffs = vec![Q::zero(); n + 1];
    for (k, tk) in ts.iter().enumerate() {
        let mut basis = vec![Q::one()];
        let mut denom = Q::one();
        for (j, tj) in ts.iter().enumerate() {
            if j == k {
                continue;
            }
            let mut next = vec![Q::zero(); basis.len() + 1];
            for (i, b) in basis.iter().enumerate() {
                next[i + 1] += b;
                next[i] -= b * tj;
            }
            basis = next;
            denom *= tk - tj;
        }
        let scale = &values[k] / denom;
        for (i, b) in basis.iter().enumerate() {
            coeffs[i] += b * &scale;
        }
    }
    coeffs
}

/// PSD test for a symmetric rational matrix: its characteristic polynomial
/// is real-rooted, so every root is ≥ 0 exactly when the coefficients
/// alternate in sign (Descartes' rule applied to `p(−t)`).
pub fn oracle_psd(a: &[Vec<Q>]) -> bool {
    let c = char_poly(a);
    let n = a.len();
    c.iter().enumerate().all(|(k, ck)| {
        let signed = if (n - k) % 2 == 0 { ck.clone() } else { -ck.clone() };
        !signed.is_negative()
    })
}

pub fn to_rows(a: &symsos::matrix::SymMatrix<Q>) -> Vec<Vec<Q>> {
    (0..a.dim()).map(|i| (0..a.dim()).map(|j| a.get(i, j).clone()).collect()).collect()
}

pub fn from_rows(rows: &[Vec<Q>]) -> symsos::matrix::SymMatrix<Q> {
    symsos::matrix::SymMatrix::from_fn(rows.len(), |i, j| rows[i][j].clone())
}

// ---- random matrices ----

pub fn random_small_rational<R: Rng>(rng: &mut R) -> Q {
    let num = rng.random_range(-6i64..=6);
    let den = rng.random_range(1i64..=4);
    q(num, den)
}

/// `BᵀB` for a random `k × n` rational `B`; rank at most `k`.
pub fn random_gram<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<Vec<Q>> {
    let b: Vec<Vec<Q>> = (0..k).map(|_| (0..n).map(|_| random_small_rational(rng)).collect()).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..k).fold(Q::zero(), |acc, r| acc + &b[r][i] * &b[r][j]))
                .collect()
        })
        .collect()
}

pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<Q>> {
    let mut a = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = random_small_rational(rng);
            a[i][j] = v.clone();
            a[j][i] = v;
        }
    }
    a
}

// ---- rational approximation ----

/// Closest `p/q` with `q <= bound`, ties to smaller `q` then smaller `|p|`,
/// by scanning every denominator.
pub fn brute_best_rational(x: &Q, bound: u64) -> Q {
    let mut best: Option<(Q, Q)> = None;
    for den in 1..=bound {
        let d = BigInt::from(den);
        let scaled = x * Q::from_integer(d.clone());
        let lo = scaled.floor().to_integer();
        for num in [lo.clone(), lo + 1] {
            let cand = Q::new(num, d.clone());
            let dist = (x - &cand).abs();
            let better = match &best {
                None => true,
                Some((bd, bc)) => {
                    dist < *bd
                        || (dist == *bd
                            && (cand.denom(), cand.numer().abs()) < (bc.denom(), bc.numer().abs()))
                }
            };
            if better {
                best = Some((dist, cand));
            }
        }
    }
    best.unwrap().1
}

// ---- permutations ----

pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in all_permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut v = p.clone();
            v.insert(pos, n - 1);
            out.push(v);
        }
    }
    out
}

/// Dominance by prefix sums, written independently of the library.
pub fn dominates_or_equal(mu: &[u32], lambda: &[u32]) -> bool {
    let len = mu.len().max(lambda.len());
    let (mut a, mut b) = (0u32, 0u32);
    for i in 0..len {
        a += mu.get(i).copied().unwrap_or(0);
        b += lambda.get(i).copied().unwrap_or(0);
        if a < b {
            return false;
        }
    }
    true
}

/// All partitions of `d`, any order.
pub fn partitions(d: u32) -> Vec<Vec<u32>> {
    fn rec(rem: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for p in 1..=rem.min(max) {
            cur.push(p);
            rec(rem - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, d, &mut Vec::new(), &mut out);
    out
}

// ---- transcribed data ----

/// The displayed coefficients of `(H_44 − H_521)(x²)`, times 9450, exactly
/// as printed (including the entry for x1^10*x2^4*x3^2).
pub const PRINTED_44_521: [([u32; 3], i64); 45] = [
    ([16, 0, 0], 17), ([14, 2, 0], 9), ([12, 4, 0], 1), ([10, 6, 0], 18),
    ([8, 8, 0], 60), ([6, 10, 0], 18), ([4, 12, 0], 1), ([2, 14, 0], 9),
    ([0, 16, 0], 17), ([14, 0, 2], 9), ([12, 2, 2], -32), ([10, 4, 2], -6),
    ([8, 6, 2], 11), ([6, 8, 2], 11), ([4, 10, 2], -48), ([2, 12, 2], -32),
    ([0, 14, 2], 9), ([12, 0, 4], 1), ([10, 2, 4], -48), ([8, 4, 4], -22),
    ([6, 6, 4], -5), ([4, 8, 4], -22), ([2, 10, 4], -48), ([0, 12, 4], 1),
    ([10, 0, 6], 18), ([8, 2, 6], 11), ([6, 4, 6], -5), ([4, 6, 6], -5),
    ([2, 8, 6], 11), ([0, 10, 6], 18), ([8, 0, 8], 60), ([6, 2, 8], 11),
    ([4, 4, 8], -22), ([2, 6, 8], 11), ([0, 8, 8], 60), ([6, 0, 10], 18),
    ([4, 2, 10], -48), ([2, 4, 10], -48), ([0, 6, 10], 18), ([4, 0, 12], 1),
    ([2, 2, 12], -32), ([0, 4, 12], 1), ([2, 0, 14], 9), ([0, 2, 14], 9),
    ([0, 0, 16], 17),
];

/// The 10×10 Gram matrix for `(H_21 − H_111)(x²)`, times 108.
pub const PRINTED_A_21_111: [[i64; 10]; 10] = [
    [2, 0, 0, -1, 0, -1, 0, 0, 0, 0],
    [0, 2, 0, 0, 0, 0, -1, 0, -1, 0],
    [0, 0, 2, 0, 0, 0, 0, -1, 0, -1],
    [-1, 0, 0, 2, 0, -1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [-1, 0, 0, -1, 0, 2, 0, 0, 0, 0],
    [0, -1, 0, 0, 0, 0, 2, 0, -1, 0],
    [0, 0, -1, 0, 0, 0, 0, 2, 0, -1],
    [0, -1, 0, 0, 0, 0, -1, 0, 2, 0],
    [0, 0, -1, 0, 0, 0, 0, -1, 0, 2],
];

pub fn printed_a() -> Vec<Vec<Q>> {
    PRINTED_A_21_111
        .iter()
        .map(|row| row.iter().map(|&v| q(v, 108)).collect())
        .collect()
}
