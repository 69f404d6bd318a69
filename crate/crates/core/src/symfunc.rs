//! Partitions, dominance order, and monomial expansions of the classical
//! symmetric-function bases in finitely many variables.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polyring::{ExponentVector, Rational, SparsePoly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymError {
    #[error("invalid partition `{0}`: parts must be positive and weakly decreasing")]
    InvalidPartition(String),
    #[error("unknown basis `{0}` (expected one of m, e, p, h, s)")]
    UnknownBasis(String),
    #[error("partitions {mu} and {lambda} have different weights")]
    WeightMismatch { mu: Partition, lambda: Partition },
    #[error("{basis}_{partition} vanishes at the all-ones point in {nvars} variables")]
    ZeroAtOnes {
        basis: BasisKind,
        partition: Partition,
        nvars: usize,
    },
}

/// A weakly decreasing sequence of positive integers.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Partition {
    parts: Vec<u32>,
    weight: u32,
}

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self, SymError> {
        let valid = !parts.is_empty()
            && parts.iter().all(|&p| p > 0)
            && parts.windows(2).all(|w| w[0] >= w[1]);
        if !valid {
            let shown: Vec<String> = parts.iter().map(u32::to_string).collect();
            return Err(SymError::InvalidPartition(shown.join(",")));
        }
        let weight = parts.iter().sum();
        Ok(Self { parts, weight })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    fn prefix_sums(&self, len: usize) -> Vec<u32> {
        let mut acc = 0;
        (0..len)
            .map(|i| {
                acc += self.parts.get(i).copied().unwrap_or(0);
                acc
            })
            .collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.iter().all(|&p| p <= 9) {
            for p in &self.parts {
                write!(f, "{p}")?;
            }
            Ok(())
        } else {
            let shown: Vec<String> = self.parts.iter().map(u32::to_string).collect();
            write!(f, "{}", shown.join(","))
        }
    }
}

impl FromStr for Partition {
    type Err = SymError;

    /// Accepts `521` (one digit per part) or `10,3,1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || SymError::InvalidPartition(s.to_string());
        let parts = if s.contains(',') {
            s.split(',')
                .map(|p| p.trim().parse::<u32>().map_err(|_| bad()))
                .collect::<Result<Vec<_>, _>>()?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).ok_or_else(bad))
                .collect::<Result<Vec<_>, _>>()?
        };
        Self::new(parts).map_err(|_| bad())
    }
}

impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Outcome of comparing `mu` against `lambda` in dominance order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominance {
    Dominates,
    DominatedBy,
    Equal,
    Incomparable,
}

impl fmt::Display for Dominance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dominance::Dominates => "dominates",
            Dominance::DominatedBy => "dominated_by",
            Dominance::Equal => "equal",
            Dominance::Incomparable => "incomparable",
        })
    }
}

/// Compares prefix sums (zero padded). `Dominates` means `mu ⪰ lambda` with
/// `mu != lambda`.
pub fn dominance_compare(mu: &Partition, lambda: &Partition) -> Result<Dominance, SymError> {
    if mu.weight != lambda.weight {
        return Err(SymError::WeightMismatch {
            mu: mu.clone(),
            lambda: lambda.clone(),
        });
    }
    let len = mu.len().max(lambda.len());
    let (a, b) = (mu.prefix_sums(len), lambda.prefix_sums(len));
    let ge = a.iter().zip(&b).all(|(x, y)| x >= y);
    let le = a.iter().zip(&b).all(|(x, y)| x <= y);
    Ok(match (ge, le) {
        (true, true) => Dominance::Equal,
        (true, false) => Dominance::Dominates,
        (false, true) => Dominance::DominatedBy,
        (false, false) => Dominance::Incomparable,
    })
}

/// All partitions of `d` in reverse-lexicographic order, `(d)` first.
pub fn partitions_of(d: u32) -> Vec<Partition> {
    fn rec(rem: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rem == 0 {
            out.push(Partition::new(cur.clone()).expect("generated partition"));
            return;
        }
        for p in (1..=rem.min(max)).rev() {
            cur.push(p);
            rec(rem - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if d > 0 {
        rec(d, d, &mut Vec::new(), &mut out);
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    Monomial,
    Elementary,
    PowerSum,
    Homogeneous,
    Schur,
}

impl BasisKind {
    pub const ALL: [BasisKind; 5] = [
        BasisKind::Monomial,
        BasisKind::Elementary,
        BasisKind::PowerSum,
        BasisKind::Homogeneous,
        BasisKind::Schur,
    ];

    pub fn symbol(self) -> char {
        match self {
            BasisKind::Monomial => 'm',
            BasisKind::Elementary => 'e',
            BasisKind::PowerSum => 'p',
            BasisKind::Homogeneous => 'h',
            BasisKind::Schur => 's',
        }
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for BasisKind {
    type Err = SymError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "m" | "monomial" => BasisKind::Monomial,
            "e" | "elementary" => BasisKind::Elementary,
            "p" | "power-sum" | "powersum" => BasisKind::PowerSum,
            "h" | "homogeneous" => BasisKind::Homogeneous,
            "s" | "schur" => BasisKind::Schur,
            other => return Err(SymError::UnknownBasis(other.to_string())),
        })
    }
}

/// Exponent vectors of degree `d` in `nvars` variables, canonical order.
pub fn monomials_of_degree(nvars: usize, d: u32) -> Vec<ExponentVector> {
    fn rec(n: usize, i: usize, rem: u32, cur: &mut Vec<u32>, out: &mut Vec<ExponentVector>) {
        if i + 1 == n {
            cur.push(rem);
            out.push(ExponentVector::new(cur.clone()));
            cur.pop();
            return;
        }
        for a in (0..=rem).rev() {
            cur.push(a);
            rec(n, i + 1, rem - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        return out;
    }
    rec(nvars, 0, d, &mut Vec::with_capacity(nvars), &mut out);
    out
}

fn sum_of(nvars: usize, exps: impl IntoIterator<Item = ExponentVector>) -> SparsePoly {
    SparsePoly::from_terms(nvars, exps.into_iter().map(|e| (e, Rational::one())))
        .expect("exponent vectors have nvars entries")
}

type HCache = Mutex<HashMap<(u32, usize), SparsePoly>>;

/// `h_d` in `nvars` variables; memoized per `(d, nvars)`.
pub fn complete_homogeneous(d: u32, nvars: usize) -> SparsePoly {
    static CACHE: OnceLock<HCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().expect("h cache").get(&(d, nvars)) {
        return p.clone();
    }
    let p = sum_of(nvars, monomials_of_degree(nvars, d));
    cache
        .lock()
        .expect("h cache")
        .insert((d, nvars), p.clone());
    p
}

pub fn elementary(d: u32, nvars: usize) -> SparsePoly {
    sum_of(
        nvars,
        monomials_of_degree(nvars, d)
            .into_iter()
            .filter(|e| e.exponents().iter().all(|&a| a <= 1)),
    )
}

pub fn power_sum(d: u32, nvars: usize) -> SparsePoly {
    sum_of(
        nvars,
        (0..nvars).map(|i| {
            let mut e = vec![0; nvars];
            e[i] = d;
            ExponentVector::new(e)
        }),
    )
}

fn monomial_symmetric(lambda: &Partition, nvars: usize) -> SparsePoly {
    if lambda.len() > nvars {
        return SparsePoly::zero(nvars);
    }
    sum_of(
        nvars,
        monomials_of_degree(nvars, lambda.weight()).into_iter().filter(|e| {
            let mut nz: Vec<u32> = e.exponents().iter().copied().filter(|&a| a > 0).collect();
            nz.sort_unstable_by(|a, b| b.cmp(a));
            nz == lambda.parts()
        }),
    )
}

fn product_of(nvars: usize, factors: impl IntoIterator<Item = SparsePoly>) -> SparsePoly {
    factors
        .into_iter()
        .fold(SparsePoly::one(nvars), |acc, f| &acc * &f)
}

/// `h_k` with `h_0 = 1` and `h_k = 0` for `k < 0`.
fn h_signed(k: i64, nvars: usize) -> SparsePoly {
    match k {
        k if k < 0 => SparsePoly::zero(nvars),
        0 => SparsePoly::one(nvars),
        k => complete_homogeneous(k as u32, nvars),
    }
}

/// Jacobi–Trudi matrix `(h_{λ_i - i + j})` for a partition.
pub fn jacobi_trudi_matrix(lambda: &Partition, nvars: usize) -> Vec<Vec<SparsePoly>> {
    let l = lambda.len();
    (0..l)
        .map(|i| {
            (0..l)
                .map(|j| h_signed(lambda.parts()[i] as i64 - i as i64 + j as i64, nvars))
                .collect()
        })
        .collect()
}

/// Determinant by cofactor expansion along rows, memoized on the set of
/// remaining columns.
pub fn poly_determinant(m: &[Vec<SparsePoly>], nvars: usize) -> SparsePoly {
    fn rec(
        m: &[Vec<SparsePoly>],
        row: usize,
        cols: u64,
        nvars: usize,
        memo: &mut HashMap<u64, SparsePoly>,
    ) -> SparsePoly {
        if row == m.len() {
            return SparsePoly::one(nvars);
        }
        if let Some(p) = memo.get(&cols) {
            return p.clone();
        }
        let mut acc = SparsePoly::zero(nvars);
        let mut sign_pos = true;
        for j in 0..m.len() {
            if cols & (1 << j) == 0 {
                continue;
            }
            let entry = &m[row][j];
            if !entry.is_zero() {
                let minor = rec(m, row + 1, cols & !(1 << j), nvars, memo);
                let term = entry * &minor;
                acc = if sign_pos { &acc + &term } else { &acc - &term };
            }
            sign_pos = !sign_pos;
        }
        memo.insert(cols, acc.clone());
        acc
    }
    assert!(m.len() < 64, "determinant too large for cofactor expansion");
    rec(m, 0, (1u64 << m.len()) - 1, nvars, &mut HashMap::new())
}

/// Monomial expansion of the basis element indexed by `lambda` in `nvars`
/// variables. Elementary, monomial, and Schur elements vanish when `nvars`
/// is too small.
pub fn expand(basis: BasisKind, lambda: &Partition, nvars: usize) -> SparsePoly {
    assert!(nvars >= 1, "need at least one variable");
    let parts = lambda.parts().iter().copied();
    match basis {
        BasisKind::Homogeneous => product_of(nvars, parts.map(|d| complete_homogeneous(d, nvars))),
        BasisKind::Elementary => product_of(nvars, parts.map(|d| elementary(d, nvars))),
        BasisKind::PowerSum => product_of(nvars, parts.map(|d| power_sum(d, nvars))),
        BasisKind::Monomial => monomial_symmetric(lambda, nvars),
        BasisKind::Schur => poly_determinant(&jacobi_trudi_matrix(lambda, nvars), nvars),
    }
}

/// `g_λ(1, ..., 1)`. Closed forms for `h` and `p`; expansion otherwise.
pub fn eval_at_ones(basis: BasisKind, lambda: &Partition, nvars: usize) -> Rational {
    match basis {
        BasisKind::Homogeneous => {
            let n = BigInt::from(nvars);
            let prod = lambda.parts().iter().fold(BigInt::one(), |acc, &d| {
                let d = BigInt::from(d);
                acc * num_integer::binomial(&n + &d - BigInt::one(), d)
            });
            Rational::from_integer(prod)
        }
        BasisKind::PowerSum => {
            Rational::from_integer(num_traits::pow(BigInt::from(nvars), lambda.len()))
        }
        _ => {
            let ones = vec![Rational::one(); nvars];
            expand(basis, lambda, nvars)
                .eval(&ones)
                .expect("point length matches")
        }
    }
}

/// Term-normalized `G_λ = g_λ / g_λ(1)`.
pub fn normalized(basis: BasisKind, lambda: &Partition, nvars: usize) -> Result<SparsePoly, SymError> {
    let at_ones = eval_at_ones(basis, lambda, nvars);
    if at_ones.is_zero() {
        return Err(SymError::ZeroAtOnes {
            basis,
            partition: lambda.clone(),
            nvars,
        });
    }
    Ok(expand(basis, lambda, nvars).scale(&at_ones.recip()))
}

/// `G_μ - G_λ` for the chosen basis.
pub fn normalized_difference(
    basis: BasisKind,
    mu: &Partition,
    lambda: &Partition,
    nvars: usize,
) -> Result<SparsePoly, SymError> {
    if mu.weight() != lambda.weight() {
        return Err(SymError::WeightMismatch {
            mu: mu.clone(),
            lambda: lambda.clone(),
        });
    }
    let a = normalized(basis, mu, nvars)?;
    let b = normalized(basis, lambda, nvars)?;
    Ok(&a - &b)
}

/// `(H_μ - H_λ)(x1^2, ..., xn^2)`, the polynomial whose SOS decomposition
/// certifies `H_λ <= H_μ` on the nonnegative orthant.
pub fn squared_homogeneous_difference(
    mu: &Partition,
    lambda: &Partition,
    nvars: usize,
) -> Result<SparsePoly, SymError> {
    Ok(normalized_difference(BasisKind::Homogeneous, mu, lambda, nvars)?.substitute_squares())
}
