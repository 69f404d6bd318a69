//! Exact sparse multivariate polynomials over the rationals.
//!
//! Monomials are kept in the canonical graded-lexicographic order with
//! `x1 > x2 > ... > xn`: higher total degree first, then larger exponent of
//! `x1`, then of `x2`, and so on. Every iteration, printing, and basis
//! indexing in the crate follows this order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("variable count mismatch: {left} vs {right}")]
    VarCountMismatch { left: usize, right: usize },
    #[error("point has {got} coordinates, polynomial has {expected} variables")]
    PointLength { expected: usize, got: usize },
    #[error("invalid rational `{0}`")]
    BadRational(String),
    #[error("malformed term line `{0}`")]
    BadTerm(String),
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_rational(s: &str) -> Result<Rational, PolyError> {
    let s = s.trim();
    let bad = || PolyError::BadRational(s.to_string());
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => BigInt::from_str(s).map(Rational::from_integer).map_err(|_| bad()),
    }
}

/// Formats as `p/q`, including `/1` for integers. This is the serialized form.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn rational_from_int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Exponents of a monomial `x1^a1 ... xn^an`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentVector(Vec<u32>);

impl ExponentVector {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn zero(nvars: usize) -> Self {
        Self(vec![0; nvars])
    }

    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        Self(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn product(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn doubled(&self) -> Self {
        Self(self.0.iter().map(|a| 2 * a).collect())
    }

    /// Exponent vector of the monomial after sending `x_i` to `x_{perm[i]}`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = vec![0; self.0.len()];
        for (i, &a) in self.0.iter().enumerate() {
            out[perm[i]] = a;
        }
        Self(out)
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        let mut acc = Rational::one();
        for (x, &a) in point.iter().zip(&self.0) {
            if a > 0 {
                acc *= num_traits::pow(x.clone(), a as usize);
            }
        }
        acc
    }

    pub fn eval_float(&self, point: &[f64]) -> f64 {
        point
            .iter()
            .zip(&self.0)
            .map(|(x, &a)| x.powi(a as i32))
            .product()
    }

    /// Writes the monomial as `x1^2*x3`, or `1` for the constant monomial.
    pub fn fmt_monomial(&self) -> String {
        let factors: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(i, &a)| {
                if a == 1 {
                    format!("x{}", i + 1)
                } else {
                    format!("x{}^{}", i + 1, a)
                }
            })
            .collect();
        if factors.is_empty() {
            "1".to_string()
        } else {
            factors.join("*")
        }
    }
}

impl Ord for ExponentVector {
    /// Canonical position: `a < b` when `a` is printed before `b`.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .degree()
            .cmp(&self.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for ExponentVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate polynomial with exact rational coefficients.
///
/// No stored coefficient is ever zero, and every exponent vector has length
/// `nvars`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SparsePoly {
    nvars: usize,
    terms: BTreeMap<ExponentVector, Rational>,
}

impl SparsePoly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::monomial(ExponentVector::zero(nvars), c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    /// The polynomial `x_{var+1}` (zero-based `var`).
    pub fn variable(nvars: usize, var: usize) -> Self {
        Self::monomial(ExponentVector::unit(nvars, var), Rational::one())
    }

    pub fn monomial(exps: ExponentVector, c: Rational) -> Self {
        let nvars = exps.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Self { nvars, terms }
    }

    /// Builds a polynomial from (exponents, coefficient) pairs, merging repeats
    /// and dropping zeros.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (ExponentVector, Rational)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(PolyError::VarCountMismatch {
                    left: nvars,
                    right: e.len(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: ExponentVector, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &ExponentVector) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(ExponentVector::degree).max()
    }

    /// The common degree of all terms, if the polynomial is nonzero and
    /// homogeneous.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(ExponentVector::degree);
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    fn check_vars(&self, other: &Self) -> Result<(), PolyError> {
        if self.nvars != other.nvars {
            return Err(PolyError::VarCountMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        let mut out = Self::zero(self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.product(b), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, v)| (e.clone(), v * c))
                .collect(),
        }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::PointLength {
                expected: self.nvars,
                got: point.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .fold(Rational::zero(), |acc, (e, c)| acc + c * e.eval(point)))
    }

    /// Floating-point evaluation as a plain sum of terms.
    ///
    /// Panics if `point.len() != nvars`.
    pub fn eval_float(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars, "point length mismatch");
        self.terms
            .iter()
            .map(|(e, c)| rational_to_f64(c) * e.eval_float(point))
            .sum()
    }

    /// `p(x1^2, ..., xn^2)`: every exponent doubled, coefficients unchanged.
    pub fn substitute_squares(&self) -> Self {
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.doubled(), c.clone()))
                .collect(),
        }
    }

    /// The polynomial with `x_i` renamed to `x_{perm[i]}`.
    pub fn permute_vars(&self, perm: &[usize]) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.permuted(perm), c.clone());
        }
        out
    }

    /// Invariance under every permutation of the variables, checked on the
    /// transposition `(1 2)` and the cycle `(1 2 ... n)`, which generate the
    /// symmetric group.
    pub fn is_symmetric(&self) -> bool {
        symmetric_group_generators(self.nvars)
            .iter()
            .all(|g| &self.permute_vars(g) == self)
    }

    pub fn max_abs_coeff(&self) -> Rational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// One term per line: `num/den e1 e2 ... en`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (e, c) in &self.terms {
            s.push_str(&format_rational(c));
            for a in e.exponents() {
                s.push(' ');
                s.push_str(&a.to_string());
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(nvars: usize, text: &str) -> Result<Self, PolyError> {
        let mut terms = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let coeff = parse_rational(fields.next().unwrap_or_default())?;
            let exps = fields
                .map(|f| f.parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| PolyError::BadTerm(line.to_string()))?;
            if exps.len() != nvars {
                return Err(PolyError::BadTerm(line.to_string()));
            }
            terms.push((ExponentVector::new(exps), coeff));
        }
        Self::from_terms(nvars, terms)
    }

    pub fn to_json_terms(&self) -> Vec<TermJson> {
        self.terms
            .iter()
            .map(|(e, c)| TermJson {
                coeff: format_rational(c),
                exps: e.exponents().to_vec(),
            })
            .collect()
    }

    /// Inverse of [`SparsePoly::to_json_terms`]. `nvars` is taken from the terms
    /// when present, and from `fallback_nvars` for the zero polynomial.
    pub fn from_json_terms(terms: &[TermJson], fallback_nvars: usize) -> Result<Self, PolyError> {
        let nvars = terms.first().map_or(fallback_nvars, |t| t.exps.len());
        let parsed = terms
            .iter()
            .map(|t| Ok((ExponentVector::new(t.exps.clone()), parse_rational(&t.coeff)?)))
            .collect::<Result<Vec<_>, PolyError>>()?;
        Self::from_terms(nvars, parsed)
    }
}

/// JSON form of one term: `{"coeff": "num/den", "exps": [e1, ..., en]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    pub exps: Vec<u32>,
}

/// The transposition `(1 2)` and the cycle `(1 2 ... n)`; empty for `n < 2`.
pub fn symmetric_group_generators(nvars: usize) -> Vec<Vec<usize>> {
    if nvars < 2 {
        return Vec::new();
    }
    let mut swap: Vec<usize> = (0..nvars).collect();
    swap.swap(0, 1);
    let cycle: Vec<usize> = (0..nvars).map(|i| (i + 1) % nvars).collect();
    if nvars == 2 {
        vec![swap]
    } else {
        vec![swap, cycle]
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mono = e.fmt_monomial();
            match (abs.is_one(), mono.as_str()) {
                (true, "1") => write!(f, "1")?,
                (true, m) => write!(f, "{m}")?,
                (false, "1") => write!(f, "{abs}")?,
                (false, m) => write!(f, "{abs}*{m}")?,
            }
        }
        Ok(())
    }
}

impl Add for &SparsePoly {
    type Output = SparsePoly;
    fn add(self, rhs: &SparsePoly) -> SparsePoly {
        self.try_add(rhs).expect("polynomial addition")
    }
}

impl Sub for &SparsePoly {
    type Output = SparsePoly;
    fn sub(self, rhs: &SparsePoly) -> SparsePoly {
        self.try_sub(rhs).expect("polynomial subtraction")
    }
}

impl Mul for &SparsePoly {
    type Output = SparsePoly;
    fn mul(self, rhs: &SparsePoly) -> SparsePoly {
        self.try_mul(rhs).expect("polynomial multiplication")
    }
}

impl Neg for &SparsePoly {
    type Output = SparsePoly;
    fn neg(self) -> SparsePoly {
        self.scale(&-Rational::one())
    }
}
