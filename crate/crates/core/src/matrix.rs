//! Dense symmetric matrices with upper-triangle storage.
//!
//! The text file format is a first line holding `N`, followed by the
//! `N(N+1)/2` upper-triangle entries `p/q` in row-major order, separated by
//! whitespace or commas.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_traits::Zero;
use thiserror::Error;

use crate::polyring::{format_rational, parse_rational, rational_to_f64, Rational};

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix file is empty")]
    Empty,
    #[error("bad dimension line `{0}`")]
    BadDimension(String),
    #[error("expected {expected} upper-triangle entries, found {found}")]
    EntryCount { expected: usize, found: usize },
    #[error("entry {index}: {source}")]
    BadEntry {
        index: usize,
        source: crate::polyring::PolyError,
    },
}

/// Symmetric matrix; only entries with `i <= j` are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Clone> SymMatrix<T> {
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds from upper-triangle entries in row-major order.
    pub fn from_upper(dim: usize, data: Vec<T>) -> Option<Self> {
        (data.len() == dim * (dim + 1) / 2).then_some(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        debug_assert!(j < self.dim);
        // row i starts after sum_{r<i} (dim - r) entries
        i * self.dim - i * i.saturating_sub(1) / 2 + (j - i)
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[self.offset(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = self.offset(i, j);
        self.data[k] = v;
    }

    pub fn upper(&self) -> &[T] {
        &self.data
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> SymMatrix<U> {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// `A[perm[i], perm[j]]` at position `(i, j)`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(perm[i], perm[j]).clone())
    }
}

impl<T: Clone + Zero> SymMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| T::zero())
    }
}

impl SymMatrix<f64> {
    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| *self.get(i, j))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl SymMatrix<Rational> {
    pub fn to_f64(&self) -> SymMatrix<f64> {
        self.map(rational_to_f64)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim).fold(Rational::zero(), |acc, j| {
                    if v[j].is_zero() {
                        acc
                    } else {
                        acc + self.get(i, j) * &v[j]
                    }
                })
            })
            .collect()
    }

    /// Renders the matrix file format, one row of the upper triangle per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.dim);
        for i in 0..self.dim {
            let row: Vec<String> = (i..self.dim).map(|j| format_rational(self.get(i, j))).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, MatrixError> {
        let mut tokens = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty());
        let first = tokens.next().ok_or(MatrixError::Empty)?;
        let dim: usize = first
            .parse()
            .map_err(|_| MatrixError::BadDimension(first.to_string()))?;
        let entries = tokens
            .enumerate()
            .map(|(index, t)| parse_rational(t).map_err(|source| MatrixError::BadEntry { index, source }))
            .collect::<Result<Vec<_>, _>>()?;
        let expected = dim * (dim + 1) / 2;
        if entries.len() != expected {
            return Err(MatrixError::EntryCount {
                expected,
                found: entries.len(),
            });
        }
        Ok(Self { dim, data: entries })
    }

    /// Upper-triangle entries as `p/q` strings.
    pub fn upper_strings(&self) -> Vec<String> {
        self.data.iter().map(format_rational).collect()
    }
}
