//! Exact rational Gauss–Jordan elimination on sparse rows.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::polyring::Rational;

pub type SparseRow = BTreeMap<usize, Rational>;

/// Outcome of adding one equation to an [`IncrementalRref`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowOutcome {
    /// New pivot on this column.
    Pivot(usize),
    /// Implied by earlier equations.
    Redundant,
    /// Reduces to `0 = c` with `c != 0`.
    Inconsistent(Rational),
}

/// Reduced row echelon form built one equation at a time.
///
/// Each incoming row is reduced against the existing pivots, then pivots on
/// its lowest-index remaining variable; that variable is then eliminated from
/// every other pivot row, so the stored rows are always fully reduced.
#[derive(Debug, Clone, Default)]
pub struct IncrementalRref {
    rows: BTreeMap<usize, (SparseRow, Rational)>,
}

fn axpy(target: &mut SparseRow, factor: &Rational, source: &SparseRow) {
    for (&col, v) in source {
        let delta = factor * v;
        let entry = target.entry(col).or_insert_with(Rational::zero);
        *entry += delta;
        if entry.is_zero() {
            target.remove(&col);
        }
    }
}

impl IncrementalRref {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.rows.contains_key(&col)
    }

    /// Pivot rows keyed by pivot column; each row has coefficient 1 on its
    /// pivot and 0 on every other pivot column.
    pub fn rows(&self) -> impl Iterator<Item = (usize, &SparseRow, &Rational)> {
        self.rows.iter().map(|(&c, (r, b))| (c, r, b))
    }

    pub fn insert(&mut self, mut row: SparseRow, mut rhs: Rational) -> RowOutcome {
        row.retain(|_, v| !v.is_zero());
        let hits: Vec<usize> = row.keys().copied().filter(|c| self.rows.contains_key(c)).collect();
        for col in hits {
            let factor = match row.get(&col) {
                Some(f) => -f.clone(),
                None => continue,
            };
            let (prow, prhs) = &self.rows[&col];
            axpy(&mut row, &factor, prow);
            rhs += &factor * prhs;
        }
        let Some((&pivot, lead)) = row.iter().next() else {
            return if rhs.is_zero() {
                RowOutcome::Redundant
            } else {
                RowOutcome::Inconsistent(rhs)
            };
        };
        let inv = lead.recip();
        for v in row.values_mut() {
            *v *= &inv;
        }
        rhs *= &inv;
        debug_assert!(row[&pivot].is_one());
        for (prow, prhs) in self.rows.values_mut() {
            if let Some(f) = prow.get(&pivot).cloned() {
                let factor = -f;
                axpy(prow, &factor, &row);
                *prhs += &factor * &rhs;
            }
        }
        self.rows.insert(pivot, (row, rhs));
        RowOutcome::Pivot(pivot)
    }
}

/// Exact rank of a list of dense vectors.
pub fn rank_of(vectors: &[Vec<Rational>]) -> usize {
    let mut rref = IncrementalRref::new();
    for v in vectors {
        let row: SparseRow = v
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, x)| (i, x.clone()))
            .collect();
        rref.insert(row, Rational::zero());
    }
    rref.rank()
}
