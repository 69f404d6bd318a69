//! Gram-matrix models for SOS feasibility problems.
//!
//! A homogeneous target `h` of degree `2d` is a sum of squares iff
//! `h = mᵀ A m` for some PSD matrix `A`, with `m` the vector of all degree-`d`
//! monomials. The model keeps one unknown per orbit of matrix positions under
//! the variable-permutation action (so the fixed-point condition holds by
//! construction), adds the coefficient-matching and kernel equations, and
//! solves them exactly into an affine parametrization by free orbit values.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exact::{rank_of, IncrementalRref, RowOutcome, SparseRow};
use crate::matrix::SymMatrix;
use crate::polyring::{
    format_rational, rational_to_f64, symmetric_group_generators, ExponentVector, Rational,
    SparsePoly,
};
use crate::symfunc::monomials_of_degree;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("target is the zero polynomial")]
    ZeroTarget,
    #[error("target is not homogeneous")]
    NotHomogeneous,
    #[error("target has odd degree {0}")]
    OddDegree(u32),
    #[error("target is not invariant under permutations of the variables")]
    NotSymmetric,
    #[error("zero point has {got} coordinates, expected {expected}")]
    PointLength { expected: usize, got: usize },
    #[error("the origin cannot be used as a zero")]
    OriginZero,
    #[error("target does not vanish at ({0})")]
    NotAZero(String),
    #[error("constraints are inconsistent: the target has no Gram matrix satisfying every kernel condition")]
    Infeasible,
    #[error("expected {expected} free values, got {got}")]
    FreeValueCount { expected: usize, got: usize },
}

/// All monomials of degree `d` in `nvars` variables, canonical order.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    nvars: usize,
    degree: u32,
    monomials: Vec<ExponentVector>,
    index: HashMap<ExponentVector, usize>,
}

impl MonomialBasis {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[ExponentVector] {
        &self.monomials
    }

    pub fn index_of(&self, e: &ExponentVector) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// `m(x)` at a rational point.
    pub fn eval(&self, point: &[Rational]) -> Vec<Rational> {
        self.monomials.iter().map(|e| e.eval(point)).collect()
    }

    /// Basis index permutation `ρ(g)` induced by sending `x_i` to `x_{perm[i]}`.
    pub fn permutation_action(&self, perm: &[usize]) -> Vec<usize> {
        self.monomials
            .iter()
            .map(|e| self.index[&e.permuted(perm)])
            .collect()
    }

    /// The polynomial `Σ coeffs[i] · m_i`.
    pub fn combination(&self, coeffs: &[Rational]) -> SparsePoly {
        SparsePoly::from_terms(
            self.nvars,
            self.monomials.iter().cloned().zip(coeffs.iter().cloned()),
        )
        .expect("basis monomials have nvars entries")
    }

    /// Coefficient vector of a homogeneous degree-`d` polynomial, or `None`
    /// if it has a term outside the basis.
    pub fn coordinates(&self, p: &SparsePoly) -> Option<Vec<Rational>> {
        let mut out = vec![Rational::zero(); self.len()];
        for (e, c) in p.terms() {
            out[self.index_of(e)?] = c.clone();
        }
        Some(out)
    }
}

pub fn build_basis(nvars: usize, d: u32) -> MonomialBasis {
    let monomials = monomials_of_degree(nvars, d);
    let index = monomials
        .iter()
        .enumerate()
        .map(|(i, e)| (e.clone(), i))
        .collect();
    MonomialBasis {
        nvars,
        degree: d,
        monomials,
        index,
    }
}

/// `mᵀ A m`.
pub fn gram_polynomial(basis: &MonomialBasis, a: &SymMatrix<Rational>) -> SparsePoly {
    let m = basis.monomials();
    let two = Rational::from_integer(2.into());
    let mut terms = Vec::new();
    for i in 0..m.len() {
        for j in i..m.len() {
            let v = a.get(i, j);
            if v.is_zero() {
                continue;
            }
            let c = if i == j { v.clone() } else { v * &two };
            terms.push((m[i].product(&m[j]), c));
        }
    }
    SparsePoly::from_terms(basis.nvars(), terms).expect("products have nvars entries")
}

/// A set of matrix positions `(i, j)`, `i <= j`, closed under the simultaneous
/// row/column action of the variable permutations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntryOrbit {
    pub representative: (usize, usize),
    pub members: Vec<(usize, usize)>,
}

fn ordered(i: usize, j: usize) -> (usize, usize) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Orbits of upper-triangle positions under every permutation of the
/// variables, ordered by representative (the smallest member).
pub fn symmetry_orbits(basis: &MonomialBasis) -> Vec<EntryOrbit> {
    let gens: Vec<Vec<usize>> = symmetric_group_generators(basis.nvars())
        .iter()
        .map(|g| basis.permutation_action(g))
        .collect();
    orbits_under(basis.len(), &gens)
}

fn orbits_under(n: usize, gens: &[Vec<usize>]) -> Vec<EntryOrbit> {
    let mut seen = vec![false; n * n];
    let mut orbits = Vec::new();
    for i in 0..n {
        for j in i..n {
            if seen[i * n + j] {
                continue;
            }
            seen[i * n + j] = true;
            let mut members = vec![(i, j)];
            let mut queue = VecDeque::from([(i, j)]);
            while let Some((a, b)) = queue.pop_front() {
                for g in gens {
                    let (c, d) = ordered(g[a], g[b]);
                    if !seen[c * n + d] {
                        seen[c * n + d] = true;
                        members.push((c, d));
                        queue.push_back((c, d));
                    }
                }
            }
            members.sort_unstable();
            orbits.push(EntryOrbit {
                representative: (i, j),
                members,
            });
        }
    }
    orbits
}

/// `Σ coeffs[k] · x_k = rhs` over orbit variables.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearEquation {
    pub coeffs: SparseRow,
    pub rhs: Rational,
}

/// `constant + Σ coeff · free[k]`, indexed by position in the free-parameter list.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineExpr {
    pub constant: Rational,
    pub terms: Vec<(usize, Rational)>,
}

impl AffineExpr {
    fn eval(&self, free: &[Rational]) -> Rational {
        self.terms
            .iter()
            .fold(self.constant.clone(), |acc, (k, c)| acc + c * &free[*k])
    }
}

fn point_string(point: &[Rational]) -> String {
    point.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// The vectors `m(x*)` for exact zeros `x*` of `target`, keeping only those
/// that raise the rank.
pub fn kernel_vectors_from_zeros(
    basis: &MonomialBasis,
    target: &SparsePoly,
    zeros: &[Vec<Rational>],
) -> Result<Vec<Vec<Rational>>, ModelError> {
    let mut kept: Vec<Vec<Rational>> = Vec::new();
    for z in zeros {
        if z.len() != basis.nvars() {
            return Err(ModelError::PointLength {
                expected: basis.nvars(),
                got: z.len(),
            });
        }
        if z.iter().all(Zero::is_zero) {
            return Err(ModelError::OriginZero);
        }
        let value = target.eval(z).expect("length checked");
        if !value.is_zero() {
            return Err(ModelError::NotAZero(point_string(z)));
        }
        let v = basis.eval(z);
        kept.push(v);
        if rank_of(&kept) < kept.len() {
            kept.pop();
        }
    }
    Ok(kept)
}

/// Exact zeros of `target` among the nonzero points of `{-1, 0, 1}^n`, one
/// per pair `±x`. The all-`±1` sign patterns come first; for a term-normalized
/// difference after square substitution they are always zeros.
pub fn default_zeros(target: &SparsePoly) -> Vec<Vec<Rational>> {
    let n = target.nvars();
    let mut sign_patterns = Vec::new();
    let mut others = Vec::new();
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let point: Vec<i64> = (0..n)
            .map(|_| {
                let digit = (c % 3) as i64;
                c /= 3;
                digit - 1
            })
            .rev()
            .collect();
        match point.iter().find(|&&x| x != 0) {
            Some(&first) if first > 0 => {}
            _ => continue,
        }
        let q: Vec<Rational> = point.iter().map(|&x| Rational::from_integer(x.into())).collect();
        if !target.eval(&q).expect("length matches").is_zero() {
            continue;
        }
        if point.iter().all(|&x| x != 0) {
            sign_patterns.push(q);
        } else {
            others.push(q);
        }
    }
    // reverse sort so (1, 1, ..., 1) leads
    sign_patterns.reverse();
    others.reverse();
    sign_patterns.extend(others);
    sign_patterns
}

/// Exact affine parametrization of the Gram matrices of a target.
#[derive(Clone, Debug)]
pub struct GramModel {
    basis: MonomialBasis,
    target: SparsePoly,
    use_symmetry: bool,
    orbits: Vec<EntryOrbit>,
    orbit_of: Vec<usize>,
    coeff_constraints: Vec<LinearEquation>,
    kernel_constraints: Vec<LinearEquation>,
    kernel_vectors: Vec<Vec<Rational>>,
    free_params: Vec<usize>,
    dependent_map: Vec<AffineExpr>,
}

/// Result of checking a concrete matrix against a model's constraints.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ConstraintReport {
    pub dimension_ok: bool,
    pub reconstruction_ok: bool,
    /// Monomials where `mᵀAm` differs from the target, as `(monomial, expected, got)`.
    pub reconstruction_mismatches: Vec<(String, String, String)>,
    pub invariance_ok: bool,
    pub kernel_ok: bool,
}

impl ConstraintReport {
    pub fn all_ok(&self) -> bool {
        self.dimension_ok && self.reconstruction_ok && self.invariance_ok && self.kernel_ok
    }
}

/// Summary written by `--dump-model`.
#[derive(Clone, Debug, Serialize)]
pub struct ModelDump {
    pub nvars: usize,
    pub basis_degree: u32,
    pub basis: Vec<String>,
    pub use_symmetry: bool,
    pub orbit_count: usize,
    pub orbit_representatives: Vec<(usize, usize)>,
    pub coefficient_constraint_count: usize,
    pub kernel_constraint_count: usize,
    pub kernel_vector_count: usize,
    pub kernel_vectors: Vec<Vec<String>>,
    pub free_parameter_count: usize,
}

/// Builds the model for a homogeneous even-degree target.
///
/// `zeros` are verified exactly; each contributes `A · m(x*) = 0`.
pub fn build_model(
    target: &SparsePoly,
    use_symmetry: bool,
    zeros: &[Vec<Rational>],
) -> Result<GramModel, ModelError> {
    if target.is_zero() {
        return Err(ModelError::ZeroTarget);
    }
    let deg = target.homogeneous_degree().ok_or(ModelError::NotHomogeneous)?;
    if deg % 2 != 0 {
        return Err(ModelError::OddDegree(deg));
    }
    if use_symmetry && !target.is_symmetric() {
        return Err(ModelError::NotSymmetric);
    }
    let basis = build_basis(target.nvars(), deg / 2);
    let n = basis.len();
    let orbits = if use_symmetry {
        symmetry_orbits(&basis)
    } else {
        orbits_under(n, &[])
    };
    let mut orbit_of = vec![usize::MAX; n * n];
    for (k, orbit) in orbits.iter().enumerate() {
        for &(i, j) in &orbit.members {
            orbit_of[i * n + j] = k;
            orbit_of[j * n + i] = k;
        }
    }
    let kernel_vectors = kernel_vectors_from_zeros(&basis, target, zeros)?;

    let two = Rational::from_integer(2.into());
    let mut by_monomial: BTreeMap<ExponentVector, SparseRow> = BTreeMap::new();
    for i in 0..n {
        for j in i..n {
            let e = basis.monomials()[i].product(&basis.monomials()[j]);
            let w = if i == j { Rational::one() } else { two.clone() };
            *by_monomial
                .entry(e)
                .or_default()
                .entry(orbit_of[i * n + j])
                .or_insert_with(Rational::zero) += w;
        }
    }
    let coeff_constraints: Vec<LinearEquation> = by_monomial
        .into_iter()
        .map(|(e, coeffs)| LinearEquation {
            rhs: target.coeff(&e),
            coeffs,
        })
        .collect();
    let mut kernel_constraints = Vec::new();
    for v in &kernel_vectors {
        for i in 0..n {
            let mut coeffs = SparseRow::new();
            for (j, vj) in v.iter().enumerate() {
                if vj.is_zero() {
                    continue;
                }
                let entry = coeffs.entry(orbit_of[i * n + j]).or_insert_with(Rational::zero);
                *entry += vj;
            }
            coeffs.retain(|_, c| !c.is_zero());
            if !coeffs.is_empty() {
                kernel_constraints.push(LinearEquation {
                    coeffs,
                    rhs: Rational::zero(),
                });
            }
        }
    }

    let mut rref = IncrementalRref::new();
    for eq in coeff_constraints.iter().chain(&kernel_constraints) {
        if let RowOutcome::Inconsistent(_) = rref.insert(eq.coeffs.clone(), eq.rhs.clone()) {
            return Err(ModelError::Infeasible);
        }
    }
    let free_params: Vec<usize> = (0..orbits.len()).filter(|&k| !rref.is_pivot(k)).collect();
    let free_pos: HashMap<usize, usize> =
        free_params.iter().enumerate().map(|(p, &k)| (k, p)).collect();
    let mut dependent_map: Vec<AffineExpr> = (0..orbits.len())
        .map(|k| AffineExpr {
            constant: Rational::zero(),
            terms: free_pos.get(&k).map(|&p| vec![(p, Rational::one())]).unwrap_or_default(),
        })
        .collect();
    for (pivot, row, rhs) in rref.rows() {
        dependent_map[pivot] = AffineExpr {
            constant: rhs.clone(),
            terms: row
                .iter()
                .filter(|(&c, _)| c != pivot)
                .map(|(c, v)| (free_pos[c], -v.clone()))
                .collect(),
        };
    }

    Ok(GramModel {
        basis,
        target: target.clone(),
        use_symmetry,
        orbits,
        orbit_of,
        coeff_constraints,
        kernel_constraints,
        kernel_vectors,
        free_params,
        dependent_map,
    })
}

impl GramModel {
    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn target(&self) -> &SparsePoly {
        &self.target
    }

    pub fn uses_symmetry(&self) -> bool {
        self.use_symmetry
    }

    pub fn orbits(&self) -> &[EntryOrbit] {
        &self.orbits
    }

    pub fn orbit_of(&self, i: usize, j: usize) -> usize {
        self.orbit_of[i * self.basis.len() + j]
    }

    pub fn coeff_constraints(&self) -> &[LinearEquation] {
        &self.coeff_constraints
    }

    pub fn kernel_constraints(&self) -> &[LinearEquation] {
        &self.kernel_constraints
    }

    pub fn kernel_vectors(&self) -> &[Vec<Rational>] {
        &self.kernel_vectors
    }

    pub fn kernel_vectors_f64(&self) -> Vec<Vec<f64>> {
        self.kernel_vectors
            .iter()
            .map(|v| v.iter().map(rational_to_f64).collect())
            .collect()
    }

    /// Orbit indices of the free parameters.
    pub fn free_params(&self) -> &[usize] {
        &self.free_params
    }

    pub fn num_free(&self) -> usize {
        self.free_params.len()
    }

    pub fn dependent_map(&self) -> &[AffineExpr] {
        &self.dependent_map
    }

    /// The exact Gram matrix for the given free-parameter values.
    pub fn instantiate(&self, free_values: &[Rational]) -> Result<SymMatrix<Rational>, ModelError> {
        if free_values.len() != self.num_free() {
            return Err(ModelError::FreeValueCount {
                expected: self.num_free(),
                got: free_values.len(),
            });
        }
        let values: Vec<Rational> = self.dependent_map.iter().map(|e| e.eval(free_values)).collect();
        let a = SymMatrix::from_fn(self.basis.len(), |i, j| values[self.orbit_of(i, j)].clone());
        debug_assert!(self.check_matrix(&a).all_ok(), "instantiation violates model constraints");
        Ok(a)
    }

    /// `A(θ) = A0 + Σ θ_k E_k` in floating point: returns `(A0, [E_k])`.
    pub fn affine_parts_f64(&self) -> (SymMatrix<f64>, Vec<SymMatrix<f64>>) {
        let n = self.basis.len();
        let constants: Vec<f64> = self.dependent_map.iter().map(|e| rational_to_f64(&e.constant)).collect();
        let offset = SymMatrix::from_fn(n, |i, j| constants[self.orbit_of(i, j)]);
        let mut per_free: Vec<Vec<f64>> = vec![vec![0.0; self.orbits.len()]; self.num_free()];
        for (orbit, expr) in self.dependent_map.iter().enumerate() {
            for (p, c) in &expr.terms {
                per_free[*p][orbit] = rational_to_f64(c);
            }
        }
        let directions = per_free
            .iter()
            .map(|w| SymMatrix::from_fn(n, |i, j| w[self.orbit_of(i, j)]))
            .collect();
        (offset, directions)
    }

    pub fn instantiate_f64(&self, free_values: &[f64]) -> SymMatrix<f64> {
        let (offset, dirs) = self.affine_parts_f64();
        let mut data: Vec<f64> = offset.upper().to_vec();
        for (theta, d) in free_values.iter().zip(&dirs) {
            for (x, y) in data.iter_mut().zip(d.upper()) {
                *x += theta * y;
            }
        }
        SymMatrix::from_upper(offset.dim(), data).expect("same shape")
    }

    /// Reads the free-parameter values off a matrix (its entries at the
    /// representatives of the free orbits).
    pub fn free_values_of(&self, a: &SymMatrix<Rational>) -> Vec<Rational> {
        self.free_params
            .iter()
            .map(|&k| {
                let (i, j) = self.orbits[k].representative;
                a.get(i, j).clone()
            })
            .collect()
    }

    /// Checks reconstruction, kernel conditions, and (for symmetric models)
    /// permutation invariance exactly.
    pub fn check_matrix(&self, a: &SymMatrix<Rational>) -> ConstraintReport {
        let mut report = check_gram_matrix(&self.basis, &self.target, &self.kernel_vectors, a);
        if !self.use_symmetry {
            report.invariance_ok = report.dimension_ok;
        }
        report
    }

    pub fn dump(&self) -> ModelDump {
        ModelDump {
            nvars: self.basis.nvars(),
            basis_degree: self.basis.degree(),
            basis: self.basis.monomials().iter().map(ExponentVector::fmt_monomial).collect(),
            use_symmetry: self.use_symmetry,
            orbit_count: self.orbits.len(),
            orbit_representatives: self.orbits.iter().map(|o| o.representative).collect(),
            coefficient_constraint_count: self.coeff_constraints.len(),
            kernel_constraint_count: self.kernel_constraints.len(),
            kernel_vector_count: self.kernel_vectors.len(),
            kernel_vectors: self
                .kernel_vectors
                .iter()
                .map(|v| v.iter().map(format_rational).collect())
                .collect(),
            free_parameter_count: self.num_free(),
        }
    }
}

/// Exact checks of a candidate Gram matrix against a target, the permutation
/// action, and kernel vectors.
pub fn check_gram_matrix(
    basis: &MonomialBasis,
    target: &SparsePoly,
    kernel_vectors: &[Vec<Rational>],
    a: &SymMatrix<Rational>,
) -> ConstraintReport {
    let mut report = ConstraintReport {
        dimension_ok: a.dim() == basis.len(),
        ..Default::default()
    };
    if !report.dimension_ok {
        return report;
    }
    let got = gram_polynomial(basis, a);
    let diff = &got - target;
    report.reconstruction_mismatches = diff
        .terms()
        .map(|(e, _)| {
            (
                e.fmt_monomial(),
                format_rational(&target.coeff(e)),
                format_rational(&got.coeff(e)),
            )
        })
        .collect();
    report.reconstruction_ok = diff.is_zero();
    report.invariance_ok = symmetric_group_generators(basis.nvars()).iter().all(|g| {
        let rho = basis.permutation_action(g);
        (0..a.dim()).all(|i| (i..a.dim()).all(|j| a.get(rho[i], rho[j]) == a.get(i, j)))
    });
    report.kernel_ok = kernel_vectors
        .iter()
        .all(|v| a.mul_vec(v).iter().all(Zero::is_zero));
    report
}
