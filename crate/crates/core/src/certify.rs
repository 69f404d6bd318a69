//! Exact PSD decisions, sum-of-squares extraction, and certificate checking.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammodel::{build_basis, check_gram_matrix, default_zeros, kernel_vectors_from_zeros, MonomialBasis};
use crate::matrix::SymMatrix;
use crate::polyring::{format_rational, parse_rational, PolyError, Rational, SparsePoly, TermJson};
use crate::symfunc::{squared_homogeneous_difference, Partition, SymError};

/// `Pᵀ A P = L D Lᵀ`, with `P` given as the pivot order.
#[derive(Clone, Debug, PartialEq)]
pub struct LdlFactorization {
    /// `perm[k]` is the original index eliminated at step `k`.
    pub perm: Vec<usize>,
    /// Unit lower triangular, dense rows, indexed in pivot order.
    pub l: Vec<Vec<Rational>>,
    pub d: Vec<Rational>,
}

impl LdlFactorization {
    pub fn rank(&self) -> usize {
        self.d.iter().filter(|x| !x.is_zero()).count()
    }

    /// `L D Lᵀ` mapped back to original indices; equals `A` for a correct factorization.
    pub fn reassemble(&self) -> SymMatrix<Rational> {
        let n = self.d.len();
        let mut pos = vec![0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            pos[p] = k;
        }
        SymMatrix::from_fn(n, |i, j| {
            let (a, b) = (pos[i], pos[j]);
            (0..=a.min(b)).fold(Rational::zero(), |acc, k| {
                if self.d[k].is_zero() || self.l[a][k].is_zero() || self.l[b][k].is_zero() {
                    acc
                } else {
                    acc + &self.l[a][k] * &self.d[k] * &self.l[b][k]
                }
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// The largest remaining diagonal entry of the Schur complement is negative.
    NegativePivot,
    /// All remaining diagonal entries are ≤ 0 and one of them is negative.
    NegativeDiagonal,
    /// A zero-diagonal block has a nonzero off-diagonal entry.
    ZeroDiagonalCoupling,
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessKind::NegativePivot => "negative pivot",
            WitnessKind::NegativeDiagonal => "negative diagonal in a nonpositive block",
            WitnessKind::ZeroDiagonalCoupling => "nonzero entry coupling two zero diagonals",
        })
    }
}

/// Exact evidence that a matrix is not PSD.
#[derive(Clone, Debug, PartialEq)]
pub struct NotPsdWitness {
    pub kind: WitnessKind,
    /// Elimination step at which the failure was found.
    pub step: usize,
    /// The offending Schur complement entry.
    pub value: Rational,
    /// A vector with `vᵀ A v < 0`.
    pub vector: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LdlOutcome {
    Psd(LdlFactorization),
    NotPsd(NotPsdWitness),
}

impl LdlOutcome {
    pub fn is_psd(&self) -> bool {
        matches!(self, LdlOutcome::Psd(_))
    }
}

/// Pivoted `LDLᵀ` deciding positive semidefiniteness exactly.
///
/// Each step pivots on the largest remaining diagonal entry (ties go to the
/// smallest original index). When every remaining diagonal entry is zero the
/// matrix is PSD exactly when the remaining block vanishes.
pub fn ldl_psd(a: &SymMatrix<Rational>) -> LdlOutcome {
    let n = a.dim();
    let mut w: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| a.get(i, j).clone()).collect()).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    let mut d = vec![Rational::zero(); n];

    for k in 0..n {
        // choose the pivot among positions k..n
        let mut best = k;
        for p in k + 1..n {
            let better = match w[p][p].cmp(&w[best][best]) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Equal => perm[p] < perm[best],
                std::cmp::Ordering::Less => false,
            };
            if better {
                best = p;
            }
        }
        swap_positions(&mut w, &mut l, &mut perm, k, best);
        let pivot = w[k][k].clone();
        if pivot.is_negative() {
            return LdlOutcome::NotPsd(witness(WitnessKind::NegativePivot, &l, &perm, k, k, None, pivot));
        }
        if pivot.is_zero() {
            // every remaining diagonal is <= 0 here, and the maximum is zero
            if let Some(p) = (k..n).find(|&p| w[p][p].is_negative()) {
                let value = w[p][p].clone();
                return LdlOutcome::NotPsd(witness(WitnessKind::NegativeDiagonal, &l, &perm, k, p, None, value));
            }
            for i in k..n {
                for j in i + 1..n {
                    if !w[i][j].is_zero() {
                        let value = w[i][j].clone();
                        return LdlOutcome::NotPsd(witness(
                            WitnessKind::ZeroDiagonalCoupling,
                            &l,
                            &perm,
                            k,
                            i,
                            Some((j, value.clone())),
                            value,
                        ));
                    }
                }
            }
            return LdlOutcome::Psd(LdlFactorization { perm, l, d });
        }
        let inv = pivot.recip();
        let factors: Vec<Rational> = (k + 1..n).map(|i| &w[i][k] * &inv).collect();
        for (off, f) in factors.iter().enumerate() {
            let i = k + 1 + off;
            if f.is_zero() {
                continue;
            }
            for j in i..n {
                if w[k][j].is_zero() {
                    continue;
                }
                let delta = f * &w[k][j];
                w[i][j] -= &delta;
                if i != j {
                    w[j][i] = w[i][j].clone();
                }
            }
            l[i][k] = f.clone();
        }
        for i in k + 1..n {
            w[i][k] = Rational::zero();
            w[k][i] = Rational::zero();
        }
        d[k] = pivot;
    }
    LdlOutcome::Psd(LdlFactorization { perm, l, d })
}

fn swap_positions(w: &mut [Vec<Rational>], l: &mut [Vec<Rational>], perm: &mut [usize], a: usize, b: usize) {
    if a == b {
        return;
    }
    w.swap(a, b);
    for row in w.iter_mut() {
        row.swap(a, b);
    }
    // only the already computed columns of L move with the rows
    for c in 0..a {
        let tmp = l[a][c].clone();
        l[a][c] = l[b][c].clone();
        l[b][c] = tmp;
    }
    perm.swap(a, b);
}

/// Builds `v = P L⁻ᵀ u`, where `u = e_i − c·e_j` in pivot coordinates, so that
/// `vᵀ A v` equals the corresponding quadratic form of the Schur complement.
fn witness(
    kind: WitnessKind,
    l: &[Vec<Rational>],
    perm: &[usize],
    step: usize,
    i: usize,
    coupling: Option<(usize, Rational)>,
    value: Rational,
) -> NotPsdWitness {
    let n = perm.len();
    let mut u = vec![Rational::zero(); n];
    u[i] = Rational::one();
    if let Some((j, c)) = coupling {
        u[j] = -c;
    }
    // solve Lᵀ y = u by back substitution; only the first `step` columns of L are filled
    let mut y = u;
    for r in (0..n).rev() {
        let mut acc = y[r].clone();
        for s in r + 1..n {
            if !l[s][r].is_zero() && !y[s].is_zero() {
                acc -= &l[s][r] * &y[s];
            }
        }
        y[r] = acc;
    }
    let mut vector = vec![Rational::zero(); n];
    for (k, &p) in perm.iter().enumerate() {
        vector[p] = y[k].clone();
    }
    NotPsdWitness {
        kind,
        step,
        value,
        vector,
    }
}

/// `vᵀ A v`.
pub fn quadratic_form(a: &SymMatrix<Rational>, v: &[Rational]) -> Rational {
    a.mul_vec(v)
        .iter()
        .zip(v)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("matrix is not positive semidefinite: {0} at step {1}")]
    NotPsd(WitnessKind, usize),
    #[error("matrix dimension {got} does not match basis size {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("extracted squares do not sum to the Gram polynomial")]
    IdentityFailed,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error("bad certificate: {0}")]
    Format(String),
    #[error("certificate JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSquare {
    pub coeff: Rational,
    pub poly: SparsePoly,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct CertificateMeta {
    pub mu: Option<String>,
    pub lambda: Option<String>,
    pub tool_version: String,
}

/// `target = Σ coeff_i · poly_i²`, with the Gram matrix that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct SosCertificate {
    pub nvars: usize,
    pub target: SparsePoly,
    pub squares: Vec<WeightedSquare>,
    pub gram: Option<SymMatrix<Rational>>,
    pub permutation: Option<Vec<usize>>,
    pub meta: CertificateMeta,
}

pub fn sum_of_squares(nvars: usize, squares: &[WeightedSquare]) -> Result<SparsePoly, PolyError> {
    squares.iter().try_fold(SparsePoly::zero(nvars), |acc, s| {
        acc.try_add(&s.poly.square().scale(&s.coeff))
    })
}

/// Reads the squares `d_k (Σ_j L[j][k] m_{perm[j]})²` off a PSD Gram matrix
/// and checks the identity exactly.
pub fn extract_certificate(a: &SymMatrix<Rational>, basis: &MonomialBasis) -> Result<SosCertificate, CertifyError> {
    if a.dim() != basis.len() {
        return Err(CertifyError::Dimension {
            expected: basis.len(),
            got: a.dim(),
        });
    }
    let f = match ldl_psd(a) {
        LdlOutcome::Psd(f) => f,
        LdlOutcome::NotPsd(w) => return Err(CertifyError::NotPsd(w.kind, w.step)),
    };
    certificate_from_factorization(a, basis, &f)
}

pub fn certificate_from_factorization(
    a: &SymMatrix<Rational>,
    basis: &MonomialBasis,
    f: &LdlFactorization,
) -> Result<SosCertificate, CertifyError> {
    let n = basis.len();
    let mut squares = Vec::new();
    for k in 0..n {
        if f.d[k].is_zero() {
            continue;
        }
        let mut coeffs = vec![Rational::zero(); n];
        for j in k..n {
            coeffs[f.perm[j]] = f.l[j][k].clone();
        }
        squares.push(WeightedSquare {
            coeff: f.d[k].clone(),
            poly: basis.combination(&coeffs),
        });
    }
    let target = crate::grammodel::gram_polynomial(basis, a);
    if sum_of_squares(basis.nvars(), &squares)? != target {
        return Err(CertifyError::IdentityFailed);
    }
    Ok(SosCertificate {
        nvars: basis.nvars(),
        target,
        squares,
        gram: Some(a.clone()),
        permutation: Some(f.perm.clone()),
        meta: CertificateMeta {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            ..Default::default()
        },
    })
}

/// Outcome of [`verify_certificate`].
#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub coefficients_positive: bool,
    pub identity_holds: bool,
    /// `(monomial, target coefficient, coefficient of Σ d q²)` for every disagreement.
    pub mismatched_terms: Vec<(String, String, String)>,
    pub gram_psd: bool,
    pub gram_reconstructs_target: bool,
    pub square_count: usize,
    pub notes: Vec<String>,
}

/// Re-derives everything in a certificate with exact arithmetic.
///
/// When the certificate carries no Gram matrix, one is assembled from the
/// squares as `Σ d c cᵀ` over the half-degree monomial basis.
pub fn verify_certificate(cert: &SosCertificate) -> VerifyReport {
    let mut report = VerifyReport {
        square_count: cert.squares.len(),
        ..Default::default()
    };
    report.coefficients_positive = cert.squares.iter().all(|s| s.coeff.is_positive());
    if !report.coefficients_positive {
        report.notes.push("a square has a non-positive coefficient".into());
    }
    match sum_of_squares(cert.nvars, &cert.squares) {
        Ok(sum) => {
            let diff = &sum - &cert.target;
            report.mismatched_terms = diff
                .terms()
                .map(|(e, _)| {
                    (
                        e.fmt_monomial(),
                        format_rational(&cert.target.coeff(e)),
                        format_rational(&sum.coeff(e)),
                    )
                })
                .collect();
            report.identity_holds = diff.is_zero();
        }
        Err(e) => report.notes.push(format!("squares are malformed: {e}")),
    }

    let half_degree = cert
        .target
        .homogeneous_degree()
        .map(|d| d / 2)
        .or_else(|| cert.squares.first().and_then(|s| s.poly.homogeneous_degree()));
    match (half_degree, &cert.gram) {
        (None, Some(g)) => {
            // zero target with no squares: only the zero matrix is consistent
            report.gram_psd = ldl_psd(g).is_psd();
            report.gram_reconstructs_target = g.upper().iter().all(Zero::is_zero);
        }
        (None, None) => {
            report.gram_psd = true;
            report.gram_reconstructs_target = cert.target.is_zero();
        }
        (Some(hd), gram) => {
            let basis = build_basis(cert.nvars, hd);
            let gram = match gram {
                Some(g) => Some(g.clone()),
                None => gram_from_squares(&basis, &cert.squares),
            };
            match gram {
                Some(g) if g.dim() == basis.len() => {
                    report.gram_psd = ldl_psd(&g).is_psd();
                    report.gram_reconstructs_target =
                        check_gram_matrix(&basis, &cert.target, &[], &g).reconstruction_ok;
                }
                Some(g) => report
                    .notes
                    .push(format!("gram dimension {} does not match basis size {}", g.dim(), basis.len())),
                None => report
                    .notes
                    .push("squares are not forms of half the target degree".into()),
            }
        }
    }
    if !report.gram_psd {
        report.notes.push("gram matrix is not positive semidefinite".into());
    }
    if !report.gram_reconstructs_target {
        report.notes.push("gram matrix does not reproduce the target".into());
    }
    report.passed = report.coefficients_positive
        && report.identity_holds
        && report.gram_psd
        && report.gram_reconstructs_target;
    report
}

fn gram_from_squares(basis: &MonomialBasis, squares: &[WeightedSquare]) -> Option<SymMatrix<Rational>> {
    let mut g = SymMatrix::zeros(basis.len());
    for s in squares {
        let c = basis.coordinates(&s.poly)?;
        for i in 0..c.len() {
            if c[i].is_zero() {
                continue;
            }
            for j in i..c.len() {
                if !c[j].is_zero() {
                    let v = g.get(i, j) + &s.coeff * &c[i] * &c[j];
                    g.set(i, j, v);
                }
            }
        }
    }
    Some(g)
}

/// Named results of checking a candidate Gram matrix for `(H_μ − H_λ)(x²)`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct MatrixCheckReport {
    pub passed: bool,
    pub dimension_ok: bool,
    pub symmetric: bool,
    pub invariant: bool,
    pub kernel_ok: bool,
    pub reconstruction_ok: bool,
    pub reconstruction_mismatches: Vec<(String, String, String)>,
    pub psd: bool,
    pub rank: Option<usize>,
    pub failed_checks: Vec<String>,
}

/// Checks a Gram matrix against the squared normalized difference: permutation
/// invariance, the kernel at the default zeros, exact reconstruction, PSD-ness.
pub fn check_matrix(
    a: &SymMatrix<Rational>,
    mu: &Partition,
    lambda: &Partition,
    nvars: usize,
) -> Result<MatrixCheckReport, CertifyError> {
    let target = squared_homogeneous_difference(mu, lambda, nvars)?;
    let mut report = MatrixCheckReport {
        symmetric: true,
        ..Default::default()
    };
    let basis = build_basis(nvars, mu.weight());
    report.dimension_ok = a.dim() == basis.len();
    if !report.dimension_ok {
        report.failed_checks.push("dimension".into());
        return Ok(report);
    }
    let kernel = if target.is_zero() {
        Vec::new()
    } else {
        kernel_vectors_from_zeros(&basis, &target, &default_zeros(&target))
            .map_err(|e| CertifyError::Format(e.to_string()))?
    };
    let c = check_gram_matrix(&basis, &target, &kernel, a);
    report.invariant = c.invariance_ok;
    report.kernel_ok = c.kernel_ok;
    report.reconstruction_ok = c.reconstruction_ok;
    report.reconstruction_mismatches = c.reconstruction_mismatches;
    match ldl_psd(a) {
        LdlOutcome::Psd(f) => {
            report.psd = true;
            report.rank = Some(f.rank());
        }
        LdlOutcome::NotPsd(_) => report.psd = false,
    }
    for (ok, name) in [
        (report.invariant, "invariance"),
        (report.kernel_ok, "kernel"),
        (report.reconstruction_ok, "reconstruction"),
        (report.psd, "psd"),
    ] {
        if !ok {
            report.failed_checks.push(name.into());
        }
    }
    report.passed = report.failed_checks.is_empty();
    Ok(report)
}

// JSON form

#[derive(Serialize, Deserialize)]
struct SquareJson {
    coeff: String,
    poly: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct GramJson {
    dim: usize,
    entries: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct MetaJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<String>,
    nvars: usize,
    #[serde(rename = "tool-version", default)]
    tool_version: String,
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    target: Vec<TermJson>,
    squares: Vec<SquareJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gram: Option<GramJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    permutation: Option<Vec<usize>>,
    meta: MetaJson,
}

impl SosCertificate {
    pub fn to_json(&self) -> serde_json::Value {
        let doc = CertificateJson {
            target: self.target.to_json_terms(),
            squares: self
                .squares
                .iter()
                .map(|s| SquareJson {
                    coeff: format_rational(&s.coeff),
                    poly: s.poly.to_json_terms(),
                })
                .collect(),
            gram: self.gram.as_ref().map(|g| GramJson {
                dim: g.dim(),
                entries: g.upper_strings(),
            }),
            permutation: self.permutation.clone(),
            meta: MetaJson {
                mu: self.meta.mu.clone(),
                lambda: self.meta.lambda.clone(),
                nvars: self.nvars,
                tool_version: self.meta.tool_version.clone(),
            },
        };
        serde_json::to_value(doc).expect("certificate serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("certificate serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self, CertifyError> {
        let doc: CertificateJson = serde_json::from_str(text)?;
        let nvars = doc.meta.nvars;
        let poly = |terms: &[TermJson]| -> Result<SparsePoly, CertifyError> {
            let p = SparsePoly::from_json_terms(terms, nvars)?;
            if p.nvars() != nvars {
                return Err(CertifyError::Format(format!(
                    "polynomial has {} variables, meta says {nvars}",
                    p.nvars()
                )));
            }
            Ok(p)
        };
        let target = poly(&doc.target)?;
        let squares = doc
            .squares
            .iter()
            .map(|s| {
                Ok(WeightedSquare {
                    coeff: parse_rational(&s.coeff)?,
                    poly: poly(&s.poly)?,
                })
            })
            .collect::<Result<Vec<_>, CertifyError>>()?;
        let gram = doc
            .gram
            .map(|g| {
                let entries = g
                    .entries
                    .iter()
                    .map(|e| parse_rational(e))
                    .collect::<Result<Vec<_>, _>>()?;
                let found = entries.len();
                SymMatrix::from_upper(g.dim, entries).ok_or_else(|| {
                    CertifyError::Format(format!(
                        "gram of dimension {} needs {} entries, found {found}",
                        g.dim,
                        g.dim * (g.dim + 1) / 2
                    ))
                })
            })
            .transpose()?;
        Ok(SosCertificate {
            nvars,
            target,
            squares,
            gram,
            permutation: doc.permutation,
            meta: CertificateMeta {
                mu: doc.meta.mu,
                lambda: doc.meta.lambda,
                tool_version: doc.meta.tool_version,
            },
        })
    }
}
