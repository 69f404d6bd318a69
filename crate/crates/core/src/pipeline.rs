//! End-to-end certification of `H_λ <= H_μ` on the nonnegative orthant.

use std::time::{Duration, Instant};

use log::info;
use num_bigint::BigInt;
use thiserror::Error;

use crate::certify::{certificate_from_factorization, CertificateMeta, CertifyError, SosCertificate};
use crate::grammodel::{build_basis, build_model, default_zeros, GramModel, ModelError};
use crate::matrix::SymMatrix;
use crate::polyring::Rational;
use crate::rationalize::{max_denominator_digits, round_solution, RoundingConfig, RoundingError};
use crate::sdpsolve::{solve, NumericSolution, SolveStatus, SolverConfig};
use crate::symfunc::{squared_homogeneous_difference, Partition, SymError};

#[derive(Clone, Debug)]
pub struct CertifyRequest {
    pub mu: Partition,
    pub lambda: Partition,
    pub nvars: usize,
    pub rounding: RoundingConfig,
    pub solver: SolverConfig,
    /// Zeros used in addition to the default candidates.
    pub extra_zeros: Vec<Vec<Rational>>,
}

impl CertifyRequest {
    pub fn new(mu: Partition, lambda: Partition, nvars: usize) -> Self {
        Self {
            mu,
            lambda,
            nvars,
            rounding: RoundingConfig::default(),
            solver: SolverConfig::default(),
            extra_zeros: Vec::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Symmetric(#[from] SymError),
    #[error("need at least one variable")]
    NoVariables,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("semidefinite search ended with status {status} (best deflated lambda_min {margin:e})")]
    Sdp { status: SolveStatus, margin: f64 },
    #[error(transparent)]
    Rounding(#[from] RoundingError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Clone, Debug)]
pub struct CertifyOutcome {
    pub certificate: SosCertificate,
    /// `None` for the trivial `μ = λ` case.
    pub numeric: Option<NumericSolution>,
    pub free_parameters: usize,
    pub kernel_vectors: usize,
    pub denominator_bound: Option<BigInt>,
    pub rounding_attempts: u32,
    pub max_denominator_digits: usize,
    pub elapsed: Duration,
}

/// The model for `(H_μ − H_λ)(x²)` with default and extra zeros.
pub fn model_for(req: &CertifyRequest) -> Result<GramModel, PipelineError> {
    let target = squared_homogeneous_difference(&req.mu, &req.lambda, req.nvars)?;
    let mut zeros = default_zeros(&target);
    zeros.extend(req.extra_zeros.iter().cloned());
    Ok(build_model(&target, true, &zeros)?)
}

fn meta(req: &CertifyRequest) -> CertificateMeta {
    CertificateMeta {
        mu: Some(req.mu.to_string()),
        lambda: Some(req.lambda.to_string()),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// Zeros → model → numeric search → rounding → exact `LDLᵀ` → certificate.
pub fn certify(req: &CertifyRequest) -> Result<CertifyOutcome, PipelineError> {
    let start = Instant::now();
    if req.nvars == 0 {
        return Err(PipelineError::NoVariables);
    }
    let target = squared_homogeneous_difference(&req.mu, &req.lambda, req.nvars)?;
    if target.is_zero() {
        // μ = λ: the zero polynomial is the empty sum of squares
        let n = build_basis(req.nvars, req.mu.weight()).len();
        let certificate = SosCertificate {
            nvars: req.nvars,
            target,
            squares: Vec::new(),
            gram: Some(SymMatrix::zeros(n)),
            permutation: None,
            meta: meta(req),
        };
        return Ok(CertifyOutcome {
            certificate,
            numeric: None,
            free_parameters: 0,
            kernel_vectors: 0,
            denominator_bound: None,
            rounding_attempts: 0,
            max_denominator_digits: 1,
            elapsed: start.elapsed(),
        });
    }
    let model = model_for(req)?;
    info!(
        "model: {} basis monomials, {} orbits, {} free parameters, {} kernel vectors",
        model.basis().len(),
        model.orbits().len(),
        model.num_free(),
        model.kernel_vectors().len()
    );
    let numeric = solve(&model, &req.solver);
    info!(
        "numeric search: {} after {} steps, deflated lambda_min {:e}",
        numeric.status, numeric.iterations, numeric.min_eigenvalue_deflated
    );
    if numeric.status != SolveStatus::Solved {
        return Err(PipelineError::Sdp {
            status: numeric.status,
            margin: numeric.min_eigenvalue_deflated,
        });
    }
    let rounded = round_solution(&model, &numeric, &req.rounding)?;
    let mut certificate = certificate_from_factorization(&rounded.matrix, model.basis(), &rounded.factorization)?;
    if certificate.target != *model.target() {
        return Err(PipelineError::Internal(
            "certificate target differs from the requested polynomial".into(),
        ));
    }
    certificate.meta = meta(req);
    Ok(CertifyOutcome {
        max_denominator_digits: max_denominator_digits(&rounded.matrix),
        free_parameters: model.num_free(),
        kernel_vectors: model.kernel_vectors().len(),
        denominator_bound: Some(rounded.denominator_bound),
        rounding_attempts: rounded.attempts,
        numeric: Some(numeric),
        certificate,
        elapsed: start.elapsed(),
    })
}
