//! Numeric search for an interior Gram matrix.
//!
//! With `P` an orthonormal basis of the complement of the forced kernel and
//! `B(θ) = Pᵀ A(θ) P`, the solver maximizes `t` subject to `B(θ) − t·I ⪰ 0`
//! using a log-barrier path-following method with damped Newton steps. The
//! optimal `t` is the largest attainable deflated minimum eigenvalue, which
//! keeps the solution away from the boundary of the PSD cone so that rounding
//! has room to succeed.

use log::{debug, trace};
use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::grammodel::GramModel;
use crate::matrix::SymMatrix;
use crate::polyring::rational_to_f64;

/// Deflated minimum eigenvalue (target units) below which the search gives up.
pub const INFEASIBLE_MARGIN: f64 = -1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Newton-step budget across all barrier levels.
    pub max_iterations: usize,
    /// Minimum deflated eigenvalue accepted as PSD.
    pub feasibility_tolerance: f64,
    /// Relative gap at which the barrier path stops.
    pub step_tolerance: f64,
    /// Stop as soon as the deflated eigenvalue reaches this level. Useful when
    /// only the sign of the optimum matters.
    pub stop_margin: Option<f64>,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            feasibility_tolerance: 1e-9,
            step_tolerance: 1e-7,
            stop_margin: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Solved,
    InfeasibleSuspected,
    IterationLimit,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Solved => "solved",
            SolveStatus::InfeasibleSuspected => "infeasible_suspected",
            SolveStatus::IterationLimit => "iteration_limit",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NumericSolution {
    pub free_values: Vec<f64>,
    /// Minimum eigenvalue of `PᵀAP` at `free_values`, in target units.
    pub min_eigenvalue_deflated: f64,
    pub status: SolveStatus,
    /// Newton steps taken.
    pub iterations: usize,
    /// Deflated minimum eigenvalue after each barrier level that improved it.
    pub objective_trace: Vec<f64>,
    /// Largest target coefficient magnitude; the solver works in these units.
    pub scale: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum DeflateError {
    #[error("kernel vectors span the whole space")]
    KernelSpansEverything,
    #[error("kernel vectors are linearly dependent")]
    DependentKernel,
    #[error("kernel vector has length {got}, expected {expected}")]
    VectorLength { expected: usize, got: usize },
}

/// Orthonormal basis (as columns) of the orthogonal complement of `span(kernel)`.
pub fn complement_basis(dim: usize, kernel: &[Vec<f64>]) -> Result<DMatrix<f64>, DeflateError> {
    for v in kernel {
        if v.len() != dim {
            return Err(DeflateError::VectorLength {
                expected: dim,
                got: v.len(),
            });
        }
    }
    if kernel.is_empty() {
        return Ok(DMatrix::identity(dim, dim));
    }
    let mut gram = DMatrix::zeros(dim, dim);
    for v in kernel {
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        let v = DVector::from_column_slice(v) / norm2.sqrt();
        gram += &v * v.transpose();
    }
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(*x));
    let tiny = 1e-9 * top.max(1.0);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let null: Vec<usize> = order.into_iter().filter(|&i| eig.eigenvalues[i] < tiny).collect();
    if null.len() + kernel.len() != dim {
        return Err(DeflateError::DependentKernel);
    }
    if null.is_empty() {
        return Err(DeflateError::KernelSpansEverything);
    }
    Ok(DMatrix::from_fn(dim, null.len(), |i, k| eig.eigenvectors[(i, null[k])]))
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, b| a.min(*b))
}

/// Minimum eigenvalue of `PᵀAP`, where the columns of `P` span the orthogonal
/// complement of the kernel vectors.
pub fn min_eigenvalue_deflated(a: &SymMatrix<f64>, kernel: &[Vec<f64>]) -> Result<f64, DeflateError> {
    let p = complement_basis(a.dim(), kernel)?;
    Ok(min_eigenvalue(&(p.transpose() * a.to_dmatrix() * &p)))
}

/// The barrier problem in scaled, deflated coordinates:
/// `S(φ, t) = B0 + Σ φ_k G_k − t·I` with `θ = scale·φ`.
struct Barrier {
    b0: DMatrix<f64>,
    dirs: Vec<DMatrix<f64>>,
}

impl Barrier {
    fn dim(&self) -> usize {
        self.b0.nrows()
    }

    fn matrix(&self, phi: &[f64]) -> DMatrix<f64> {
        let mut s = self.b0.clone();
        for (c, g) in phi.iter().zip(&self.dirs) {
            if *c != 0.0 {
                s += g * *c;
            }
        }
        s
    }

    fn slack(&self, phi: &[f64], t: f64) -> DMatrix<f64> {
        let mut s = self.matrix(phi);
        for i in 0..self.dim() {
            s[(i, i)] -= t;
        }
        s
    }

    /// `t + μ·logdet(S)`, or `None` outside the cone.
    fn value(&self, phi: &[f64], t: f64, mu: f64) -> Option<(f64, Cholesky<f64, nalgebra::Dyn>)> {
        let chol = Cholesky::new(self.slack(phi, t))?;
        let logdet: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>();
        logdet.is_finite().then(|| (t + mu * logdet, chol))
    }

    /// Newton direction for the barrier at `(φ, t)` given the Cholesky factor of `S`.
    /// Returns the step and the squared Newton decrement.
    fn newton(&self, chol: &Cholesky<f64, nalgebra::Dyn>, mu: f64) -> (Vec<f64>, f64) {
        let r = self.dim();
        let l = chol.l();
        let whiten = |g: &DMatrix<f64>| -> DMatrix<f64> {
            let x = l.solve_lower_triangular(g).expect("nonsingular factor");
            let y = l
                .solve_lower_triangular(&x.transpose())
                .expect("nonsingular factor");
            (&y + y.transpose()) * 0.5
        };
        let mut w: Vec<DMatrix<f64>> = self.dirs.iter().map(whiten).collect();
        // the t direction has G_t = −I, so W_t = −S⁻¹
        w.push(-whiten(&DMatrix::identity(r, r)));
        let m = w.len();
        let mut hess = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = w[i].dot(&w[j]);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        hess *= mu;
        let mut grad = DVector::from_fn(m, |i, _| mu * w[i].trace());
        grad[m - 1] += 1.0;
        let mut reg = 0.0;
        let step = loop {
            let mut h = hess.clone();
            for i in 0..m {
                h[(i, i)] += reg;
            }
            if let Some(c) = Cholesky::new(h) {
                break c.solve(&grad);
            }
            reg = if reg == 0.0 { 1e-12 * hess.diagonal().max().max(1e-300) } else { reg * 100.0 };
        };
        let decrement = grad.dot(&step);
        (step.iter().copied().collect(), decrement)
    }
}

/// Maximizes the deflated minimum eigenvalue over the model's free parameters.
pub fn solve(model: &GramModel, config: &SolverConfig) -> NumericSolution {
    let scale = rational_to_f64(&model.target().max_abs_coeff()).max(f64::MIN_POSITIVE);
    let n = model.basis().len();
    let p = match complement_basis(n, &model.kernel_vectors_f64()) {
        Ok(p) => p,
        Err(_) => {
            // Every direction is forced into the kernel, so A = 0 is the only candidate.
            return NumericSolution {
                free_values: vec![0.0; model.num_free()],
                min_eigenvalue_deflated: 0.0,
                status: SolveStatus::Solved,
                iterations: 0,
                objective_trace: Vec::new(),
                scale,
            };
        }
    };
    let (offset, dirs) = model.affine_parts_f64();
    let project = |m: &SymMatrix<f64>| {
        let d = p.transpose() * m.to_dmatrix() * &p;
        (&d + d.transpose()) * 0.5
    };
    let barrier = Barrier {
        b0: project(&offset) / scale,
        dirs: dirs.iter().map(|d| project(d)).collect(),
    };
    let r = barrier.dim() as f64;
    let k = model.num_free();
    let deflated_min = |phi: &[f64]| min_eigenvalue(&barrier.matrix(phi)) * scale;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut phi: Vec<f64> = (0..k).map(|_| rng.random_range(-1e-3..1e-3)).collect();
    let mut t = min_eigenvalue(&barrier.matrix(&phi)) - 1.0;

    let mut mu = 1.0;
    let mut iterations = 0;
    let mut trace = Vec::new();
    let mut best = (f64::NEG_INFINITY, phi.clone());
    let mut stalled_since = 0usize;
    let mut status = SolveStatus::IterationLimit;

    'outer: loop {
        // centering at the current μ
        loop {
            if iterations >= config.max_iterations {
                break 'outer;
            }
            let (f0, chol) = barrier.value(&phi, t, mu).expect("iterate stays interior");
            let (step, decrement) = barrier.newton(&chol, mu);
            if decrement < 1e-10 {
                break;
            }
            iterations += 1;
            let mut alpha = 1.0;
            let mut accepted = false;
            while alpha > 1e-12 {
                let trial_phi: Vec<f64> = phi.iter().zip(&step).map(|(x, d)| x + alpha * d).collect();
                let trial_t = t + alpha * step[k];
                if let Some((f1, _)) = barrier.value(&trial_phi, trial_t, mu) {
                    if f1 >= f0 + 0.01 * alpha * decrement {
                        phi = trial_phi;
                        t = trial_t;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            trace!("newton step {iterations}: t = {t:.6e}, alpha = {alpha:.3e}, decrement = {decrement:.3e}");
            if !accepted || decrement < 1e-9 {
                break;
            }
        }
        let current = deflated_min(&phi);
        if current > best.0 {
            best = (current, phi.clone());
            trace.push(current);
            stalled_since = iterations;
        }
        if config.stop_margin.is_some_and(|m| best.0 >= m) {
            break;
        }
        let gap = mu * r;
        debug!(
            "barrier level mu = {mu:.3e}: t = {:.6e}, deflated lambda_min = {current:.6e}, newton steps = {iterations}",
            t * scale
        );
        // t + μ·r bounds the optimum from above at an exact center
        if (t + gap) * scale < INFEASIBLE_MARGIN {
            status = SolveStatus::InfeasibleSuspected;
            break;
        }
        if best.0 < INFEASIBLE_MARGIN && iterations >= stalled_since + 50 {
            status = SolveStatus::InfeasibleSuspected;
            break;
        }
        if gap <= config.step_tolerance * t.abs().max(1e-6) {
            break;
        }
        mu *= 0.2;
    }

    let (min_eig, free_scaled) = best;
    if status != SolveStatus::InfeasibleSuspected && min_eig >= -config.feasibility_tolerance {
        status = SolveStatus::Solved;
    } else if status == SolveStatus::IterationLimit && min_eig < INFEASIBLE_MARGIN {
        status = SolveStatus::InfeasibleSuspected;
    }
    NumericSolution {
        free_values: free_scaled.iter().map(|x| x * scale).collect(),
        min_eigenvalue_deflated: min_eig,
        status,
        iterations,
        objective_trace: trace,
        scale,
    }
}
