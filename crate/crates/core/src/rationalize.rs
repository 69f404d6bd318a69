//! Rounding numeric Gram solutions to exact rational ones.

use log::{debug, info};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::certify::{ldl_psd, LdlOutcome, LdlFactorization};
use crate::grammodel::GramModel;
use crate::matrix::SymMatrix;
use crate::polyring::Rational;
use crate::sdpsolve::{NumericSolution, SolveStatus};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundingConfig {
    pub denominator_bound: u64,
    pub escalation_factor: u64,
    pub max_escalations: u32,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        Self {
            denominator_bound: 150,
            escalation_factor: 10,
            max_escalations: 12,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoundingError {
    #[error("numeric solution has status {0}; rounding needs a solved one")]
    NotSolved(SolveStatus),
    #[error("no rounding up to denominator bound {last_bound} gave a PSD matrix (best numeric deflated lambda_min {best_margin:e})")]
    Exhausted { last_bound: BigInt, best_margin: f64 },
    #[error("rounding configuration values must be positive")]
    BadConfig,
}

/// The best rational approximation `p/q` of `x` with `1 <= q <= bound`.
///
/// Among equally close candidates the smaller denominator wins, then the
/// smaller `|p|`. Panics if `x` is not finite.
pub fn best_rational(x: f64, bound: &BigInt) -> Rational {
    let exact = Rational::from_float(x).expect("best_rational needs a finite input");
    best_rational_exact(&exact, bound)
}

/// [`best_rational`] for an exact rational input.
pub fn best_rational_exact(x: &Rational, bound: &BigInt) -> Rational {
    assert!(bound.is_positive(), "denominator bound must be positive");
    if x.denom() <= bound {
        return x.clone();
    }
    // convergents p/q via the standard recurrence, seeded with 1/0 and floor(x)/1
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p, mut q) = (x.numer().div_floor(x.denom()), BigInt::one());
    let mut rem = x - Rational::from_integer(p.clone());
    loop {
        // rem is in (0, 1) because the expansion has not terminated within the bound
        let inv = rem.recip();
        let a = inv.numer().div_floor(inv.denom());
        let q_next = &a * &q + &q_prev;
        if &q_next > bound {
            let steps = (bound - &q_prev).div_floor(&q);
            let semi = Rational::new(&p_prev + &steps * &p, &q_prev + &steps * &q);
            let conv = Rational::new(p.clone(), q.clone());
            return closer(x, conv, semi);
        }
        let p_next = &a * &p + &p_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        rem = inv - Rational::from_integer(a);
        debug_assert!(!rem.is_zero(), "exact hit would have returned earlier");
    }
}

fn closer(x: &Rational, a: Rational, b: Rational) -> Rational {
    let da = (x - &a).abs();
    let db = (x - &b).abs();
    let key = |r: &Rational| (r.denom().clone(), r.numer().abs());
    match da.cmp(&db) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => {
            if key(&a) <= key(&b) {
                a
            } else {
                b
            }
        }
    }
}

/// An exact PSD Gram matrix obtained by rounding.
#[derive(Clone, Debug)]
pub struct RoundedSolution {
    pub matrix: SymMatrix<Rational>,
    pub free_values: Vec<Rational>,
    pub factorization: LdlFactorization,
    pub denominator_bound: BigInt,
    pub attempts: u32,
}

/// Rounds every free parameter at the current bound, instantiates exactly and
/// checks PSD-ness, multiplying the bound by the escalation factor on failure.
pub fn round_solution(
    model: &GramModel,
    numeric: &NumericSolution,
    config: &RoundingConfig,
) -> Result<RoundedSolution, RoundingError> {
    if numeric.status != SolveStatus::Solved {
        return Err(RoundingError::NotSolved(numeric.status));
    }
    if config.denominator_bound == 0 || config.escalation_factor < 2 {
        return Err(RoundingError::BadConfig);
    }
    let mut bound = BigInt::from(config.denominator_bound);
    let factor = BigInt::from(config.escalation_factor);
    for attempt in 0..=config.max_escalations {
        let free_values: Vec<Rational> = numeric
            .free_values
            .iter()
            .map(|&x| best_rational(x, &bound))
            .collect();
        let matrix = model
            .instantiate(&free_values)
            .expect("numeric solution matches the model");
        match ldl_psd(&matrix) {
            LdlOutcome::Psd(factorization) => {
                info!("rounded with denominator bound {bound} after {} attempt(s)", attempt + 1);
                return Ok(RoundedSolution {
                    matrix,
                    free_values,
                    factorization,
                    denominator_bound: bound,
                    attempts: attempt + 1,
                });
            }
            LdlOutcome::NotPsd(w) => {
                debug!(
                    "bound {bound}: rounded matrix not PSD ({}), escalating",
                    w.kind
                );
            }
        }
        if attempt < config.max_escalations {
            bound *= &factor;
        }
    }
    Err(RoundingError::Exhausted {
        last_bound: bound,
        best_margin: numeric.min_eigenvalue_deflated,
    })
}

/// Number of decimal digits in the largest denominator of a matrix.
pub fn max_denominator_digits(a: &SymMatrix<Rational>) -> usize {
    a.upper()
        .iter()
        .map(|r| r.denom().to_string().len())
        .max()
        .unwrap_or(0)
}
