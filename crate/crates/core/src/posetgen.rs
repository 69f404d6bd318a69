//! Sweeps over all partition pairs of one degree and the resulting poset.
//!
//! An edge `λ → μ` records `H_λ <= H_μ`: black when `μ` strictly dominates
//! `λ`, blue when the two are incomparable yet the difference is certified.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use log::{debug, warn};
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::pipeline::{certify, model_for, CertifyRequest, PipelineError};
use crate::polyring::{Rational, SparsePoly};
use crate::rationalize::RoundingConfig;
use crate::sdpsolve::{solve, SolveStatus, SolverConfig, INFEASIBLE_MARGIN};
use crate::symfunc::{dominance_compare, normalized_difference, partitions_of, BasisKind, Dominance, Partition};

/// Deflated minimum eigenvalue that counts as a clear numeric SOS.
pub const NUMERIC_ACCEPT_MARGIN: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Numeric,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatus {
    NumericSos,
    ExactSos,
    /// Margin inside the inconclusive window, or rounding failed.
    Indeterminate,
    NotCertified,
}

impl PairStatus {
    pub fn is_certified(self) -> bool {
        matches!(self, PairStatus::NumericSos | PairStatus::ExactSos)
    }
}

/// Result of attempting to certify `H_λ <= H_μ`.
#[derive(Clone, Debug, Serialize)]
pub struct PairResult {
    pub mu: Partition,
    pub lambda: Partition,
    /// How `mu` compares to `lambda`.
    pub relation: Dominance,
    pub status: PairStatus,
    /// Best deflated minimum eigenvalue, when a numeric search ran.
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Dominance,
    Counterexample,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PosetEdge {
    /// `λ`, the smaller side.
    pub from: Partition,
    /// `μ`, the larger side.
    pub to: Partition,
    pub kind: EdgeKind,
    pub status: PairStatus,
    pub numeric_margin: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub degree: u32,
    pub nvars: usize,
    pub mode: SweepMode,
    pub solver: SolverConfig,
    pub rounding: RoundingConfig,
    /// Random nonnegative points tried before any semidefinite search.
    pub sample_points: usize,
}

impl SweepConfig {
    pub fn new(degree: u32, nvars: usize, mode: SweepMode) -> Self {
        Self {
            degree,
            nvars,
            mode,
            solver: SolverConfig::default(),
            rounding: RoundingConfig::default(),
            sample_points: 64,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub nodes: Vec<Partition>,
    pub pairs: Vec<PairResult>,
    /// Transitively reduced certified edges.
    pub edges: Vec<PosetEdge>,
}

/// Looks for a rational point of the nonnegative orthant where `diff < 0`.
/// Such a point rules out `diff >= 0` exactly.
fn negative_sample(diff: &SparsePoly, count: usize, seed: u64) -> Option<Vec<Rational>> {
    let n = diff.nvars();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Vec<Rational>> = Vec::with_capacity(count + n);
    // coordinate axes first: cheap and often decisive
    for i in 0..n {
        points.push((0..n).map(|j| Rational::from_integer(((i == j) as i64).into())).collect());
    }
    for _ in 0..count {
        points.push(
            (0..n)
                .map(|_| Rational::new(rng.random_range(0..=64i64).into(), 8.into()))
                .collect(),
        );
    }
    points
        .into_iter()
        .find(|p| diff.eval(p).expect("point length matches").is_negative())
}

fn attempt_pair(mu: &Partition, lambda: &Partition, config: &SweepConfig) -> PairResult {
    let relation = dominance_compare(mu, lambda).expect("same weight");
    let mut result = PairResult {
        mu: mu.clone(),
        lambda: lambda.clone(),
        relation,
        status: PairStatus::NotCertified,
        margin: None,
        note: None,
    };
    let diff = normalized_difference(BasisKind::Homogeneous, mu, lambda, config.nvars)
        .expect("complete homogeneous functions never vanish at the ones point");
    if let Some(p) = negative_sample(&diff, config.sample_points, config.solver.seed) {
        let shown: Vec<String> = p.iter().map(ToString::to_string).collect();
        result.note = Some(format!("negative at ({})", shown.join(", ")));
        return result;
    }
    let mut req = CertifyRequest::new(mu.clone(), lambda.clone(), config.nvars);
    req.solver = config.solver.clone();
    req.rounding = config.rounding.clone();
    match config.mode {
        SweepMode::Numeric => {
            let model = match model_for(&req) {
                Ok(m) => m,
                Err(e) => {
                    result.note = Some(e.to_string());
                    return result;
                }
            };
            // only the classification matters here, so stop once it is settled
            let mut solver = config.solver.clone();
            solver.stop_margin.get_or_insert(NUMERIC_ACCEPT_MARGIN);
            let numeric = solve(&model, &solver);
            let margin = numeric.min_eigenvalue_deflated;
            result.margin = Some(margin);
            result.status = if numeric.status == SolveStatus::InfeasibleSuspected || margin <= INFEASIBLE_MARGIN {
                PairStatus::NotCertified
            } else if margin >= NUMERIC_ACCEPT_MARGIN {
                PairStatus::NumericSos
            } else {
                PairStatus::Indeterminate
            };
        }
        SweepMode::Exact => match certify(&req) {
            Ok(out) => {
                result.margin = out.numeric.map(|n| n.min_eigenvalue_deflated);
                result.status = PairStatus::ExactSos;
            }
            Err(PipelineError::Sdp { status, margin }) => {
                result.margin = Some(margin);
                result.status = if status == SolveStatus::InfeasibleSuspected || margin <= INFEASIBLE_MARGIN {
                    PairStatus::NotCertified
                } else {
                    PairStatus::Indeterminate
                };
            }
            Err(PipelineError::Rounding(e)) => {
                result.status = PairStatus::Indeterminate;
                result.note = Some(e.to_string());
            }
            Err(e) => result.note = Some(e.to_string()),
        },
    }
    debug!("{} vs {}: {:?} margin {:?}", mu, lambda, result.status, result.margin);
    result
}

/// Attempts every ordered pair `(μ, λ)`, `μ != λ`, of partitions of `degree`.
pub fn sweep(config: &SweepConfig) -> SweepResult {
    assert!(config.degree >= 1 && config.nvars >= 1, "degree and nvars must be positive");
    let nodes = partitions_of(config.degree);
    let jobs: Vec<(usize, usize)> = (0..nodes.len())
        .flat_map(|i| (0..nodes.len()).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let mut pairs: Vec<((usize, usize), PairResult)> = jobs
        .par_iter()
        .map(|&(i, j)| ((i, j), attempt_pair(&nodes[i], &nodes[j], config)))
        .collect();
    pairs.sort_by_key(|(k, _)| *k);
    let pairs: Vec<PairResult> = pairs.into_iter().map(|(_, r)| r).collect();
    let edges = transitive_reduction(&nodes, &edges_from_pairs(&pairs));
    SweepResult { nodes, pairs, edges }
}

/// Dominance pairs and certified incomparable pairs, as unreduced edges.
pub fn edges_from_pairs(pairs: &[PairResult]) -> Vec<PosetEdge> {
    let mut edges = Vec::new();
    for p in pairs {
        let kind = match p.relation {
            Dominance::Dominates => EdgeKind::Dominance,
            Dominance::Incomparable if p.status.is_certified() => EdgeKind::Counterexample,
            Dominance::DominatedBy if p.status.is_certified() => {
                warn!("{} is dominated by {} yet certified; ignoring", p.mu, p.lambda);
                continue;
            }
            _ => continue,
        };
        edges.push(PosetEdge {
            from: p.lambda.clone(),
            to: p.mu.clone(),
            kind,
            status: p.status,
            numeric_margin: p.margin,
        });
    }
    edges
}

/// Keeps only certified edges, then drops a black edge when another black
/// path connects its ends, and a blue edge when any path of certified edges
/// does. Node order fixes the output order.
pub fn transitive_reduction(nodes: &[Partition], edges: &[PosetEdge]) -> Vec<PosetEdge> {
    let index: HashMap<&Partition, usize> = nodes.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let certified: Vec<&PosetEdge> = edges.iter().filter(|e| e.status.is_certified()).collect();
    let n = nodes.len();
    let adjacency = |filter: &dyn Fn(&PosetEdge) -> bool| -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); n];
        for e in certified.iter().filter(|e| filter(e)) {
            adj[index[&e.from]].insert(index[&e.to]);
        }
        adj
    };
    let black = adjacency(&|e| e.kind == EdgeKind::Dominance);
    let all = adjacency(&|_| true);
    let mut kept: Vec<PosetEdge> = certified
        .into_iter()
        .filter(|e| {
            let adj = if e.kind == EdgeKind::Dominance { &black } else { &all };
            !has_detour(adj, index[&e.from], index[&e.to])
        })
        .cloned()
        .collect();
    kept.sort_by_key(|e| (index[&e.from], index[&e.to]));
    kept
}

/// Whether `to` is reachable from `from` without using the direct edge.
fn has_detour(adj: &[BTreeSet<usize>], from: usize, to: usize) -> bool {
    let mut seen = vec![false; adj.len()];
    seen[from] = true;
    let mut stack: Vec<usize> = adj[from].iter().copied().filter(|&v| v != to).collect();
    while let Some(v) = stack.pop() {
        if v == to {
            return true;
        }
        if std::mem::replace(&mut seen[v], true) {
            continue;
        }
        stack.extend(adj[v].iter().copied());
    }
    false
}

/// DOT text for the poset. Nodes appear in the given order; edges are emitted
/// as given.
pub fn emit_dot(nodes: &[Partition], edges: &[PosetEdge]) -> String {
    let mut s = String::from("digraph {\n");
    for p in nodes {
        let _ = writeln!(s, "  \"{p}\";");
    }
    for e in edges {
        let color = match e.kind {
            EdgeKind::Dominance => "black",
            EdgeKind::Counterexample => "blue",
        };
        let _ = writeln!(s, "  \"{}\" -> \"{}\" [color={color}];", e.from, e.to);
    }
    s.push_str("}\n");
    s
}

/// Nodes touched by at least one edge, in first-appearance order of `order`.
pub fn nodes_of(order: &[Partition], edges: &[PosetEdge]) -> Vec<Partition> {
    order
        .iter()
        .filter(|p| edges.iter().any(|e| &e.from == *p || &e.to == *p))
        .cloned()
        .collect()
}

/// JSON report of every attempted pair.
pub fn report_json(result: &SweepResult) -> serde_json::Value {
    serde_json::json!({ "pairs": result.pairs })
}
