mod common;

use std::collections::BTreeSet;

use common::{dense_eval_f64, dominates_or_equal, oracle_target, partitions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symsos::posetgen::{
    emit_dot, nodes_of, report_json, sweep, transitive_reduction, EdgeKind, PairStatus, SweepConfig, SweepMode,
};
use symsos::symfunc::Dominance;

/// Covering pairs `(λ, μ)` of dominance order, `μ` covering `λ`.
fn dominance_covers(d: u32) -> BTreeSet<(Vec<u32>, Vec<u32>)> {
    let all = partitions(d);
    let strictly = |a: &Vec<u32>, b: &Vec<u32>| a != b && dominates_or_equal(a, b);
    let mut covers = BTreeSet::new();
    for mu in &all {
        for lambda in &all {
            if strictly(mu, lambda) && !all.iter().any(|nu| strictly(mu, nu) && strictly(nu, lambda)) {
                covers.insert((lambda.clone(), mu.clone()));
            }
        }
    }
    covers
}

#[test]
fn small_degrees_reproduce_the_dominance_hasse_diagram() {
    for d in 2..=5 {
        let result = sweep(&SweepConfig::new(d, 3, SweepMode::Numeric));
        assert_eq!(result.nodes.len(), partitions(d).len());
        assert_eq!(result.pairs.len(), result.nodes.len() * (result.nodes.len() - 1));
        let edges: BTreeSet<(Vec<u32>, Vec<u32>)> = result
            .edges
            .iter()
            .map(|e| {
                assert_eq!(e.kind, EdgeKind::Dominance, "degree {d} has no incomparable certified pair");
                (e.from.parts().to_vec(), e.to.parts().to_vec())
            })
            .collect();
        assert_eq!(edges, dominance_covers(d), "degree {d}");
        for p in &result.pairs {
            match p.relation {
                Dominance::Dominates => assert_eq!(p.status, PairStatus::NumericSos, "{} / {}", p.mu, p.lambda),
                Dominance::DominatedBy => assert_eq!(p.status, PairStatus::NotCertified, "{} / {}", p.mu, p.lambda),
                _ => {}
            }
        }
    }
}

#[test]
fn exact_mode_certifies_every_dominance_pair() {
    let result = sweep(&SweepConfig::new(3, 3, SweepMode::Exact));
    let certified: Vec<_> = result.pairs.iter().filter(|p| p.status == PairStatus::ExactSos).collect();
    assert_eq!(certified.len(), 3);
    assert!(certified.iter().all(|p| p.relation == Dominance::Dominates));
    assert_eq!(result.edges.len(), 2);
}

#[test]
fn certified_pairs_are_nonnegative_on_samples() {
    let result = sweep(&SweepConfig::new(5, 3, SweepMode::Numeric));
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let points: Vec<Vec<f64>> = (0..100).map(|_| (0..3).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
    for p in result.pairs.iter().filter(|p| p.status.is_certified()) {
        let f = oracle_target(p.mu.parts(), p.lambda.parts(), 3);
        for x in &points {
            assert!(dense_eval_f64(&f, x) >= -1e-9, "{} / {} at {x:?}", p.mu, p.lambda);
        }
    }
}

#[test]
fn reduction_is_idempotent_and_sweeps_are_deterministic() {
    let a = sweep(&SweepConfig::new(4, 3, SweepMode::Numeric));
    let b = sweep(&SweepConfig::new(4, 3, SweepMode::Numeric));
    assert_eq!(a.edges, b.edges);
    assert_eq!(transitive_reduction(&a.nodes, &a.edges), a.edges);
}

#[test]
fn dot_output_lists_nodes_then_edges() {
    let result = sweep(&SweepConfig::new(4, 3, SweepMode::Numeric));
    let dot = emit_dot(&result.nodes, &result.edges);
    let lines: Vec<&str> = dot.lines().collect();
    assert_eq!(lines.first(), Some(&"digraph {"));
    assert_eq!(lines.last(), Some(&"}"));
    let node_lines = lines.iter().filter(|l| l.ends_with("\";")).count();
    let edge_lines: Vec<&&str> = lines.iter().filter(|l| l.contains("->")).collect();
    assert_eq!(node_lines, 5);
    assert_eq!(edge_lines.len(), result.edges.len());
    assert!(edge_lines.iter().all(|l| l.ends_with("[color=black];")));
    assert!(dot.contains("  \"1111\" -> \"211\" [color=black];"));
    assert_eq!(nodes_of(&result.nodes, &result.edges), result.nodes);
}

#[test]
fn report_lists_every_pair() {
    let result = sweep(&SweepConfig::new(3, 3, SweepMode::Numeric));
    let report = report_json(&result);
    let pairs = report["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 6);
    assert!(pairs.iter().all(|p| p["status"].is_string() && p["relation"].is_string()));
}

fn closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for &(a, b) in edges {
        r[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

proptest::proptest! {
    #[test]
    fn reduction_preserves_reachability(mask in proptest::collection::vec(proptest::bool::ANY, 64)) {
        use symsos::posetgen::PosetEdge;
        use symsos::symfunc::partitions_of;
        let nodes = partitions_of(6);
        let mut candidates = Vec::new();
        for (i, a) in nodes.iter().enumerate() {
            for (j, b) in nodes.iter().enumerate() {
                if i != j && dominates_or_equal(b.parts(), a.parts()) {
                    candidates.push((i, j));
                }
            }
        }
        let chosen: Vec<(usize, usize)> =
            candidates.iter().zip(mask.iter().cycle()).filter(|(_, &m)| m).map(|(e, _)| *e).collect();
        let edges: Vec<PosetEdge> = chosen
            .iter()
            .map(|&(i, j)| PosetEdge {
                from: nodes[i].clone(),
                to: nodes[j].clone(),
                kind: EdgeKind::Dominance,
                status: PairStatus::NumericSos,
                numeric_margin: None,
            })
            .collect();
        let reduced = transitive_reduction(&nodes, &edges);
        let idx = |p: &symsos::symfunc::Partition| nodes.iter().position(|q| q == p).unwrap();
        let kept: Vec<(usize, usize)> = reduced.iter().map(|e| (idx(&e.from), idx(&e.to))).collect();
        proptest::prop_assert_eq!(closure(nodes.len(), &kept), closure(nodes.len(), &chosen));
        proptest::prop_assert_eq!(&transitive_reduction(&nodes, &reduced), &reduced);
    }
}
