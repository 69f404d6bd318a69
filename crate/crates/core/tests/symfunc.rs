mod common;

use common::{
    dense_at_ones, dense_eval_f64, dense_of, dominates_or_equal, oracle_basis, oracle_target, partitions,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symsos::symfunc::{
    dominance_compare, eval_at_ones, expand, normalized, partitions_of, squared_homogeneous_difference,
    BasisKind, Dominance, Partition,
};

fn part(v: &[u32]) -> Partition {
    Partition::new(v.to_vec()).unwrap()
}

#[test]
fn expansions_match_brute_force_for_every_basis() {
    for n in 1..=4usize {
        let max_weight = if n == 4 { 5 } else { 6 };
        for d in 1..=max_weight {
            for parts in partitions(d) {
                let lam = part(&parts);
                for basis in BasisKind::ALL {
                    let ours = dense_of(&expand(basis, &lam, n));
                    let oracle = oracle_basis(basis.symbol(), &parts, n);
                    assert_eq!(ours, oracle, "{basis} {lam} in {n} variables");
                    assert_eq!(eval_at_ones(basis, &lam, n), dense_at_ones(&oracle));
                }
            }
        }
    }
}

#[test]
fn partition_counts() {
    let counts: Vec<usize> = (1..=10).map(|d| partitions_of(d).len()).collect();
    assert_eq!(counts, vec![1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
    for d in 1..=10 {
        let mut ours: Vec<Vec<u32>> = partitions_of(d).iter().map(|p| p.parts().to_vec()).collect();
        let mut oracle = partitions(d);
        ours.sort();
        oracle.sort();
        assert_eq!(ours, oracle);
    }
}

#[test]
fn partition_parsing() {
    assert_eq!("521".parse::<Partition>().unwrap(), part(&[5, 2, 1]));
    assert_eq!("10,3,1".parse::<Partition>().unwrap(), part(&[10, 3, 1]));
    assert!("125".parse::<Partition>().is_err());
    assert!("".parse::<Partition>().is_err());
    assert!("4a".parse::<Partition>().is_err());
    assert!(Partition::new(vec![2, 0, 1]).is_err());
}

#[test]
fn dominance_examples() {
    assert_eq!(dominance_compare(&part(&[4, 4]), &part(&[5, 2, 1])).unwrap(), Dominance::Incomparable);
    assert_eq!(dominance_compare(&part(&[5, 2, 1]), &part(&[4, 4])).unwrap(), Dominance::Incomparable);
    assert_eq!(dominance_compare(&part(&[2, 1]), &part(&[1, 1, 1])).unwrap(), Dominance::Dominates);
    assert_eq!(dominance_compare(&part(&[1, 1, 1]), &part(&[2, 1])).unwrap(), Dominance::DominatedBy);
    assert_eq!(dominance_compare(&part(&[3]), &part(&[3])).unwrap(), Dominance::Equal);
    assert!(dominance_compare(&part(&[3]), &part(&[2])).is_err());
}

fn arb_pair() -> impl Strategy<Value = (Vec<u32>, Vec<u32>)> {
    (1u32..=10).prop_flat_map(|d| {
        let all = partitions(d);
        let k = all.len();
        (0..k, 0..k).prop_map(move |(i, j)| (all[i].clone(), all[j].clone()))
    })
}

proptest! {
    #[test]
    fn dominance_agrees_with_prefix_sums((a, b) in arb_pair()) {
        let expected = match (dominates_or_equal(&a, &b), dominates_or_equal(&b, &a)) {
            (true, true) => Dominance::Equal,
            (true, false) => Dominance::Dominates,
            (false, true) => Dominance::DominatedBy,
            (false, false) => Dominance::Incomparable,
        };
        prop_assert_eq!(dominance_compare(&part(&a), &part(&b)).unwrap(), expected);
    }

    #[test]
    fn dominance_is_antisymmetric((a, b) in arb_pair()) {
        let ab = dominance_compare(&part(&a), &part(&b)).unwrap();
        let ba = dominance_compare(&part(&b), &part(&a)).unwrap();
        let flipped = match ab {
            Dominance::Dominates => Dominance::DominatedBy,
            Dominance::DominatedBy => Dominance::Dominates,
            other => other,
        };
        prop_assert_eq!(ba, flipped);
    }

    #[test]
    fn normalized_functions_equal_one_at_ones((a, _b) in arb_pair()) {
        let lam = part(&a);
        for basis in BasisKind::ALL {
            if let Ok(g) = normalized(basis, &lam, 3) {
                let ones = vec![common::qi(1); 3];
                prop_assert_eq!(g.eval(&ones).unwrap(), common::qi(1));
            }
        }
    }
}

#[test]
fn squared_differences_match_brute_force() {
    for (mu, lambda) in [(&[2u32, 1][..], &[1u32, 1, 1][..]), (&[4, 4], &[5, 2, 1]), (&[3, 1], &[2, 2])] {
        let ours = squared_homogeneous_difference(&part(mu), &part(lambda), 3).unwrap();
        assert_eq!(dense_of(&ours), oracle_target(mu, lambda, 3));
        assert!(ours.is_symmetric());
        assert_eq!(ours.homogeneous_degree(), Some(2 * mu.iter().sum::<u32>()));
    }
}

/// Sampled check of the classical Muirhead-type inequalities in three
/// variables: the larger side must stay larger at every nonnegative point.
#[test]
fn classical_inequalities_hold_on_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let points: Vec<Vec<f64>> =
        (0..200).map(|_| (0..3).map(|_| rng.random_range(0.0..10.0)).collect()).collect();
    let mut checked = 0;
    for d in 2..=6 {
        let all = partitions(d);
        for mu in &all {
            for lambda in &all {
                if mu == lambda || !dominates_or_equal(mu, lambda) {
                    continue;
                }
                for basis in BasisKind::ALL {
                    let sym = basis.symbol();
                    let (small, large) = if sym == 'e' { (mu, lambda) } else { (lambda, mu) };
                    let gs = oracle_basis(sym, small, 3);
                    let gl = oracle_basis(sym, large, 3);
                    let (cs, cl) = (dense_at_ones(&gs), dense_at_ones(&gl));
                    if cs == common::qi(0) || cl == common::qi(0) {
                        continue;
                    }
                    let (cs, cl) = (
                        num_traits::ToPrimitive::to_f64(&cs).unwrap(),
                        num_traits::ToPrimitive::to_f64(&cl).unwrap(),
                    );
                    for x in &points {
                        let vs = dense_eval_f64(&gs, x) / cs;
                        let vl = dense_eval_f64(&gl, x) / cl;
                        assert!(
                            vs <= vl + 1e-9 * vl.abs().max(vs.abs()),
                            "{sym}: {small:?} vs {large:?} at {x:?}: {vs} > {vl}"
                        );
                    }
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 100);
}

/// Leibniz expansion of `det(h_{λᵢ−i+j})` with dense polynomials.
fn jacobi_trudi_oracle(parts: &[u32], n: usize) -> common::DensePoly {
    let k = parts.len();
    let h = |i: usize, j: usize| {
        let d = parts[i] as i64 - i as i64 + j as i64;
        match d {
            d if d < 0 => common::DensePoly::new(),
            0 => common::dense_one(n),
            d => expand_h(d as u32, n),
        }
    };
    let mut total = common::DensePoly::new();
    for perm in common::all_permutations(k) {
        let inversions = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).filter(|&(a, b)| perm[a] > perm[b]).count();
        let term = (0..k).fold(common::dense_one(n), |acc, i| common::dense_mul(&acc, &h(i, perm[i])));
        total = if inversions % 2 == 0 {
            common::dense_sub(&total, &common::dense_scale(&term, &common::qi(-1)))
        } else {
            common::dense_sub(&total, &term)
        };
    }
    total
}

fn expand_h(d: u32, n: usize) -> common::DensePoly {
    dense_of(&expand(BasisKind::Homogeneous, &Partition::new(vec![d]).unwrap(), n))
}

#[test]
fn schur_matches_jacobi_trudi_determinant() {
    for d in 1..=5 {
        for parts in partitions(d) {
            let ours = dense_of(&expand(BasisKind::Schur, &part(&parts), 3));
            assert_eq!(ours, jacobi_trudi_oracle(&parts, 3), "{parts:?}");
        }
    }
}
