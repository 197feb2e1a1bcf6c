mod common;

use std::collections::BTreeSet;

use indiscern::ef::ef_game;
use indiscern::logic::EnumerationBudget;
use indiscern::quotient::{
    all_congruences, is_congruence, quotient, saturate, truth_transfer_check, QuotientMap,
};
use indiscern::{Partition, Structure};
use itertools::Itertools;
use proptest::prelude::*;

fn structure(max_n: usize) -> impl Strategy<Value = Structure> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(any::<bool>(), n * n),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(edges, marks)| {
                let pairs: Vec<[usize; 2]> = (0..n * n)
                    .filter(|&i| edges[i])
                    .map(|i| [i / n, i % n])
                    .collect();
                Structure::builder("S", n)
                    .relation("R", 2, pairs)
                    .unary("P", (0..n).filter(|&i| marks[i]))
                    .build()
                    .unwrap()
            })
    })
}

/// A structure whose designated equality `Eq` is a random equivalence and
/// whose `R` is lifted from a relation on its classes, so that the classes
/// form a congruence.
fn congruent_structure(max_n: usize) -> impl Strategy<Value = Structure> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(0..n, n),
            prop::collection::vec(any::<bool>(), n * n),
        )
            .prop_map(move |(labels, edges)| {
                let p = Partition::from_labels(&labels);
                let k = p.num_blocks();
                let f = p.block_index();
                let pairs: Vec<[usize; 2]> = (0..n)
                    .cartesian_product(0..n)
                    .filter(|&(a, b)| edges[f[a] * k + f[b]])
                    .map(|(a, b)| [a, b])
                    .collect();
                let eq: Vec<[usize; 2]> = (0..n)
                    .cartesian_product(0..n)
                    .filter(|&(a, b)| f[a] == f[b])
                    .map(|(a, b)| [a, b])
                    .collect();
                Structure::builder("Q", n)
                    .relation("R", 2, pairs)
                    .relation("Eq", 2, eq)
                    .equality("Eq")
                    .build()
                    .unwrap()
            })
    })
}

/// Every partition of `0..n`, by assigning each element to an earlier block
/// or a new one.
fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|labels: Vec<usize>| {
                let fresh = labels.iter().max().map_or(0, |m| m + 1);
                (0..=fresh).map(move |l| {
                    let mut next = labels.clone();
                    next.push(l);
                    next
                })
            })
            .collect();
    }
    out
}

/// Compatibility checked tuple by tuple against every blockwise variant.
fn compatible(s: &Structure, labels: &[usize]) -> bool {
    let n = s.domain_size();
    s.relations().iter().all(|r| {
        r.tuples().iter().all(|t| {
            t.iter()
                .map(|&x| (0..n).filter(move |&y| labels[y] == labels[x]))
                .multi_cartesian_product()
                .all(|variant| r.contains(&variant))
        })
    })
}

/// Rank-`k` types of `(a, b)` in the source and `(f a, f b)` in the target
/// agree for every pair: then every formula of rank `k` in `x, y` transfers.
fn types_transfer(qm: &QuotientMap, k: usize) -> bool {
    let mut types = common::Types::default();
    let n = qm.source.domain_size();
    (0..n).cartesian_product(0..n).all(|(a, b)| {
        types.of(&qm.source, &mut vec![a, b], k)
            == types.of(&qm.target, &mut vec![qm.f[a], qm.f[b]], k)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(80))]

    #[test]
    fn congruences_match_brute_force(s in structure(5)) {
        let found: BTreeSet<Partition> = all_congruences(&s).unwrap().into_iter().collect();
        let expected: BTreeSet<Partition> = all_partitions(s.domain_size())
            .into_iter()
            .filter(|labels| compatible(&s, labels))
            .map(|labels| Partition::from_labels(&labels))
            .collect();
        prop_assert_eq!(found, expected);
    }

    #[test]
    fn saturation_closes_minimally(
        (s, labels) in structure(5).prop_flat_map(|s| {
            let n = s.domain_size();
            (Just(s), prop::collection::vec(0..n, n))
        })
    ) {
        let p = Partition::from_labels(&labels);
        let t = saturate(&s, &p).unwrap();
        prop_assert!(is_congruence(&t, &p).unwrap());
        for (r, closed) in s.relations().iter().zip(t.relations()) {
            prop_assert!(r.tuples().is_subset(closed.tuples()));
        }
        prop_assert_eq!(&saturate(&t, &p).unwrap(), &t);
        if is_congruence(&s, &p).unwrap() {
            prop_assert_eq!(&t, &s);
        }
    }

    #[test]
    fn truth_transfers_along_every_congruence(s in congruent_structure(3)) {
        for c in all_congruences(&s).unwrap() {
            let qm = quotient(&s, &c).unwrap();
            prop_assert!(types_transfer(&qm, 1));
            let report = truth_transfer_check(&qm, EnumerationBudget::new(1, 7, 20_000)).unwrap();
            prop_assert!(report.passes, "{:?}", report.counterexample);
        }
    }

    #[test]
    fn broken_maps_are_caught(s in congruent_structure(3)) {
        let n = s.domain_size();
        for c in all_congruences(&s).unwrap() {
            let qm = quotient(&s, &c).unwrap();
            let m = qm.target.domain_size();
            for x in 0..n {
                for y in 0..m {
                    let mut broken = qm.clone();
                    broken.f[x] = y;
                    let atomic = types_transfer(&broken, 0);
                    let report =
                        truth_transfer_check(&broken, EnumerationBudget::new(0, 4, 1000)).unwrap();
                    prop_assert_eq!(report.passes, atomic);
                }
            }
        }
    }

    #[test]
    fn ef_matches_hintikka_types(a in structure(3), b in structure(3), rounds in 0usize..=3) {
        let mut types = common::Types::default();
        let same = types.sentence_type(&a, rounds) == types.sentence_type(&b, rounds);
        prop_assert_eq!(ef_game(&a, &b, rounds).unwrap().equivalent, same);
    }

    #[test]
    fn ef_sees_through_relabelling(
        (s, images) in structure(4).prop_flat_map(|s| {
            let n = s.domain_size();
            (Just(s), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
        })
    ) {
        let t = common::relabel(&s, images);
        prop_assert!(ef_game(&s, &t, 3).unwrap().equivalent);
    }
}
