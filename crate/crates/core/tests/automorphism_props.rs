mod common;

use indiscern::automorphism::{
    automorphism_group, is_automorphism, is_rigid, rigidify, Strategy as Rigidify,
};
use indiscern::{singleton_extension, Permutation, Structure};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::Rng;

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

/// Structures with many automorphisms: a few disjoint copies of one graph.
fn symmetric_structure() -> impl Strategy<Value = Structure> {
    (
        1usize..=3,
        1usize..=3,
        prop::collection::vec(any::<bool>(), 9),
    )
        .prop_map(|(k, copies, edges)| {
            let n = k * copies;
            let mut pairs = Vec::new();
            for c in 0..copies {
                for a in 0..k {
                    for b in 0..k {
                        if edges[a * 3 + b] {
                            pairs.push([c * k + a, c * k + b]);
                        }
                    }
                }
            }
            Structure::builder("Copies", n)
                .relation("R", 2, pairs)
                .build()
                .unwrap()
        })
}

fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|images| Permutation::from_images(images).unwrap())
}

fn order_from_count(count: usize) -> BigUint {
    BigUint::from(count)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn agrees_with_brute_force(s in prop_oneof![structure(7), symmetric_structure()]) {
        let g = automorphism_group(&s);
        let autos = common::brute_force_automorphisms(&s);
        prop_assert_eq!(&g.order, &order_from_count(autos.len()));
        let orbits: Vec<Vec<usize>> = g.orbits.blocks().to_vec();
        prop_assert_eq!(orbits, common::brute_force_orbits(&s));
        for p in &g.generators {
            prop_assert!(autos.contains(&p.images().to_vec()));
        }
    }

    #[test]
    fn orbit_sizes_divide_the_order(s in prop_oneof![structure(7), symmetric_structure()]) {
        let g = automorphism_group(&s);
        for b in g.orbits.blocks() {
            prop_assert_eq!(&g.order % BigUint::from(b.len()), BigUint::from(0u32));
        }
    }

    #[test]
    fn invariant_under_relabelling(
        (s, p) in structure(7).prop_flat_map(|s| {
            let n = s.domain_size();
            (Just(s), permutation(n))
        })
    ) {
        let g = automorphism_group(&s);
        let t = s.relabel(&p).unwrap();
        let h = automorphism_group(&t);
        prop_assert_eq!(&g.order, &h.order);
        // Orbits move along the relabelling.
        for b in g.orbits.blocks() {
            let moved: Vec<usize> = b.iter().map(|&x| p.apply(x)).collect();
            prop_assert!(moved.iter().all(|&y| h.orbits.same_block(moved[0], y)));
            prop_assert_eq!(h.orbits.block_of(moved[0]).unwrap().len(), b.len());
        }
    }

    #[test]
    fn singleton_extension_is_rigid(s in prop_oneof![structure(7), symmetric_structure()]) {
        let t = singleton_extension(&s).unwrap();
        prop_assert!(is_rigid(&t));
        prop_assert_eq!(common::brute_force_automorphisms(&t).len(), 1);
    }

    #[test]
    fn greedy_rigidify_is_rigid_and_no_larger_than_full(s in symmetric_structure()) {
        let greedy = rigidify(&s, Rigidify::Greedy).unwrap();
        prop_assert!(is_rigid(&greedy.structure));
        prop_assert!(greedy.added.len() <= s.domain_size());
        if is_rigid(&s) {
            prop_assert!(greedy.added.is_empty());
        }
    }
}

#[test]
fn generators_close_under_random_products() {
    let mut rng = common::rng(7);
    let fixtures = [
        indiscern::zoo::z5add(),
        indiscern::zoo::empty_binary(6, false),
        indiscern::zoo::p3_path(),
    ];
    for s in &fixtures {
        let g = automorphism_group(s);
        let n = s.domain_size();
        let mut current = Permutation::identity(n);
        for _ in 0..1000 {
            let pick = &g.generators[rng.gen_range(0..g.generators.len())];
            let step = if rng.gen_bool(0.5) {
                pick.clone()
            } else {
                pick.inverse()
            };
            current = current.compose(&step);
            assert!(is_automorphism(s, &current).unwrap());
        }
    }
}

#[test]
fn certificates_map_within_orbits() {
    let s = indiscern::zoo::z5add();
    let g = automorphism_group(&s);
    for a in 1..5 {
        for b in 1..5 {
            let c = g.certificate(a, b).unwrap();
            assert_eq!(c.apply(a), b);
            assert!(is_automorphism(&s, &c).unwrap());
        }
    }
    assert!(g.certificate(0, 1).is_none());
}
