mod common;

use indiscern::discern::{
    classify_all, constructed_witnesses, is_relative_witness, is_weak_witness, leibniz_full,
    leibniz_powerset_sweep, verify_hierarchy, Verdict,
};
use indiscern::logic::{EnumerationBudget, Formula};
use indiscern::{zoo, Structure};
use proptest::prelude::*;

fn structure(max_n: usize) -> impl Strategy<Value = Structure> {
    (2..=max_n).prop_flat_map(|n| {
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

fn holds(s: &Structure, phi: &Formula, x: usize, y: usize) -> bool {
    common::eval_at(s, phi, &[("x", x), ("y", y)])
}

fn only_free(phi: &Formula, allowed: &[&str]) -> bool {
    phi.free_vars()
        .iter()
        .all(|v| allowed.contains(&v.as_str()))
}

fn budget() -> EnumerationBudget {
    EnumerationBudget::new(1, 7, 5000)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn witnesses_check_out_under_direct_semantics(s in structure(4)) {
        let n = s.domain_size();
        let autos = common::brute_force_automorphisms(&s);
        let mut types = common::Types::default();
        for c in classify_all(&s, budget()).unwrap() {
            let (a, b) = c.pair;
            match c.verdict {
                Verdict::AbsolutelyDiscernible => {
                    let phi = c.witness.unwrap();
                    prop_assert!(only_free(&phi, &["x"]));
                    prop_assert!(holds(&s, &phi, a, 0) && !holds(&s, &phi, b, 0));
                    let ta = types.of(&s, &mut vec![a], phi.quantifier_rank());
                    let tb = types.of(&s, &mut vec![b], phi.quantifier_rank());
                    prop_assert_ne!(ta, tb);
                }
                Verdict::RelativelyDiscernibleOnly => {
                    let phi = c.witness.unwrap();
                    prop_assert!(only_free(&phi, &["x", "y"]));
                    prop_assert_ne!(holds(&s, &phi, a, b), holds(&s, &phi, b, a));
                }
                Verdict::WeaklyDiscernibleOnly => {
                    let phi = c.witness.unwrap();
                    prop_assert!(only_free(&phi, &["x", "y"]));
                    prop_assert!(holds(&s, &phi, a, b) && !holds(&s, &phi, a, a));
                    for u in 0..n {
                        for v in 0..n {
                            prop_assert_eq!(holds(&s, &phi, u, v), holds(&s, &phi, v, u));
                        }
                    }
                    let irreflexive = (0..n).all(|u| !holds(&s, &phi, u, u));
                    prop_assert_eq!(c.weak_fully_irreflexive, Some(irreflexive));
                }
                Verdict::StructurallyIndiscernible => {
                    let cert = c.orbit_certificate.unwrap();
                    prop_assert_eq!(cert.apply(a), b);
                    prop_assert!(autos.contains(&cert.images().to_vec()));
                }
                Verdict::NotDiscernedWithinBudget => {
                    prop_assert!(autos.iter().all(|p| p[a] != b));
                }
            }
            // Orbit mates have no absolute witness, and swapped pairs no
            // relative one either.
            if autos.iter().any(|p| p[a] == b) {
                prop_assert_ne!(c.verdict, Verdict::AbsolutelyDiscernible);
            }
            if autos.iter().any(|p| p[a] == b && p[b] == a) {
                prop_assert!(matches!(
                    c.verdict,
                    Verdict::WeaklyDiscernibleOnly | Verdict::StructurallyIndiscernible
                ));
            }
        }
    }

    #[test]
    fn absolute_witnesses_yield_relative_and_weak_ones(s in structure(4)) {
        for c in classify_all(&s, budget()).unwrap() {
            if c.verdict != Verdict::AbsolutelyDiscernible {
                continue;
            }
            let (a, b) = c.pair;
            let (relative, weak) = constructed_witnesses(c.witness.as_ref().unwrap());
            prop_assert!(is_relative_witness(&s, &relative, a, b).unwrap());
            prop_assert!(is_weak_witness(&s, &weak, a, b).unwrap());
            prop_assert!(holds(&s, &relative, a, b) && !holds(&s, &relative, b, a));
        }
    }

    #[test]
    fn hierarchy_holds_on_small_structures(s in structure(4)) {
        let report = verify_hierarchy(&s, budget()).unwrap();
        prop_assert_eq!(report.counterexamples, 0);
        prop_assert!(report.holds());
    }
}

#[test]
fn full_leibniz_matches_the_powerset_sweep() {
    for n in 1..=8 {
        let s = zoo::empty_binary(n, false);
        for a in 0..n {
            for b in 0..n {
                assert_eq!(
                    leibniz_full(&s, a, b).unwrap(),
                    leibniz_powerset_sweep(&s, a, b).unwrap()
                );
            }
        }
    }
}

#[test]
fn orbit_mates_share_every_type() {
    for s in [zoo::z5add(), zoo::p3_path(), zoo::singlet()] {
        let mut types = common::Types::default();
        for orbit in common::brute_force_orbits(&s) {
            let ids: Vec<u32> = orbit
                .iter()
                .map(|&x| types.of(&s, &mut vec![x], 2))
                .collect();
            assert!(ids.windows(2).all(|w| w[0] == w[1]), "{}", s.name());
        }
    }
}
