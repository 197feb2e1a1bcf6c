//! Independent oracles shared by the integration tests: brute force over
//! permutations, Hintikka types for bounded elementary equivalence, and
//! seeded corpora of small structures.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use indiscern::{Permutation, Structure};
use itertools::Itertools;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CORPUS_SEED: u64 = 0x1d15_ce27;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn maps_onto_itself(s: &Structure, images: &[usize]) -> bool {
    s.relations().iter().all(|r| {
        r.tuples().iter().all(|t| {
            let image: Vec<usize> = t.iter().map(|&x| images[x]).collect();
            r.contains(&image)
        })
    }) && s.constant_values().iter().all(|&c| images[c] == c)
}

/// Every automorphism, by trying all `n!` permutations.
pub fn brute_force_automorphisms(s: &Structure) -> Vec<Vec<usize>> {
    let n = s.domain_size();
    (0..n)
        .permutations(n)
        .filter(|p| maps_onto_itself(s, p))
        .collect()
}

/// Orbits as sorted blocks sorted by least member.
pub fn brute_force_orbits(s: &Structure) -> Vec<Vec<usize>> {
    let autos = brute_force_automorphisms(s);
    let mut seen = vec![false; s.domain_size()];
    let mut out = Vec::new();
    for x in 0..s.domain_size() {
        if seen[x] {
            continue;
        }
        let orbit: BTreeSet<usize> = autos.iter().map(|p| p[x]).collect();
        for &y in &orbit {
            seen[y] = true;
        }
        out.push(orbit.into_iter().collect());
    }
    out
}

/// A bijection `f` with `R^A(t) <-> R^B(f(t))` for every relation, found by
/// brute force.
pub fn isomorphism(a: &Structure, b: &Structure) -> Option<Vec<usize>> {
    let n = a.domain_size();
    if n != b.domain_size() || a.signature() != b.signature() {
        return None;
    }
    (0..n).permutations(n).find(|f| {
        a.relations().iter().zip(b.relations()).all(|(ra, rb)| {
            ra.len() == rb.len()
                && ra.tuples().iter().all(|t| {
                    let image: Vec<usize> = t.iter().map(|&x| f[x]).collect();
                    rb.contains(&image)
                })
        }) && a
            .constant_values()
            .iter()
            .zip(b.constant_values())
            .all(|(&x, &y)| f[x] == y)
    })
}

pub fn relabel(s: &Structure, images: Vec<usize>) -> Structure {
    s.relabel(&Permutation::from_images(images).unwrap())
        .unwrap()
}

/// One binary relation `R` and one unary relation `P` on `n` elements.
pub fn random_structure(rng: &mut ChaCha8Rng, n: usize, index: usize) -> Structure {
    let density: f64 = rng.gen_range(0.15..0.6);
    let edges: Vec<[usize; 2]> = (0..n)
        .cartesian_product(0..n)
        .filter(|_| rng.gen_bool(density))
        .map(|(a, b)| [a, b])
        .collect();
    let marked: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
    Structure::builder(format!("Random{index}"), n)
        .relation("R", 2, edges)
        .unary("P", marked)
        .build()
        .unwrap()
}

/// The seeded corpus of 200 structures with `1 <= n <= 7`.
pub fn random_corpus() -> Vec<Structure> {
    let mut rng = rng(CORPUS_SEED);
    (0..200)
        .map(|i| {
            let n = rng.gen_range(1..=7);
            random_structure(&mut rng, n, i)
        })
        .collect()
}

/// Every structure on `n` elements with a single binary relation `R`.
pub fn all_binary(n: usize) -> Vec<Structure> {
    let cells: Vec<[usize; 2]> = (0..n)
        .cartesian_product(0..n)
        .map(|(a, b)| [a, b])
        .collect();
    (0u64..1 << cells.len())
        .map(|mask| {
            let edges = cells
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, c)| *c);
            Structure::builder(format!("B{n}_{mask}"), n)
                .relation("R", 2, edges)
                .build()
                .unwrap()
        })
        .collect()
}

/// One representative per isomorphism class of [`all_binary`].
pub fn binary_up_to_iso(n: usize) -> Vec<Structure> {
    let mut reps: Vec<Structure> = Vec::new();
    for s in all_binary(n) {
        if !reps.iter().any(|r| isomorphism(r, &s).is_some()) {
            reps.push(s);
        }
    }
    reps
}

/// Hintikka types: `tp_0(a)` is the atomic diagram of the tuple `a`, and
/// `tp_k(a)` is `tp_0(a)` with the set of `tp_(k-1)(a b)` over all `b`.
/// Equal rank-`k` types of the empty tuple are exactly agreement on every
/// sentence of quantifier rank at most `k`, equality taken from the
/// signature only.
#[derive(Default)]
pub struct Types {
    ids: HashMap<(Vec<bool>, Vec<u32>), u32>,
}

impl Types {
    fn atomic(s: &Structure, tuple: &[usize]) -> Vec<bool> {
        let m = tuple.len();
        let mut out = Vec::new();
        for (sym, rel) in s.signature().relations().iter().zip(s.relations()) {
            for idx in (0..sym.arity).map(|_| 0..m).multi_cartesian_product() {
                let args: Vec<usize> = idx.iter().map(|&i| tuple[i]).collect();
                out.push(rel.contains(&args));
            }
        }
        out
    }

    pub fn of(&mut self, s: &Structure, tuple: &mut Vec<usize>, k: usize) -> u32 {
        let atomic = Self::atomic(s, tuple);
        let mut below = BTreeSet::new();
        if k > 0 {
            for b in 0..s.domain_size() {
                tuple.push(b);
                below.insert(self.of(s, tuple, k - 1));
                tuple.pop();
            }
        }
        let key = (atomic, below.into_iter().collect());
        let next = self.ids.len() as u32;
        *self.ids.entry(key).or_insert(next)
    }

    pub fn sentence_type(&mut self, s: &Structure, k: usize) -> u32 {
        let mut constants: Vec<usize> = s.constant_values().to_vec();
        self.of(s, &mut constants, k)
    }
}

/// Direct recursive semantics, kept independent of the library evaluator.
pub fn naive_eval(
    s: &Structure,
    phi: &indiscern::logic::Formula,
    env: &mut std::collections::BTreeMap<String, usize>,
) -> bool {
    use indiscern::logic::{BinOp, Formula, Quantifier, Term};
    let value = |t: &Term, env: &std::collections::BTreeMap<String, usize>| match t {
        Term::Var(v) => env[v],
        Term::Const(c) => {
            let i = s.signature().constant_index(c).unwrap();
            s.constant_values()[i]
        }
    };
    match phi {
        Formula::Atom { rel, args } => {
            let tuple: Vec<usize> = args.iter().map(|t| value(t, env)).collect();
            s.relation_by_name(rel).unwrap().contains(&tuple)
        }
        Formula::Eq(a, b) => {
            let pair = [value(a, env), value(b, env)];
            s.equality_relation().unwrap().contains(&pair)
        }
        Formula::Not(f) => !naive_eval(s, f, env),
        Formula::Binary(op, a, b) => {
            let (a, b) = (naive_eval(s, a, env), naive_eval(s, b, env));
            match op {
                BinOp::And => a && b,
                BinOp::Or => a || b,
                BinOp::Implies => !a || b,
                BinOp::Iff => a == b,
            }
        }
        Formula::Quant(q, v, body) => {
            let saved = env.get(v).copied();
            let mut results = (0..s.domain_size()).map(|e| {
                env.insert(v.clone(), e);
                naive_eval(s, body, env)
            });
            let out = match q {
                Quantifier::ForAll => results.all(|r| r),
                Quantifier::Exists => results.any(|r| r),
            };
            match saved {
                Some(e) => env.insert(v.clone(), e),
                None => env.remove(v),
            };
            out
        }
    }
}

pub fn eval_at(s: &Structure, phi: &indiscern::logic::Formula, pairs: &[(&str, usize)]) -> bool {
    let mut env = pairs.iter().map(|(v, e)| (v.to_string(), *e)).collect();
    naive_eval(s, phi, &mut env)
}
