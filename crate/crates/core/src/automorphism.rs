//! Automorphism groups of finite structures.
//!
//! The search is individualization/refinement: colour the domain by an
//! equivariant refinement, repeatedly individualize an element of the
//! smallest non-singleton cell, and compare discrete leaves. The group is
//! built level by level along the leftmost path of the search tree, so
//! its order is the product of basic orbit lengths and never requires
//! listing elements.

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::partition::{Partition, UnionFind};
use crate::perm::Permutation;
use crate::structure::{add_singletons, Structure};

/// `p` maps every relation onto itself and fixes every constant.
pub fn is_automorphism(s: &Structure, p: &Permutation) -> Result<bool> {
    if p.len() != s.domain_size() {
        return Err(Error::SizeMismatch {
            expected: s.domain_size(),
            found: p.len(),
        });
    }
    if s.constant_values().iter().any(|&c| p.apply(c) != c) {
        return Ok(false);
    }
    // A bijection maps R injectively into R exactly when it maps R onto R.
    Ok(s.relations()
        .iter()
        .all(|r| r.tuples().iter().all(|t| r.contains(&p.apply_tuple(t)))))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Group {
    pub domain_size: usize,
    pub generators: Vec<Permutation>,
    #[serde(serialize_with = "decimal")]
    pub order: BigUint,
    pub orbits: Partition,
    /// Base points along the leftmost path of the search tree.
    pub base: Vec<usize>,
}

fn decimal<S: Serializer>(order: &BigUint, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    serializer.collect_str(order)
}

impl Group {
    pub fn is_trivial(&self) -> bool {
        self.order == BigUint::from(1u32)
    }

    /// An element of the group mapping `a` to `b`, built as a word in the
    /// generators, or `None` when `a` and `b` lie in different orbits.
    pub fn certificate(&self, a: usize, b: usize) -> Option<Permutation> {
        if a >= self.domain_size || b >= self.domain_size {
            return None;
        }
        let mut transversal: BTreeMap<usize, Permutation> = BTreeMap::new();
        transversal.insert(a, Permutation::identity(self.domain_size));
        let mut queue = VecDeque::from([a]);
        while let Some(u) = queue.pop_front() {
            if u == b {
                return transversal.remove(&b);
            }
            let t = transversal[&u].clone();
            for g in &self.generators {
                let v = g.apply(u);
                if let std::collections::btree_map::Entry::Vacant(slot) = transversal.entry(v) {
                    slot.insert(g.compose(&t));
                    queue.push_back(v);
                }
            }
        }
        None
    }
}

/// Colour refinement state for one structure.
struct Refiner<'s> {
    s: &'s Structure,
    /// For each element, the `(relation slot, tuple)` pairs it occurs in.
    incidence: Vec<Vec<(usize, &'s [usize])>>,
}

type Colouring = Vec<usize>;

impl<'s> Refiner<'s> {
    fn new(s: &'s Structure) -> Self {
        let skip = s
            .signature()
            .equality_index()
            .filter(|&i| s.relation(i).tuples().iter().all(|t| t[0] == t[1]) && s.is_standard());
        let rels: Vec<usize> = (0..s.relations().len())
            .filter(|&i| Some(i) != skip)
            .collect();
        let mut incidence = vec![Vec::new(); s.domain_size()];
        for (slot, &r) in rels.iter().enumerate() {
            for t in s.relation(r).tuples() {
                let mut last = usize::MAX;
                let mut members: Vec<usize> = t.clone();
                members.sort_unstable();
                for &x in &members {
                    if x != last {
                        incidence[x].push((slot, t.as_slice()));
                        last = x;
                    }
                }
            }
        }
        Refiner { s, incidence }
    }

    fn initial(&self) -> Colouring {
        let keys: Vec<Vec<usize>> = (0..self.s.domain_size())
            .map(|x| {
                (0..self.s.constant_values().len())
                    .filter(|&c| self.s.constant_values()[c] == x)
                    .collect()
            })
            .collect();
        self.refine(canonical_colours(&keys))
    }

    /// Iterates until every element of a cell sees the same multiset of
    /// coloured tuples. New colours are ranked by (old colour, multiset), so
    /// the result refines the input and commutes with isomorphisms.
    fn refine(&self, mut colours: Colouring) -> Colouring {
        let mut count = colour_count(&colours);
        loop {
            let keys: Vec<(usize, Vec<(usize, u64, Vec<usize>)>)> = (0..colours.len())
                .map(|x| {
                    let mut seen: Vec<(usize, u64, Vec<usize>)> = self.incidence[x]
                        .iter()
                        .map(|&(slot, t)| {
                            let mask = t
                                .iter()
                                .enumerate()
                                .filter(|&(_, &y)| y == x)
                                .fold(0u64, |m, (i, _)| m | 1 << (i % 64));
                            (slot, mask, t.iter().map(|&y| colours[y]).collect())
                        })
                        .collect();
                    seen.sort_unstable();
                    (colours[x], seen)
                })
                .collect();
            let next = canonical_colours(&keys);
            let next_count = colour_count(&next);
            if next_count == count {
                return colours;
            }
            colours = next;
            count = next_count;
        }
    }

    fn individualize(&self, colours: &Colouring, v: usize) -> Colouring {
        let keys: Vec<(usize, bool)> = (0..colours.len()).map(|x| (colours[x], x != v)).collect();
        self.refine(canonical_colours(&keys))
    }

    fn leaf_map(&self, from: &Colouring, to: &Colouring) -> Permutation {
        let mut element_of = vec![0; to.len()];
        for (x, &c) in to.iter().enumerate() {
            element_of[c] = x;
        }
        Permutation::from_images(from.iter().map(|&c| element_of[c]).collect())
            .expect("discrete colourings")
    }
}

fn canonical_colours<K: Ord + Clone>(keys: &[K]) -> Colouring {
    let mut sorted: Vec<&K> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(&k).expect("key is present"))
        .collect()
}

fn colour_count(colours: &Colouring) -> usize {
    colours.iter().max().map_or(0, |&m| m + 1)
}

fn cell_sizes(colours: &Colouring) -> Vec<usize> {
    let mut sizes = vec![0; colour_count(colours)];
    for &c in colours {
        sizes[c] += 1;
    }
    sizes
}

/// Members of the smallest non-singleton cell, lowest colour first.
fn target_cell(colours: &Colouring) -> Option<Vec<usize>> {
    let sizes = cell_sizes(colours);
    let colour = (0..sizes.len())
        .filter(|&c| sizes[c] > 1)
        .min_by_key(|&c| (sizes[c], c))?;
    Some(
        (0..colours.len())
            .filter(|&x| colours[x] == colour)
            .collect(),
    )
}

struct PathNode {
    colours: Colouring,
    sizes: Vec<usize>,
    cell: Option<Vec<usize>>,
}

/// The full automorphism group: generators, exact order, orbits and base.
pub fn automorphism_group(s: &Structure) -> Group {
    let n = s.domain_size();
    let refiner = Refiner::new(s);
    let mut path = Vec::new();
    let mut colours = refiner.initial();
    loop {
        let cell = target_cell(&colours);
        let next = cell.as_ref().map(|c| refiner.individualize(&colours, c[0]));
        path.push(PathNode {
            sizes: cell_sizes(&colours),
            colours,
            cell,
        });
        match next {
            Some(c) => colours = c,
            None => break,
        }
    }
    let leaf = path.last().expect("path has a root").colours.clone();
    let base: Vec<usize> = path
        .iter()
        .filter_map(|node| node.cell.as_ref().map(|c| c[0]))
        .collect();

    let mut generators: Vec<Permutation> = Vec::new();
    let mut order = BigUint::from(1u32);
    for level in (0..base.len()).rev() {
        let cell = path[level].cell.as_ref().expect("non-leaf level");
        let b = base[level];
        // Generators found so far all fix base[..=level - 1].
        let mut orbit = orbit_of(b, &generators, n);
        for &w in cell {
            if orbit[w] {
                continue;
            }
            let child = refiner.individualize(&path[level].colours, w);
            if let Some(g) = search(&refiner, &child, level + 1, &path, &leaf) {
                generators.push(g);
                orbit = orbit_of(b, &generators, n);
            }
        }
        order *= BigUint::from(orbit.iter().filter(|&&x| x).count());
    }
    generators.reverse();
    Group {
        domain_size: n,
        orbits: orbit_partition(&generators, n),
        generators,
        order,
        base,
    }
}

/// Depth-first search below `colours` for a leaf that yields an
/// automorphism against the leftmost leaf.
fn search(
    refiner: &Refiner,
    colours: &Colouring,
    depth: usize,
    path: &[PathNode],
    leaf: &Colouring,
) -> Option<Permutation> {
    let node = &path[depth];
    if cell_sizes(colours) != node.sizes {
        return None;
    }
    match target_cell(colours) {
        None => {
            let g = refiner.leaf_map(leaf, colours);
            is_automorphism(refiner.s, &g).unwrap_or(false).then_some(g)
        }
        Some(cell) => cell.iter().find_map(|&v| {
            let child = refiner.individualize(colours, v);
            search(refiner, &child, depth + 1, path, leaf)
        }),
    }
}

fn orbit_of(start: usize, generators: &[Permutation], n: usize) -> Vec<bool> {
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for g in generators {
            let v = g.apply(u);
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

fn orbit_partition(generators: &[Permutation], n: usize) -> Partition {
    let mut uf = UnionFind::new(n);
    for g in generators {
        for x in 0..n {
            uf.union(x, g.apply(x));
        }
    }
    Partition::from_labels(&uf.labels())
}

pub fn orbits(s: &Structure) -> Partition {
    automorphism_group(s).orbits
}

pub fn is_rigid(s: &Structure) -> bool {
    automorphism_group(s).is_trivial()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Full,
    Greedy,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(Strategy::Full),
            "greedy" => Ok(Strategy::Greedy),
            other => Err(format!(
                "unknown strategy `{other}` (expected full or greedy)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rigidified {
    pub structure: Structure,
    /// `(predicate, element)` for each singleton predicate added.
    pub added: Vec<(String, usize)>,
}

/// Extends `s` by singleton predicates until it is rigid. `Full` adds one
/// per element; `Greedy` repeatedly fixes the lowest element of a largest
/// non-trivial orbit.
pub fn rigidify(s: &Structure, strategy: Strategy) -> Result<Rigidified> {
    match strategy {
        Strategy::Full => {
            let (structure, added) = add_singletons(s, 0..s.domain_size())?;
            Ok(Rigidified { structure, added })
        }
        Strategy::Greedy => {
            let mut current = s.clone();
            let mut added = Vec::new();
            loop {
                let group = automorphism_group(&current);
                let pick = group
                    .orbits
                    .blocks()
                    .iter()
                    .filter(|b| b.len() > 1)
                    .min_by_key(|b| (std::cmp::Reverse(b.len()), b[0]))
                    .map(|b| b[0]);
                let Some(e) = pick else { break };
                let (next, mut new) = add_singletons(&current, [e])?;
                current = next;
                added.append(&mut new);
            }
            Ok(Rigidified {
                structure: current,
                added,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn z5add_units() {
        let s = zoo::z5add();
        let g = automorphism_group(&s);
        assert_eq!(g.order, BigUint::from(4u32));
        assert_eq!(g.orbits.to_string(), "{0} {1,2,3,4}");
        let double = Permutation::from_images((0..5).map(|x| 2 * x % 5).collect()).unwrap();
        assert!(is_automorphism(&s, &double).unwrap());
        assert!(!is_automorphism(&s, &Permutation::transposition(5, 0, 1)).unwrap());
        assert!(g.generators.iter().all(|p| is_automorphism(&s, p).unwrap()));
    }

    #[test]
    fn small_examples() {
        assert_eq!(
            automorphism_group(&zoo::singlet()).order,
            BigUint::from(2u32)
        );
        assert_eq!(orbits(&zoo::p3_path()).to_string(), "{0,2} {1}");
        let empty = zoo::empty_binary(3, false);
        let g = automorphism_group(&empty);
        assert_eq!(g.order, BigUint::from(6u32));
        assert_eq!(g.orbits.num_blocks(), 1);
        assert!(is_rigid(&zoo::empty_binary(1, false)));
        assert!(is_rigid(&zoo::empty_binary(0, false)));
    }

    #[test]
    fn large_symmetric_group_order() {
        let g = automorphism_group(&zoo::empty_binary(25, true));
        let factorial: BigUint = (1..=25u32).map(BigUint::from).product();
        assert_eq!(g.order, factorial);
    }

    #[test]
    fn certificates_map_a_to_b() {
        let s = zoo::z5add();
        let g = automorphism_group(&s);
        for b in 1..5 {
            let p = g.certificate(1, b).unwrap();
            assert_eq!(p.apply(1), b);
            assert!(is_automorphism(&s, &p).unwrap());
        }
        assert!(g.certificate(0, 1).is_none());
    }

    #[test]
    fn rigidify_examples() {
        let r = rigidify(&zoo::singlet(), Strategy::Greedy).unwrap();
        assert_eq!(r.added, [("I0".to_string(), 0)]);
        assert!(is_rigid(&r.structure));
        let r = rigidify(&zoo::z5add(), Strategy::Greedy).unwrap();
        assert_eq!(r.added, [("I1".to_string(), 1)]);
        let rigid = crate::singleton_extension(&zoo::z5add()).unwrap();
        let r = rigidify(&rigid, Strategy::Greedy).unwrap();
        assert!(r.added.is_empty());
        assert_eq!(r.structure, rigid);
        let full = rigidify(&zoo::z5add(), Strategy::Full).unwrap();
        assert_eq!(full.added.len(), 5);
        assert!(is_rigid(&full.structure));
    }

    #[test]
    fn size_mismatch_is_an_error() {
        assert!(is_automorphism(&zoo::singlet(), &Permutation::identity(3)).is_err());
    }
}
