//! Signatures and finite relational structures.
//!
//! Elements of a structure with domain size `n` are the integers `0..n`.
//! Function symbols are not part of the data model; a function is encoded
//! by its graph, as `Plus/3` encodes addition in the modular examples.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Dense bitsets are only built for relations with at most this many
/// potential tuples.
const DENSE_LIMIT: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Signature {
    relations: Vec<RelationSymbol>,
    constants: Vec<String>,
    equality: Option<String>,
}

impl Signature {
    pub fn new(
        relations: Vec<RelationSymbol>,
        constants: Vec<String>,
        equality: Option<String>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for name in relations.iter().map(|r| &r.name).chain(constants.iter()) {
            if !is_identifier(name) {
                return Err(Error::Signature(format!(
                    "`{name}` is not a valid symbol name"
                )));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Signature(format!("symbol `{name}` declared twice")));
            }
        }
        if let Some(r) = relations.iter().find(|r| r.arity == 0) {
            return Err(Error::Signature(format!(
                "relation `{}` has arity 0",
                r.name
            )));
        }
        if let Some(eq) = &equality {
            match relations.iter().find(|r| &r.name == eq) {
                None => {
                    return Err(Error::Signature(format!(
                        "equality symbol `{eq}` is not a declared relation"
                    )))
                }
                Some(r) if r.arity != 2 => {
                    return Err(Error::Signature(format!(
                        "equality symbol `{eq}` must be binary, has arity {}",
                        r.arity
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(Signature {
            relations,
            constants,
            equality,
        })
    }

    /// A signature with relation symbols only.
    pub fn relational<'a>(symbols: impl IntoIterator<Item = (&'a str, usize)>) -> Result<Self> {
        let relations = symbols
            .into_iter()
            .map(|(name, arity)| RelationSymbol {
                name: name.to_string(),
                arity,
            })
            .collect();
        Signature::new(relations, Vec::new(), None)
    }

    pub fn relations(&self) -> &[RelationSymbol] {
        &self.relations
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn equality_name(&self) -> Option<&str> {
        self.equality.as_deref()
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn constant_index(&self, name: &str) -> Option<usize> {
        self.constants.iter().position(|c| c == name)
    }

    pub fn equality_index(&self) -> Option<usize> {
        self.equality
            .as_deref()
            .and_then(|e| self.relation_index(e))
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        self.relation_index(name).is_some() || self.constant_index(name).is_some()
    }

    /// Relation symbols other than the designated equality, with their indices.
    pub fn predicates(&self) -> impl Iterator<Item = (usize, &RelationSymbol)> {
        let eq = self.equality_index();
        self.relations
            .iter()
            .enumerate()
            .filter(move |(i, _)| Some(*i) != eq)
    }

    pub fn max_arity(&self) -> usize {
        self.predicates().map(|(_, r)| r.arity).max().unwrap_or(0)
    }

    pub(crate) fn with_extra_relations(&self, extra: Vec<RelationSymbol>) -> Result<Self> {
        let mut relations = self.relations.clone();
        relations.extend(extra);
        Signature::new(relations, self.constants.clone(), self.equality.clone())
    }

    pub(crate) fn with_equality(&self, equality: Option<String>) -> Result<Self> {
        Signature::new(self.relations.clone(), self.constants.clone(), equality)
    }
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(name, "forall" | "exists")
}

/// The interpretation of one relation symbol.
#[derive(Debug, Clone)]
pub struct Relation {
    arity: usize,
    tuples: BTreeSet<Vec<usize>>,
    dense: Option<Vec<u64>>,
    domain_size: usize,
}

impl Relation {
    fn new(arity: usize, tuples: BTreeSet<Vec<usize>>, domain_size: usize) -> Self {
        let dense = domain_size
            .checked_pow(arity as u32)
            .filter(|&cells| cells <= DENSE_LIMIT)
            .map(|cells| {
                let mut bits = vec![0u64; cells.div_ceil(64)];
                for t in &tuples {
                    if t.len() == arity && t.iter().all(|&x| x < domain_size) {
                        let i = dense_index(t, domain_size);
                        bits[i / 64] |= 1 << (i % 64);
                    }
                }
                bits
            });
        Relation {
            arity,
            tuples,
            dense,
            domain_size,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &BTreeSet<Vec<usize>> {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    #[inline]
    pub fn contains(&self, tuple: &[usize]) -> bool {
        match &self.dense {
            Some(bits) if tuple.iter().all(|&x| x < self.domain_size) => {
                let i = dense_index(tuple, self.domain_size);
                bits[i / 64] >> (i % 64) & 1 == 1
            }
            _ => self.tuples.contains(tuple),
        }
    }
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.tuples == other.tuples
    }
}

impl Eq for Relation {}

#[inline]
fn dense_index(tuple: &[usize], n: usize) -> usize {
    tuple.iter().rev().fold(0, |acc, &x| acc * n + x)
}

/// A finite structure. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    name: String,
    signature: Signature,
    domain_size: usize,
    relations: Vec<Relation>,
    constants: Vec<usize>,
    element_names: BTreeMap<usize, String>,
}

impl Structure {
    /// Builds a structure. Shape errors (wrong number of interpretations)
    /// are rejected here; content problems such as out-of-range tuples are
    /// left for [`validate`] to report.
    pub fn new(
        name: impl Into<String>,
        signature: Signature,
        domain_size: usize,
        interpretations: Vec<BTreeSet<Vec<usize>>>,
        constants: Vec<usize>,
        element_names: BTreeMap<usize, String>,
    ) -> Result<Self> {
        if interpretations.len() != signature.relations.len() {
            return Err(Error::SizeMismatch {
                expected: signature.relations.len(),
                found: interpretations.len(),
            });
        }
        if constants.len() != signature.constants.len() {
            return Err(Error::SizeMismatch {
                expected: signature.constants.len(),
                found: constants.len(),
            });
        }
        let relations = signature
            .relations
            .iter()
            .zip(interpretations)
            .map(|(sym, tuples)| Relation::new(sym.arity, tuples, domain_size))
            .collect();
        Ok(Structure {
            name: name.into(),
            signature,
            domain_size,
            relations,
            constants,
            element_names,
        })
    }

    pub fn builder(name: impl Into<String>, domain_size: usize) -> StructureBuilder {
        StructureBuilder::new(name, domain_size)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, index: usize) -> &Relation {
        &self.relations[index]
    }

    pub fn relation_by_name(&self, name: &str) -> Result<&Relation> {
        self.signature
            .relation_index(name)
            .map(|i| &self.relations[i])
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn constant_values(&self) -> &[usize] {
        &self.constants
    }

    pub fn element_names(&self) -> &BTreeMap<usize, String> {
        &self.element_names
    }

    pub fn element_label(&self, e: usize) -> String {
        match self.element_names.get(&e) {
            Some(name) => format!("{e} ({name})"),
            None => e.to_string(),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn equality_relation(&self) -> Option<&Relation> {
        self.signature.equality_index().map(|i| &self.relations[i])
    }

    /// True when the designated equality (if any) is interpreted as the diagonal.
    pub fn is_standard(&self) -> bool {
        match self.equality_relation() {
            None => true,
            Some(rel) => rel.tuples == diagonal(self.domain_size).to_tuples(),
        }
    }

    /// Applies `p` to every tuple and constant. `p` is an isomorphism from
    /// `self` onto the result.
    pub fn relabel(&self, p: &Permutation) -> Result<Structure> {
        check_len(p, self.domain_size)?;
        let interpretations = self
            .relations
            .iter()
            .map(|r| r.tuples.iter().map(|t| p.apply_tuple(t)).collect())
            .collect();
        let constants = self.constants.iter().map(|&c| p.apply(c)).collect();
        let names = self
            .element_names
            .iter()
            .map(|(&e, name)| (p.apply(e), name.clone()))
            .collect();
        Structure::new(
            self.name.clone(),
            self.signature.clone(),
            self.domain_size,
            interpretations,
            constants,
            names,
        )
    }

    /// Replaces the interpretation of the relation at `index`.
    pub fn with_interpretation(&self, index: usize, tuples: BTreeSet<Vec<usize>>) -> Structure {
        let mut out = self.clone();
        out.relations[index] = Relation::new(self.relations[index].arity, tuples, self.domain_size);
        out
    }

    /// Adds relation symbols together with their interpretations.
    pub fn with_relations(
        &self,
        extra: Vec<(RelationSymbol, BTreeSet<Vec<usize>>)>,
    ) -> Result<Structure> {
        let (symbols, tuples): (Vec<_>, Vec<_>) = extra.into_iter().unzip();
        let signature = self.signature.with_extra_relations(symbols)?;
        let mut interpretations: Vec<_> = self.relations.iter().map(|r| r.tuples.clone()).collect();
        interpretations.extend(tuples);
        Structure::new(
            self.name.clone(),
            signature,
            self.domain_size,
            interpretations,
            self.constants.clone(),
            self.element_names.clone(),
        )
    }

    /// Returns the structure with `equality` designated as the equality symbol.
    pub fn with_equality(&self, equality: Option<String>) -> Result<Structure> {
        let signature = self.signature.with_equality(equality)?;
        Ok(Structure {
            signature,
            ..self.clone()
        })
    }

    /// The first tuple witnessing that the element labelling `block_of` is
    /// not compatible with some relation: a tuple in the relation whose
    /// blockwise image also contains a tuple outside it. Every relation,
    /// including a designated equality, is checked.
    pub(crate) fn compatibility_violation(
        &self,
        block_of: &[usize],
    ) -> Option<(String, Vec<usize>)> {
        let block_sizes = {
            let mut sizes = BTreeMap::new();
            for &b in block_of {
                *sizes.entry(b).or_insert(0usize) += 1;
            }
            sizes
        };
        for (sym, rel) in self.signature.relations.iter().zip(&self.relations) {
            let mut images: BTreeMap<Vec<usize>, (usize, &Vec<usize>)> = BTreeMap::new();
            for t in &rel.tuples {
                let image: Vec<usize> = t.iter().map(|&x| block_of[x]).collect();
                let entry = images.entry(image).or_insert((0, t));
                entry.0 += 1;
            }
            for (image, (count, first)) in images {
                let full: usize = image.iter().map(|b| block_sizes[b]).product();
                if count != full {
                    return Some((sym.name.clone(), first.clone()));
                }
            }
        }
        None
    }
}

fn check_len(p: &Permutation, n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: p.len(),
        });
    }
    Ok(())
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::format::to_canonical_string(self))
    }
}

/// Incremental construction of a [`Structure`]; used by the file parser and
/// by the fixtures.
#[derive(Debug, Clone)]
pub struct StructureBuilder {
    name: String,
    domain_size: usize,
    relations: Vec<(RelationSymbol, BTreeSet<Vec<usize>>)>,
    constants: Vec<(String, usize)>,
    equality: Option<String>,
    names: BTreeMap<usize, String>,
}

impl StructureBuilder {
    pub fn new(name: impl Into<String>, domain_size: usize) -> Self {
        StructureBuilder {
            name: name.into(),
            domain_size,
            relations: Vec::new(),
            constants: Vec::new(),
            equality: None,
            names: BTreeMap::new(),
        }
    }

    pub fn relation<T, I>(mut self, name: &str, arity: usize, tuples: I) -> Self
    where
        T: AsRef<[usize]>,
        I: IntoIterator<Item = T>,
    {
        let tuples = tuples.into_iter().map(|t| t.as_ref().to_vec()).collect();
        self.relations.push((
            RelationSymbol {
                name: name.to_string(),
                arity,
            },
            tuples,
        ));
        self
    }

    pub fn unary<I: IntoIterator<Item = usize>>(self, name: &str, members: I) -> Self {
        let tuples: Vec<[usize; 1]> = members.into_iter().map(|x| [x]).collect();
        self.relation(name, 1, tuples)
    }

    pub fn constant(mut self, name: &str, value: usize) -> Self {
        self.constants.push((name.to_string(), value));
        self
    }

    pub fn equality(mut self, name: &str) -> Self {
        self.equality = Some(name.to_string());
        self
    }

    pub fn element_name(mut self, element: usize, name: &str) -> Self {
        self.names.insert(element, name.to_string());
        self
    }

    pub fn build(self) -> Result<Structure> {
        let (symbols, interpretations): (Vec<_>, Vec<_>) = self.relations.into_iter().unzip();
        let (constant_names, constant_values): (Vec<_>, Vec<_>) =
            self.constants.into_iter().unzip();
        let signature = Signature::new(symbols, constant_names, self.equality)?;
        Structure::new(
            self.name,
            signature,
            self.domain_size,
            interpretations,
            constant_values,
            self.names,
        )
    }
}

/// A binary relation on `0..domain_size`, e.g. the diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BinaryRelationView {
    pub domain_size: usize,
    pub pairs: BTreeSet<(usize, usize)>,
}

impl BinaryRelationView {
    pub fn new(domain_size: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        BinaryRelationView {
            domain_size,
            pairs: pairs.into_iter().collect(),
        }
    }

    pub fn total(domain_size: usize) -> Self {
        let all = (0..domain_size).flat_map(|a| (0..domain_size).map(move |b| (a, b)));
        BinaryRelationView::new(domain_size, all)
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn is_diagonal(&self) -> bool {
        *self == diagonal(self.domain_size)
    }

    pub fn to_tuples(&self) -> BTreeSet<Vec<usize>> {
        self.pairs.iter().map(|&(a, b)| vec![a, b]).collect()
    }

    /// Reads the interpretation of a binary relation of `s`.
    pub fn of_relation(s: &Structure, name: &str) -> Result<Self> {
        let rel = s.relation_by_name(name)?;
        if rel.arity() != 2 {
            return Err(Error::Arity {
                name: name.to_string(),
                expected: 2,
                found: rel.arity(),
            });
        }
        let pairs = rel.tuples().iter().map(|t| (t[0], t[1]));
        Ok(BinaryRelationView::new(s.domain_size(), pairs))
    }
}

/// The identity relation `{(x, x) : x < n}`.
pub fn diagonal(n: usize) -> BinaryRelationView {
    BinaryRelationView::new(n, (0..n).map(|x| (x, x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    TupleArity,
    ComponentOutOfRange,
    ConstantOutOfRange,
    NameOutOfRange,
    EqualityNotReflexive,
    EqualityNotSymmetric,
    EqualityNotTransitive,
    EqualityNotCompatible,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub symbol: Option<String>,
    pub tuple: Option<Vec<usize>>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)?;
        if let Some(sym) = &self.symbol {
            write!(f, " [{sym}")?;
            if let Some(t) = &self.tuple {
                write!(f, " {}", fmt_tuple(t))?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

pub(crate) fn fmt_tuple(t: &[usize]) -> String {
    let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Violations other than those about the equality symbol failing to be
    /// a congruence.
    pub fn structural(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| {
            !matches!(
                v.kind,
                ViolationKind::EqualityNotReflexive
                    | ViolationKind::EqualityNotSymmetric
                    | ViolationKind::EqualityNotTransitive
                    | ViolationKind::EqualityNotCompatible
            )
        })
    }
}

/// Reports every invariant violation of `s`; an empty report means valid.
pub fn validate(s: &Structure) -> ValidationReport {
    let n = s.domain_size;
    let mut violations = Vec::new();
    let mut push = |kind, symbol: Option<&str>, tuple: Option<&Vec<usize>>, message: String| {
        violations.push(Violation {
            kind,
            symbol: symbol.map(str::to_string),
            tuple: tuple.cloned(),
            message,
        })
    };

    let mut ranges_ok = true;
    for (sym, rel) in s.signature.relations.iter().zip(&s.relations) {
        for t in &rel.tuples {
            if t.len() != sym.arity {
                ranges_ok = false;
                push(
                    ViolationKind::TupleArity,
                    Some(&sym.name),
                    Some(t),
                    format!("tuple has {} components, arity is {}", t.len(), sym.arity),
                );
            } else if t.iter().any(|&x| x >= n) {
                ranges_ok = false;
                push(
                    ViolationKind::ComponentOutOfRange,
                    Some(&sym.name),
                    Some(t),
                    "component out of range".to_string(),
                );
            }
        }
    }
    for (name, &value) in s.signature.constants.iter().zip(&s.constants) {
        if value >= n {
            push(
                ViolationKind::ConstantOutOfRange,
                Some(name),
                None,
                format!("constant value {value} out of range"),
            );
        }
    }
    for &e in s.element_names.keys() {
        if e >= n {
            push(
                ViolationKind::NameOutOfRange,
                None,
                None,
                format!("display name given for element {e} outside the domain"),
            );
        }
    }

    if let (Some(eq_name), Some(eq)) = (s.signature.equality_name(), s.equality_relation()) {
        if ranges_ok {
            let mut equivalence = true;
            if let Some(x) = (0..n).find(|&x| !eq.contains(&[x, x])) {
                equivalence = false;
                push(
                    ViolationKind::EqualityNotReflexive,
                    Some(eq_name),
                    Some(&vec![x, x]),
                    "equality interpretation not reflexive, hence not a congruence".to_string(),
                );
            }
            if let Some(t) = eq.tuples.iter().find(|t| !eq.contains(&[t[1], t[0]])) {
                equivalence = false;
                push(
                    ViolationKind::EqualityNotSymmetric,
                    Some(eq_name),
                    Some(t),
                    "equality interpretation not symmetric, hence not a congruence".to_string(),
                );
            }
            let transitivity = eq.tuples.iter().find_map(|t| {
                (0..n)
                    .find(|&z| eq.contains(&[t[1], z]) && !eq.contains(&[t[0], z]))
                    .map(|z| vec![t[0], t[1], z])
            });
            if let Some(t) = transitivity {
                equivalence = false;
                push(
                    ViolationKind::EqualityNotTransitive,
                    Some(eq_name),
                    Some(&t),
                    "equality interpretation not transitive, hence not a congruence".to_string(),
                );
            }
            if equivalence {
                let block_of = classes_of(eq, n);
                if let Some((sym, t)) = s.compatibility_violation(&block_of) {
                    push(
                        ViolationKind::EqualityNotCompatible,
                        Some(&sym),
                        Some(&t),
                        format!("equality interpretation not compatible with `{sym}`, hence not a congruence"),
                    );
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Block labels of an equivalence relation, each block labelled by its least
/// member.
fn classes_of(eq: &Relation, n: usize) -> Vec<usize> {
    (0..n)
        .map(|x| (0..n).find(|&y| eq.contains(&[x, y])).unwrap_or(x))
        .collect()
}

/// Deterministic name for the singleton predicate of element `e`, escaping
/// collisions with `taken` by appending `_1`, `_2`, ...
pub fn singleton_predicate_name(e: usize, taken: &dyn Fn(&str) -> bool) -> String {
    let base = format!("I{e}");
    if !taken(&base) {
        return base;
    }
    (1..)
        .map(|k| format!("{base}_{k}"))
        .find(|candidate| !taken(candidate))
        .expect("unbounded suffix search")
}

/// Adds one unary predicate `{a}` per element `a`, named `I<a>`.
pub fn singleton_extension(s: &Structure) -> Result<Structure> {
    add_singletons(s, 0..s.domain_size).map(|(out, _)| out)
}

/// Adds singleton predicates for `elements` in order, returning the new
/// structure and the `(predicate, element)` pairs added.
pub(crate) fn add_singletons(
    s: &Structure,
    elements: impl IntoIterator<Item = usize>,
) -> Result<(Structure, Vec<(String, usize)>)> {
    let mut added: Vec<(String, usize)> = Vec::new();
    let mut extra = Vec::new();
    for e in elements {
        if e >= s.domain_size {
            return Err(Error::ElementOutOfRange {
                element: e,
                size: s.domain_size,
            });
        }
        let taken =
            |name: &str| s.signature.contains_symbol(name) || added.iter().any(|(n, _)| n == name);
        let name = singleton_predicate_name(e, &taken);
        extra.push((
            RelationSymbol {
                name: name.clone(),
                arity: 1,
            },
            BTreeSet::from([vec![e]]),
        ));
        added.push((name, e));
    }
    Ok((s.with_relations(extra)?, added))
}

/// True iff the interpretation of `rel` is closed under every permutation
/// of argument positions.
pub fn is_fully_symmetric(s: &Structure, rel: &str) -> Result<bool> {
    let relation = s.relation_by_name(rel)?;
    let k = relation.arity;
    if k < 2 {
        return Ok(true);
    }
    // Adjacent transpositions generate the symmetric group on positions.
    Ok(relation.tuples.iter().all(|t| {
        (0..k - 1).all(|i| {
            let mut swapped = t.clone();
            swapped.swap(i, i + 1);
            relation.contains(&swapped)
        })
    }))
}
