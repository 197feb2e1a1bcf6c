//! Bounded enumeration of formulas.
//!
//! Formulas are produced in a fixed order: by node count, then by the
//! lexicographic order of their canonical text. Bound variables are named
//! by binding depth, so every enumerated formula is already in canonical
//! form.
//!
//! When deduplication structures are supplied, each subformula carries its
//! truth table over every assignment to the variables in scope (the free
//! variables plus the bound variables of the enclosing quantifiers), on
//! every structure. Two subformulas with equal tables are interchangeable
//! inside any context, so only the first of each class is kept and used to
//! build larger formulas. The least formula of every semantic class is
//! built only from least members of smaller classes, hence the output is
//! exactly the first representative of each class, in enumeration order.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::formula::{bound_var_name, BinOp, Formula, Quantifier, Term};
use crate::error::{Error, Result};
use crate::structure::{is_identifier, Signature, Structure};

/// Bounds on the formulas produced by [`enumerate_formulas`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnumerationBudget {
    pub max_quantifier_rank: usize,
    pub max_node_count: usize,
    pub max_formulas: usize,
    /// Only atoms: no connectives, no quantifiers.
    pub atomic_only: bool,
    /// Admit equality atoms when the signature designates equality.
    pub allow_equality: bool,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_quantifier_rank: 2,
            max_node_count: 9,
            max_formulas: 50_000,
            atomic_only: false,
            allow_equality: false,
        }
    }
}

impl EnumerationBudget {
    pub fn new(max_quantifier_rank: usize, max_node_count: usize, max_formulas: usize) -> Self {
        EnumerationBudget {
            max_quantifier_rank,
            max_node_count,
            max_formulas,
            ..Default::default()
        }
    }

    /// Rank 0, atoms only.
    pub fn atomic() -> Self {
        EnumerationBudget {
            max_quantifier_rank: 0,
            max_node_count: 1,
            atomic_only: true,
            ..Default::default()
        }
    }

    pub fn with_equality(mut self, allow: bool) -> Self {
        self.allow_equality = allow;
        self
    }
}

/// Candidate evaluations allowed in one enumeration before it stops and
/// reports truncation.
pub const DEFAULT_WORK_LIMIT: usize = 40_000_000;

/// Approximate bytes of stored formulas allowed in one enumeration before
/// it stops and reports truncation.
pub const DEFAULT_MEMORY_LIMIT: usize = 1 << 30;

/// Bookkeeping bytes per stored formula besides its table and text.
const ENTRY_OVERHEAD: usize = 96;

/// Largest number of assignments a single truth table may cover.
const MAX_TABLE_POINTS: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Enumeration {
    pub formulas: Vec<Formula>,
    /// Some formula within the budget was not produced.
    pub truncated: bool,
    /// Deduplication proved that no larger formula adds a new class.
    pub saturated: bool,
}

/// Enumerates formulas over `sig` whose free variables are among
/// `free_vars`. With `dedup_on`, formulas with identical truth tables on
/// that structure collapse to their first representative.
pub fn enumerate_formulas(
    sig: &Signature,
    free_vars: &[&str],
    budget: EnumerationBudget,
    dedup_on: Option<&Structure>,
) -> Result<Enumeration> {
    let structures: Vec<&Structure> = dedup_on.into_iter().collect();
    let mut e = Enumerator::new(sig, free_vars, budget, &structures)?;
    let mut formulas = Vec::new();
    while let Some(i) = e.next_formula() {
        formulas.push(e.formula(i));
    }
    Ok(Enumeration {
        formulas,
        truncated: e.truncated(),
        saturated: e.saturated(),
    })
}

#[derive(Debug, Clone, Copy)]
enum ArgSpec {
    Slot(usize),
    Const(usize),
}

#[derive(Debug, Clone)]
struct AtomSpec {
    formula: Formula,
    text: String,
    rel: usize,
    args: Vec<ArgSpec>,
}

#[derive(Debug, Clone, Copy)]
enum Node {
    Atom(u32),
    Not(u32),
    Binary(BinOp, u32, u32),
    /// Body lives one depth deeper.
    Quant(Quantifier, u32),
}

#[derive(Debug)]
struct Entry {
    node: Node,
    text: Box<str>,
    table: Option<Rc<[u64]>>,
}

#[derive(Debug, Default)]
struct Pool {
    entries: Vec<Entry>,
    /// `levels[k]` is the index range of entries with node count `k`.
    levels: Vec<std::ops::Range<usize>>,
    seen: HashMap<Rc<[u64]>, u32>,
}

impl Pool {
    fn level(&self, size: usize) -> std::ops::Range<usize> {
        self.levels.get(size).cloned().unwrap_or(0..0)
    }
}

/// Word layout of one structure's truth tables. A table at depth `d + 1`
/// is `n` consecutive copies of the depth-`d` layout, one per value of the
/// innermost bound variable.
#[derive(Debug, Clone)]
struct Layout {
    n: usize,
    free_points: usize,
    /// Words per table, by depth.
    words: Vec<usize>,
    /// Start of this structure's segment in the concatenated table, by depth.
    offsets: Vec<usize>,
}

#[derive(Debug)]
struct Semantics<'a> {
    structures: Vec<&'a Structure>,
    layouts: Vec<Layout>,
    /// Valid-bit masks of the concatenated tables, by depth.
    masks: Vec<Box<[u64]>>,
}

impl<'a> Semantics<'a> {
    fn new(structures: &[&'a Structure], free: usize, depths: usize) -> Result<Self> {
        let mut layouts = Vec::new();
        let mut totals = vec![0usize; depths];
        for s in structures {
            let n = s.domain_size();
            let too_big = || Error::CapExceeded {
                what: "truth tables",
                size: n,
                cap: MAX_TABLE_POINTS,
            };
            let free_points = n.checked_pow(free as u32).ok_or_else(too_big)?;
            let deepest = n
                .checked_pow((free + depths - 1) as u32)
                .ok_or_else(too_big)?;
            if deepest > MAX_TABLE_POINTS {
                return Err(too_big());
            }
            let mut words = vec![free_points.div_ceil(64)];
            for d in 1..depths {
                words.push(n * words[d - 1]);
            }
            let offsets = totals.clone();
            for d in 0..depths {
                totals[d] += words[d];
            }
            layouts.push(Layout {
                n,
                free_points,
                words,
                offsets,
            });
        }
        let masks = (0..depths)
            .map(|d| {
                let mut mask = vec![0u64; totals[d]];
                for l in &layouts {
                    let base = l.words[0];
                    for copy in 0..l.words[d] / base.max(1) {
                        for i in 0..l.free_points {
                            let w = l.offsets[d] + copy * base + i / 64;
                            mask[w] |= 1 << (i % 64);
                        }
                    }
                }
                mask.into_boxed_slice()
            })
            .collect();
        Ok(Semantics {
            structures: structures.to_vec(),
            layouts,
            masks,
        })
    }

    fn atom_table(&self, atom: &AtomSpec, free: usize, depth: usize) -> Box<[u64]> {
        let mut out = vec![0u64; self.masks[depth].len()];
        let mut env = vec![0usize; free + depth];
        let mut tuple = Vec::with_capacity(atom.args.len());
        for (s, l) in self.structures.iter().zip(&self.layouts) {
            let rel = s.relation(atom.rel);
            let points = l.free_points * l.n.pow(depth as u32);
            for p in 0..points {
                let mut rest = p;
                for slot in env.iter_mut() {
                    *slot = rest % l.n;
                    rest /= l.n;
                }
                tuple.clear();
                tuple.extend(atom.args.iter().map(|a| match *a {
                    ArgSpec::Slot(i) => env[i],
                    ArgSpec::Const(c) => s.constant_values()[c],
                }));
                if rel.contains(&tuple) {
                    let i = p % l.free_points;
                    let word = l.offsets[depth]
                        + (0..depth)
                            .map(|j| env[free + j] * l.words[j])
                            .sum::<usize>()
                        + i / 64;
                    out[word] |= 1 << (i % 64);
                }
            }
        }
        out.into_boxed_slice()
    }

    fn negate(&self, depth: usize, a: &[u64], out: &mut Vec<u64>) {
        out.clear();
        out.extend(a.iter().zip(self.masks[depth].iter()).map(|(x, m)| !x & m));
    }

    fn binary(&self, depth: usize, op: BinOp, a: &[u64], b: &[u64], out: &mut Vec<u64>) {
        out.clear();
        out.extend(
            a.iter()
                .zip(b)
                .zip(self.masks[depth].iter())
                .map(|((x, y), m)| op.apply_word(*x, *y) & m),
        );
    }

    fn quantify(&self, depth: usize, q: Quantifier, body: &[u64], out: &mut Vec<u64>) {
        out.clear();
        for l in &self.layouts {
            let w = l.words[depth];
            let start = out.len();
            match q {
                Quantifier::ForAll => out
                    .extend_from_slice(&self.masks[depth][l.offsets[depth]..l.offsets[depth] + w]),
                Quantifier::Exists => out.extend(std::iter::repeat_n(0, w)),
            }
            let src = &body[l.offsets[depth + 1]..l.offsets[depth + 1] + l.n * w];
            for chunk in src
                .chunks_exact(w.max(1))
                .take(if w == 0 { 0 } else { l.n })
            {
                for (o, c) in out[start..].iter_mut().zip(chunk) {
                    match q {
                        Quantifier::ForAll => *o &= c,
                        Quantifier::Exists => *o |= c,
                    }
                }
            }
        }
    }

    fn bit(&self, table: &[u64], structure: usize, free_values: &[usize]) -> bool {
        let l = &self.layouts[structure];
        let i = free_values.iter().rev().fold(0, |acc, &v| acc * l.n + v);
        table[l.offsets[0] + i / 64] >> (i % 64) & 1 == 1
    }
}

/// Streams formulas in enumeration order. Indices returned by
/// [`Enumerator::next_formula`] stay valid for the enumerator's lifetime.
#[derive(Debug)]
pub struct Enumerator<'a> {
    free: Vec<String>,
    bound_names: Vec<String>,
    budget: EnumerationBudget,
    depths: usize,
    atoms: Vec<Vec<AtomSpec>>,
    sem: Option<Semantics<'a>>,
    pools: Vec<Pool>,
    round: usize,
    cursor: usize,
    emitted: usize,
    work: usize,
    work_limit: usize,
    memory: usize,
    memory_limit: usize,
    finished: bool,
    truncated: bool,
    saturated: bool,
}

impl<'a> Enumerator<'a> {
    /// `dedup_on` may hold several structures over `sig`; formulas are then
    /// identified when their tables agree on all of them.
    pub fn new(
        sig: &Signature,
        free_vars: &[&str],
        budget: EnumerationBudget,
        dedup_on: &[&'a Structure],
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for v in free_vars {
            if !is_identifier(v) || sig.constant_index(v).is_some() {
                return Err(Error::Signature(format!(
                    "`{v}` cannot be used as a free variable"
                )));
            }
            if !seen.insert(v.to_string()) {
                return Err(Error::Signature(format!(
                    "free variable `{v}` listed twice"
                )));
            }
        }
        for s in dedup_on {
            if s.signature() != sig {
                return Err(Error::SignatureMismatch(format!(
                    "structure `{}` is not over the enumeration signature",
                    s.name()
                )));
            }
        }
        let free: Vec<String> = free_vars.iter().map(|v| v.to_string()).collect();
        let depths = if budget.atomic_only {
            1
        } else {
            budget.max_quantifier_rank + 1
        };
        let mut reserved: BTreeSet<String> = free.iter().cloned().collect();
        reserved.extend(sig.constants().iter().cloned());
        let bound_names: Vec<String> = (0..depths).map(|d| bound_var_name(d, &reserved)).collect();
        let atoms = (0..depths)
            .map(|d| atoms_at_depth(sig, &free, &bound_names[..d], budget.allow_equality))
            .collect();
        let sem = if dedup_on.is_empty() {
            None
        } else {
            Some(Semantics::new(dedup_on, free.len(), depths)?)
        };
        Ok(Enumerator {
            free,
            bound_names,
            budget,
            depths,
            atoms,
            sem,
            pools: (0..depths).map(|_| Pool::default()).collect(),
            round: 0,
            cursor: 0,
            emitted: 0,
            work: 0,
            work_limit: DEFAULT_WORK_LIMIT,
            memory: 0,
            memory_limit: DEFAULT_MEMORY_LIMIT,
            finished: false,
            truncated: false,
            saturated: false,
        })
    }

    pub fn with_memory_limit(mut self, bytes: usize) -> Self {
        self.memory_limit = bytes;
        self
    }

    pub fn with_work_limit(mut self, limit: usize) -> Self {
        self.work_limit = limit;
        self
    }

    pub fn free_vars(&self) -> &[String] {
        &self.free
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn saturated(&self) -> bool {
        self.saturated
    }

    /// Number of formulas handed out so far.
    pub fn emitted(&self) -> usize {
        self.emitted
    }

    /// Next formula index in enumeration order, or `None` once the budget
    /// is used up.
    pub fn next_formula(&mut self) -> Option<usize> {
        loop {
            if self.emitted >= self.budget.max_formulas {
                if self.cursor < self.pools[0].entries.len() || !self.finished {
                    self.truncated = true;
                }
                return None;
            }
            if self.cursor < self.pools[0].entries.len() {
                let i = self.cursor;
                self.cursor += 1;
                self.emitted += 1;
                return Some(i);
            }
            if self.finished {
                return None;
            }
            self.advance_round();
        }
    }

    pub fn formula(&self, index: usize) -> Formula {
        self.build_formula(0, index)
    }

    pub fn text(&self, index: usize) -> &str {
        &self.pools[0].entries[index].text
    }

    /// Truth value of formula `index` on dedup structure `structure`, with
    /// free variables valued positionally in `free_values`.
    ///
    /// # Panics
    /// If the enumerator was built without deduplication structures.
    pub fn holds(&self, index: usize, structure: usize, free_values: &[usize]) -> bool {
        let sem = self
            .sem
            .as_ref()
            .expect("truth tables need a dedup structure");
        let table = self.pools[0].entries[index]
            .table
            .as_ref()
            .expect("semantic entry");
        sem.bit(table, structure, free_values)
    }

    fn build_formula(&self, depth: usize, index: usize) -> Formula {
        match self.pools[depth].entries[index].node {
            Node::Atom(a) => self.atoms[depth][a as usize].formula.clone(),
            Node::Not(c) => Formula::not(self.build_formula(depth, c as usize)),
            Node::Binary(op, a, b) => Formula::binary(
                op,
                self.build_formula(depth, a as usize),
                self.build_formula(depth, b as usize),
            ),
            Node::Quant(q, body) => Formula::Quant(
                q,
                self.bound_names[depth].clone(),
                Box::new(self.build_formula(depth + 1, body as usize)),
            ),
        }
    }

    fn advance_round(&mut self) {
        let k = self.round + 1;
        let max_nodes = if self.budget.atomic_only {
            self.budget.max_node_count.min(1)
        } else {
            self.budget.max_node_count
        };
        if k > max_nodes {
            self.finished = true;
            return;
        }
        for d in (0..self.depths).rev() {
            if k <= d {
                continue;
            }
            if self.build_level(d, k - d).is_err() {
                self.finished = true;
                self.truncated = true;
                // Drop the half-built top level so output stays an exact prefix.
                let pool = &mut self.pools[0];
                let keep = pool.levels.last().map_or(0, |r| r.end);
                pool.entries.truncate(keep);
                return;
            }
        }
        self.round = k;
        if self.sem.is_some() {
            let largest = self
                .pools
                .iter()
                .filter_map(|p| p.levels.iter().rposition(|r| !r.is_empty()))
                .max()
                .unwrap_or(0);
            if k >= 2 * largest + 1 + (self.depths - 1) {
                self.finished = true;
                self.saturated = true;
            }
        }
    }

    /// The text of `node` as borrowed pieces, so that candidates can be
    /// compared without building strings.
    fn pieces(&self, depth: usize, node: &Node) -> [&str; 7] {
        let pool = &self.pools[depth];
        let text = |i: u32| -> &str { &pool.entries[i as usize].text };
        match *node {
            Node::Atom(a) => [&self.atoms[depth][a as usize].text, "", "", "", "", "", ""],
            Node::Not(c) => ["!", text(c), "", "", "", "", ""],
            Node::Binary(op, a, b) => ["(", text(a), " ", op.symbol(), " ", text(b), ")"],
            Node::Quant(q, body) => [
                "(",
                q.keyword(),
                " ",
                &self.bound_names[depth],
                ". ",
                &self.pools[depth + 1].entries[body as usize].text,
                ")",
            ],
        }
    }

    fn text_of(&self, depth: usize, node: &Node) -> String {
        self.pieces(depth, node).concat()
    }

    fn text_cmp(&self, depth: usize, a: &Node, b: &Node) -> Ordering {
        let (pa, pb) = (self.pieces(depth, a), self.pieces(depth, b));
        pa.iter()
            .flat_map(|s| s.bytes())
            .cmp(pb.iter().flat_map(|s| s.bytes()))
    }

    /// Of `a op b` and `b op a`, the one with the smaller text.
    fn orient(&self, depth: usize, node: Node) -> Node {
        match node {
            Node::Binary(op, a, b) if is_commutative(op) && a != b => {
                let flipped = Node::Binary(op, b, a);
                if self.text_cmp(depth, &flipped, &node) == Ordering::Less {
                    flipped
                } else {
                    node
                }
            }
            _ => node,
        }
    }

    fn candidate_count(&self, depth: usize, size: usize) -> usize {
        let pool = &self.pools[depth];
        if size == 1 {
            return self.atoms[depth].len();
        }
        if self.budget.atomic_only {
            return 0;
        }
        let mut count = pool.level(size - 1).len();
        if depth + 1 < self.depths {
            count += 2 * self.pools[depth + 1].level(size - 1).len();
        }
        for left in 1..size - 1 {
            count += BinOp::ALL.len() * pool.level(left).len() * pool.level(size - 1 - left).len();
        }
        count
    }

    /// Calls `f` on every candidate of the given size. With `symmetric`,
    /// commutative operators are offered once per unordered pair of
    /// operands; the caller orients them.
    fn each_candidate(&self, depth: usize, size: usize, symmetric: bool, mut f: impl FnMut(Node)) {
        let pool = &self.pools[depth];
        if size == 1 {
            (0..self.atoms[depth].len()).for_each(|a| f(Node::Atom(a as u32)));
            return;
        }
        if self.budget.atomic_only {
            return;
        }
        pool.level(size - 1).for_each(|c| f(Node::Not(c as u32)));
        if depth + 1 < self.depths {
            for body in self.pools[depth + 1].level(size - 1) {
                f(Node::Quant(Quantifier::ForAll, body as u32));
                f(Node::Quant(Quantifier::Exists, body as u32));
            }
        }
        for left in 1..size - 1 {
            let right = size - 1 - left;
            for a in pool.level(left) {
                for b in pool.level(right) {
                    for op in BinOp::ALL {
                        let mirrored = left > right || (left == right && b < a);
                        if symmetric && is_commutative(op) && mirrored {
                            continue;
                        }
                        f(Node::Binary(op, a as u32, b as u32));
                    }
                }
            }
        }
    }

    fn table_into(&self, sem: &Semantics, depth: usize, node: &Node, out: &mut Vec<u64>) {
        let table = |d: usize, i: u32| -> &[u64] {
            self.pools[d].entries[i as usize]
                .table
                .as_deref()
                .expect("table")
        };
        match *node {
            Node::Atom(a) => {
                out.clear();
                out.extend_from_slice(&sem.atom_table(
                    &self.atoms[depth][a as usize],
                    self.free.len(),
                    depth,
                ));
            }
            Node::Not(c) => sem.negate(depth, table(depth, c), out),
            Node::Binary(op, a, b) => sem.binary(depth, op, table(depth, a), table(depth, b), out),
            Node::Quant(q, body) => sem.quantify(depth, q, table(depth + 1, body), out),
        }
    }

    fn build_level(&mut self, depth: usize, size: usize) -> std::result::Result<(), ()> {
        self.work += self.candidate_count(depth, size);
        if self.work > self.work_limit {
            return Err(());
        }
        let mut fresh: Vec<(String, Node, Option<Rc<[u64]>>)> = Vec::new();
        if let Some(sem) = &self.sem {
            // Per table: the text-least candidate of this size.
            let mut best: HashMap<Rc<[u64]>, usize> = HashMap::new();
            let mut found: Vec<(Node, Option<Rc<[u64]>>)> = Vec::new();
            let mut buf = Vec::new();
            let seen = &self.pools[depth].seen;
            let room = self.memory_limit.saturating_sub(self.memory);
            let mut used = 0;
            self.each_candidate(depth, size, true, |node| {
                if used > room {
                    return;
                }
                self.table_into(sem, depth, &node, &mut buf);
                if seen.contains_key(buf.as_slice()) {
                    return;
                }
                match best.get(buf.as_slice()) {
                    Some(&i) => {
                        let node = self.orient(depth, node);
                        if self.text_cmp(depth, &node, &found[i].0) == Ordering::Less {
                            found[i].0 = node;
                        }
                    }
                    None => {
                        let table: Rc<[u64]> = buf.as_slice().into();
                        used += 8 * table.len() + 8 * size + ENTRY_OVERHEAD;
                        best.insert(table.clone(), found.len());
                        found.push((self.orient(depth, node), Some(table)));
                    }
                }
            });
            if used > room {
                return Err(());
            }
            self.memory += used;
            drop(best);
            fresh = found
                .into_iter()
                .map(|(node, table)| (self.text_of(depth, &node), node, table))
                .collect();
        } else {
            self.each_candidate(depth, size, false, |node| {
                fresh.push((self.text_of(depth, &node), node, None));
            });
        }
        fresh.sort_by(|a, b| a.0.cmp(&b.0));
        let pool = &mut self.pools[depth];
        while pool.levels.len() < size {
            let end = pool.entries.len();
            pool.levels.push(end..end);
        }
        let start = pool.entries.len();
        for (text, node, table) in fresh {
            if let Some(t) = &table {
                pool.seen.insert(t.clone(), pool.entries.len() as u32);
            }
            pool.entries.push(Entry {
                node,
                text: text.into_boxed_str(),
                table,
            });
        }
        pool.levels.push(start..pool.entries.len());
        Ok(())
    }
}

fn is_commutative(op: BinOp) -> bool {
    op != BinOp::Implies
}

fn atoms_at_depth(
    sig: &Signature,
    free: &[String],
    bound: &[String],
    allow_equality: bool,
) -> Vec<AtomSpec> {
    let mut terms: Vec<(Term, ArgSpec)> = Vec::new();
    for (i, v) in free.iter().chain(bound).enumerate() {
        terms.push((Term::Var(v.clone()), ArgSpec::Slot(i)));
    }
    for (i, c) in sig.constants().iter().enumerate() {
        terms.push((Term::Const(c.clone()), ArgSpec::Const(i)));
    }
    let mut out = Vec::new();
    let eq = sig.equality_index();
    for (index, sym) in sig.relations().iter().enumerate() {
        let is_eq = Some(index) == eq;
        if is_eq && !allow_equality {
            continue;
        }
        for combo in tuples(terms.len(), sym.arity) {
            let args: Vec<Term> = combo.iter().map(|&i| terms[i].0.clone()).collect();
            let specs = combo.iter().map(|&i| terms[i].1).collect();
            let formula = if is_eq {
                Formula::Eq(args[0].clone(), args[1].clone())
            } else {
                Formula::Atom {
                    rel: sym.name.clone(),
                    args,
                }
            };
            out.push(AtomSpec {
                text: formula.to_string(),
                formula,
                rel: index,
                args: specs,
            });
        }
    }
    out
}

/// All `k`-tuples over `0..m` in lexicographic order.
fn tuples(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..m).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}
