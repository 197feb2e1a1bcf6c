//! Absolute, relative and weak discernibility of elements, the Leibniz
//! checks, and the implication chain between the identity principles.
//!
//! Formula searches are budget-relative. The only budget-independent
//! negative is an automorphism: elements in one orbit satisfy the same
//! one-variable formulas, whatever their size.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::automorphism::{automorphism_group, rigidify, Group, Strategy};
use crate::error::{Error, Result};
use crate::logic::{assignment, Compiled, EnumerationBudget, Enumerator, Formula};
use crate::perm::Permutation;
use crate::structure::Structure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AbsolutelyDiscernible,
    RelativelyDiscernibleOnly,
    WeaklyDiscernibleOnly,
    NotDiscernedWithinBudget,
    StructurallyIndiscernible,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::AbsolutelyDiscernible => "absolutely_discernible",
            Verdict::RelativelyDiscernibleOnly => "relatively_discernible_only",
            Verdict::WeaklyDiscernibleOnly => "weakly_discernible_only",
            Verdict::NotDiscernedWithinBudget => "not_discerned_within_budget",
            Verdict::StructurallyIndiscernible => "structurally_indiscernible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairClassification {
    pub pair: (usize, usize),
    pub verdict: Verdict,
    pub witness: Option<Formula>,
    pub budget_used: EnumerationBudget,
    /// An automorphism mapping the first element to the second; present
    /// exactly for structurally indiscernible pairs.
    pub orbit_certificate: Option<Permutation>,
    /// For weak witnesses: the relation is irreflexive on the whole domain.
    pub weak_fully_irreflexive: Option<bool>,
    /// The enumeration stopped on its formula or work cap.
    pub truncated: bool,
}

/// Outcome of a single-pair search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Search {
    pub witness: Option<Formula>,
    /// Set when an automorphism rules the search out in advance.
    pub certificate: Option<Permutation>,
    pub truncated: bool,
}

fn check_pair(s: &Structure, a: usize, b: usize) -> Result<()> {
    let n = s.domain_size();
    if let Some(&e) = [a, b].iter().find(|&&e| e >= n) {
        return Err(Error::ElementOutOfRange {
            element: e,
            size: n,
        });
    }
    if a == b {
        return Err(Error::IdenticalElements);
    }
    Ok(())
}

fn eval2(c: &Compiled, a: usize, b: usize) -> bool {
    c.eval(&assignment([("x", a), ("y", b)]))
        .expect("witness free variables are among x, y")
}

/// `phi(x)` holds at `a` and fails at `b`.
pub fn is_absolute_witness(s: &Structure, phi: &Formula, a: usize, b: usize) -> Result<bool> {
    let c = Compiled::new(s, phi)?;
    Ok(phi.free_vars().iter().all(|v| v == "x") && eval2(&c, a, 0) && !eval2(&c, b, 0))
}

/// `phi(a, b)` and `phi(b, a)` differ.
pub fn is_relative_witness(s: &Structure, phi: &Formula, a: usize, b: usize) -> Result<bool> {
    let c = Compiled::new(s, phi)?;
    Ok(only_xy(phi) && eval2(&c, a, b) != eval2(&c, b, a))
}

/// `phi(a, b)` holds, `phi(a, a)` fails, and `phi` is symmetric on the
/// whole domain.
pub fn is_weak_witness(s: &Structure, phi: &Formula, a: usize, b: usize) -> Result<bool> {
    let c = Compiled::new(s, phi)?;
    let n = s.domain_size();
    let symmetric = (0..n).all(|u| (0..n).all(|v| !eval2(&c, u, v) || eval2(&c, v, u)));
    Ok(only_xy(phi) && symmetric && eval2(&c, a, b) && !eval2(&c, a, a))
}

fn only_xy(phi: &Formula) -> bool {
    phi.free_vars().iter().all(|v| v == "x" || v == "y")
}

/// From an absolute witness `phi(x)`, the relative witness
/// `phi(x) & !phi(y)` and the weak witness `psi(x, y) | psi(y, x)`.
pub fn constructed_witnesses(phi: &Formula) -> (Formula, Formula) {
    let psi = Formula::and(phi.clone(), Formula::not(phi.rename_free("x", "y")));
    let weak = Formula::or(psi.clone(), psi.swap_free("x", "y"));
    (psi, weak)
}

struct OneVarResult {
    witnesses: Vec<Option<Formula>>,
    truncated: bool,
}

/// First `phi(x)` separating each pair, oriented so that it holds at the
/// first element. Pairs flagged in `skip` are not searched.
fn absolute_pass(
    s: &Structure,
    pairs: &[(usize, usize)],
    skip: &[bool],
    budget: EnumerationBudget,
) -> Result<OneVarResult> {
    let mut witnesses = vec![None; pairs.len()];
    let mut pending: Vec<usize> = (0..pairs.len()).filter(|&i| !skip[i]).collect();
    if pending.is_empty() {
        return Ok(OneVarResult {
            witnesses,
            truncated: false,
        });
    }
    let mut e = Enumerator::new(s.signature(), &["x"], budget, &[s])?;
    let n = s.domain_size();
    while let Some(i) = e.next_formula() {
        let bits: Vec<bool> = (0..n).map(|x| e.holds(i, 0, &[x])).collect();
        pending.retain(|&p| {
            let (a, b) = pairs[p];
            if bits[a] == bits[b] {
                return true;
            }
            let phi = e.formula(i);
            witnesses[p] = Some(if bits[a] { phi } else { Formula::not(phi) });
            false
        });
        if pending.is_empty() {
            break;
        }
    }
    Ok(OneVarResult {
        witnesses,
        truncated: !pending.is_empty() && e.truncated(),
    })
}

struct TwoVarResult {
    relative: Vec<Option<Formula>>,
    weak: Vec<Option<(Formula, bool)>>,
    truncated: bool,
}

fn two_var_pass(
    s: &Structure,
    pairs: &[(usize, usize)],
    want_relative: &[bool],
    want_weak: &[bool],
    budget: EnumerationBudget,
) -> Result<TwoVarResult> {
    let mut relative = vec![None; pairs.len()];
    let mut weak = vec![None; pairs.len()];
    let mut need_rel: Vec<usize> = (0..pairs.len()).filter(|&i| want_relative[i]).collect();
    let mut need_weak: Vec<usize> = (0..pairs.len()).filter(|&i| want_weak[i]).collect();
    if need_rel.is_empty() && need_weak.is_empty() {
        return Ok(TwoVarResult {
            relative,
            weak,
            truncated: false,
        });
    }
    let n = s.domain_size();
    let mut e = Enumerator::new(s.signature(), &["x", "y"], budget, &[s])?;
    while let Some(i) = e.next_formula() {
        let table: Vec<Vec<bool>> = (0..n)
            .map(|u| (0..n).map(|v| e.holds(i, 0, &[u, v])).collect())
            .collect();
        need_rel.retain(|&p| {
            let (a, b) = pairs[p];
            if table[a][b] == table[b][a] {
                return true;
            }
            relative[p] = Some(e.formula(i));
            false
        });
        let symmetric = (0..n).all(|u| (0..n).all(|v| table[u][v] == table[v][u]));
        if symmetric {
            let irreflexive = (0..n).all(|u| !table[u][u]);
            need_weak.retain(|&p| {
                let (a, b) = pairs[p];
                if table[a][b] && !table[a][a] {
                    weak[p] = Some((e.formula(i), irreflexive));
                    return false;
                }
                true
            });
        }
        if need_rel.is_empty() && need_weak.is_empty() {
            break;
        }
    }
    let truncated = (!need_rel.is_empty() || !need_weak.is_empty()) && e.truncated();
    Ok(TwoVarResult {
        relative,
        weak,
        truncated,
    })
}

/// Some automorphism exchanges `a` and `b`, that is `(b, a)` lies in the
/// orbit of `(a, b)` on ordered pairs. Then every `phi(a, b)` agrees with
/// `phi(b, a)` and no relative witness exists.
fn swapped_by_automorphism(group: &Group, a: usize, b: usize) -> bool {
    let mut seen = std::collections::BTreeSet::from([(a, b)]);
    let mut stack = vec![(a, b)];
    while let Some((u, v)) = stack.pop() {
        if (u, v) == (b, a) {
            return true;
        }
        for g in &group.generators {
            let next = (g.apply(u), g.apply(v));
            if seen.insert(next) {
                stack.push(next);
            }
        }
    }
    false
}

/// A formula `phi(x)` true at `a` and false at `b`, or a certificate that
/// none exists.
pub fn find_absolute_discerner(
    s: &Structure,
    a: usize,
    b: usize,
    budget: EnumerationBudget,
) -> Result<Search> {
    check_pair(s, a, b)?;
    let group = automorphism_group(s);
    if let Some(cert) = group.certificate(a, b) {
        return Ok(Search {
            witness: None,
            certificate: Some(cert),
            truncated: false,
        });
    }
    let out = absolute_pass(s, &[(a, b)], &[false], budget)?;
    Ok(Search {
        witness: out.witnesses.into_iter().next().flatten(),
        certificate: None,
        truncated: out.truncated,
    })
}

/// A formula `phi(x, y)` with `phi(a, b)` and `phi(b, a)` differing.
pub fn find_relative_discerner(
    s: &Structure,
    a: usize,
    b: usize,
    budget: EnumerationBudget,
) -> Result<Search> {
    check_pair(s, a, b)?;
    let out = two_var_pass(s, &[(a, b)], &[true], &[false], budget)?;
    Ok(Search {
        witness: out.relative.into_iter().next().flatten(),
        certificate: None,
        truncated: out.truncated,
    })
}

/// A symmetric formula `phi(x, y)` with `phi(a, b)` true and `phi(a, a)`
/// false.
pub fn find_weak_discerner(
    s: &Structure,
    a: usize,
    b: usize,
    budget: EnumerationBudget,
) -> Result<Search> {
    check_pair(s, a, b)?;
    let out = two_var_pass(s, &[(a, b)], &[false], &[true], budget)?;
    Ok(Search {
        witness: out.weak.into_iter().next().flatten().map(|(f, _)| f),
        certificate: None,
        truncated: out.truncated,
    })
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect()
}

/// Classifies every pair `a < b`: absolute, else relative, else weak, else
/// structurally indiscernible, else not discerned within the budget.
pub fn classify_all(s: &Structure, budget: EnumerationBudget) -> Result<Vec<PairClassification>> {
    let pairs = all_pairs(s.domain_size());
    let group = automorphism_group(s);
    let certs: Vec<Option<Permutation>> = pairs
        .iter()
        .map(|&(a, b)| group.certificate(a, b))
        .collect();
    let same_orbit: Vec<bool> = certs.iter().map(Option::is_some).collect();
    let abs = absolute_pass(s, &pairs, &same_orbit, budget)?;
    let unresolved: Vec<bool> = abs.witnesses.iter().map(Option::is_none).collect();
    let want_rel: Vec<bool> = pairs
        .iter()
        .zip(&unresolved)
        .map(|(&(a, b), &u)| u && !swapped_by_automorphism(&group, a, b))
        .collect();
    let two = two_var_pass(s, &pairs, &want_rel, &unresolved, budget)?;
    let truncated = abs.truncated || two.truncated;
    let mut out = Vec::with_capacity(pairs.len());
    for (i, &pair) in pairs.iter().enumerate() {
        let mut record = PairClassification {
            pair,
            verdict: Verdict::NotDiscernedWithinBudget,
            witness: None,
            budget_used: budget,
            orbit_certificate: None,
            weak_fully_irreflexive: None,
            truncated,
        };
        if let Some(w) = &abs.witnesses[i] {
            record.verdict = Verdict::AbsolutelyDiscernible;
            record.witness = Some(w.clone());
        } else if let Some(w) = &two.relative[i] {
            record.verdict = Verdict::RelativelyDiscernibleOnly;
            record.witness = Some(w.clone());
        } else if let Some((w, irreflexive)) = &two.weak[i] {
            record.verdict = Verdict::WeaklyDiscernibleOnly;
            record.witness = Some(w.clone());
            record.weak_fully_irreflexive = Some(*irreflexive);
        } else if let Some(cert) = &certs[i] {
            record.verdict = Verdict::StructurallyIndiscernible;
            record.orbit_certificate = Some(cert.clone());
        }
        out.push(record);
    }
    Ok(out)
}

/// Largest domain for the literal powerset sweep.
pub const POWERSET_SWEEP_CAP: usize = 12;

/// Default domain-size cap for [`leibniz_full`].
pub const LEIBNIZ_CAP: usize = 20;

/// Leibniz's law over the full powerset: `a` and `b` belong to the same
/// subsets of the domain. The singleton `{a}` separates distinct elements,
/// so this is identity.
pub fn leibniz_full(s: &Structure, a: usize, b: usize) -> Result<bool> {
    leibniz_full_with_cap(s, a, b, LEIBNIZ_CAP)
}

pub fn leibniz_full_with_cap(s: &Structure, a: usize, b: usize, cap: usize) -> Result<bool> {
    let n = s.domain_size();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "the full Leibniz check",
            size: n,
            cap,
        });
    }
    if let Some(&e) = [a, b].iter().find(|&&e| e >= n) {
        return Err(Error::ElementOutOfRange {
            element: e,
            size: n,
        });
    }
    Ok(a == b)
}

/// [`leibniz_full`] by visiting every subset of the domain.
pub fn leibniz_powerset_sweep(s: &Structure, a: usize, b: usize) -> Result<bool> {
    let n = s.domain_size();
    if n > POWERSET_SWEEP_CAP {
        return Err(Error::CapExceeded {
            what: "the powerset sweep",
            size: n,
            cap: POWERSET_SWEEP_CAP,
        });
    }
    if let Some(&e) = [a, b].iter().find(|&&e| e >= n) {
        return Err(Error::ElementOutOfRange {
            element: e,
            size: n,
        });
    }
    Ok((0u32..1 << n).all(|set| (set >> a & 1) == (set >> b & 1)))
}

/// Leibniz's law restricted to the listed unary predicates.
pub fn henkin_leibniz(s: &Structure, family: &[&str], a: usize, b: usize) -> Result<bool> {
    let n = s.domain_size();
    if let Some(&e) = [a, b].iter().find(|&&e| e >= n) {
        return Err(Error::ElementOutOfRange {
            element: e,
            size: n,
        });
    }
    let mut same = true;
    for name in family {
        let rel = s.relation_by_name(name)?;
        if rel.arity() != 1 {
            return Err(Error::Arity {
                name: name.to_string(),
                expected: 1,
                found: rel.arity(),
            });
        }
        same &= rel.contains(&[a]) == rel.contains(&[b]);
    }
    Ok(same)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimKind {
    /// Verified on the structure, with witnesses.
    Checked,
    /// Holds by how the principles are defined here.
    DefinitionLevel,
    /// A value reported for the structure, not a claim the tool asserts.
    Informational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Claim {
    pub item: &'static str,
    pub statement: &'static str,
    pub kind: ClaimKind,
    pub holds: bool,
    pub evidence: String,
}

/// The identity principles evaluated on one structure at one budget: every
/// pair of distinct elements is discernible in the given sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Principles {
    pub pii_a: bool,
    /// Relational: a relative or weak discerner.
    pub pii_r: bool,
    pub pii_w: bool,
    /// Absolute or relational.
    pub pii: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairChain {
    pub pair: (usize, usize),
    pub absolute: Option<Formula>,
    pub relative: Option<Formula>,
    pub weak: Option<Formula>,
    pub weak_fully_irreflexive: Option<bool>,
    pub same_orbit: bool,
    /// Built from the absolute witness.
    pub constructed_relative: Option<Formula>,
    pub constructed_weak: Option<Formula>,
    pub constructed_valid: Option<bool>,
    /// Rank-0 atomic witness in the full singleton extension.
    pub rigid_witness: Option<Formula>,
}

impl PairChain {
    fn absolutely(&self) -> bool {
        self.absolute.is_some()
    }

    fn weakly(&self) -> bool {
        self.weak.is_some() || self.constructed_valid == Some(true)
    }

    fn relationally(&self) -> bool {
        self.relative.is_some() || self.weakly()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub structure: String,
    pub budget: EnumerationBudget,
    pub principles: Principles,
    pub rigid_extension: Principles,
    pub pairs: Vec<PairChain>,
    /// Absolutely discernible pairs whose constructed witnesses failed.
    pub counterexamples: usize,
    pub claims: Vec<Claim>,
    pub truncated: bool,
}

impl ChainReport {
    /// Every checked and definition-level claim holds.
    pub fn holds(&self) -> bool {
        self.claims
            .iter()
            .filter(|c| c.kind != ClaimKind::Informational)
            .all(|c| c.holds)
    }
}

fn principles(pairs: &[PairChain]) -> Principles {
    let pii_a = pairs.iter().all(PairChain::absolutely);
    let pii_r = pairs.iter().all(PairChain::relationally);
    let pii_w = pairs.iter().all(PairChain::weakly);
    let pii = pairs.iter().all(|p| p.absolutely() || p.relationally());
    Principles {
        pii_a,
        pii_r,
        pii_w,
        pii,
    }
}

/// Instantiates the chain of implications between PII-A, PII-R, PII-W and
/// PII on `s`, with witnesses for every pair, and checks that the full
/// singleton extension makes every pair absolutely discernible by an atom.
pub fn verify_hierarchy(s: &Structure, budget: EnumerationBudget) -> Result<ChainReport> {
    let pairs = all_pairs(s.domain_size());
    let group = automorphism_group(s);
    let same_orbit: Vec<bool> = pairs
        .iter()
        .map(|&(a, b)| group.certificate(a, b).is_some())
        .collect();
    let abs = absolute_pass(s, &pairs, &same_orbit, budget)?;
    let want_rel: Vec<bool> = pairs
        .iter()
        .map(|&(a, b)| !swapped_by_automorphism(&group, a, b))
        .collect();
    let everything = vec![true; pairs.len()];
    let two = two_var_pass(s, &pairs, &want_rel, &everything, budget)?;

    let rigid = rigidify(s, Strategy::Full)?.structure;
    let no_skip = vec![false; pairs.len()];
    let rigid_abs = absolute_pass(&rigid, &pairs, &no_skip, EnumerationBudget::atomic())?;

    let mut chains = Vec::with_capacity(pairs.len());
    let mut counterexamples = 0;
    for (i, &(a, b)) in pairs.iter().enumerate() {
        let mut chain = PairChain {
            pair: (a, b),
            absolute: abs.witnesses[i].clone(),
            relative: two.relative[i].clone(),
            weak: two.weak[i].as_ref().map(|(f, _)| f.clone()),
            weak_fully_irreflexive: two.weak[i].as_ref().map(|&(_, irr)| irr),
            same_orbit: same_orbit[i],
            constructed_relative: None,
            constructed_weak: None,
            constructed_valid: None,
            rigid_witness: rigid_abs.witnesses[i].clone(),
        };
        if let Some(phi) = &chain.absolute {
            let (rel, weak) = constructed_witnesses(phi);
            let valid = is_absolute_witness(s, phi, a, b)?
                && is_relative_witness(s, &rel, a, b)?
                && is_weak_witness(s, &weak, a, b)?;
            if !valid {
                counterexamples += 1;
            }
            chain.constructed_relative = Some(rel);
            chain.constructed_weak = Some(weak);
            chain.constructed_valid = Some(valid);
        }
        chains.push(chain);
    }
    let p = principles(&chains);
    let rigid_chains: Vec<PairChain> = chains
        .iter()
        .map(|c| PairChain {
            absolute: c.rigid_witness.clone(),
            ..c.clone()
        })
        .collect();
    let rigid_all_atomic = chains.iter().all(|c| {
        c.rigid_witness
            .as_ref()
            .is_some_and(|w| w.quantifier_rank() == 0 && w.node_count() <= 2)
    });
    let rp = Principles {
        pii_a: rigid_all_atomic,
        ..principles(&rigid_chains)
    };

    let implies = |a: bool, b: bool| !a || b;
    let absolute_pairs = chains.iter().filter(|c| c.absolutely()).count();
    let claims = vec![
        Claim {
            item: "i",
            statement: "PII-A -> PII",
            kind: ClaimKind::Checked,
            holds: implies(p.pii_a, p.pii),
            evidence: format!("PII-A = {}, PII = {}", p.pii_a, p.pii),
        },
        Claim {
            item: "ii",
            statement: "PII-R -> PII",
            kind: ClaimKind::Checked,
            holds: implies(p.pii_r, p.pii),
            evidence: format!("PII-R = {}, PII = {}", p.pii_r, p.pii),
        },
        Claim {
            item: "iii",
            statement: "PII-W -> PII-R",
            kind: ClaimKind::Checked,
            holds: implies(p.pii_w, p.pii_r),
            evidence: format!("PII-W = {}, PII-R = {}", p.pii_w, p.pii_r),
        },
        Claim {
            item: "iv",
            statement: "PII-A -> PII-W: absolute discernibles are weak discernibles",
            kind: ClaimKind::Checked,
            holds: implies(p.pii_a, p.pii_w) && counterexamples == 0,
            evidence: format!(
                "{absolute_pairs} absolutely discernible pair(s), {counterexamples} without a valid constructed weak witness"
            ),
        },
        Claim {
            item: "v",
            statement: "PII-A -> PII-R",
            kind: ClaimKind::Checked,
            holds: implies(p.pii_a, p.pii_r) && counterexamples == 0,
            evidence: format!(
                "constructed relative witnesses checked on {absolute_pairs} pair(s)"
            ),
        },
        Claim {
            item: "vi",
            statement: "PII <-> PII-A | PII-R",
            kind: ClaimKind::DefinitionLevel,
            holds: p.pii == (p.pii_a || p.pii_r),
            evidence: "PII is defined pairwise as absolute or relational discernibility".into(),
        },
        Claim {
            item: "vii",
            statement: "PII <-> PII-R",
            kind: ClaimKind::DefinitionLevel,
            holds: p.pii == p.pii_r,
            evidence: format!("PII = {}, PII-R = {}", p.pii, p.pii_r),
        },
        Claim {
            item: "viii",
            statement: "!(PII -> PII-A)",
            kind: ClaimKind::Informational,
            holds: p.pii && !p.pii_a,
            evidence: format!("PII = {}, PII-A = {}", p.pii, p.pii_a),
        },
        Claim {
            item: "ix",
            statement: "PII & !PII-A",
            kind: ClaimKind::Informational,
            holds: p.pii && !p.pii_a,
            evidence: format!("PII = {}, PII-A = {}", p.pii, p.pii_a),
        },
        Claim {
            item: "x",
            statement: "PII-R & !PII-A",
            kind: ClaimKind::Informational,
            holds: p.pii_r && !p.pii_a,
            evidence: format!("PII-R = {}, PII-A = {}", p.pii_r, p.pii_a),
        },
        Claim {
            item: "rigid",
            statement: "PII-R -> PII-A once singleton predicates are admitted",
            kind: ClaimKind::Checked,
            holds: rigid_all_atomic,
            evidence: format!(
                "{} of {} pair(s) separated by a singleton atom in the full extension",
                chains.iter().filter(|c| c.rigid_witness.is_some()).count(),
                chains.len()
            ),
        },
    ];
    Ok(ChainReport {
        structure: s.name().to_string(),
        budget,
        principles: p,
        rigid_extension: rp,
        pairs: chains,
        counterexamples,
        claims,
        truncated: abs.truncated || two.truncated,
    })
}

/// Classification counts by verdict, for summaries.
pub fn verdict_counts(pairs: &[PairClassification]) -> BTreeMap<Verdict, usize> {
    let mut counts = BTreeMap::new();
    for p in pairs {
        *counts.entry(p.verdict).or_insert(0) += 1;
    }
    counts
}
