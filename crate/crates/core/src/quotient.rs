//! Congruences, quotient structures and the transfer of truth along the
//! quotient map.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::ElementMap;
use crate::logic::{EnumerationBudget, Enumerator, Formula};
use crate::partition::Partition;
use crate::structure::Structure;

/// Largest domain for [`all_congruences`].
pub const CONGRUENCE_CAP: usize = 10;

fn check_partition(s: &Structure, p: &Partition) -> Result<()> {
    if p.domain_size() != s.domain_size() {
        return Err(Error::MalformedPartition(format!(
            "partition of {} elements for a domain of size {}",
            p.domain_size(),
            s.domain_size()
        )));
    }
    Ok(())
}

/// The first relation and tuple breaking compatibility with `p`, if any.
pub fn congruence_violation(s: &Structure, p: &Partition) -> Result<Option<(String, Vec<usize>)>> {
    check_partition(s, p)?;
    Ok(s.compatibility_violation(&p.block_index()))
}

/// Tuples that agree blockwise are in every relation together or not at all.
pub fn is_congruence(s: &Structure, p: &Partition) -> Result<bool> {
    Ok(congruence_violation(s, p)?.is_none())
}

/// Every congruence of `s`, most blocks first, then in canonical order.
pub fn all_congruences(s: &Structure) -> Result<Vec<Partition>> {
    let n = s.domain_size();
    if n > CONGRUENCE_CAP {
        return Err(Error::CapExceeded {
            what: "congruence enumeration",
            size: n,
            cap: CONGRUENCE_CAP,
        });
    }
    let mut out = Vec::new();
    // Restricted growth strings: labels[i] <= 1 + max(labels[..i]).
    let mut labels = vec![0usize; n];
    loop {
        if s.compatibility_violation(&labels).is_none() {
            out.push(Partition::from_labels(&labels));
        }
        let mut i = n;
        loop {
            if i <= 1 {
                out.sort_by(|a: &Partition, b| {
                    b.num_blocks().cmp(&a.num_blocks()).then_with(|| a.cmp(b))
                });
                return Ok(out);
            }
            i -= 1;
            let max_before = labels[..i].iter().copied().max().unwrap_or(0);
            if labels[i] <= max_before {
                labels[i] += 1;
                labels[i + 1..].iter_mut().for_each(|l| *l = 0);
                break;
            }
        }
    }
}

/// Closes every relation of `s` under `p`: a tuple is added when it agrees
/// blockwise with a tuple already present. `p` is a congruence of the
/// result. This reads `s` modulo `p`; for a function graph such as `Plus`
/// and a partition respecting the function, it is the graph of the
/// function with outputs taken up to `p`.
pub fn saturate(s: &Structure, p: &Partition) -> Result<Structure> {
    check_partition(s, p)?;
    let block_of = p.block_index();
    let blocks = p.blocks();
    let mut out = s.clone();
    for (index, rel) in s.relations().iter().enumerate() {
        let images: BTreeSet<Vec<usize>> = rel
            .tuples()
            .iter()
            .map(|t| t.iter().map(|&x| block_of[x]).collect())
            .collect();
        let mut closed = BTreeSet::new();
        for image in images {
            let mut partial = vec![Vec::new()];
            for &b in &image {
                partial = partial
                    .into_iter()
                    .flat_map(|t: Vec<usize>| {
                        blocks[b].iter().map(move |&x| {
                            let mut t = t.clone();
                            t.push(x);
                            t
                        })
                    })
                    .collect();
            }
            closed.extend(partial);
        }
        out = out.with_interpretation(index, closed);
    }
    Ok(out)
}

/// The quotient of `source` by a congruence, with the projection `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientMap {
    pub source: Structure,
    pub target: Structure,
    /// `f[x]` is the block of `x`; blocks are numbered by least member.
    pub f: Vec<usize>,
}

impl QuotientMap {
    pub fn element_map(&self) -> ElementMap {
        ElementMap {
            name: format!("{}_to_{}", self.source.name(), self.target.name()),
            images: self.f.iter().copied().enumerate().collect(),
        }
    }
}

/// Builds the quotient: blocks become elements, each relation is the image
/// of the source relation, and constants go to their blocks. An equality
/// symbol interpreted as the congruence itself becomes the diagonal.
pub fn quotient(s: &Structure, c: &Partition) -> Result<QuotientMap> {
    check_partition(s, c)?;
    let f = c.block_index();
    if s.compatibility_violation(&f).is_some() {
        return Err(Error::NotACongruence(s.name().to_string()));
    }
    let interpretations = s
        .relations()
        .iter()
        .map(|r| {
            r.tuples()
                .iter()
                .map(|t| t.iter().map(|&x| f[x]).collect())
                .collect::<BTreeSet<Vec<usize>>>()
        })
        .collect();
    let constants = s.constant_values().iter().map(|&x| f[x]).collect();
    let target = Structure::new(
        format!("{}_quot", s.name()),
        s.signature().clone(),
        c.num_blocks(),
        interpretations,
        constants,
        Default::default(),
    )?;
    Ok(QuotientMap {
        source: s.clone(),
        target,
        f,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransferFailure {
    pub formula: Formula,
    /// Source elements assigned to the free variables, in order.
    pub assignment: Vec<(String, usize)>,
    pub source_value: bool,
    pub target_value: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransferReport {
    pub passes: bool,
    pub formulas_checked: usize,
    pub assignments_checked: usize,
    pub counterexample: Option<TransferFailure>,
    pub truncated: bool,
    pub saturated: bool,
}

/// Checks `source |= phi[a]` iff `target |= phi[f(a)]` for every
/// enumerated `phi(x, y)` and every assignment over the source.
pub fn truth_transfer_check(qm: &QuotientMap, budget: EnumerationBudget) -> Result<TransferReport> {
    truth_transfer_check_with(qm, budget, &["x", "y"])
}

/// [`truth_transfer_check`] over the given free variables. Equality atoms
/// are always included: in the source they read the designated congruence,
/// in the target its image.
pub fn truth_transfer_check_with(
    qm: &QuotientMap,
    budget: EnumerationBudget,
    free_vars: &[&str],
) -> Result<TransferReport> {
    let (s, t) = (&qm.source, &qm.target);
    if s.signature() != t.signature() {
        return Err(Error::SignatureMismatch(
            "quotient target is over a different signature".into(),
        ));
    }
    if qm.f.len() != s.domain_size() {
        return Err(Error::SizeMismatch {
            expected: s.domain_size(),
            found: qm.f.len(),
        });
    }
    if let Some(&y) = qm.f.iter().find(|&&y| y >= t.domain_size()) {
        return Err(Error::ElementOutOfRange {
            element: y,
            size: t.domain_size(),
        });
    }
    // Tables on both structures side by side: formulas agreeing on both are
    // one class, so every distinct behaviour is still visited.
    let mut e = Enumerator::new(
        s.signature(),
        free_vars,
        budget.with_equality(true),
        &[s, t],
    )?;
    let n = s.domain_size();
    let k = free_vars.len();
    let points = n.pow(k as u32);
    let mut checked = 0;
    let mut counterexample = None;
    let mut values = vec![0; k];
    let mut images = vec![0; k];
    'formulas: while let Some(i) = e.next_formula() {
        checked += 1;
        for p in 0..points {
            let mut rest = p;
            for j in 0..k {
                values[j] = rest % n;
                images[j] = qm.f[values[j]];
                rest /= n;
            }
            let source_value = e.holds(i, 0, &values);
            let target_value = e.holds(i, 1, &images);
            if source_value != target_value {
                counterexample = Some(TransferFailure {
                    formula: e.formula(i),
                    assignment: free_vars
                        .iter()
                        .map(|v| v.to_string())
                        .zip(values.iter().copied())
                        .collect(),
                    source_value,
                    target_value,
                });
                break 'formulas;
            }
        }
    }
    Ok(TransferReport {
        passes: counterexample.is_none(),
        formulas_checked: checked,
        assignments_checked: points,
        counterexample,
        truncated: e.truncated(),
        saturated: e.saturated(),
    })
}
