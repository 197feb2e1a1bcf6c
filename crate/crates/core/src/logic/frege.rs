//! Checking a candidate identity relation against the Frege axioms
//! (reflexivity and the substitution schema) within an enumeration budget.

use std::collections::BTreeSet;

use serde::Serialize;

use super::enumerate::{EnumerationBudget, Enumerator};
use super::formula::Formula;
use crate::error::{Error, Result};
use crate::structure::{BinaryRelationView, RelationSymbol, Structure};

/// A failure of the substitution schema: `context(a, e)` holds but
/// `context(b, e)` does not, although `(a, b)` is in the relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubstitutionFailure {
    pub context: Formula,
    pub a: usize,
    pub b: usize,
    /// Value of the parameter variable `u`.
    pub parameter: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    /// (=1): every element is related to itself.
    pub reflexive: bool,
    pub missing_reflexive: Option<usize>,
    /// (=2): no enumerated context separates related elements.
    pub substitution: bool,
    pub counterexample: Option<SubstitutionFailure>,
    pub is_diagonal: bool,
    pub contexts_checked: usize,
    pub truncated: bool,
    /// The contexts exhaust every definable relation of the budget's rank.
    pub saturated: bool,
    pub budget: EnumerationBudget,
}

impl CheckReport {
    pub fn passes(&self) -> bool {
        self.reflexive && self.substitution
    }

    pub fn verdict(&self) -> &'static str {
        match (self.passes(), self.is_diagonal) {
            (true, true) => "satisfies the Frege axioms and is the identity",
            (true, false) => "satisfies the Frege axioms: a congruence, but not identity",
            (false, _) => "violates the Frege axioms",
        }
    }
}

/// Interprets equality as `rel` and checks the Frege axioms for it.
///
/// Contexts are enumerated formulas `alpha(x, u)` whose atoms include the
/// equality symbol; the schema instance is
/// `forall (a, b) in rel, forall e: alpha(a, e) -> alpha(b, e)`.
/// Substituting one distinguished variable at a time suffices, since
/// replacing several occurrences is iterated single replacement.
pub fn frege_congruence_check(
    s: &Structure,
    rel: &BinaryRelationView,
    budget: EnumerationBudget,
) -> Result<CheckReport> {
    let n = s.domain_size();
    if rel.domain_size != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: rel.domain_size,
        });
    }
    if let Some(&(a, b)) = rel.pairs.iter().find(|&&(a, b)| a >= n || b >= n) {
        return Err(Error::ElementOutOfRange {
            element: a.max(b),
            size: n,
        });
    }
    let missing_reflexive = (0..n).find(|&x| !rel.contains(x, x));
    let candidate = with_equality_as(s, rel)?;
    let budget_eq = budget.with_equality(true);
    let mut e = Enumerator::new(candidate.signature(), &["x", "u"], budget_eq, &[&candidate])?;
    let mut counterexample = None;
    let mut checked = 0;
    'formulas: while let Some(i) = e.next_formula() {
        checked += 1;
        for &(a, b) in &rel.pairs {
            for p in 0..n {
                if e.holds(i, 0, &[a, p]) && !e.holds(i, 0, &[b, p]) {
                    counterexample = Some(SubstitutionFailure {
                        context: e.formula(i),
                        a,
                        b,
                        parameter: p,
                    });
                    break 'formulas;
                }
            }
        }
    }
    Ok(CheckReport {
        reflexive: missing_reflexive.is_none(),
        missing_reflexive,
        substitution: counterexample.is_none(),
        counterexample,
        is_diagonal: rel.is_diagonal(),
        contexts_checked: checked,
        truncated: e.truncated(),
        saturated: e.saturated(),
        budget: budget_eq,
    })
}

/// `s` with its equality symbol reinterpreted as `rel`; a fresh symbol is
/// added and designated when `s` has none.
fn with_equality_as(s: &Structure, rel: &BinaryRelationView) -> Result<Structure> {
    let tuples: BTreeSet<Vec<usize>> = rel.to_tuples();
    if let Some(i) = s.signature().equality_index() {
        return Ok(s.with_interpretation(i, tuples));
    }
    let name = (0..)
        .map(|k| {
            if k == 0 {
                "Eq".to_string()
            } else {
                format!("Eq_{k}")
            }
        })
        .find(|name| !s.signature().contains_symbol(name))
        .expect("unbounded name search");
    s.with_relations(vec![(
        RelationSymbol {
            name: name.clone(),
            arity: 2,
        },
        tuples,
    )])?
    .with_equality(Some(name))
}
