//! The Hilbert-Bernays identity formula of a signature.

use std::collections::BTreeSet;

use super::formula::{bound_var_name, Formula, Term};
use crate::error::{Error, Result};
use crate::structure::Signature;

/// The formula in free variables `x, y` asserting that `x` and `y` agree on
/// every relation symbol in every argument position.
///
/// A `k`-ary symbol contributes one block `forall v0 ... v(k-2). (C1 & ... & Ck)`
/// where clause `Ci` is `R(..x..) <-> R(..y..)` with `x`/`y` at position `i`
/// and the bound variables filling the other positions in order. Unary
/// symbols give a bare biconditional. Blocks are conjoined left to right in
/// declaration order; the designated equality symbol is skipped.
pub fn hb_identity(sig: &Signature) -> Result<Formula> {
    let reserved: BTreeSet<String> = ["x", "y"]
        .iter()
        .map(|v| v.to_string())
        .chain(sig.constants().iter().cloned())
        .collect();
    if sig.constant_index("x").is_some() || sig.constant_index("y").is_some() {
        return Err(Error::Signature(
            "constants named `x` or `y` clash with the free variables of the identity formula"
                .into(),
        ));
    }
    let mut blocks = Vec::new();
    for (_, sym) in sig.predicates() {
        let k = sym.arity;
        let bound: Vec<String> = (0..k - 1).map(|i| bound_var_name(i, &reserved)).collect();
        let atom = |pos: usize, var: &str| {
            let mut rest = bound.iter();
            let args = (0..k)
                .map(|j| {
                    if j == pos {
                        Term::var(var)
                    } else {
                        Term::Var(rest.next().expect("k - 1 bound variables").clone())
                    }
                })
                .collect();
            Formula::Atom {
                rel: sym.name.clone(),
                args,
            }
        };
        let body = (0..k)
            .map(|i| Formula::iff(atom(i, "x"), atom(i, "y")))
            .reduce(Formula::and)
            .expect("arity is positive");
        blocks.push(bound.iter().rev().fold(body, |f, v| Formula::forall(v, f)));
    }
    blocks
        .into_iter()
        .reduce(Formula::and)
        .ok_or(Error::EmptySignature)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn count_iffs(f: &Formula) -> usize {
        match f {
            Formula::Binary(op, a, b) => {
                usize::from(*op == super::super::formula::BinOp::Iff)
                    + count_iffs(a)
                    + count_iffs(b)
            }
            Formula::Not(g) | Formula::Quant(_, _, g) => count_iffs(g),
            _ => 0,
        }
    }

    #[test]
    fn two_symbol_display() {
        let sig = Signature::relational([("P", 2), ("Q", 1)]).unwrap();
        let hb = hb_identity(&sig).unwrap();
        let expected = parse_formula(
            "(forall z. (P(x,z) <-> P(y,z)) & (P(z,x) <-> P(z,y))) & (Q(x) <-> Q(y))",
            &sig,
        )
        .unwrap();
        assert_eq!(hb, expected);
        assert_eq!(
            hb.to_string(),
            "((forall v0. ((P(x,v0) <-> P(y,v0)) & (P(v0,x) <-> P(v0,y)))) & (Q(x) <-> Q(y)))"
        );
    }

    #[test]
    fn unary_only() {
        let sig = Signature::relational([("Q", 1)]).unwrap();
        assert_eq!(hb_identity(&sig).unwrap().to_string(), "(Q(x) <-> Q(y))");
    }

    #[test]
    fn ternary_shape() {
        let sig = Signature::relational([("T", 3)]).unwrap();
        let hb = hb_identity(&sig).unwrap();
        assert_eq!(hb.quantifier_rank(), 2);
        assert_eq!(count_iffs(&hb), 3);
        assert_eq!(
            hb.to_string(),
            "(forall v0. (forall v1. (((T(x,v0,v1) <-> T(y,v0,v1)) & (T(v0,x,v1) <-> T(v0,y,v1))) \
             & (T(v0,v1,x) <-> T(v0,v1,y)))))"
        );
    }

    #[test]
    fn equality_is_skipped_and_empty_signature_rejected() {
        let sig = Signature::new(
            vec![
                crate::structure::RelationSymbol {
                    name: "Eq".into(),
                    arity: 2,
                },
                crate::structure::RelationSymbol {
                    name: "Q".into(),
                    arity: 1,
                },
            ],
            vec![],
            Some("Eq".into()),
        )
        .unwrap();
        assert_eq!(hb_identity(&sig).unwrap().to_string(), "(Q(x) <-> Q(y))");
        let only_eq = Signature::new(
            vec![crate::structure::RelationSymbol {
                name: "Eq".into(),
                arity: 2,
            }],
            vec![],
            Some("Eq".into()),
        )
        .unwrap();
        assert!(matches!(hb_identity(&only_eq), Err(Error::EmptySignature)));
    }
}
