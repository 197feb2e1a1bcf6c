use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    fn name(&self) -> &str {
        match self {
            Term::Var(v) | Term::Const(v) => v,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    And,
    Or,
    Implies,
    Iff,
}

impl BinOp {
    pub const ALL: [BinOp; 4] = [BinOp::And, BinOp::Or, BinOp::Implies, BinOp::Iff];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Implies => "->",
            BinOp::Iff => "<->",
        }
    }

    #[inline]
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            BinOp::And => a && b,
            BinOp::Or => a || b,
            BinOp::Implies => !a || b,
            BinOp::Iff => a == b,
        }
    }

    #[inline]
    pub(crate) fn apply_word(self, a: u64, b: u64) -> u64 {
        match self {
            BinOp::And => a & b,
            BinOp::Or => a | b,
            BinOp::Implies => !a | b,
            BinOp::Iff => !(a ^ b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    ForAll,
    Exists,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::ForAll => "forall",
            Quantifier::Exists => "exists",
        }
    }
}

/// First-order formula over a relational signature. Equality is its own
/// node and refers to the signature's designated equality symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom { rel: String, args: Vec<Term> },
    Eq(Term, Term),
    Not(Box<Formula>),
    Binary(BinOp, Box<Formula>, Box<Formula>),
    Quant(Quantifier, String, Box<Formula>),
}

impl Formula {
    pub fn atom(rel: &str, args: &[&str]) -> Formula {
        Formula::Atom {
            rel: rel.to_string(),
            args: args.iter().map(|a| Term::var(a)).collect(),
        }
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn binary(op: BinOp, a: Formula, b: Formula) -> Formula {
        Formula::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::binary(BinOp::And, a, b)
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::binary(BinOp::Or, a, b)
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::binary(BinOp::Iff, a, b)
    }

    pub fn forall(v: &str, body: Formula) -> Formula {
        Formula::Quant(Quantifier::ForAll, v.to_string(), Box::new(body))
    }

    pub fn exists(v: &str, body: Formula) -> Formula {
        Formula::Quant(Quantifier::Exists, v.to_string(), Box::new(body))
    }

    /// Maximum nesting depth of quantifiers.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::Atom { .. } | Formula::Eq(..) => 0,
            Formula::Not(f) => f.quantifier_rank(),
            Formula::Binary(_, a, b) => a.quantifier_rank().max(b.quantifier_rank()),
            Formula::Quant(_, _, body) => 1 + body.quantifier_rank(),
        }
    }

    /// Number of AST nodes; atoms count as one regardless of arity.
    pub fn node_count(&self) -> usize {
        match self {
            Formula::Atom { .. } | Formula::Eq(..) => 1,
            Formula::Not(f) => 1 + f.node_count(),
            Formula::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
            Formula::Quant(_, _, body) => 1 + body.node_count(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        let mut term = |t: &Term, bound: &Vec<&str>| {
            if let Term::Var(v) = t {
                if !bound.contains(&v.as_str()) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            Formula::Atom { args, .. } => args.iter().for_each(|t| term(t, bound)),
            Formula::Eq(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::Binary(_, a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Quant(_, v, body) => {
                bound.push(v);
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    fn collect_constants(&self, out: &mut BTreeSet<String>) {
        let mut term = |t: &Term| {
            if let Term::Const(c) = t {
                out.insert(c.clone());
            }
        };
        match self {
            Formula::Atom { args, .. } => args.iter().for_each(&mut term),
            Formula::Eq(a, b) => {
                term(a);
                term(b);
            }
            Formula::Not(f) => f.collect_constants(out),
            Formula::Binary(_, a, b) => {
                a.collect_constants(out);
                b.collect_constants(out);
            }
            Formula::Quant(_, _, body) => body.collect_constants(out),
        }
    }

    /// Renames every bound variable to the canonical name for its binding
    /// depth (see [`bound_var_name`]), removing shadowing.
    pub fn canonicalize(&self) -> Formula {
        let mut reserved = self.free_vars();
        self.collect_constants(&mut reserved);
        self.rename_bound(&mut Vec::new(), &reserved)
    }

    fn rename_bound(
        &self,
        scope: &mut Vec<(String, String)>,
        reserved: &BTreeSet<String>,
    ) -> Formula {
        let rename = |t: &Term, scope: &Vec<(String, String)>| match t {
            Term::Var(v) => match scope.iter().rev().find(|(old, _)| old == v) {
                Some((_, new)) => Term::Var(new.clone()),
                None => t.clone(),
            },
            Term::Const(_) => t.clone(),
        };
        match self {
            Formula::Atom { rel, args } => Formula::Atom {
                rel: rel.clone(),
                args: args.iter().map(|t| rename(t, scope)).collect(),
            },
            Formula::Eq(a, b) => Formula::Eq(rename(a, scope), rename(b, scope)),
            Formula::Not(f) => Formula::not(f.rename_bound(scope, reserved)),
            Formula::Binary(op, a, b) => Formula::binary(
                *op,
                a.rename_bound(scope, reserved),
                b.rename_bound(scope, reserved),
            ),
            Formula::Quant(q, v, body) => {
                let new = bound_var_name(scope.len(), reserved);
                scope.push((v.clone(), new.clone()));
                let body = body.rename_bound(scope, reserved);
                scope.pop();
                Formula::Quant(*q, new, Box::new(body))
            }
        }
    }

    /// Replaces free occurrences of variable `from` by variable `to`. The
    /// caller guarantees `to` is not captured; canonical bound names never
    /// collide with ordinary free variable names such as `x` and `y`.
    pub fn rename_free(&self, from: &str, to: &str) -> Formula {
        let swap = |t: &Term| match t {
            Term::Var(v) if v == from => Term::var(to),
            _ => t.clone(),
        };
        match self {
            Formula::Atom { rel, args } => Formula::Atom {
                rel: rel.clone(),
                args: args.iter().map(swap).collect(),
            },
            Formula::Eq(a, b) => Formula::Eq(swap(a), swap(b)),
            Formula::Not(f) => Formula::not(f.rename_free(from, to)),
            Formula::Binary(op, a, b) => {
                Formula::binary(*op, a.rename_free(from, to), b.rename_free(from, to))
            }
            Formula::Quant(q, v, body) if v == from => Formula::Quant(*q, v.clone(), body.clone()),
            Formula::Quant(q, v, body) => {
                Formula::Quant(*q, v.clone(), Box::new(body.rename_free(from, to)))
            }
        }
    }

    /// Simultaneously swaps the free variables `a` and `b`.
    pub fn swap_free(&self, a: &str, b: &str) -> Formula {
        let tmp = "\u{0}swap";
        self.rename_free(a, tmp)
            .rename_free(b, a)
            .rename_free(tmp, b)
    }
}

/// The canonical name of the variable bound at nesting depth `level`: the
/// `level`-th of `v0, v1, ...` that is not in `reserved`.
pub fn bound_var_name(level: usize, reserved: &BTreeSet<String>) -> String {
    (0..)
        .map(|i| format!("v{i}"))
        .filter(|name| !reserved.contains(name))
        .nth(level)
        .expect("infinitely many candidate names")
}

impl fmt::Display for Formula {
    /// Fully parenthesized canonical text.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom { rel, args } => {
                write!(f, "{rel}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Formula::Eq(a, b) => write!(f, "({a} = {b})"),
            Formula::Not(g) => write!(f, "!{g}"),
            Formula::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Formula::Quant(q, v, body) => write!(f, "({} {v}. {body})", q.keyword()),
        }
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_is_fully_parenthesized() {
        let f = Formula::forall(
            "z",
            Formula::iff(
                Formula::atom("R", &["x", "z"]),
                Formula::not(Formula::atom("R", &["y", "z"])),
            ),
        );
        assert_eq!(f.to_string(), "(forall z. (R(x,z) <-> !R(y,z)))");
        assert_eq!(f.quantifier_rank(), 1);
        assert_eq!(f.node_count(), 5);
        assert_eq!(
            f.free_vars(),
            BTreeSet::from(["x".to_string(), "y".to_string()])
        );
    }

    #[test]
    fn canonicalize_removes_shadowing() {
        let f = Formula::forall("x", Formula::exists("x", Formula::atom("P", &["x"])));
        assert_eq!(
            f.canonicalize().to_string(),
            "(forall v0. (exists v1. P(v1)))"
        );
        // A free variable named like a canonical bound name is skipped.
        let g = Formula::and(
            Formula::atom("P", &["v0"]),
            Formula::exists("y", Formula::atom("R", &["v0", "y"])),
        );
        assert_eq!(
            g.canonicalize().to_string(),
            "(P(v0) & (exists v1. R(v0,v1)))"
        );
    }

    #[test]
    fn rename_free_respects_binding() {
        let f = Formula::and(
            Formula::atom("P", &["x"]),
            Formula::exists("x", Formula::atom("P", &["x"])),
        );
        assert_eq!(
            f.rename_free("x", "y").to_string(),
            "(P(y) & (exists x. P(x)))"
        );
        let g = Formula::atom("R", &["x", "y"]);
        assert_eq!(g.swap_free("x", "y").to_string(), "R(y,x)");
    }
}
