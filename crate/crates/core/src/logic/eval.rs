//! Tarski satisfaction over finite structures.

use std::collections::BTreeMap;

use super::formula::{BinOp, Formula, Quantifier, Term};
use crate::error::{Error, Result};
use crate::structure::Structure;

/// Values for (at least) the free variables of a formula.
pub type Assignment = BTreeMap<String, usize>;

pub fn assignment<'a>(pairs: impl IntoIterator<Item = (&'a str, usize)>) -> Assignment {
    pairs.into_iter().map(|(v, e)| (v.to_string(), e)).collect()
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Var(usize),
    Elem(usize),
}

#[derive(Debug, Clone)]
enum Node {
    Atom(usize, Vec<Slot>),
    Not(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Quant(Quantifier, usize, Box<Node>),
}

/// A formula resolved against one structure: symbols become relation
/// indices, constants become elements and variables become slots.
#[derive(Debug, Clone)]
pub struct Compiled<'s> {
    structure: &'s Structure,
    root: Node,
    free: Vec<String>,
    slots: usize,
}

impl<'s> Compiled<'s> {
    pub fn new(s: &'s Structure, phi: &Formula) -> Result<Self> {
        let free: Vec<String> = phi.free_vars().into_iter().collect();
        let mut scope: Vec<(String, usize)> = free
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let mut slots = free.len();
        let root = compile(s, phi, &mut scope, &mut slots)?;
        Ok(Compiled {
            structure: s,
            root,
            free,
            slots,
        })
    }

    /// Free variables in sorted order; [`Compiled::eval_slots`] takes their
    /// values in this order.
    pub fn free_vars(&self) -> &[String] {
        &self.free
    }

    pub fn eval(&self, a: &Assignment) -> Result<bool> {
        let mut env = vec![0; self.slots];
        for (i, v) in self.free.iter().enumerate() {
            let value = *a.get(v).ok_or_else(|| Error::UnboundVariable(v.clone()))?;
            if value >= self.structure.domain_size() {
                return Err(Error::ElementOutOfRange {
                    element: value,
                    size: self.structure.domain_size(),
                });
            }
            env[i] = value;
        }
        Ok(self.run(&self.root, &mut env, &mut Vec::new()))
    }

    /// Evaluates with free variables given positionally, in sorted order.
    pub fn eval_slots(&self, free_values: &[usize]) -> bool {
        let mut env = vec![0; self.slots];
        env[..free_values.len()].copy_from_slice(free_values);
        self.run(&self.root, &mut env, &mut Vec::new())
    }

    fn run(&self, node: &Node, env: &mut [usize], buf: &mut Vec<usize>) -> bool {
        match node {
            Node::Atom(rel, args) => {
                let start = buf.len();
                buf.extend(args.iter().map(|s| match *s {
                    Slot::Var(i) => env[i],
                    Slot::Elem(e) => e,
                }));
                let holds = self.structure.relation(*rel).contains(&buf[start..]);
                buf.truncate(start);
                holds
            }
            Node::Not(f) => !self.run(f, env, buf),
            Node::Binary(op, a, b) => {
                let a = self.run(a, env, buf);
                match (op, a) {
                    (BinOp::And, false) => false,
                    (BinOp::Or, true) => true,
                    (BinOp::Implies, false) => true,
                    _ => op.apply(a, self.run(b, env, buf)),
                }
            }
            Node::Quant(q, slot, body) => {
                let n = self.structure.domain_size();
                match q {
                    Quantifier::ForAll => (0..n).all(|e| {
                        env[*slot] = e;
                        self.run(body, env, buf)
                    }),
                    Quantifier::Exists => (0..n).any(|e| {
                        env[*slot] = e;
                        self.run(body, env, buf)
                    }),
                }
            }
        }
    }
}

fn compile(
    s: &Structure,
    phi: &Formula,
    scope: &mut Vec<(String, usize)>,
    slots: &mut usize,
) -> Result<Node> {
    let sig = s.signature();
    let term = |t: &Term, scope: &Vec<(String, usize)>| -> Result<Slot> {
        match t {
            Term::Var(v) => scope
                .iter()
                .rev()
                .find(|(name, _)| name == v)
                .map(|&(_, i)| Slot::Var(i))
                .ok_or_else(|| Error::UnboundVariable(v.clone())),
            Term::Const(c) => sig
                .constant_index(c)
                .map(|i| Slot::Elem(s.constant_values()[i]))
                .ok_or_else(|| {
                    Error::SignatureMismatch(format!("constant `{c}` not in signature"))
                }),
        }
    };
    Ok(match phi {
        Formula::Atom { rel, args } => {
            let index = sig.relation_index(rel).ok_or_else(|| {
                Error::SignatureMismatch(format!("relation `{rel}` not in signature"))
            })?;
            let arity = sig.relations()[index].arity;
            if arity != args.len() {
                return Err(Error::SignatureMismatch(format!(
                    "`{rel}` has arity {arity}, used with {} argument(s)",
                    args.len()
                )));
            }
            let args = args.iter().map(|t| term(t, scope)).collect::<Result<_>>()?;
            Node::Atom(index, args)
        }
        Formula::Eq(a, b) => {
            let index = sig
                .equality_index()
                .ok_or_else(|| Error::SignatureMismatch("equality not in signature".into()))?;
            Node::Atom(index, vec![term(a, scope)?, term(b, scope)?])
        }
        Formula::Not(f) => Node::Not(Box::new(compile(s, f, scope, slots)?)),
        Formula::Binary(op, a, b) => Node::Binary(
            *op,
            Box::new(compile(s, a, scope, slots)?),
            Box::new(compile(s, b, scope, slots)?),
        ),
        Formula::Quant(q, v, body) => {
            let slot = *slots;
            *slots += 1;
            scope.push((v.clone(), slot));
            let body = compile(s, body, scope, slots);
            scope.pop();
            Node::Quant(*q, slot, Box::new(body?))
        }
    })
}

/// `s ⊨ phi[a]`. Quantifiers range over `0..n`; over the empty domain a
/// universal is vacuously true and an existential false.
pub fn evaluate(s: &Structure, phi: &Formula, a: &Assignment) -> Result<bool> {
    Compiled::new(s, phi)?.eval(a)
}
