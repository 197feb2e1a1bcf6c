//! Surface syntax for formulas.
//!
//! Connectives by decreasing precedence: `!`, `&`, `|`, `->` (right
//! associative), `<->`. A quantifier `forall x.` / `exists x.` extends as
//! far right as possible, up to the closing parenthesis of its group.
//! Several variables may follow one quantifier keyword: `forall x y.`.

use thiserror::Error;

use super::formula::{BinOp, Formula, Quantifier, Term};
use crate::structure::Signature;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at {position}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        position: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown symbol `{name}` at {position}")]
    UnknownSymbol { name: String, position: usize },
    #[error("arity mismatch at {position}: `{name}` takes {expected} argument(s), found {found}")]
    Arity {
        name: String,
        position: usize,
        expected: usize,
        found: usize,
    },
    #[error("equality not in signature (at {position})")]
    EqualityNotInSignature { position: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    Iff,
    Eq,
    LParen,
    RParen,
    Comma,
    Dot,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::Eq => "`=`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, FormulaError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), start));
                continue;
            }
            '!' | '~' => Tok::Not,
            '&' => Tok::And,
            '|' => Tok::Or,
            '=' => Tok::Eq,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                Tok::Implies
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                i += 2;
                Tok::Iff
            }
            other => {
                return Err(FormulaError::Syntax {
                    position: start,
                    expected: vec!["a formula token".into()],
                    found: format!("`{other}`"),
                })
            }
        };
        i += 1;
        out.push((tok, start));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    sig: &'a Signature,
    scope: Vec<String>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn position(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn syntax(&self, expected: &[&str]) -> FormulaError {
        FormulaError::Syntax {
            position: self.position(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().map_or("end of input".into(), Tok::describe),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), FormulaError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.syntax(&[&tok.describe()]))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), FormulaError> {
        match self.toks.get(self.pos) {
            Some((Tok::Ident(s), p)) if !matches!(s.as_str(), "forall" | "exists") => {
                let out = (s.clone(), *p);
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.syntax(&[what])),
        }
    }

    fn iff(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.implies()?;
        while self.eat(&Tok::Iff) {
            let rhs = self.implies()?;
            lhs = Formula::binary(BinOp::Iff, lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implies()?;
            return Ok(Formula::binary(BinOp::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        if self.eat(&Tok::Not) {
            return Ok(Formula::not(self.unary()?));
        }
        let quantifier = match self.peek() {
            Some(Tok::Ident(s)) if s == "forall" => Some(Quantifier::ForAll),
            Some(Tok::Ident(s)) if s == "exists" => Some(Quantifier::Exists),
            _ => None,
        };
        if let Some(q) = quantifier {
            self.pos += 1;
            let mut vars = vec![self.ident("variable")?.0];
            loop {
                self.eat(&Tok::Comma);
                match self.peek() {
                    Some(Tok::Dot) => break,
                    Some(Tok::Ident(_)) => vars.push(self.ident("variable")?.0),
                    _ => return Err(self.syntax(&["variable", "`.`"])),
                }
            }
            self.expect(Tok::Dot)?;
            let depth = self.scope.len();
            self.scope.extend(vars.iter().cloned());
            let body = self.iff();
            self.scope.truncate(depth);
            let mut body = body?;
            for v in vars.into_iter().rev() {
                body = Formula::Quant(q, v, Box::new(body));
            }
            return Ok(body);
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, FormulaError> {
        if self.eat(&Tok::LParen) {
            let f = self.iff()?;
            self.expect(Tok::RParen)?;
            return Ok(f);
        }
        let (name, position) = self.ident("formula")?;
        if self.eat(&Tok::LParen) {
            let mut args = vec![self.term()?];
            while self.eat(&Tok::Comma) {
                args.push(self.term()?);
            }
            self.expect(Tok::RParen)?;
            let Some(index) = self.sig.relation_index(&name) else {
                return Err(FormulaError::UnknownSymbol { name, position });
            };
            let arity = self.sig.relations()[index].arity;
            if args.len() != arity {
                return Err(FormulaError::Arity {
                    name,
                    position,
                    expected: arity,
                    found: args.len(),
                });
            }
            if Some(index) == self.sig.equality_index() {
                let b = args.pop().expect("binary");
                let a = args.pop().expect("binary");
                return Ok(Formula::Eq(a, b));
            }
            return Ok(Formula::Atom { rel: name, args });
        }
        let lhs = self.resolve(name);
        let eq_position = self.position();
        if !self.eat(&Tok::Eq) {
            return Err(self.syntax(&["`(`", "`=`"]));
        }
        let rhs = self.term()?;
        if self.sig.equality_name().is_none() {
            return Err(FormulaError::EqualityNotInSignature {
                position: eq_position,
            });
        }
        Ok(Formula::Eq(lhs, rhs))
    }

    fn term(&mut self) -> Result<Term, FormulaError> {
        let (name, _) = self.ident("term")?;
        Ok(self.resolve(name))
    }

    fn resolve(&self, name: String) -> Term {
        if !self.scope.contains(&name) && self.sig.constant_index(&name).is_some() {
            Term::Const(name)
        } else {
            Term::Var(name)
        }
    }
}

/// Parses `text` against `sig` and returns the alpha-canonical formula.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, FormulaError> {
    let toks = tokenize(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
        sig,
        scope: Vec::new(),
    };
    let f = parser.iff()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.syntax(&["a connective", "end of input"]));
    }
    Ok(f.canonicalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn sig_pq() -> Signature {
        Signature::relational([("P", 2), ("Q", 1)]).unwrap()
    }

    #[test]
    fn singlet_biconditional() {
        let sig = zoo::singlet().signature().clone();
        let f = parse_formula("forall z. R(x,z) <-> R(y,z)", &sig).unwrap();
        assert_eq!(f.quantifier_rank(), 1);
        assert_eq!(f.free_vars().into_iter().collect::<Vec<_>>(), ["x", "y"]);
        assert_eq!(f.to_string(), "(forall v0. (R(x,v0) <-> R(y,v0)))");
    }

    #[test]
    fn precedence() {
        let sig = sig_pq();
        let f = parse_formula("!Q(x) & Q(y) | Q(z) -> Q(x) -> Q(y) <-> Q(z)", &sig).unwrap();
        assert_eq!(
            f.to_string(),
            "((((!Q(x) & Q(y)) | Q(z)) -> (Q(x) -> Q(y))) <-> Q(z))"
        );
        let g = parse_formula("Q(x) & exists y. P(x,y) | Q(y)", &sig).unwrap();
        assert_eq!(g.to_string(), "(Q(x) & (exists v0. (P(x,v0) | Q(v0))))");
        let h = parse_formula("(forall y. Q(y)) & Q(y)", &sig).unwrap();
        assert_eq!(h.to_string(), "((forall v0. Q(v0)) & Q(y))");
        let multi = parse_formula("forall u, v. P(u,v)", &sig).unwrap();
        assert_eq!(multi.to_string(), "(forall v0. (forall v1. P(v0,v1)))");
    }

    #[test]
    fn canonical_text_reparses_to_itself() {
        let sig = sig_pq();
        for text in [
            "forall z. (P(x,z) <-> P(y,z)) & (P(z,x) <-> P(z,y))",
            "!!Q(x) -> exists a. exists b. P(a,b) & !P(b,a)",
        ] {
            let f = parse_formula(text, &sig).unwrap();
            assert_eq!(parse_formula(&f.to_string(), &sig).unwrap(), f);
        }
    }

    #[test]
    fn errors() {
        let sig = zoo::singlet().signature().clone();
        assert!(matches!(
            parse_formula("R(x)", &sig),
            Err(FormulaError::Arity {
                expected: 2,
                found: 1,
                ..
            })
        ));
        let err = parse_formula("x = y", &sig).unwrap_err();
        assert!(matches!(
            err,
            FormulaError::EqualityNotInSignature { position: 2 }
        ));
        assert!(err.to_string().contains("equality not in signature"));
        assert!(matches!(
            parse_formula("S(x)", &sig),
            Err(FormulaError::UnknownSymbol { .. })
        ));
        match parse_formula("R(x,y) &", &sig) {
            Err(FormulaError::Syntax {
                position, found, ..
            }) => {
                assert_eq!(position, 8);
                assert_eq!(found, "end of input");
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("R(x,y) R(y,x)", &sig).is_err());
        assert!(parse_formula("forall . R(x,y)", &sig).is_err());
    }

    #[test]
    fn equality_and_constants() {
        let s = crate::Structure::builder("s", 2)
            .relation("R", 2, [[0, 1]])
            .relation("E", 2, [[0, 0], [1, 1]])
            .equality("E")
            .constant("c", 0)
            .build()
            .unwrap();
        let f = parse_formula("x = c & E(c, y) & forall c. R(c,x)", s.signature()).unwrap();
        assert_eq!(
            f.to_string(),
            "(((x = c) & (c = y)) & (forall v0. R(v0,x)))"
        );
        assert!(
            matches!(&f, Formula::Binary(_, a, _) if matches!(&**a, Formula::Binary(_, l, _) if matches!(&**l, Formula::Eq(Term::Var(_), Term::Const(_)))))
        );
    }
}
