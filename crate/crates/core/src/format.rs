//! The structure file format.
//!
//! ```text
//! version 1;
//! # a comment
//! structure Singlet {
//!   domain 2;
//!   rel R/2 = { (0,1), (1,0) };
//!   const c = 0;
//!   equality Eq;
//!   names { 0: "up", 1: "down" };
//! }
//! map Quotient { 0 -> 0, 1 -> 0 };
//! ```
//!
//! Whitespace is insignificant and `#` comments run to end of line. The
//! canonical form written by [`to_canonical_string`] sorts symbols by name
//! and tuples lexicographically, so equal structures serialize to equal
//! bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::structure::{RelationSymbol, Signature, Structure};

pub const FORMAT_VERSION: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Everything a structure file can hold.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StructureFile {
    pub structures: Vec<Structure>,
    pub maps: Vec<ElementMap>,
}

/// A named element map, as emitted alongside quotient structures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementMap {
    pub name: String,
    pub images: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(usize),
    Str(String),
    Punct(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Punct(p) => write!(f, "`{p}`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

const PUNCT: [&str; 10] = ["->", "{", "}", "(", ")", ";", ",", "=", "/", ":"];

fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut column) = (0, 1, 1);
    let advance = |i: &mut usize, line: &mut usize, column: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *column = 1;
        } else {
            *column += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let (l, col) = (line, column);
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut column, c);
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut column, ch);
                }
            }
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut column, ch);
                }
            }
            let n = s.parse().map_err(|_| ParseError {
                line: l,
                column: col,
                message: format!("integer `{s}` too large"),
            })?;
            out.push(Spanned {
                tok: Tok::Int(n),
                line: l,
                column: col,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut column, ch);
                }
            }
            out.push(Spanned {
                tok: Tok::Ident(s),
                line: l,
                column: col,
            });
        } else if c == '"' {
            advance(&mut i, &mut line, &mut column, c);
            let mut s = String::new();
            loop {
                let Some(&d) = chars.get(i) else {
                    return Err(ParseError {
                        line: l,
                        column: col,
                        message: "unterminated string".into(),
                    });
                };
                advance(&mut i, &mut line, &mut column, d);
                match d {
                    '"' => break,
                    '\\' => {
                        let Some(&e) = chars.get(i) else { continue };
                        advance(&mut i, &mut line, &mut column, e);
                        s.push(match e {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                    }
                    other => s.push(other),
                }
            }
            out.push(Spanned {
                tok: Tok::Str(s),
                line: l,
                column: col,
            });
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let Some(p) = PUNCT.iter().find(|p| rest.starts_with(**p)) else {
                return Err(ParseError {
                    line: l,
                    column: col,
                    message: format!("unexpected character `{c}`"),
                });
            };
            for _ in 0..p.len() {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut column, ch);
                }
            }
            out.push(Spanned {
                tok: Tok::Punct(p),
                line: l,
                column: col,
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.column))
            .unwrap_or(self.eof)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn expected(&self, what: &str) -> ParseError {
        match self.peek() {
            Some(tok) => self.error(format!("expected {what}, found {tok}")),
            None => self.error(format!("expected {what}, found end of input")),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let tok = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        tok
    }

    fn eat(&mut self, p: &'static str) -> bool {
        if self.peek() == Some(&Tok::Punct(p)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &'static str) -> Result<(), ParseError> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(self.expected(&format!("`{p}`")))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.expected("identifier")),
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<usize, ParseError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.expected("integer")),
        }
    }

    fn file(&mut self) -> Result<StructureFile, ParseError> {
        let mut file = StructureFile::default();
        if self.keyword("version") {
            let v = self.int()?;
            if v != FORMAT_VERSION {
                self.pos -= 1;
                return Err(self.error(format!("unsupported format version {v}")));
            }
            self.expect(";")?;
        }
        loop {
            if self.peek().is_none() {
                break;
            }
            if self.keyword("structure") {
                file.structures.push(self.structure()?);
            } else if self.keyword("map") {
                file.maps.push(self.map()?);
            } else {
                return Err(self.expected("`structure` or `map`"));
            }
        }
        Ok(file)
    }

    fn structure(&mut self) -> Result<Structure, ParseError> {
        let (line, column) = self.here();
        let name = self.ident()?;
        self.expect("{")?;
        let mut domain = None;
        let mut relations: Vec<(RelationSymbol, BTreeSet<Vec<usize>>)> = Vec::new();
        let mut constants: Vec<(String, usize)> = Vec::new();
        let mut equality = None;
        let mut names = BTreeMap::new();
        while !self.eat("}") {
            if self.keyword("domain") {
                if domain.is_some() {
                    self.pos -= 1;
                    return Err(self.error("duplicate `domain` declaration"));
                }
                domain = Some(self.int()?);
                self.expect(";")?;
            } else if self.keyword("rel") {
                let rel_name = self.ident()?;
                self.expect("/")?;
                let arity = self.int()?;
                self.expect("=")?;
                self.expect("{")?;
                let mut tuples = BTreeSet::new();
                if !self.eat("}") {
                    loop {
                        tuples.insert(self.tuple()?);
                        if self.eat("}") {
                            break;
                        }
                        self.expect(",")?;
                    }
                }
                self.expect(";")?;
                relations.push((
                    RelationSymbol {
                        name: rel_name,
                        arity,
                    },
                    tuples,
                ));
            } else if self.keyword("const") {
                let c = self.ident()?;
                self.expect("=")?;
                let v = self.int()?;
                self.expect(";")?;
                constants.push((c, v));
            } else if self.keyword("equality") {
                if equality.is_some() {
                    self.pos -= 1;
                    return Err(self.error("duplicate `equality` declaration"));
                }
                equality = Some(self.ident()?);
                self.expect(";")?;
            } else if self.keyword("names") {
                self.expect("{")?;
                if !self.eat("}") {
                    loop {
                        let e = self.int()?;
                        self.expect(":")?;
                        let label = match self.next() {
                            Some(Tok::Str(s)) => s,
                            _ => {
                                self.pos -= 1;
                                return Err(self.expected("string"));
                            }
                        };
                        names.insert(e, label);
                        if self.eat("}") {
                            break;
                        }
                        self.expect(",")?;
                    }
                }
                self.expect(";")?;
            } else {
                return Err(self.expected("`domain`, `rel`, `const`, `equality`, `names` or `}`"));
            }
        }
        let at = |message: String| ParseError {
            line,
            column,
            message,
        };
        let domain =
            domain.ok_or_else(|| at(format!("structure `{name}` has no `domain` declaration")))?;
        let (symbols, interpretations): (Vec<_>, Vec<_>) = relations.into_iter().unzip();
        let (constant_names, constant_values): (Vec<_>, Vec<_>) = constants.into_iter().unzip();
        let signature =
            Signature::new(symbols, constant_names, equality).map_err(|e| at(e.to_string()))?;
        Structure::new(
            name,
            signature,
            domain,
            interpretations,
            constant_values,
            names,
        )
        .map_err(|e| at(e.to_string()))
    }

    fn tuple(&mut self) -> Result<Vec<usize>, ParseError> {
        if !self.eat("(") {
            return Ok(vec![self.int()?]);
        }
        let mut t = vec![self.int()?];
        while self.eat(",") {
            t.push(self.int()?);
        }
        self.expect(")")?;
        Ok(t)
    }

    fn map(&mut self) -> Result<ElementMap, ParseError> {
        let name = self.ident()?;
        self.expect("{")?;
        let mut images = BTreeMap::new();
        if !self.eat("}") {
            loop {
                let from = self.int()?;
                self.expect("->")?;
                let to = self.int()?;
                if images.insert(from, to).is_some() {
                    return Err(self.error(format!("element {from} mapped twice")));
                }
                if self.eat("}") {
                    break;
                }
                self.expect(",")?;
            }
        }
        self.expect(";")?;
        Ok(ElementMap { name, images })
    }
}

pub fn parse_file(src: &str) -> Result<StructureFile, ParseError> {
    let toks = tokenize(src)?;
    let eof = src
        .lines()
        .enumerate()
        .last()
        .map_or((1, 1), |(i, l)| (i + 1, l.chars().count() + 1));
    Parser { toks, pos: 0, eof }.file()
}

/// Parses a file that must contain exactly one structure.
pub fn parse_structure(src: &str) -> Result<Structure, ParseError> {
    let file = parse_file(src)?;
    match <[Structure; 1]>::try_from(file.structures) {
        Ok([s]) => Ok(s),
        Err(v) => Err(ParseError {
            line: 1,
            column: 1,
            message: format!("expected exactly one structure, found {}", v.len()),
        }),
    }
}

fn write_tuple(out: &mut String, t: &[usize]) {
    out.push('(');
    for (i, x) in t.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&x.to_string());
    }
    out.push(')');
}

/// The structure block alone, without the version line.
pub fn structure_block(s: &Structure) -> String {
    let mut out = format!("structure {} {{\n  domain {};\n", s.name(), s.domain_size());
    let sig = s.signature();
    let mut rels: Vec<usize> = (0..sig.relations().len()).collect();
    rels.sort_by(|&a, &b| sig.relations()[a].name.cmp(&sig.relations()[b].name));
    for i in rels {
        let sym = &sig.relations()[i];
        out.push_str(&format!("  rel {}/{} = {{", sym.name, sym.arity));
        let tuples = s.relation(i).tuples();
        if tuples.is_empty() {
            out.push(' ');
        }
        for (j, t) in tuples.iter().enumerate() {
            out.push_str(if j == 0 { " " } else { ", " });
            write_tuple(&mut out, t);
        }
        if !tuples.is_empty() {
            out.push(' ');
        }
        out.push_str("};\n");
    }
    let mut consts: Vec<(&String, usize)> = sig
        .constants()
        .iter()
        .zip(s.constant_values().iter().copied())
        .collect();
    consts.sort();
    for (name, v) in consts {
        out.push_str(&format!("  const {name} = {v};\n"));
    }
    if let Some(eq) = sig.equality_name() {
        out.push_str(&format!("  equality {eq};\n"));
    }
    if !s.element_names().is_empty() {
        let parts: Vec<String> = s
            .element_names()
            .iter()
            .map(|(e, label)| format!("{e}: {label:?}"))
            .collect();
        out.push_str(&format!("  names {{ {} }};\n", parts.join(", ")));
    }
    out.push_str("}\n");
    out
}

pub fn map_block(map: &ElementMap) -> String {
    let parts: Vec<String> = map
        .images
        .iter()
        .map(|(a, b)| format!("{a} -> {b}"))
        .collect();
    format!("map {} {{ {} }};\n", map.name, parts.join(", "))
}

/// Canonical serialization of a single structure, version line included.
pub fn to_canonical_string(s: &Structure) -> String {
    format!("version {FORMAT_VERSION};\n{}", structure_block(s))
}

pub fn file_to_string(file: &StructureFile) -> String {
    let mut out = format!("version {FORMAT_VERSION};\n");
    for s in &file.structures {
        out.push_str(&structure_block(s));
    }
    for m in &file.maps {
        out.push_str(&map_block(m));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn parses_full_block() {
        let src = r#"
            # the singlet analogue
            structure Singlet {
              domain 2;
              rel R/2 = { (1,0), (0,1) };   # symmetric
              names { 0: "up", 1: "down" };
            }
        "#;
        let s = parse_structure(src).unwrap();
        assert_eq!(s.domain_size(), 2);
        assert_eq!(s.relation_by_name("R").unwrap().len(), 2);
        assert_eq!(s.element_names()[&1], "down");
        assert_eq!(
            to_canonical_string(&s),
            "version 1;\nstructure Singlet {\n  domain 2;\n  rel R/2 = { (0,1), (1,0) };\n  names { 0: \"up\", 1: \"down\" };\n}\n"
        );
    }

    #[test]
    fn canonical_sorts_symbols() {
        let src = "version 1; structure S { domain 3; rel Z/1 = { 2, 0 }; rel A/2 = { }; const d = 1; const c = 0; equality E; rel E/2 = {(0,0),(1,1),(2,2)}; }";
        let s = parse_structure(src).unwrap();
        let text = to_canonical_string(&s);
        assert_eq!(
            text,
            "version 1;\nstructure S {\n  domain 3;\n  rel A/2 = { };\n  rel E/2 = { (0,0), (1,1), (2,2) };\n  rel Z/1 = { (0), (2) };\n  const c = 0;\n  const d = 1;\n  equality E;\n}\n"
        );
        let again = parse_structure(&text).unwrap();
        assert_eq!(to_canonical_string(&again), text);
    }

    #[test]
    fn errors_carry_positions() {
        let err =
            parse_structure("structure S {\n  domain 2;\n  rel R/2 = { (0,1) }\n}").unwrap_err();
        assert_eq!((err.line, err.column), (4, 1));
        assert!(err.message.contains("expected `;`"), "{}", err.message);

        let err = parse_structure("structure S { rel R/2 = { }; }").unwrap_err();
        assert!(err.message.contains("no `domain`"));

        let err =
            parse_structure("structure S { domain 2; rel R/1 = {}; rel R/2 = {}; }").unwrap_err();
        assert!(err.message.contains("declared twice"));

        let err = parse_file("version 2;").unwrap_err();
        assert!(err.message.contains("unsupported format version"));

        assert!(parse_structure("").is_err());
        assert!(parse_structure("structure S { domain 2; } $").is_err());
    }

    #[test]
    fn out_of_range_tuples_survive_parsing() {
        let s = parse_structure("structure S { domain 2; rel R/2 = { (0,3) }; }").unwrap();
        assert!(!crate::validate(&s).is_valid());
    }

    #[test]
    fn maps_round_trip() {
        let mut file = StructureFile::default();
        file.structures.push(zoo::singlet());
        file.maps.push(ElementMap {
            name: "f".into(),
            images: BTreeMap::from([(0, 0), (1, 0)]),
        });
        let text = file_to_string(&file);
        assert!(text.ends_with("map f { 0 -> 0, 1 -> 0 };\n"));
        assert_eq!(parse_file(&text).unwrap(), file);
    }
}
