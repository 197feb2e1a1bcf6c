//! Small named structures used throughout the docs, tests and data files.

use crate::structure::Structure;

fn build(b: crate::structure::StructureBuilder) -> Structure {
    b.build().expect("fixture is well-formed")
}

/// Two elements related symmetrically and irreflexively.
pub fn singlet() -> Structure {
    build(Structure::builder("Singlet", 2).relation("R", 2, [[0, 1], [1, 0]]))
}

/// Two elements with the single edge `0 -> 1`.
pub fn directed_edge() -> Structure {
    build(Structure::builder("DirectedEdge", 2).relation("R", 2, [[0, 1]]))
}

/// Two elements with the total binary relation.
pub fn k2loop() -> Structure {
    build(Structure::builder("K2loop", 2).relation("R", 2, [[0, 0], [0, 1], [1, 0], [1, 1]]))
}

/// [`k2loop`] with an equality symbol interpreted as the total relation.
pub fn k2loop_with_total_equality() -> Structure {
    build(
        Structure::builder("K2loopEq", 2)
            .relation("R", 2, [[0, 0], [0, 1], [1, 0], [1, 1]])
            .relation("Eq", 2, [[0, 0], [0, 1], [1, 0], [1, 1]])
            .equality("Eq"),
    )
}

/// The path 0 - 1 - 2 as a symmetric edge relation.
pub fn p3_path() -> Structure {
    build(Structure::builder("P3", 3).relation("E", 2, [[0, 1], [1, 0], [1, 2], [2, 1]]))
}

/// Addition modulo `n` as the ternary graph `Plus(x, y, z) <-> x + y = z`.
pub fn zn_add(n: usize) -> Structure {
    let tuples: Vec<[usize; 3]> = (0..n)
        .flat_map(|x| (0..n).map(move |y| [x, y, (x + y) % n]))
        .collect();
    build(Structure::builder(format!("Z{n}add"), n).relation("Plus", 3, tuples))
}

pub fn z5add() -> Structure {
    zn_add(5)
}

pub fn z6add() -> Structure {
    zn_add(6)
}

/// Domain {0,1,2,3} standing for {1,2,3,4}, with P1 = {1,2}, P2 = {1,2,3},
/// P3 = {1,2,4} shifted down by one.
pub fn henkin4() -> Structure {
    build(
        Structure::builder("Henkin4", 4)
            .unary("P1", [0, 1])
            .unary("P2", [0, 1, 2])
            .unary("P3", [0, 1, 3])
            .element_name(0, "1")
            .element_name(1, "2")
            .element_name(2, "3")
            .element_name(3, "4"),
    )
}

/// `n` elements and one empty binary relation; with `equality` the
/// signature also carries a diagonal equality symbol.
pub fn empty_binary(n: usize, equality: bool) -> Structure {
    let mut b =
        Structure::builder(format!("Empty{n}"), n).relation("R", 2, Vec::<[usize; 2]>::new());
    if equality {
        let diag: Vec<[usize; 2]> = (0..n).map(|x| [x, x]).collect();
        b = b.relation("Eq", 2, diag).equality("Eq");
    }
    build(b)
}

/// `s` with a fresh symbol `Eq`, interpreted as the diagonal and designated
/// as equality.
pub fn with_identity(s: &Structure) -> Structure {
    let diag = crate::structure::diagonal(s.domain_size()).to_tuples();
    let symbol = crate::structure::RelationSymbol {
        name: "Eq".into(),
        arity: 2,
    };
    s.with_relations(vec![(symbol, diag)])
        .and_then(|t| t.with_equality(Some("Eq".into())))
        .expect("`Eq` is not already declared")
}
