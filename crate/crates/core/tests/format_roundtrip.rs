use std::path::Path;

use indiscern::format::{parse_file, parse_structure, to_canonical_string};
use indiscern::{zoo, Structure};
use proptest::prelude::*;

fn structure() -> impl Strategy<Value = Structure> {
    (1usize..=5).prop_flat_map(|n| {
        (
            prop::collection::vec(any::<bool>(), n * n),
            prop::collection::vec(any::<bool>(), n),
            0..n,
            any::<bool>(),
        )
            .prop_map(move |(edges, marks, c, named)| {
                let pairs: Vec<[usize; 2]> = (0..n * n)
                    .filter(|&i| edges[i])
                    .map(|i| [i / n, i % n])
                    .collect();
                let mut b = Structure::builder("Gen", n)
                    .relation("R", 2, pairs)
                    .unary("P", (0..n).filter(|&i| marks[i]))
                    .constant("c", c);
                if named {
                    b = b.element_name(0, "first one");
                }
                b.build().unwrap()
            })
    })
}

proptest! {
    #[test]
    fn canonical_text_round_trips(s in structure()) {
        let text = to_canonical_string(&s);
        let back = parse_structure(&text).unwrap();
        prop_assert!(same_content(&back, &s));
        prop_assert_eq!(to_canonical_string(&back), text);
    }
}

/// Equal up to the order in which relations are declared.
fn same_content(a: &Structure, b: &Structure) -> bool {
    let sig = (a.signature(), b.signature());
    a.name() == b.name()
        && a.domain_size() == b.domain_size()
        && a.constant_values() == b.constant_values()
        && sig.0.equality_name() == sig.1.equality_name()
        && sig.0.relations().len() == sig.1.relations().len()
        && sig
            .0
            .relations()
            .iter()
            .all(|sym| b.relation_by_name(&sym.name).ok() == a.relation_by_name(&sym.name).ok())
        && to_canonical_string(a) == to_canonical_string(b)
}

fn data(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn data_files_match_the_fixtures() {
    let cases = [
        ("singlet.struct", zoo::singlet()),
        ("directed_edge.struct", zoo::directed_edge()),
        ("k2loop.struct", zoo::k2loop()),
        ("k2loop_total_eq.struct", zoo::k2loop_with_total_equality()),
        ("p3.struct", zoo::p3_path()),
        ("z5add.struct", zoo::z5add()),
        ("z6add.struct", zoo::z6add()),
        ("henkin4.struct", zoo::henkin4()),
        ("empty2_eq.struct", zoo::empty_binary(2, true)),
        ("empty3_eq.struct", zoo::empty_binary(3, true)),
    ];
    for (file, fixture) in cases {
        let parsed = parse_structure(&data(file)).unwrap();
        assert!(same_content(&parsed, &fixture), "{file}");
    }
}

#[test]
fn parse_errors_carry_positions() {
    let err = parse_file("version 1;\nstructure S {\n  domain two;\n}").unwrap_err();
    assert_eq!(err.line, 3);
    assert!(err.column > 1);
}
