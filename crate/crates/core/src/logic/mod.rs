//! First-order formulas: syntax, parsing, evaluation and enumeration.

pub mod enumerate;
pub mod eval;
pub mod formula;
pub mod frege;
pub mod hb;
pub mod parser;

pub use enumerate::{enumerate_formulas, Enumeration, EnumerationBudget, Enumerator};
pub use eval::{assignment, evaluate, Assignment, Compiled};
pub use formula::{BinOp, Formula, Quantifier, Term};
pub use frege::{frege_congruence_check, CheckReport, SubstitutionFailure};
pub use hb::hb_identity;
pub use parser::{parse_formula, FormulaError};
