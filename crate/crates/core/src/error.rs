use thiserror::Error;

use crate::format::ParseError;
use crate::logic::parser::FormulaError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid signature: {0}")]
    Signature(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("symbol `{name}` has arity {found}, expected {expected}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("element {element} is outside the domain 0..{size}")]
    ElementOutOfRange { element: usize, size: usize },

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("not a permutation: {0}")]
    NotAPermutation(String),

    #[error("malformed partition: {0}")]
    MalformedPartition(String),

    #[error("partition is not a congruence of `{0}`")]
    NotACongruence(String),

    #[error("domain size {size} exceeds the cap of {cap} for {what}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("free variable `{0}` has no value in the assignment")]
    UnboundVariable(String),

    #[error("absolute discernibility undefined on identical elements")]
    IdenticalElements,

    #[error("the Hilbert-Bernays formula is undefined for a signature without predicates")]
    EmptySignature,

    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error(transparent)]
    Formula(#[from] FormulaError),

    #[error(transparent)]
    Parse(#[from] ParseError),
}
