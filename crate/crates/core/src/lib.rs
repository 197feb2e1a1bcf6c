//! Finite relational structures and the machinery for telling their
//! elements apart: automorphism groups, bounded formula search, congruences
//! and quotients, and Ehrenfeucht-Fraisse games.

pub mod automorphism;
pub mod discern;
pub mod ef;
pub mod error;
pub mod format;
pub mod logic;
pub mod partition;
pub mod perm;
pub mod quotient;
pub mod structure;
pub mod zoo;

pub use automorphism::{
    automorphism_group, is_automorphism, is_rigid, orbits, rigidify, Group, Strategy,
};
pub use error::{Error, Result};
pub use partition::Partition;
pub use perm::Permutation;
pub use structure::{
    diagonal, is_fully_symmetric, singleton_extension, validate, BinaryRelationView,
    RelationSymbol, Signature, Structure, ValidationReport,
};
