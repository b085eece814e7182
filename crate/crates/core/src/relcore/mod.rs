//! Finite relational structures and the solvers everything else builds on.

pub(crate) mod hom;
mod ops;
mod partition;
pub mod search;
mod signature;
mod structure;

pub use hom::{
    all_homomorphisms, enumerate_automorphisms, find_embedding, find_homomorphism,
    is_homomorphism, orbit_quotient_finite, HomWitness,
};
pub use ops::{decode_tuple, direct_power, encode_tuple, induced_substructure, quotient};
pub use partition::{equivalence_closure, Partition};
pub use signature::{Signature, Symbol};
pub use structure::{FiniteStructure, Relation, StructureBuilder};
