//! Polymorphisms and identities: search, checks, essential injectivity, the
//! pseudo-cyclic collapse on ordered domains, and lifting homomorphisms from
//! full powers.

mod fpwr;
mod lift;
mod ops;
mod search;

pub use fpwr::{find_full_power_hom, find_pcsp_polymorphism, FullPowerSolution};
pub use lift::{lift_homomorphism, LiftCertificate};
pub use ops::{
    check_essentially_injective, essential_coordinates, preserves, preserves_i4, pseudo_cyclic_collapse_check,
    satisfies_identity, IdentityKind, OperationTable,
};
pub use search::{find_polymorphism, find_polymorphism_unreduced, identity_classes};
