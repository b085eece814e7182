//! Executable constructions on finitely bounded relational templates.
//!
//! The crate is split into five areas:
//!
//! * [`relcore`]: finite structures, powers, quotients and a backtracking
//!   homomorphism solver with generalized arc consistency.
//! * [`agespec`]: universal clause specifications of hereditary classes,
//!   age membership, minimal bounds and enumeration of d-types.
//! * [`construct`]: wreath products, blowups, generic superposition, full
//!   powers, orbit templates and the PCSP template pipeline.
//! * [`datalog`]: a semi-naive Datalog engine and the instance reductions
//!   built on it.
//! * [`polyfind`]: polymorphism and identity search, essential injectivity,
//!   the pseudo-cyclic collapse and homomorphism lifting.
//!
//! Text formats for all artifacts live in [`text`].

pub mod agespec;
pub mod caps;
pub mod construct;
pub mod datalog;
pub mod error;
pub mod fixtures;
pub mod polyfind;
pub mod relcore;
pub mod text;

pub use caps::Caps;
pub use error::{Error, Result};
