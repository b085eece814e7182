//! Positive Datalog with semi-naive evaluation, and the instance reductions
//! used to move between template families.

mod engine;
mod programs;
mod reduce;

pub use engine::{evaluate, evaluate_naive, is_closed, Database, DatalogProgram, Goal, PredAtom, Rule};
pub use programs::{acyclicity_check, approx_program, approx_relation, transitive_closure_program};
pub use reduce::{
    blowup_expand, blowup_reduce_star, compose_reductions, i4_preimage_reduce, i4_quotient_reduce, Reduction,
};
