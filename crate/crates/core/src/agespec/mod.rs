//! Universal clause specifications of hereditary classes of finite
//! structures: age membership, minimal bounds, and d-type enumeration.

mod clause;
mod ground;
mod spec;
mod types;

pub use clause::{Atom, Clause, Literal};
pub use ground::find_expansion;
pub use spec::{builtin_linear_order, forbidden_bounds, BoundSpec};
pub use types::{
    enumerate_d_types, enumerate_models, restricted_growth_patterns, tuple_type_key,
    type_of_tuple, DType, DTypeTable, TypeKey,
};
