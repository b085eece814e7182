//! Template constructions: wreath products, blowups, generic superposition,
//! full powers, orbit templates and the PCSP pipeline.

mod blowup;
mod fullpower;
mod orbit;
mod pipeline;
mod wreath;

pub use blowup::{
    blowup_spec, finite_blowup_model, finite_blowup_model_i4, hat_substructure, i4_relation, superpose_specs,
    EQUIV, I4, NEQ, Q_ORDER, S_ORDER,
};
pub use fullpower::{
    full_power_finite, full_power_instance, full_power_signature, full_power_symbols, functions, injections,
    DerivedSymbol,
};
pub use orbit::OrbitTemplate;
pub use pipeline::{build_pcsp, choose_d, verify_into_orbit, BuildOptions, PcspTemplate, Provenance};
pub use wreath::{wreath_finite, wreath_spec};
