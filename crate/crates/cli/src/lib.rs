//! Command-line drivers and the acceptance suite for `cspwb-core`.

pub mod builtins;
pub mod commands;
pub mod config;
pub mod suite;
