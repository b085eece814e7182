//! Named fixtures, so commands and the suite need no input files.

use std::path::Path;

use cspwb_core::agespec::{builtin_linear_order, BoundSpec};
use cspwb_core::error::{Error, Result};
use cspwb_core::fixtures::{antichain, chain, clique, directed_cycle, parity_a1};
use cspwb_core::relcore::FiniteStructure;
use cspwb_core::text::{parse_spec, parse_structure};

/// `chainN`, `cycleN` (also `Ncycle`), `kN`, `antichainN`, `a1`.
pub fn structure(name: &str) -> Option<FiniteStructure> {
    let num = |prefix: &str| name.strip_prefix(prefix).and_then(|n| n.parse::<usize>().ok());
    if name == "a1" {
        return Some(parity_a1());
    }
    if let Some(n) = num("chain") {
        return Some(chain(n));
    }
    if let Some(n) = num("antichain") {
        return Some(antichain(n));
    }
    if let Some(n) = num("cycle").or_else(|| name.strip_suffix("cycle").and_then(|n| n.parse().ok())) {
        return (n >= 1).then(|| directed_cycle(n));
    }
    if let Some(n) = num("k") {
        return Some(clique(n));
    }
    None
}

/// `linear` (symbol `<`) or `linear:<symbol>`.
pub fn spec(name: &str) -> Option<BoundSpec> {
    match name.split_once(':') {
        None if name == "linear" => Some(builtin_linear_order("<")),
        Some(("linear", sym)) if !sym.is_empty() => Some(builtin_linear_order(sym)),
        _ => None,
    }
}

fn read(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read `{path}`: {e}")))
}

/// A file path when one exists, else a built-in name.
pub fn load_structure(arg: &str) -> Result<FiniteStructure> {
    if Path::new(arg).is_file() {
        return parse_structure(&read(arg)?).map_err(|e| in_file(arg, e));
    }
    structure(arg).ok_or_else(|| Error::Invalid(format!("`{arg}` is neither a file nor a built-in structure")))
}

pub fn load_spec(arg: &str) -> Result<BoundSpec> {
    if Path::new(arg).is_file() {
        return parse_spec(&read(arg)?).map_err(|e| in_file(arg, e));
    }
    spec(arg).ok_or_else(|| Error::Invalid(format!("`{arg}` is neither a file nor a built-in spec")))
}

fn in_file(path: &str, e: Error) -> Error {
    match e {
        Error::Parse { line, col, msg } => Error::Invalid(format!("{path}:{line}:{col}: {msg}")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert_eq!(structure("chain3").unwrap().size(), 3);
        assert_eq!(structure("3cycle").unwrap(), directed_cycle(3));
        assert_eq!(structure("k4").unwrap().size(), 4);
        assert!(structure("cycle0").is_none());
        assert!(structure("nothing").is_none());
        assert_eq!(spec("linear").unwrap().clauses.len(), 3);
        assert!(spec("linear:<B").unwrap().signature.index_of("<B").is_some());
        assert!(load_spec("missing").is_err());
    }
}
