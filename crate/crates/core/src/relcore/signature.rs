use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// An ordered list of relation symbols with unique names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = (S, usize)>) -> Result<Signature> {
        let mut sig = Signature::default();
        for (name, arity) in symbols {
            sig.push(name, arity)?;
        }
        Ok(sig)
    }

    /// Appends a symbol and returns its index.
    pub fn push(&mut self, name: impl Into<String>, arity: usize) -> Result<usize> {
        let name = name.into();
        if arity == 0 {
            return Err(Error::Invalid(format!("symbol `{name}` has arity 0")));
        }
        if name.is_empty() || name.chars().any(|c| c.is_whitespace() || "()#;".contains(c)) {
            return Err(Error::Invalid(format!("`{name}` is not a valid symbol name")));
        }
        if self.index_of(&name).is_some() {
            return Err(Error::Invalid(format!("duplicate symbol `{name}`")));
        }
        self.symbols.push(Symbol { name, arity });
        Ok(self.symbols.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, i: usize) -> &Symbol {
        &self.symbols[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn arity_of(&self, name: &str) -> Option<usize> {
        self.index_of(name).map(|i| self.symbols[i].arity)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.symbols.iter().map(|s| s.name.as_str())
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }

    /// The first symbol name shared with `other`, if any.
    pub fn first_shared(&self, other: &Signature) -> Option<&str> {
        self.names().find(|n| other.index_of(n).is_some())
    }

    pub fn is_disjoint(&self, other: &Signature) -> bool {
        self.first_shared(other).is_none()
    }

    /// Concatenation of two disjoint signatures.
    pub fn disjoint_union(&self, other: &Signature) -> Result<Signature> {
        if let Some(n) = self.first_shared(other) {
            return Err(Error::SignatureOverlap(n.to_string()));
        }
        let mut out = self.clone();
        out.symbols.extend(other.symbols.iter().cloned());
        Ok(out)
    }

    /// The sub-signature on `names`, in the given order.
    pub fn restrict<S: AsRef<str>>(&self, names: &[S]) -> Result<Signature> {
        let mut out = Signature::default();
        for n in names {
            let n = n.as_ref();
            let arity = self
                .arity_of(n)
                .ok_or_else(|| Error::SignatureMismatch(format!("unknown symbol `{n}`")))?;
            out.push(n, arity)?;
        }
        Ok(out)
    }

    /// Same names and arities, ignoring order.
    pub fn same_symbols(&self, other: &Signature) -> bool {
        self.len() == other.len()
            && self.symbols.iter().all(|s| other.arity_of(&s.name) == Some(s.arity))
    }

    /// Describes the first difference to `other` (order-insensitive), if any.
    pub fn mismatch(&self, other: &Signature) -> Option<String> {
        for s in &self.symbols {
            match other.arity_of(&s.name) {
                None => return Some(format!("symbol `{}` missing on the right", s.name)),
                Some(a) if a != s.arity => {
                    return Some(format!("symbol `{}` has arity {} vs {}", s.name, s.arity, a))
                }
                _ => {}
            }
        }
        other
            .symbols
            .iter()
            .find(|s| self.index_of(&s.name).is_none())
            .map(|s| format!("symbol `{}` missing on the left", s.name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_zero_arity() {
        assert!(Signature::new([("R", 2), ("R", 1)]).is_err());
        assert!(Signature::new([("R", 0)]).is_err());
        assert!(Signature::new([("a b", 1)]).is_err());
    }

    #[test]
    fn disjointness_is_by_name() {
        let a = Signature::new([("<", 2), ("E", 2)]).unwrap();
        let b = Signature::new([("E", 3)]).unwrap();
        let c = Signature::new([("neq", 2)]).unwrap();
        assert_eq!(a.first_shared(&b), Some("E"));
        assert!(a.is_disjoint(&c));
        assert!(matches!(a.disjoint_union(&b), Err(Error::SignatureOverlap(_))));
        assert_eq!(a.disjoint_union(&c).unwrap().len(), 3);
    }

    #[test]
    fn mismatch_reports_first_difference() {
        let a = Signature::new([("<", 2), ("E", 2)]).unwrap();
        let b = Signature::new([("E", 2), ("<", 2)]).unwrap();
        assert!(a.same_symbols(&b));
        let c = Signature::new([("<", 3), ("E", 2)]).unwrap();
        assert!(a.mismatch(&c).unwrap().contains('<'));
    }
}
