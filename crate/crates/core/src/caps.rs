//! Size caps shared by every construction that can blow up.

use crate::error::{Error, Result};

/// Name of the environment variable holding cap overrides, e.g.
/// `CSPWB_CAPS=domain=200000,search_vars=10000`.
pub const CAPS_ENV: &str = "CSPWB_CAPS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Largest domain a constructed structure may have.
    pub domain: usize,
    /// Largest total number of tuples (or constraint instances).
    pub tuples: usize,
    /// Largest number of d-types an enumeration may produce.
    pub types: usize,
    /// Largest number of search variables after symmetry reduction.
    pub search_vars: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            domain: 100_000,
            tuples: 5_000_000,
            types: 200_000,
            search_vars: 5_000,
        }
    }
}

impl Caps {
    /// Parses a comma-separated override list on top of the defaults.
    pub fn parse(spec: &str) -> Result<Caps> {
        let mut caps = Caps::default();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("cap override `{item}` is not key=value")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("cap `{key}` needs a positive integer")))?;
            if value == 0 {
                return Err(Error::Invalid(format!("cap `{key}` must be positive")));
            }
            match key.trim() {
                "domain" => caps.domain = value,
                "tuples" => caps.tuples = value,
                "types" => caps.types = value,
                "search_vars" | "vars" => caps.search_vars = value,
                other => return Err(Error::Invalid(format!("unknown cap `{other}`"))),
            }
        }
        Ok(caps)
    }

    /// Defaults overridden by [`CAPS_ENV`] when it is set.
    pub fn from_env() -> Result<Caps> {
        match std::env::var(CAPS_ENV) {
            Ok(s) => Caps::parse(&s),
            Err(_) => Ok(Caps::default()),
        }
    }

    pub fn check_domain(&self, what: &str, required: u128) -> Result<()> {
        check(what, required, self.domain)
    }

    pub fn check_tuples(&self, what: &str, required: u128) -> Result<()> {
        check(what, required, self.tuples)
    }

    pub fn check_types(&self, what: &str, required: u128) -> Result<()> {
        check(what, required, self.types)
    }

    pub fn check_search_vars(&self, what: &str, required: u128) -> Result<()> {
        check(what, required, self.search_vars)
    }
}

fn check(what: &str, required: u128, allowed: usize) -> Result<()> {
    if required > allowed as u128 {
        Err(Error::CapExceeded {
            what: what.to_string(),
            required,
            allowed,
        })
    } else {
        Ok(())
    }
}

/// `base^exp` without overflow.
pub(crate) fn pow_u128(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_overrides() {
        let c = Caps::parse("domain=7, search_vars=9").unwrap();
        assert_eq!(c.domain, 7);
        assert_eq!(c.search_vars, 9);
        assert_eq!(c.tuples, Caps::default().tuples);
        assert!(Caps::parse("bogus=1").is_err());
        assert!(Caps::parse("domain=0").is_err());
        assert!(Caps::parse("domain").is_err());
    }

    #[test]
    fn cap_error_names_sizes() {
        let e = Caps::default().check_domain("power", 1 << 40).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("1099511627776") && msg.contains("100000"), "{msg}");
    }
}
