use crate::agespec::{builtin_linear_order, find_expansion, tuple_type_key, BoundSpec};
use crate::caps::Caps;
use crate::construct::{blowup_spec, full_power_finite, hat_substructure, superpose_specs, OrbitTemplate, S_ORDER};
use crate::error::{Error, Result};
use crate::relcore::{decode_tuple, FiniteStructure};

/// The least `d` with all bounds of size at most `d` and all arities below `d`.
pub fn choose_d(spec: &BoundSpec) -> usize {
    spec.max_bound_size.max(spec.signature.max_arity() + 1).max(1)
}

#[derive(Clone, Debug, Default)]
pub struct BuildOptions {
    pub with_i4: bool,
    pub d_override: Option<usize>,
    pub caps: Caps,
}

/// What a template was built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub spec: String,
    pub tau: Vec<String>,
    pub s_size: usize,
    pub with_i4: bool,
    pub d_override: Option<usize>,
    pub bhat: String,
    pub tau_hat: Vec<String>,
}

/// A PCSP template `(S1, S2)` with the type map `S1 → S2`.
#[derive(Clone, Debug)]
pub struct PcspTemplate {
    pub s1: FiniteStructure,
    /// The structure whose full power is `s1`.
    pub s_hat: FiniteStructure,
    pub s2: OrbitTemplate,
    pub d: usize,
    /// Image of each element of `S1` in `S2`.
    pub hom: Vec<u32>,
    pub provenance: Provenance,
}

impl PcspTemplate {
    /// Replays the stored map against both sides.
    pub fn verify(&self) -> bool {
        verify_into_orbit(&self.s1, &self.s2, &self.hom)
    }
}

/// Is `map` a homomorphism from `s1` into the orbit template?
pub fn verify_into_orbit(s1: &FiniteStructure, s2: &OrbitTemplate, map: &[u32]) -> bool {
    if map.len() != s1.size() || map.iter().any(|&t| t as usize >= s2.size()) {
        return false;
    }
    if s1.signature() != s2.signature() {
        return false;
    }
    let mut img = Vec::new();
    for (i, r) in s1.relations().iter().enumerate() {
        for t in r.iter() {
            img.clear();
            img.extend(t.iter().map(|&x| map[x as usize]));
            if !s2.contains(i, &img) {
                return false;
            }
        }
    }
    true
}

fn at_stage(stage: &str, e: Error) -> Error {
    match e {
        Error::CapExceeded { what, required, allowed } => {
            Error::CapExceeded { what: format!("{stage}: {what}"), required, allowed }
        }
        Error::Invalid(m) => Error::Invalid(format!("{stage}: {m}")),
        other => other,
    }
}

/// Blowup, superposition with a generic order, full power and orbit quotient.
pub fn build_pcsp(spec_b: &BoundSpec, tau: &[String], s: &FiniteStructure, opts: &BuildOptions) -> Result<PcspTemplate> {
    if s.size() < 3 {
        return Err(Error::Invalid(format!("S needs at least 3 elements, got {}", s.size())));
    }
    let s_tau = s.reduct(tau)?;
    if find_expansion(spec_b, &s_tau)?.is_none() {
        return Err(Error::Invalid(format!("S is not in the age of the reduct of `{}`", spec_b.name)));
    }
    let (up, tau_hat) = blowup_spec(spec_b, tau, opts.with_i4).map_err(|e| at_stage("blowup", e))?;
    let bhat = superpose_specs(&up, &builtin_linear_order(S_ORDER)).map_err(|e| at_stage("superposition", e))?;
    let least = choose_d(&bhat);
    let d = match opts.d_override {
        Some(d) if d < least => {
            return Err(Error::Invalid(format!("d = {d} is below the least admissible d = {least}")));
        }
        Some(d) => d,
        None => least,
    };
    let s_hat = hat_substructure(&s_tau, tau, opts.with_i4)?;
    let s1 = full_power_finite(&s_hat, d, &opts.caps).map_err(|e| at_stage("full power", e))?;
    let s2 = OrbitTemplate::new(&bhat, &tau_hat, d, &opts.caps).map_err(|e| at_stage("orbit template", e))?;

    let expanded = find_expansion(&bhat, &s_hat)?
        .ok_or_else(|| Error::Invalid("the hatted copy of S has no expansion in the age".into()))?
        .aligned_to(&bhat.signature)?;
    let m = s_hat.size();
    let hom = (0..s1.size() as u32)
        .map(|x| {
            s2.table()
                .lookup(&tuple_type_key(&expanded, &decode_tuple(x, m, d)))
                .map(|t| t as u32)
                .ok_or_else(|| Error::Invalid("a tuple of S has no type in the table".into()))
        })
        .collect::<Result<Vec<u32>>>()?;
    if !verify_into_orbit(&s1, &s2, &hom) {
        return Err(Error::Invalid("the type map S1 -> S2 failed replay".into()));
    }
    let provenance = Provenance {
        spec: spec_b.name.clone(),
        tau: tau.to_vec(),
        s_size: s.size(),
        with_i4: opts.with_i4,
        d_override: opts.d_override,
        bhat: bhat.name.clone(),
        tau_hat,
    };
    Ok(PcspTemplate { s1, s_hat, s2, d, hom, provenance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::chain;

    fn lt() -> Vec<String> {
        vec!["<".to_string()]
    }

    #[test]
    fn choose_d_examples() {
        let lin = builtin_linear_order("<");
        assert_eq!(choose_d(&lin), 3);
        let (up, _) = blowup_spec(&lin, &lt(), false).unwrap();
        let bhat = superpose_specs(&up, &builtin_linear_order(S_ORDER)).unwrap();
        assert_eq!(choose_d(&bhat), 4);
        let (up, _) = blowup_spec(&lin, &lt(), true).unwrap();
        assert_eq!(choose_d(&up), 5);
    }

    #[test]
    fn rejects_small_inputs() {
        let lin = builtin_linear_order("<");
        let opts = BuildOptions { d_override: Some(2), ..Default::default() };
        assert!(build_pcsp(&lin, &lt(), &chain(3), &opts).is_err());
        assert!(build_pcsp(&lin, &lt(), &chain(2), &BuildOptions::default()).is_err());
        assert!(build_pcsp(&lin, &lt(), &crate::fixtures::directed_cycle(3), &BuildOptions::default()).is_err());
    }
}
