use std::sync::Arc;

use crate::caps::{pow_u128, Caps};
use crate::error::{Error, Result};
use crate::relcore::search::Csp;
use crate::relcore::{quotient, FiniteStructure, Relation};

/// A map from source elements to target elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HomWitness {
    pub map: Vec<u32>,
    pub injective: bool,
}

impl HomWitness {
    /// Replays the witness: every relation must be preserved (and, when
    /// flagged, the map must be injective).
    pub fn verify(&self, source: &FiniteStructure, target: &FiniteStructure) -> bool {
        if self.injective {
            let mut seen = std::collections::HashSet::new();
            if !self.map.iter().all(|x| seen.insert(*x)) {
                return false;
            }
        }
        is_homomorphism(source, target, &self.map)
    }
}

pub(crate) fn check_same_signature(j: &FiniteStructure, a: &FiniteStructure) -> Result<()> {
    match j.signature().mismatch(a.signature()) {
        Some(m) => Err(Error::SignatureMismatch(m)),
        None => Ok(()),
    }
}

/// Independent preservation check used to replay witnesses.
pub fn is_homomorphism(source: &FiniteStructure, target: &FiniteStructure, map: &[u32]) -> bool {
    if map.len() != source.size() || map.iter().any(|&x| x as usize >= target.size()) {
        return false;
    }
    for (sym, rel) in source.signature().symbols().iter().zip(source.relations()) {
        let Some(trel) = target.relation_by_name(&sym.name) else { return false };
        let mut img = vec![0u32; rel.arity()];
        for t in rel.iter() {
            for (slot, &x) in img.iter_mut().zip(t) {
                *slot = map[x as usize];
            }
            if !trel.contains(&img) {
                return false;
            }
        }
    }
    true
}

fn complement(rel: &Relation, m: usize, caps: &Caps) -> Result<Relation> {
    let k = rel.arity();
    caps.check_tuples("embedding reflection table", pow_u128(m, k))?;
    let mut data = Vec::new();
    let total = m.pow(k as u32);
    let mut t = vec![0u32; k];
    for x in 0..total {
        let mut y = x;
        for slot in t.iter_mut() {
            *slot = (y % m) as u32;
            y /= m;
        }
        if !rel.contains(&t) {
            data.extend_from_slice(&t);
        }
    }
    Ok(Relation::from_flat(k, data))
}

fn hom_csp(j: &FiniteStructure, a: &FiniteStructure, injective: bool, reflect: bool) -> Result<Csp> {
    check_same_signature(j, a)?;
    let mut csp = Csp::new();
    let vars: Vec<u32> = (0..j.size()).map(|_| csp.add_var(a.size())).collect();
    for (sym, rel) in j.signature().symbols().iter().zip(j.relations()) {
        let table = Arc::new(a.relation_by_name(&sym.name).unwrap().clone());
        let mut seen = std::collections::HashSet::new();
        for t in rel.iter() {
            if seen.insert(t.to_vec()) {
                csp.add_table(t.to_vec(), table.clone());
            }
        }
        if reflect {
            let comp = Arc::new(complement(&table, a.size(), &Caps::default())?);
            let k = sym.arity;
            let n = j.size();
            let mut t = vec![0u32; k];
            for x in 0..n.pow(k as u32) {
                let mut y = x;
                for slot in t.iter_mut() {
                    *slot = (y % n) as u32;
                    y /= n;
                }
                if !rel.contains(&t) {
                    csp.add_table(t.clone(), comp.clone());
                }
            }
        }
    }
    if injective {
        csp.set_all_different(&vars);
    }
    Ok(csp)
}

/// The lexicographically least homomorphism `j -> a`, if one exists.
pub fn find_homomorphism(j: &FiniteStructure, a: &FiniteStructure, injective: bool) -> Result<Option<HomWitness>> {
    let csp = hom_csp(j, a, injective, false)?;
    Ok(csp.solve_first().map(|map| HomWitness { map, injective }))
}

/// The lexicographically least embedding (injective, relation-reflecting).
pub fn find_embedding(j: &FiniteStructure, a: &FiniteStructure) -> Result<Option<HomWitness>> {
    if j.size() > a.size() {
        check_same_signature(j, a)?;
        return Ok(None);
    }
    let csp = hom_csp(j, a, true, true)?;
    Ok(csp.solve_first().map(|map| HomWitness { map, injective: true }))
}

/// Every homomorphism (or injective homomorphism) in lexicographic order.
pub fn all_homomorphisms(j: &FiniteStructure, a: &FiniteStructure, injective: bool) -> Result<Vec<Vec<u32>>> {
    let csp = hom_csp(j, a, injective, false)?;
    let mut out = Vec::new();
    csp.for_each_solution(|s| {
        out.push(s.to_vec());
        true
    });
    Ok(out)
}

/// All automorphisms, in lexicographic order.
pub fn enumerate_automorphisms(a: &FiniteStructure, caps: &Caps) -> Result<Vec<Vec<u32>>> {
    caps.check_domain("automorphism enumeration", a.size() as u128)?;
    let csp = hom_csp(a, a, true, true)?;
    let mut out = Vec::new();
    csp.for_each_solution(|s| {
        out.push(s.to_vec());
        true
    });
    Ok(out)
}

/// The factor of `a` by the orbits of the group generated by `gens`.
pub fn orbit_quotient_finite(a: &FiniteStructure, gens: &[Vec<u32>]) -> Result<FiniteStructure> {
    for g in gens {
        let mut sorted = g.clone();
        sorted.sort_unstable();
        if g.len() != a.size() || sorted.iter().enumerate().any(|(i, &x)| x as usize != i) {
            return Err(Error::Invalid(format!("{g:?} is not a permutation of the domain")));
        }
        for (sym, rel) in a.signature().symbols().iter().zip(a.relations()) {
            for t in rel.iter() {
                let img: Vec<u32> = t.iter().map(|&x| g[x as usize]).collect();
                if !rel.contains(&img) {
                    return Err(Error::Invalid(format!(
                        "permutation {g:?} is not an automorphism: {}{t:?} maps outside the relation",
                        sym.name
                    )));
                }
            }
        }
    }
    let pairs: Vec<(u32, u32)> = gens
        .iter()
        .flat_map(|g| g.iter().enumerate().map(|(i, &x)| (i as u32, x)))
        .collect();
    let p = crate::relcore::equivalence_closure(a.size(), &pairs);
    quotient(a, &p)
}
