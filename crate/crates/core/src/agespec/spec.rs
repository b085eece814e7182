use std::collections::BTreeSet;

use crate::agespec::{Clause, Literal};
use crate::caps::{pow_u128, Caps};
use crate::error::{Error, Result};
use crate::relcore::{find_embedding, induced_substructure, FiniteStructure, Relation, Signature, StructureBuilder};

/// A hereditary class of finite structures given by universal clauses
/// and/or forbidden substructures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundSpec {
    pub name: String,
    pub signature: Signature,
    pub clauses: Vec<Clause>,
    pub forbidden: Option<Vec<FiniteStructure>>,
    pub max_bound_size: usize,
}

impl BoundSpec {
    pub fn new(
        name: impl Into<String>,
        signature: Signature,
        clauses: Vec<Clause>,
        forbidden: Option<Vec<FiniteStructure>>,
        max_bound_size: usize,
    ) -> Result<BoundSpec> {
        let name = name.into();
        for c in &clauses {
            c.validate(&signature)?;
            if c.variable_count > max_bound_size {
                return Err(Error::Invalid(format!(
                    "spec `{name}`: clause with {} variables exceeds max_bound_size {max_bound_size}",
                    c.variable_count
                )));
            }
        }
        if let Some(f) = &forbidden {
            for b in f {
                if let Some(m) = b.signature().mismatch(&signature) {
                    return Err(Error::SignatureMismatch(format!("forbidden structure: {m}")));
                }
                if b.size() > max_bound_size {
                    return Err(Error::Invalid(format!(
                        "spec `{name}`: forbidden structure of size {} exceeds max_bound_size {max_bound_size}",
                        b.size()
                    )));
                }
                if b.size() == 0 {
                    return Err(Error::Invalid("the empty structure cannot be a bound".into()));
                }
            }
        }
        Ok(BoundSpec { name, signature, clauses, forbidden, max_bound_size })
    }

    /// A clause-only spec whose bound size is the largest clause.
    pub fn from_clauses(name: impl Into<String>, signature: Signature, clauses: Vec<Clause>) -> Result<BoundSpec> {
        let mbs = clauses.iter().map(|c| c.variable_count).max().unwrap_or(1).max(1);
        BoundSpec::new(name, signature, clauses, None, mbs)
    }

    /// Clauses equivalent to the whole spec: the clause backend plus one
    /// clause per forbidden structure stating that it does not embed.
    pub fn clause_form(&self) -> Vec<Clause> {
        let mut out = self.clauses.clone();
        for b in self.forbidden.iter().flatten() {
            out.push(diagram_clause(b, &self.signature));
        }
        out
    }

    /// Largest clause size.
    pub fn max_clause_size(&self) -> usize {
        self.clause_form().iter().map(|c| c.variable_count).max().unwrap_or(0)
    }

    fn relations_of<'a>(&self, f: &'a FiniteStructure) -> Result<Vec<&'a Relation>> {
        if let Some(m) = self.signature.mismatch(f.signature()) {
            return Err(Error::SignatureMismatch(m));
        }
        Ok(self.signature.names().map(|n| f.relation_by_name(n).unwrap()).collect())
    }

    pub fn in_age_clauses(&self, f: &FiniteStructure) -> Result<bool> {
        let rels = self.relations_of(f)?;
        Ok(self.clauses.iter().all(|c| c.find_violation(&rels, f.size()).is_none()))
    }

    pub fn in_age_forbidden(&self, f: &FiniteStructure) -> Result<bool> {
        self.relations_of(f)?;
        for b in self.forbidden.iter().flatten() {
            if find_embedding(&b.aligned_to(f.signature())?, f)?.is_some() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Age membership; with both backends present their verdicts must agree.
    pub fn in_age(&self, f: &FiniteStructure) -> Result<bool> {
        let by_clauses = self.in_age_clauses(f)?;
        if self.forbidden.is_none() {
            return Ok(by_clauses);
        }
        let by_bounds = self.in_age_forbidden(f)?;
        if !self.clauses.is_empty() && by_clauses != by_bounds {
            return Err(Error::Invalid(format!(
                "spec `{}`: clause and bound backends disagree ({by_clauses} vs {by_bounds})",
                self.name
            )));
        }
        Ok(by_clauses && by_bounds)
    }

    /// Index of `name` in the signature.
    pub fn symbol(&self, name: &str) -> Result<usize> {
        self.signature
            .index_of(name)
            .ok_or_else(|| Error::SignatureMismatch(format!("spec `{}` has no symbol `{name}`", self.name)))
    }
}

/// The clause "the structure `b` does not embed".
fn diagram_clause(b: &FiniteStructure, sig: &Signature) -> Clause {
    let k = b.size();
    let mut lits = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            lits.push(Literal::eq(true, i, j));
        }
    }
    for (si, sym) in sig.symbols().iter().enumerate() {
        let rel = b.relation_by_name(&sym.name).unwrap();
        for t in all_tuples(k, sym.arity) {
            let tu: Vec<u32> = t.iter().map(|&x| x as u32).collect();
            lits.push(Literal::rel(!rel.contains(&tu), si, &t));
        }
    }
    Clause { variable_count: k, literals: lits }
}

pub(crate) fn all_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let total = n.pow(k as u32);
    for x in 0..total {
        let mut y = x;
        let mut t = vec![0usize; k];
        for slot in t.iter_mut().rev() {
            *slot = y % n;
            y /= n;
        }
        out.push(t);
    }
    out
}

/// Irreflexivity, totality and transitivity of a binary symbol.
pub fn builtin_linear_order(symbol_name: &str) -> BoundSpec {
    let sig = Signature::new([(symbol_name, 2)]).expect("valid symbol name");
    let clauses = vec![
        Clause::new(1, vec![Literal::rel(false, 0, &[0, 0])]).unwrap(),
        Clause::new(
            2,
            vec![Literal::rel(true, 0, &[0, 1]), Literal::eq(true, 0, 1), Literal::rel(true, 0, &[1, 0])],
        )
        .unwrap(),
        Clause::new(
            3,
            vec![
                Literal::rel(false, 0, &[0, 1]),
                Literal::rel(false, 0, &[1, 2]),
                Literal::rel(true, 0, &[0, 2]),
            ],
        )
        .unwrap(),
    ];
    BoundSpec::new(format!("linear_order({symbol_name})"), sig, clauses, None, 3).unwrap()
}

/// All structures on `0..k` over `sig`, as a lazily decoded bitmask range.
fn structure_from_mask(sig: &Signature, k: usize, mut mask: u64) -> FiniteStructure {
    let mut b = StructureBuilder::new(sig.clone(), k);
    for (si, sym) in sig.symbols().iter().enumerate() {
        for t in all_tuples(k, sym.arity) {
            if mask & 1 == 1 {
                let tu: Vec<u32> = t.iter().map(|&x| x as u32).collect();
                b.add(si, &tu);
            }
            mask >>= 1;
        }
    }
    b.build()
}

/// The isomorphism-invariant form: least relation key over all relabellings.
pub(crate) fn canonical_copy(f: &FiniteStructure) -> FiniteStructure {
    let n = f.size();
    let mut perm: Vec<u32> = (0..n as u32).collect();
    let mut best: Option<FiniteStructure> = None;
    loop {
        let relabelled = relabel(f, &perm);
        if best.as_ref().is_none_or(|b| relabelled.relation_key() < b.relation_key()) {
            best = Some(relabelled);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.unwrap()
}

pub(crate) fn relabel(f: &FiniteStructure, perm: &[u32]) -> FiniteStructure {
    let rels = f
        .relations()
        .iter()
        .map(|r| Relation::from_flat(r.arity(), r.flat().iter().map(|&x| perm[x as usize]).collect()))
        .collect();
    FiniteStructure::from_relations(f.signature().clone(), f.size(), rels).unwrap()
}

pub(crate) fn next_permutation(p: &mut [u32]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Minimal structures of size at most `max_size` outside the age, one per
/// isomorphism type, ordered by size and then canonical relation key.
pub fn forbidden_bounds(spec: &BoundSpec, max_size: usize, caps: &Caps) -> Result<Vec<FiniteStructure>> {
    if max_size < spec.max_bound_size {
        return Err(Error::Invalid(format!(
            "max_size {max_size} is below the spec's bound size {}",
            spec.max_bound_size
        )));
    }
    let mut volume: u128 = 0;
    for k in 1..=max_size {
        let atoms: usize = spec.signature.symbols().iter().map(|s| k.pow(s.arity as u32)).sum();
        if atoms >= 64 {
            volume = u128::MAX;
        } else {
            volume = volume.saturating_add(pow_u128(2, atoms));
        }
    }
    caps.check_tuples("bound enumeration volume", volume)?;
    let mut found: BTreeSet<(usize, Vec<Vec<u32>>)> = BTreeSet::new();
    let mut out = Vec::new();
    for k in 1..=max_size {
        let atoms: usize = spec.signature.symbols().iter().map(|s| k.pow(s.arity as u32)).sum();
        for mask in 0..(1u64 << atoms) {
            let f = structure_from_mask(&spec.signature, k, mask);
            if spec.in_age(&f)? {
                continue;
            }
            let mut minimal = true;
            for drop in 0..k as u32 {
                let rest: Vec<u32> = (0..k as u32).filter(|&x| x != drop).collect();
                if !spec.in_age(&induced_substructure(&f, &rest)?)? {
                    minimal = false;
                    break;
                }
            }
            if minimal {
                let c = canonical_copy(&f);
                if found.insert((k, c.relation_key())) {
                    out.push(c);
                }
            }
        }
    }
    out.sort_by_key(|a| (a.size(), a.relation_key()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{chain, directed_cycle};

    fn lin() -> BoundSpec {
        builtin_linear_order("<")
    }

    #[test]
    fn membership_examples() {
        assert!(lin().in_age(&chain(2)).unwrap());
        assert!(!lin().in_age(&directed_cycle(3)).unwrap());
        let mut b = StructureBuilder::new(lin().signature.clone(), 1);
        b.add(0, &[0, 0]);
        assert!(!lin().in_age(&b.build()).unwrap());
        assert!(lin().in_age(&FiniteStructure::empty(lin().signature.clone(), 0)).unwrap());
    }

    #[test]
    fn labeled_members_by_size() {
        // Oracle: a labelled structure is in the age iff it is a strict total
        // order, i.e. one of the n! permutations' orders.
        let sig = lin().signature.clone();
        let count = |k: usize| {
            (0..1u64 << (k * k))
                .filter(|&m| lin().in_age(&structure_from_mask(&sig, k, m)).unwrap())
                .count()
        };
        assert_eq!(count(2), 2);
        assert_eq!(count(3), 6);
    }

    #[test]
    fn linear_order_bounds() {
        let b = forbidden_bounds(&lin(), 3, &Caps::default()).unwrap();
        let sizes: Vec<usize> = b.iter().map(|f| f.size()).collect();
        assert_eq!(sizes, vec![1, 2, 2, 3]);
        // The loop, the 2-antichain, the 2-cycle, the directed 3-cycle.
        assert_eq!(b[0].relation(0).len(), 1);
        assert!(b.iter().any(|f| f.size() == 2 && f.relation(0).is_empty()));
        assert!(b.iter().any(|f| f.size() == 2 && f.relation(0).len() == 2));
        assert_eq!(canonical_copy(&directed_cycle(3)), b[3]);
    }

    #[test]
    fn bounds_characterize_age() {
        let spec = lin();
        let bounds = forbidden_bounds(&spec, 3, &Caps::default()).unwrap();
        let both = BoundSpec::new("both", spec.signature.clone(), spec.clauses.clone(), Some(bounds.clone()), 3).unwrap();
        let only_bounds = BoundSpec::new("bounds", spec.signature.clone(), vec![], Some(bounds), 3).unwrap();
        for k in 0..=4usize {
            for m in 0..1u64 << (k * k) {
                let f = structure_from_mask(&spec.signature, k, m);
                let a = spec.in_age(&f).unwrap();
                assert_eq!(a, only_bounds.in_age(&f).unwrap(), "{f:?}");
                assert_eq!(a, both.in_age(&f).unwrap());
            }
        }
    }

    #[test]
    fn empty_clause_list_has_no_bounds() {
        let spec = BoundSpec::new("free", lin().signature.clone(), vec![], None, 2).unwrap();
        assert!(forbidden_bounds(&spec, 2, &Caps::default()).unwrap().is_empty());
    }

    #[test]
    fn diagram_clauses_match_embedding() {
        let spec = lin();
        let bounds = forbidden_bounds(&spec, 3, &Caps::default()).unwrap();
        let via_clauses =
            BoundSpec::from_clauses("d", spec.signature.clone(), BoundSpec::new("b", spec.signature.clone(), vec![], Some(bounds), 3).unwrap().clause_form()).unwrap();
        for k in 0..=3usize {
            for m in 0..1u64 << (k * k) {
                let f = structure_from_mask(&spec.signature, k, m);
                assert_eq!(spec.in_age(&f).unwrap(), via_clauses.in_age(&f).unwrap());
            }
        }
    }

    #[test]
    fn hereditary_up_to_four() {
        let spec = lin();
        for k in 1..=4usize {
            for m in 0..1u64 << (k * k) {
                let f = structure_from_mask(&spec.signature, k, m);
                if !spec.in_age(&f).unwrap() {
                    continue;
                }
                for sub in 0..1u32 << k {
                    let keep: Vec<u32> = (0..k as u32).filter(|i| sub >> i & 1 == 1).collect();
                    assert!(spec.in_age(&induced_substructure(&f, &keep).unwrap()).unwrap());
                }
            }
        }
    }

    #[test]
    fn cap_on_enumeration_volume() {
        let caps = Caps { tuples: 100, ..Caps::default() };
        assert!(matches!(forbidden_bounds(&lin(), 3, &caps), Err(Error::CapExceeded { .. })));
    }
}
