use std::collections::HashSet;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;

use crate::caps::{pow_u128, Caps};
use crate::error::{Error, Result};
use crate::polyfind::{preserves, satisfies_identity, IdentityKind, OperationTable};
use crate::relcore::hom::check_same_signature;
use crate::relcore::search::Csp;
use crate::relcore::{decode_tuple, encode_tuple, FiniteStructure};

/// Classes of argument tuples over `0..m` forced equal by `kind`, as a class
/// index per encoded tuple. Classes are numbered in lexicographic order of
/// their least member read from the first argument; for cyclic identities
/// these are the necklaces.
pub fn identity_classes(m: usize, n: usize, kind: IdentityKind) -> Result<(Vec<u32>, usize)> {
    kind.check_arity(n)?;
    let size = m.pow(n as u32);
    let mut uf: UnionFind<u32> = UnionFind::new(size);
    for (a, b) in kind.equations(m) {
        uf.union(encode_tuple(&a, m), encode_tuple(&b, m));
    }
    // Visit tuples in lexicographic order (first argument most significant).
    let mut class = vec![u32::MAX; size];
    let mut root_class = vec![u32::MAX; size];
    let mut count = 0u32;
    for lex in 0..size as u32 {
        let mut t = decode_tuple(lex, m, n);
        t.reverse();
        let x = encode_tuple(&t, m) as usize;
        let r = uf.find(x as u32) as usize;
        if root_class[r] == u32::MAX {
            root_class[r] = count;
            count += 1;
        }
        class[x] = root_class[r];
    }
    Ok((class, count as usize))
}

fn build_csp(s1: &FiniteStructure, s2: &FiniteStructure, n: usize, class: &[u32], classes: usize, caps: &Caps) -> Result<Csp> {
    let m = s1.size();
    let mut csp = Csp::new();
    for _ in 0..classes {
        csp.add_var(s2.size());
    }
    let mut seen: HashSet<(usize, Vec<u32>)> = HashSet::new();
    let mut total = 0u128;
    for (ri, r1) in s1.relations().iter().enumerate() {
        let name = &s1.signature().symbol(ri).name;
        let r2 = Arc::new(s2.relation_by_name(name).unwrap().clone());
        if r1.is_empty() {
            continue;
        }
        total += pow_u128(r1.len(), n);
        caps.check_tuples("polymorphism constraints", total)?;
        let k = r1.arity();
        let mut idx = vec![0usize; n];
        let mut args = vec![0u32; n];
        loop {
            let scope: Vec<u32> = (0..k)
                .map(|j| {
                    for i in 0..n {
                        args[i] = r1.get(idx[i])[j];
                    }
                    class[encode_tuple(&args, m) as usize]
                })
                .collect();
            if seen.insert((ri, scope.clone())) {
                csp.add_table(scope, r2.clone());
            }
            let mut i = 0;
            while i < n {
                idx[i] += 1;
                if idx[i] < r1.len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    Ok(csp)
}

fn check_inputs(s1: &FiniteStructure, s2: &FiniteStructure, n: usize, caps: &Caps) -> Result<()> {
    check_same_signature(s1, s2)?;
    if n == 0 {
        return Err(Error::Invalid("arity must be at least 1".into()));
    }
    caps.check_domain("polymorphism domain", pow_u128(s1.size(), n))
}

/// The least `n`-ary `f: S1^n → S2` preserving all relations and satisfying
/// `kind`. The search variables are the identity classes of argument tuples.
pub fn find_polymorphism(
    s1: &FiniteStructure,
    s2: &FiniteStructure,
    n: usize,
    kind: IdentityKind,
    caps: &Caps,
) -> Result<Option<OperationTable>> {
    check_inputs(s1, s2, n, caps)?;
    let (class, classes) = identity_classes(s1.size(), n, kind)?;
    caps.check_search_vars("polymorphism search", classes as u128)?;
    let csp = build_csp(s1, s2, n, &class, classes, caps)?;
    let Some(sol) = csp.solve_first() else { return Ok(None) };
    let values = class.iter().map(|&c| sol[c as usize]).collect();
    let f = OperationTable::new(n, s1.size(), s2.size(), values)?;
    if !preserves(&f, s1, s2)? || !satisfies_identity(&f, kind)? {
        return Err(Error::Invalid("polymorphism search returned an invalid table".into()));
    }
    Ok(Some(f))
}

/// Same answer as [`find_polymorphism`], computed by enumerating all
/// polymorphisms without identifying tuples and filtering by `kind`.
pub fn find_polymorphism_unreduced(
    s1: &FiniteStructure,
    s2: &FiniteStructure,
    n: usize,
    kind: IdentityKind,
    caps: &Caps,
) -> Result<Option<OperationTable>> {
    check_inputs(s1, s2, n, caps)?;
    kind.check_arity(n)?;
    let size = s1.size().pow(n as u32);
    caps.check_search_vars("polymorphism search", size as u128)?;
    // One variable per tuple, in lexicographic order, so the first match is
    // the least table in the same order `find_polymorphism` uses.
    let (class, _) = identity_classes(s1.size(), n, IdentityKind::None)?;
    let csp = build_csp(s1, s2, n, &class, size, caps)?;
    let mut found = None;
    csp.for_each_solution(|sol| {
        let values = class.iter().map(|&c| sol[c as usize]).collect();
        let f = OperationTable::new(n, s1.size(), s2.size(), values).unwrap();
        if satisfies_identity(&f, kind).unwrap() {
            found = Some(f);
            return false;
        }
        true
    });
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{chain, clique, directed_cycle, parity_a1};
    use crate::relcore::{Relation, Signature};

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn necklace_counts() {
        // Binary necklaces of length 3 over 3 colours: (27 + 2*3) / 3 = 11.
        assert_eq!(identity_classes(3, 3, IdentityKind::Cyclic(3)).unwrap().1, 11);
        assert_eq!(identity_classes(3, 2, IdentityKind::Commutative).unwrap().1, 6);
        assert_eq!(identity_classes(2, 4, IdentityKind::None).unwrap().1, 16);
        // Classes are numbered by least member in lexicographic order.
        let (class, _) = identity_classes(2, 2, IdentityKind::None).unwrap();
        assert_eq!(class[encode_tuple(&[0, 1], 2) as usize], 1);
    }

    #[test]
    fn clique_has_no_commutative_or_cyclic_polymorphism() {
        let k3 = clique(3);
        assert!(find_polymorphism(&k3, &k3, 2, IdentityKind::Commutative, &caps()).unwrap().is_none());
        assert!(find_polymorphism(&k3, &k3, 3, IdentityKind::Cyclic(3), &caps()).unwrap().is_none());
        // Exhaustive over all symmetric tables.
        let mut any = false;
        for code in 0..729u32 {
            let v = decode_tuple(code, 3, 6);
            let unordered = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
            let f = OperationTable::from_fn(2, 3, |x| {
                let key = (x[0].min(x[1]), x[0].max(x[1]));
                v[unordered.iter().position(|&p| p == key).unwrap()]
            });
            any |= preserves(&f, &k3, &k3).unwrap();
        }
        assert!(!any);
    }

    #[test]
    fn positive_examples() {
        let a1 = parity_a1();
        let f = find_polymorphism(&a1, &a1, 3, IdentityKind::Cyclic(3), &caps()).unwrap().unwrap();
        assert!(preserves(&f, &a1, &a1).unwrap());
        let sum = OperationTable::from_fn(3, 2, |a| (a[0] + a[1] + a[2]) % 2);
        assert!(preserves(&sum, &a1, &a1).unwrap());
        let c3 = chain(3);
        let f = find_polymorphism(&c3, &c3, 2, IdentityKind::Commutative, &caps()).unwrap().unwrap();
        assert!(satisfies_identity(&f, IdentityKind::Commutative).unwrap());
        let f = find_polymorphism(&c3, &c3, 2, IdentityKind::Siggers, &caps());
        assert!(f.is_err());
        let c2 = chain(2);
        let f = find_polymorphism(&c2, &c2, 6, IdentityKind::Siggers, &caps()).unwrap().unwrap();
        assert!(satisfies_identity(&f, IdentityKind::Siggers).unwrap());
        let f = find_polymorphism(&c2, &c2, 6, IdentityKind::Olsak, &caps()).unwrap().unwrap();
        assert!(satisfies_identity(&f, IdentityKind::Olsak).unwrap());
        assert!(find_polymorphism(&clique(3), &clique(3), 6, IdentityKind::Siggers, &caps()).unwrap().is_none());
    }

    #[test]
    fn pair_polymorphisms() {
        // Every map K3^2 -> K4 given by a 4-colouring of K3^2 exists; none into K2.
        let k3 = clique(3);
        assert!(find_polymorphism(&k3, &clique(4), 2, IdentityKind::None, &caps()).unwrap().is_some());
        assert!(find_polymorphism(&k3, &clique(2), 1, IdentityKind::None, &caps()).unwrap().is_none());
        assert!(find_polymorphism(&k3, &parity_a1(), 1, IdentityKind::None, &caps()).is_err());
    }

    fn binary_structures(m: usize) -> Vec<FiniteStructure> {
        let sig = Signature::new([("R", 2)]).unwrap();
        let pairs: Vec<[u32; 2]> = (0..m as u32).flat_map(|a| (0..m as u32).map(move |b| [a, b])).collect();
        (0..1u32 << pairs.len())
            .map(|mask| {
                let rel = Relation::from_tuples(2, pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p));
                FiniteStructure::from_relations(sig.clone(), m, vec![rel]).unwrap()
            })
            .collect()
    }

    #[test]
    fn necklace_reduction_is_lossless() {
        let mut checked = 0;
        for m in 1..=2 {
            for s in binary_structures(m) {
                for n in 2..=3 {
                    let kind = IdentityKind::Cyclic(n);
                    let a = find_polymorphism(&s, &s, n, kind, &caps()).unwrap();
                    let b = find_polymorphism_unreduced(&s, &s, n, kind, &caps()).unwrap();
                    assert_eq!(a, b, "{s:?} n={n}");
                    checked += 1;
                }
            }
        }
        assert_eq!(checked, 2 * (2 + 16));
        let c3 = directed_cycle(3);
        assert!(find_polymorphism(&c3, &c3, 3, IdentityKind::Cyclic(3), &caps()).unwrap().is_none());
    }

    #[test]
    fn caps_are_enforced() {
        let c = Caps { search_vars: 5, ..Caps::default() };
        let r = find_polymorphism(&chain(3), &chain(3), 2, IdentityKind::None, &c);
        assert!(matches!(r, Err(Error::CapExceeded { .. })));
    }
}
