use std::fmt;

use crate::error::{Error, Result};
use crate::relcore::{decode_tuple, encode_tuple, FiniteStructure, Relation};

/// An `arity`-ary map from `0..domain` to `0..codomain`, tabulated on the
/// encoded argument tuples (first argument least significant).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OperationTable {
    pub arity: usize,
    pub domain: usize,
    pub codomain: usize,
    pub values: Vec<u32>,
}

impl OperationTable {
    pub fn new(arity: usize, domain: usize, codomain: usize, values: Vec<u32>) -> Result<OperationTable> {
        if arity == 0 {
            return Err(Error::Invalid("operations have arity at least 1".into()));
        }
        if values.len() as u128 != crate::caps::pow_u128(domain, arity) {
            return Err(Error::Invalid(format!(
                "{} values for an {arity}-ary operation on {domain} elements",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v as usize >= codomain) {
            return Err(Error::Invalid(format!("value {v} outside 0..{codomain}")));
        }
        Ok(OperationTable { arity, domain, codomain, values })
    }

    /// An operation on `0..m` given by a function of its arguments.
    pub fn from_fn(arity: usize, m: usize, f: impl Fn(&[u32]) -> u32) -> OperationTable {
        let values = (0..m.pow(arity as u32) as u32).map(|x| f(&decode_tuple(x, m, arity))).collect();
        OperationTable { arity, domain: m, codomain: m, values }
    }

    pub fn projection(arity: usize, m: usize, i: usize) -> OperationTable {
        OperationTable::from_fn(arity, m, |a| a[i])
    }

    pub fn apply(&self, args: &[u32]) -> u32 {
        self.values[encode_tuple(args, self.domain) as usize]
    }
}

impl fmt::Display for OperationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "op arity={} domain={}", self.arity, self.domain)?;
        if self.codomain != self.domain {
            write!(f, " codomain={}", self.codomain)?;
        }
        for (i, v) in self.values.iter().enumerate() {
            f.write_str(if i % 32 == 0 { "\n" } else { " " })?;
            write!(f, "{v}")?;
        }
        writeln!(f)
    }
}

/// Height-1 identity systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IdentityKind {
    None,
    /// `f(x1, ..., xn) = f(x2, ..., xn, x1)`.
    Cyclic(usize),
    /// `f(x, y) = f(y, x)`.
    Commutative,
    /// `s(x,y,z,x,y,z) = s(y,z,x,z,x,y)`.
    Siggers,
    /// `f(y,x,x,x,y,y) = f(x,y,x,y,x,y) = f(x,x,y,y,y,x)`.
    Olsak,
}

impl IdentityKind {
    /// The arity the identities are stated for, if fixed.
    pub fn arity(self) -> Option<usize> {
        match self {
            IdentityKind::None => None,
            IdentityKind::Cyclic(n) => Some(n),
            IdentityKind::Commutative => Some(2),
            IdentityKind::Siggers | IdentityKind::Olsak => Some(6),
        }
    }

    pub fn check_arity(self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::Invalid("arity must be at least 1".into()));
        }
        if let IdentityKind::Cyclic(k) = self {
            if k < 2 {
                return Err(Error::Invalid("cyclic identities need arity at least 2".into()));
            }
        }
        match self.arity() {
            Some(k) if k != n => Err(Error::Invalid(format!("{self:?} has arity {k}, not {n}"))),
            _ => Ok(()),
        }
    }

    /// The identities as maps between argument tuples over `0..m`: one group
    /// per identity, each pair `(a, b)` asking for `f(a) = f(b)`. Within a
    /// group, `a` determines `b`.
    pub(crate) fn identity_groups(self, m: usize) -> Vec<Vec<(Vec<u32>, Vec<u32>)>> {
        let m = m as u32;
        match self {
            IdentityKind::None => Vec::new(),
            IdentityKind::Cyclic(_) | IdentityKind::Commutative => {
                let n = self.arity().unwrap();
                let group = (0..m.pow(n as u32))
                    .map(|code| {
                        let t = decode_tuple(code, m as usize, n);
                        let mut r = t.clone();
                        r.rotate_left(1);
                        (t, r)
                    })
                    .collect();
                vec![group]
            }
            IdentityKind::Siggers => {
                let mut g = Vec::new();
                for x in 0..m {
                    for y in 0..m {
                        for z in 0..m {
                            g.push((vec![x, y, z, x, y, z], vec![y, z, x, z, x, y]));
                        }
                    }
                }
                vec![g]
            }
            IdentityKind::Olsak => {
                let (mut g1, mut g2) = (Vec::new(), Vec::new());
                for x in 0..m {
                    for y in 0..m {
                        g1.push((vec![y, x, x, x, y, y], vec![x, y, x, y, x, y]));
                        g2.push((vec![x, y, x, y, x, y], vec![x, x, y, y, y, x]));
                    }
                }
                vec![g1, g2]
            }
        }
    }

    pub(crate) fn equations(self, m: usize) -> Vec<(Vec<u32>, Vec<u32>)> {
        self.identity_groups(m).into_iter().flatten().collect()
    }
}

/// Pointwise check of the identities.
pub fn satisfies_identity(f: &OperationTable, kind: IdentityKind) -> Result<bool> {
    if kind == IdentityKind::None {
        return Ok(true);
    }
    if kind.check_arity(f.arity).is_err() {
        return Ok(false);
    }
    Ok(kind.equations(f.domain).iter().all(|(a, b)| f.apply(a) == f.apply(b)))
}

/// Does `f` map every `S1`-relation, applied coordinatewise to `arity`
/// tuples, into the matching `S2`-relation?
pub fn preserves(f: &OperationTable, s1: &FiniteStructure, s2: &FiniteStructure) -> Result<bool> {
    if f.domain != s1.size() || f.codomain != s2.size() {
        return Err(Error::Invalid(format!(
            "operation {}->{} against structures of sizes {} and {}",
            f.domain,
            f.codomain,
            s1.size(),
            s2.size()
        )));
    }
    crate::relcore::hom::check_same_signature(s1, s2)?;
    for (r1, sym) in s1.relations().iter().zip(s1.signature().symbols()) {
        let r2 = s2.relation_by_name(&sym.name).unwrap();
        if !preserves_relation(f, r1, r2) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn preserves_relation(f: &OperationTable, r1: &Relation, r2: &Relation) -> bool {
    let n = f.arity;
    let k = r1.arity();
    if r1.is_empty() {
        return true;
    }
    let mut idx = vec![0usize; n];
    let mut args = vec![0u32; n];
    let mut image = vec![0u32; k];
    loop {
        for (j, slot) in image.iter_mut().enumerate() {
            for i in 0..n {
                args[i] = r1.get(idx[i])[j];
            }
            *slot = f.apply(&args);
        }
        if !r2.contains(&image) {
            return false;
        }
        let mut i = 0;
        loop {
            if i == n {
                return true;
            }
            idx[i] += 1;
            if idx[i] < r1.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Coordinates on which `f` depends.
pub fn essential_coordinates(f: &OperationTable) -> Vec<usize> {
    let m = f.domain as u32;
    (0..f.arity)
        .filter(|&i| {
            (0..f.values.len() as u32).any(|x| {
                let mut t = decode_tuple(x, f.domain, f.arity);
                let v = f.apply(&t);
                (0..m).any(|a| {
                    t[i] = a;
                    f.apply(&t) != v
                })
            })
        })
        .collect()
}

/// Injective after dropping dummy coordinates. An operation with no
/// essential coordinate is a constant, which counts as injective on the
/// one-point power.
pub fn check_essentially_injective(f: &OperationTable) -> bool {
    let ess = essential_coordinates(f);
    let mut seen: Vec<Option<Vec<u32>>> = vec![None; f.codomain];
    for x in 0..f.values.len() as u32 {
        let t = decode_tuple(x, f.domain, f.arity);
        let key: Vec<u32> = ess.iter().map(|&i| t[i]).collect();
        let v = f.values[x as usize] as usize;
        match &seen[v] {
            Some(k) if *k != key => return false,
            Some(_) => {}
            None => seen[v] = Some(key),
        }
    }
    true
}

/// Does `f` preserve `I4 = {(x,y,u,v) | x = y ⇒ u = v}` on its domain?
pub fn preserves_i4(f: &OperationTable) -> bool {
    if f.domain != f.codomain {
        return false;
    }
    let i4 = crate::construct::i4_relation(f.domain);
    preserves_relation(f, &i4, &i4)
}

/// For `f` on a linearly ordered domain and strictly increasing `a1`, `a2`
/// with `a1 ∘ f = a2 ∘ f ∘ rotation`: reports whether `f` is cyclic.
pub fn pseudo_cyclic_collapse_check(f: &OperationTable, a1: &[u32], a2: &[u32]) -> Result<bool> {
    if f.arity < 2 {
        return Err(Error::Invalid("cyclic identities need arity at least 2".into()));
    }
    for (name, a) in [("a1", a1), ("a2", a2)] {
        if a.len() != f.codomain {
            return Err(Error::Invalid(format!("{name} has {} entries, expected {}", a.len(), f.codomain)));
        }
        if let Some(i) = (1..a.len()).find(|&i| a[i - 1] >= a[i]) {
            return Err(Error::Invalid(format!("{name} is not strictly increasing at {}", i - 1)));
        }
    }
    for x in 0..f.values.len() as u32 {
        let t = decode_tuple(x, f.domain, f.arity);
        let mut r = t.clone();
        r.rotate_left(1);
        if a1[f.apply(&t) as usize] != a2[f.apply(&r) as usize] {
            return Err(Error::Invalid(format!("precondition fails at {t:?}")));
        }
    }
    satisfies_identity(f, IdentityKind::Cyclic(f.arity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{chain, parity_a1};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn preserves_examples() {
        let min = OperationTable::from_fn(2, 3, |a| a[0].min(a[1]));
        assert!(preserves(&min, &chain(3), &chain(3)).unwrap());
        for s in [chain(3), crate::fixtures::clique(3), parity_a1()] {
            let p = OperationTable::projection(2, s.size(), 0);
            assert!(preserves(&p, &s, &s).unwrap());
        }
        let zero = OperationTable::from_fn(1, 2, |_| 0);
        assert!(!preserves(&zero, &parity_a1(), &parity_a1()).unwrap());
        assert!(preserves(&zero, &chain(3), &chain(3)).is_err());
    }

    #[test]
    fn identity_examples() {
        let sum = OperationTable::from_fn(3, 2, |a| (a[0] + a[1] + a[2]) % 2);
        assert!(satisfies_identity(&sum, IdentityKind::Cyclic(3)).unwrap());
        let p = OperationTable::projection(2, 3, 0);
        assert!(!satisfies_identity(&p, IdentityKind::Commutative).unwrap());
        let id = OperationTable::from_fn(1, 3, |a| a[0]);
        assert!(!satisfies_identity(&id, IdentityKind::Cyclic(2)).unwrap());
        assert!(IdentityKind::Cyclic(1).check_arity(1).is_err());
        // Siggers and Olšák hold for the majority-free "constant" and fail for projections.
        let c = OperationTable::from_fn(6, 2, |_| 1);
        assert!(satisfies_identity(&c, IdentityKind::Siggers).unwrap());
        assert!(satisfies_identity(&c, IdentityKind::Olsak).unwrap());
        let p6 = OperationTable::projection(6, 2, 0);
        assert!(!satisfies_identity(&p6, IdentityKind::Siggers).unwrap());
        assert!(!satisfies_identity(&p6, IdentityKind::Olsak).unwrap());
    }

    #[test]
    fn essential_injectivity_examples() {
        assert!(check_essentially_injective(&OperationTable::from_fn(1, 3, |a| a[0])));
        let p = OperationTable::projection(2, 3, 0);
        assert!(check_essentially_injective(&p));
        assert!(preserves_i4(&p));
        let min = OperationTable::from_fn(2, 3, |a| a[0].min(a[1]));
        assert!(!check_essentially_injective(&min));
        assert!(!preserves_i4(&min));
        let c = OperationTable::from_fn(2, 3, |_| 2);
        assert_eq!(essential_coordinates(&c), Vec::<usize>::new());
        assert!(check_essentially_injective(&c) && preserves_i4(&c));
    }

    #[test]
    fn injectivity_iff_i4_on_random_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3000 {
            let values: Vec<u32> = (0..9).map(|_| rng.gen_range(0..3)).collect();
            let f = OperationTable::new(2, 3, 3, values).unwrap();
            assert_eq!(check_essentially_injective(&f), preserves_i4(&f), "{f:?}");
        }
    }

    #[test]
    fn collapse_examples() {
        let min = OperationTable::from_fn(2, 4, |a| a[0].min(a[1]));
        let id: Vec<u32> = (0..4).collect();
        assert!(pseudo_cyclic_collapse_check(&min, &id, &id).unwrap());
        let p = OperationTable::projection(2, 4, 0);
        assert!(pseudo_cyclic_collapse_check(&p, &id, &id).is_err());
        assert!(pseudo_cyclic_collapse_check(&min, &[0, 0, 1, 2], &id).is_err());
    }

    #[test]
    fn collapse_on_random_monotone_pairs() {
        // Any f passing the precondition is cyclic: a1(f(x)) = a2(f(rot x))
        // around a full rotation forces a cycle of strict inequalities
        // unless every step is an equality.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut passed = 0;
        for _ in 0..1000 {
            let shift = rng.gen_range(0..2u32);
            let a1: Vec<u32> = (0..4).map(|i| 3 * i + shift).collect();
            let a2: Vec<u32> = (0..4).map(|i| 3 * i + rng.gen_range(0..2u32).min(shift)).collect();
            let g: Vec<u32> = (0..16).map(|_| rng.gen_range(0..4)).collect();
            // Symmetrize half of the samples so the precondition can hold.
            let f = if rng.gen_bool(0.5) {
                OperationTable::from_fn(2, 4, |a| g[(4 * a[0].min(a[1]) + a[0].max(a[1])) as usize])
            } else {
                OperationTable::new(2, 4, 4, g).unwrap()
            };
            if let Ok(c) = pseudo_cyclic_collapse_check(&f, &a1, &a2) {
                assert!(c);
                passed += 1;
            }
        }
        assert!(passed > 0);
    }
}
