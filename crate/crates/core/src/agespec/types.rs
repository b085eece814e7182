use std::collections::HashMap;

use crate::agespec::ground::visit_models;
use crate::agespec::BoundSpec;
use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::relcore::{decode_tuple, FiniteStructure, Partition, Relation, Signature};

/// Canonical form of a type: restricted-growth pattern, then relation contents.
pub type TypeKey = (Vec<u8>, Vec<Vec<u32>>);

/// A quantifier-free type of a d-tuple: which coordinates coincide, and the
/// structure induced on the distinct points (numbered by first occurrence).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DType {
    pub pattern: Vec<u8>,
    pub structure: FiniteStructure,
}

impl DType {
    pub fn key(&self) -> TypeKey {
        (self.pattern.clone(), self.structure.relation_key())
    }

    pub fn partition(&self) -> Partition {
        let labels: Vec<u32> = self.pattern.iter().map(|&c| c as u32).collect();
        Partition::from_labels(&labels)
    }

    pub fn num_classes(&self) -> usize {
        self.structure.size()
    }

    /// The representative tuple of the type inside its own structure.
    pub fn tuple(&self) -> Vec<u32> {
        self.pattern.iter().map(|&c| c as u32).collect()
    }

    /// Key of the sub-tuple at `coords` (0-based).
    pub fn project(&self, coords: &[usize]) -> TypeKey {
        let t: Vec<u32> = coords.iter().map(|&c| self.pattern[c] as u32).collect();
        tuple_type_key(&self.structure, &t)
    }
}

/// All d-types of a spec in canonical order.
#[derive(Clone, Debug)]
pub struct DTypeTable {
    d: usize,
    signature: Signature,
    types: Vec<DType>,
    index: HashMap<TypeKey, usize>,
}

impl PartialEq for DTypeTable {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.signature == other.signature && self.types == other.types
    }
}

impl DTypeTable {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn types(&self) -> &[DType] {
        &self.types
    }

    pub fn get(&self, i: usize) -> &DType {
        &self.types[i]
    }

    pub fn lookup(&self, key: &TypeKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Index of the type of `tuple` in `c`, whose relations must follow the
    /// table's signature order.
    pub fn lookup_tuple(&self, c: &FiniteStructure, tuple: &[u32]) -> Option<usize> {
        self.lookup(&tuple_type_key(c, tuple))
    }
}

/// Restricted-growth strings of length `d` in lexicographic order; these
/// index the partitions of `[d]`.
pub fn restricted_growth_patterns(d: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(d);
    fn go(d: usize, cur: &mut Vec<u8>, top: u8, out: &mut Vec<Vec<u8>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        let limit = if cur.is_empty() { 0 } else { top + 1 };
        for c in 0..=limit {
            cur.push(c);
            go(d, cur, top.max(c), out);
            cur.pop();
        }
    }
    go(d, &mut cur, 0, &mut out);
    out
}

/// All labeled members of the age on `0..m`, sorted by relation key.
pub fn enumerate_models(spec: &BoundSpec, m: usize, caps: &Caps) -> Result<Vec<FiniteStructure>> {
    let mut out = Vec::new();
    let mut over = false;
    visit_models(spec, m, &mut |rels| {
        if out.len() >= caps.types {
            over = true;
            return false;
        }
        out.push(FiniteStructure::from_relations(spec.signature.clone(), m, rels).unwrap());
        true
    });
    if over {
        return Err(Error::CapExceeded {
            what: format!("models of `{}` on {m} points", spec.name),
            required: caps.types as u128 + 1,
            allowed: caps.types,
        });
    }
    out.sort_by_key(|f| f.relation_key());
    Ok(out)
}

pub fn enumerate_d_types(spec: &BoundSpec, d: usize, caps: &Caps) -> Result<DTypeTable> {
    if d == 0 {
        return Err(Error::Invalid("d must be at least 1".into()));
    }
    let patterns = restricted_growth_patterns(d);
    let mut models: Vec<Vec<FiniteStructure>> = vec![Vec::new(); d + 1];
    let mut per_classes = vec![0u128; d + 1];
    for p in &patterns {
        per_classes[*p.iter().max().unwrap() as usize + 1] += 1;
    }
    let mut total: u128 = 0;
    for k in 1..=d {
        models[k] = enumerate_models(spec, k, caps)?;
        total += per_classes[k] * models[k].len() as u128;
        caps.check_types(&format!("{d}-types of `{}`", spec.name), total)?;
    }
    let mut types = Vec::with_capacity(total as usize);
    let mut index = HashMap::with_capacity(total as usize);
    for p in patterns {
        let k = *p.iter().max().unwrap() as usize + 1;
        for s in &models[k] {
            let t = DType { pattern: p.clone(), structure: s.clone() };
            index.insert(t.key(), types.len());
            types.push(t);
        }
    }
    Ok(DTypeTable { d, signature: spec.signature.clone(), types, index })
}

/// Canonical key of the type of `tuple` in `c`.
pub fn tuple_type_key(c: &FiniteStructure, tuple: &[u32]) -> TypeKey {
    let mut distinct: Vec<u32> = Vec::new();
    let mut pattern = Vec::with_capacity(tuple.len());
    for &x in tuple {
        let cls = match distinct.iter().position(|&y| y == x) {
            Some(i) => i,
            None => {
                distinct.push(x);
                distinct.len() - 1
            }
        };
        pattern.push(cls as u8);
    }
    let k = distinct.len();
    let rels = c
        .relations()
        .iter()
        .map(|r| {
            let ar = r.arity();
            let mut flat = Vec::new();
            if (k as u128).pow(ar as u32) <= r.len() as u128 {
                for code in 0..k.pow(ar as u32) as u32 {
                    let t = decode_tuple(code, k, ar);
                    let img: Vec<u32> = t.iter().map(|&i| distinct[i as usize]).collect();
                    if r.contains(&img) {
                        flat.extend(t);
                    }
                }
            } else {
                for t in r.iter() {
                    let pos: Option<Vec<u32>> =
                        t.iter().map(|x| distinct.iter().position(|y| y == x).map(|i| i as u32)).collect();
                    if let Some(p) = pos {
                        flat.extend(p);
                    }
                }
            }
            Relation::from_flat(ar, flat).flat().to_vec()
        })
        .collect();
    (pattern, rels)
}

/// Index of the type of `tuple` in an age member `c`.
pub fn type_of_tuple(table: &DTypeTable, spec: &BoundSpec, c: &FiniteStructure, tuple: &[u32]) -> Result<usize> {
    if tuple.len() != table.d {
        return Err(Error::Invalid(format!("tuple of length {} for a table with d = {}", tuple.len(), table.d)));
    }
    if let Some(&x) = tuple.iter().find(|&&x| x as usize >= c.size()) {
        return Err(Error::Invalid(format!("element {x} outside the structure")));
    }
    let aligned = c.aligned_to(&table.signature)?;
    if !spec.in_age(&aligned)? {
        return Err(Error::Invalid(format!("structure is not in the age of `{}`", spec.name)));
    }
    table
        .lookup_tuple(&aligned, tuple)
        .ok_or_else(|| Error::Invalid("type missing from the table; table and spec disagree".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agespec::builtin_linear_order;
    use crate::fixtures::chain;
    use std::collections::BTreeSet;

    /// Weak orders on `d` points as dense rank vectors.
    fn weak_orders(d: usize) -> usize {
        let mut seen = BTreeSet::new();
        for code in 0..d.pow(d as u32) as u32 {
            let r = decode_tuple(code, d, d);
            let mut vals: Vec<u32> = r.clone();
            vals.sort_unstable();
            vals.dedup();
            let dense: Vec<usize> = r.iter().map(|x| vals.binary_search(x).unwrap()).collect();
            seen.insert(dense);
        }
        seen.len()
    }

    #[test]
    fn ordered_bell_numbers() {
        let lin = builtin_linear_order("<");
        for d in 1..=4 {
            let t = enumerate_d_types(&lin, d, &Caps::default()).unwrap();
            assert_eq!(t.len(), weak_orders(d), "d = {d}");
        }
        assert_eq!(weak_orders(4), 75);
    }

    #[test]
    fn patterns_are_bell() {
        let counts: Vec<usize> = (1..=5).map(|d| restricted_growth_patterns(d).len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 15, 52]);
        assert_eq!(restricted_growth_patterns(2), vec![vec![0, 0], vec![0, 1]]);
    }

    #[test]
    fn chain_tuples() {
        let lin = builtin_linear_order("<");
        let t = enumerate_d_types(&lin, 2, &Caps::default()).unwrap();
        let c = chain(3);
        let ac = type_of_tuple(&t, &lin, &c, &[0, 2]).unwrap();
        let aa = type_of_tuple(&t, &lin, &c, &[0, 0]).unwrap();
        let ca = type_of_tuple(&t, &lin, &c, &[2, 0]).unwrap();
        assert_eq!(t.get(aa).pattern, vec![0, 0]);
        assert_eq!(t.get(ac).structure.relation(0).flat(), &[0, 1]);
        assert_eq!(t.get(ca).structure.relation(0).flat(), &[1, 0]);
        assert_eq!(type_of_tuple(&t, &lin, &c, &[0, 1]).unwrap(), ac);
    }

    #[test]
    fn entries_are_members_and_sorted() {
        let lin = builtin_linear_order("<");
        let t = enumerate_d_types(&lin, 4, &Caps::default()).unwrap();
        let keys: Vec<TypeKey> = t.types().iter().map(DType::key).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        for ty in t.types() {
            assert!(lin.in_age(&ty.structure).unwrap());
            assert_eq!(t.lookup(&ty.key()), t.lookup_tuple(&ty.structure, &ty.tuple()));
        }
    }

    #[test]
    fn projections_land_in_lower_tables() {
        let lin = builtin_linear_order("<");
        let t3 = enumerate_d_types(&lin, 3, &Caps::default()).unwrap();
        let t2 = enumerate_d_types(&lin, 2, &Caps::default()).unwrap();
        for ty in t3.types() {
            for coords in [[0, 1], [1, 2], [2, 0], [1, 1]] {
                assert!(t2.lookup(&ty.project(&coords)).is_some());
            }
        }
    }

    #[test]
    fn type_cap() {
        let lin = builtin_linear_order("<");
        let caps = Caps { types: 50, ..Caps::default() };
        assert!(matches!(enumerate_d_types(&lin, 4, &caps), Err(Error::CapExceeded { .. })));
        assert_eq!(enumerate_d_types(&lin, 3, &caps).unwrap().len(), 13);
    }

    #[test]
    fn deterministic() {
        let lin = builtin_linear_order("<");
        let a = enumerate_d_types(&lin, 3, &Caps::default()).unwrap();
        let b = enumerate_d_types(&lin, 3, &Caps::default()).unwrap();
        assert_eq!(a, b);
    }
}
