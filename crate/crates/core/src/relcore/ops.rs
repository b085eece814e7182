use crate::caps::{pow_u128, Caps};
use crate::error::{Error, Result};
use crate::relcore::{FiniteStructure, Partition, Relation};

/// Encodes `digits` in base `m`, least-significant digit first.
pub fn encode_tuple(digits: &[u32], m: usize) -> u32 {
    digits.iter().rev().fold(0u64, |acc, &d| acc * m as u64 + d as u64) as u32
}

/// Inverse of [`encode_tuple`] for tuples of length `n`.
pub fn decode_tuple(mut x: u32, m: usize, n: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(x % m as u32);
        x /= m as u32;
    }
    out
}

/// The `n`-th direct power; element `i` decodes to base-|A| digits of `i`.
pub fn direct_power(a: &FiniteStructure, n: usize, caps: &Caps) -> Result<FiniteStructure> {
    if n == 0 {
        return Err(Error::Invalid("direct power needs n >= 1".into()));
    }
    let m = a.size();
    caps.check_domain("direct power", pow_u128(m, n))?;
    let total: u128 = a.relations().iter().map(|r| pow_u128(r.len(), n)).sum();
    caps.check_tuples("direct power tuples", total)?;
    let relations = a.relations().iter().map(|r| power_relation(r, n, m)).collect();
    FiniteStructure::from_relations(a.signature().clone(), m.pow(n as u32), relations)
}

/// All tuples whose coordinate projections lie in `r`, in the power encoding.
pub(crate) fn power_relation(r: &Relation, n: usize, m: usize) -> Relation {
    let k = r.arity();
    let len = r.len();
    if len == 0 {
        return Relation::empty(k);
    }
    let mut data = Vec::with_capacity(len.pow(n as u32) * k);
    let mut choice = vec![0usize; n];
    let mut tuple = vec![0u32; k];
    loop {
        for (p, slot) in tuple.iter_mut().enumerate() {
            let mut v = 0u64;
            for c in (0..n).rev() {
                v = v * m as u64 + r.get(choice[c])[p] as u64;
            }
            *slot = v as u32;
        }
        data.extend_from_slice(&tuple);
        let mut c = 0;
        loop {
            if c == n {
                return Relation::from_flat(k, data);
            }
            choice[c] += 1;
            if choice[c] < len {
                break;
            }
            choice[c] = 0;
            c += 1;
        }
    }
}

/// The factor structure: classes renumbered by least member, relations are images.
pub fn quotient(a: &FiniteStructure, p: &Partition) -> Result<FiniteStructure> {
    if p.domain_size() != a.size() {
        return Err(Error::Invalid(format!(
            "partition has domain {} but the structure has {} elements",
            p.domain_size(),
            a.size()
        )));
    }
    let dense = p.dense_index();
    let relations = a
        .relations()
        .iter()
        .map(|r| {
            let data = r.flat().iter().map(|&x| dense[x as usize]).collect();
            Relation::from_flat(r.arity(), data)
        })
        .collect();
    FiniteStructure::from_relations(a.signature().clone(), p.num_classes(), relations)
}

/// The substructure on `elements`, renumbered in increasing original order.
pub fn induced_substructure(a: &FiniteStructure, elements: &[u32]) -> Result<FiniteStructure> {
    let mut keep: Vec<u32> = elements.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&e) = keep.iter().find(|&&e| e as usize >= a.size()) {
        return Err(Error::Invalid(format!("element {e} outside the domain")));
    }
    let mut new_index = vec![u32::MAX; a.size()];
    for (i, &e) in keep.iter().enumerate() {
        new_index[e as usize] = i as u32;
    }
    let relations = a
        .relations()
        .iter()
        .map(|r| {
            let mut data = Vec::new();
            for t in r.iter() {
                if t.iter().all(|&x| new_index[x as usize] != u32::MAX) {
                    data.extend(t.iter().map(|&x| new_index[x as usize]));
                }
            }
            Relation::from_flat(r.arity(), data)
        })
        .collect();
    let out = FiniteStructure::from_relations(a.signature().clone(), keep.len(), relations)?;
    match a.labels() {
        Some(l) => out.with_labels(keep.iter().map(|&e| l[e as usize].clone()).collect()),
        None => Ok(out),
    }
}
