use crate::error::{Error, Result};
use crate::relcore::Signature;

/// A duplicate-free set of tuples, stored flat and sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    arity: usize,
    data: Vec<u32>,
}

impl Relation {
    pub fn empty(arity: usize) -> Relation {
        assert!(arity > 0, "relations have positive arity");
        Relation { arity, data: Vec::new() }
    }

    /// Builds a relation from concatenated tuples in any order, with duplicates.
    pub fn from_flat(arity: usize, data: Vec<u32>) -> Relation {
        assert!(arity > 0, "relations have positive arity");
        assert_eq!(data.len() % arity, 0, "flat data is not a multiple of the arity");
        if arity == 1 {
            let mut data = data;
            data.sort_unstable();
            data.dedup();
            return Relation { arity, data };
        }
        let mut rows: Vec<&[u32]> = data.chunks_exact(arity).collect();
        rows.sort_unstable();
        rows.dedup();
        let sorted = rows.concat();
        Relation { arity, data: sorted }
    }

    pub fn from_tuples<T: AsRef<[u32]>>(arity: usize, tuples: impl IntoIterator<Item = T>) -> Relation {
        let mut data = Vec::new();
        for t in tuples {
            let t = t.as_ref();
            assert_eq!(t.len(), arity, "tuple length differs from arity");
            data.extend_from_slice(t);
        }
        Relation::from_flat(arity, data)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u32] {
        &self.data[i * self.arity..(i + 1) * self.arity]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, u32> {
        self.data.chunks_exact(self.arity)
    }

    pub fn flat(&self) -> &[u32] {
        &self.data
    }

    pub fn contains(&self, tuple: &[u32]) -> bool {
        debug_assert_eq!(tuple.len(), self.arity);
        let (mut lo, mut hi) = (0usize, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(mid).cmp(tuple) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Largest entry plus one (0 for an empty relation).
    pub fn support_bound(&self) -> u32 {
        self.data.iter().copied().max().map_or(0, |m| m + 1)
    }
}

/// A finite relational structure on the elements `0..size`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteStructure {
    signature: Signature,
    size: usize,
    labels: Option<Vec<String>>,
    relations: Vec<Relation>,
}

impl FiniteStructure {
    /// The structure with no tuples.
    pub fn empty(signature: Signature, size: usize) -> FiniteStructure {
        let relations = signature.symbols().iter().map(|s| Relation::empty(s.arity)).collect();
        FiniteStructure { signature, size, labels: None, relations }
    }

    /// Validates and assembles a structure; relations follow signature order.
    pub fn from_relations(signature: Signature, size: usize, relations: Vec<Relation>) -> Result<FiniteStructure> {
        if relations.len() != signature.len() {
            return Err(Error::Invalid(format!(
                "{} relations given for {} symbols",
                relations.len(),
                signature.len()
            )));
        }
        for (sym, rel) in signature.symbols().iter().zip(&relations) {
            if rel.arity() != sym.arity {
                return Err(Error::Invalid(format!(
                    "relation `{}` has arity {} but the symbol has arity {}",
                    sym.name,
                    rel.arity(),
                    sym.arity
                )));
            }
            if rel.support_bound() as usize > size {
                return Err(Error::Invalid(format!(
                    "relation `{}` mentions an element outside 0..{size}",
                    sym.name
                )));
            }
        }
        Ok(FiniteStructure { signature, size, labels: None, relations })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<FiniteStructure> {
        if labels.len() != self.size {
            return Err(Error::Invalid(format!(
                "{} labels for {} elements",
                labels.len(),
                self.size
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> FiniteStructure {
        self.labels = None;
        self
    }

    /// Display name of an element.
    pub fn label(&self, e: u32) -> String {
        match &self.labels {
            Some(l) => l[e as usize].clone(),
            None => format!("e{e}"),
        }
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, i: usize) -> &Relation {
        &self.relations[i]
    }

    pub fn relation_by_name(&self, name: &str) -> Option<&Relation> {
        self.signature.index_of(name).map(|i| &self.relations[i])
    }

    pub fn total_tuples(&self) -> usize {
        self.relations.iter().map(Relation::len).sum()
    }

    pub fn holds(&self, name: &str, tuple: &[u32]) -> bool {
        self.relation_by_name(name).is_some_and(|r| r.contains(tuple))
    }

    /// The reduct to `names`, in that order.
    pub fn reduct<S: AsRef<str>>(&self, names: &[S]) -> Result<FiniteStructure> {
        let signature = self.signature.restrict(names)?;
        let relations = names
            .iter()
            .map(|n| self.relation_by_name(n.as_ref()).unwrap().clone())
            .collect();
        Ok(FiniteStructure { signature, size: self.size, labels: self.labels.clone(), relations })
    }

    /// Adds new symbols with the given relations.
    pub fn expand(&self, extra: Vec<(String, Relation)>) -> Result<FiniteStructure> {
        let mut signature = self.signature.clone();
        let mut relations = self.relations.clone();
        for (name, rel) in extra {
            signature.push(name, rel.arity())?;
            relations.push(rel);
        }
        let mut out = FiniteStructure::from_relations(signature, self.size, relations)?;
        out.labels = self.labels.clone();
        Ok(out)
    }

    /// Reorders the relations to follow `sig`, which must have the same symbols.
    pub fn aligned_to(&self, sig: &Signature) -> Result<FiniteStructure> {
        if let Some(m) = self.signature.mismatch(sig) {
            return Err(Error::SignatureMismatch(m));
        }
        let names: Vec<&str> = sig.names().collect();
        self.reduct(&names)
    }

    /// Relation contents in signature order; the canonical comparison key.
    pub fn relation_key(&self) -> Vec<Vec<u32>> {
        self.relations.iter().map(|r| r.flat().to_vec()).collect()
    }
}

/// Incremental construction of a [`FiniteStructure`].
#[derive(Clone, Debug)]
pub struct StructureBuilder {
    signature: Signature,
    size: usize,
    data: Vec<Vec<u32>>,
}

impl StructureBuilder {
    pub fn new(signature: Signature, size: usize) -> StructureBuilder {
        let data = vec![Vec::new(); signature.len()];
        StructureBuilder { signature, size, data }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// Adds a tuple to the relation with index `symbol`.
    pub fn add(&mut self, symbol: usize, tuple: &[u32]) -> &mut Self {
        debug_assert_eq!(tuple.len(), self.signature.symbol(symbol).arity);
        debug_assert!(tuple.iter().all(|&e| (e as usize) < self.size));
        self.data[symbol].extend_from_slice(tuple);
        self
    }

    pub fn add_named(&mut self, name: &str, tuple: &[u32]) -> Result<&mut Self> {
        let i = self
            .signature
            .index_of(name)
            .ok_or_else(|| Error::SignatureMismatch(format!("unknown symbol `{name}`")))?;
        let arity = self.signature.symbol(i).arity;
        if tuple.len() != arity {
            return Err(Error::Invalid(format!(
                "`{name}` has arity {arity} but got {} arguments",
                tuple.len()
            )));
        }
        if let Some(&e) = tuple.iter().find(|&&e| e as usize >= self.size) {
            return Err(Error::Invalid(format!("element {e} outside 0..{}", self.size)));
        }
        Ok(self.add(i, tuple))
    }

    pub fn build(self) -> FiniteStructure {
        let relations = self
            .signature
            .symbols()
            .iter()
            .zip(self.data)
            .map(|(s, d)| Relation::from_flat(s.arity, d))
            .collect();
        FiniteStructure { signature: self.signature, size: self.size, labels: None, relations }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_sorts_and_dedups() {
        let r = Relation::from_tuples(2, [[1, 0], [0, 1], [1, 0]]);
        assert_eq!(r.len(), 2);
        assert_eq!(r.get(0), &[0, 1]);
        assert!(r.contains(&[1, 0]));
        assert!(!r.contains(&[1, 1]));
    }

    #[test]
    fn from_relations_validates_entries() {
        let sig = Signature::new([("R", 2)]).unwrap();
        let bad = Relation::from_tuples(2, [[0, 3]]);
        assert!(FiniteStructure::from_relations(sig.clone(), 3, vec![bad]).is_err());
        let wrong_arity = Relation::from_tuples(1, [[0]]);
        assert!(FiniteStructure::from_relations(sig, 3, vec![wrong_arity]).is_err());
    }

    #[test]
    fn reduct_and_alignment() {
        let sig = Signature::new([("A", 1), ("B", 2)]).unwrap();
        let mut b = StructureBuilder::new(sig, 2);
        b.add(0, &[1]).add(1, &[0, 1]);
        let s = b.build();
        let r = s.reduct(&["B"]).unwrap();
        assert_eq!(r.signature().len(), 1);
        assert!(r.holds("B", &[0, 1]));
        let other = Signature::new([("B", 2), ("A", 1)]).unwrap();
        let al = s.aligned_to(&other).unwrap();
        assert_eq!(al.signature().symbol(0).name, "B");
    }
}
