use petgraph::unionfind::UnionFind;

/// A partition of `0..n`; every class is named by its least member.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    class_of: Vec<u32>,
}

impl Partition {
    /// The partition into singletons.
    pub fn identity(n: usize) -> Partition {
        Partition { class_of: (0..n as u32).collect() }
    }

    /// Normalizes an arbitrary class labelling.
    pub fn from_labels(labels: &[u32]) -> Partition {
        let mut first = std::collections::HashMap::new();
        let class_of = labels
            .iter()
            .enumerate()
            .map(|(i, l)| *first.entry(*l).or_insert(i as u32))
            .collect();
        Partition { class_of }
    }

    pub fn domain_size(&self) -> usize {
        self.class_of.len()
    }

    /// Class id (least member) of `x`.
    pub fn class_of(&self, x: u32) -> u32 {
        self.class_of[x as usize]
    }

    pub fn class_map(&self) -> &[u32] {
        &self.class_of
    }

    pub fn same(&self, x: u32, y: u32) -> bool {
        self.class_of(x) == self.class_of(y)
    }

    pub fn num_classes(&self) -> usize {
        self.class_of.iter().enumerate().filter(|(i, c)| **c as usize == *i).count()
    }

    /// Dense class numbers 0..k in order of least members.
    pub fn dense_index(&self) -> Vec<u32> {
        let mut dense = vec![0u32; self.class_of.len()];
        let mut next = 0u32;
        for i in 0..self.class_of.len() {
            let c = self.class_of[i] as usize;
            if c == i {
                dense[i] = next;
                next += 1;
            } else {
                dense[i] = dense[c];
            }
        }
        dense
    }

    /// Classes as sorted member lists, ordered by least member.
    pub fn classes(&self) -> Vec<Vec<u32>> {
        let dense = self.dense_index();
        let mut out = vec![Vec::new(); self.num_classes()];
        for (i, d) in dense.iter().enumerate() {
            out[*d as usize].push(i as u32);
        }
        out
    }

    /// All pairs (x, class_of(x)) with x not its own representative.
    pub fn generating_pairs(&self) -> Vec<(u32, u32)> {
        self.class_of
            .iter()
            .enumerate()
            .filter(|(i, c)| **c as usize != *i)
            .map(|(i, c)| (i as u32, *c))
            .collect()
    }
}

/// The finest partition of `0..n` merging every listed pair.
pub fn equivalence_closure(n: usize, pairs: &[(u32, u32)]) -> Partition {
    let mut uf: UnionFind<u32> = UnionFind::new(n);
    for &(a, b) in pairs {
        assert!((a as usize) < n && (b as usize) < n, "pair entry out of range");
        uf.union(a, b);
    }
    let labels: Vec<u32> = (0..n as u32).map(|x| uf.find_mut(x)).collect();
    Partition::from_labels(&labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spec_examples() {
        assert_eq!(equivalence_closure(3, &[]).classes(), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(equivalence_closure(3, &[(0, 1)]).classes(), vec![vec![0, 1], vec![2]]);
        assert_eq!(
            equivalence_closure(4, &[(0, 1), (1, 2)]).classes(),
            vec![vec![0, 1, 2], vec![3]]
        );
    }

    #[test]
    fn ids_are_least_members() {
        let p = equivalence_closure(5, &[(4, 2), (3, 1)]);
        assert_eq!(p.class_map(), &[0, 1, 2, 1, 2]);
        assert_eq!(p.dense_index(), vec![0, 1, 2, 1, 2]);
        assert_eq!(p.num_classes(), 3);
    }

    proptest! {
        #[test]
        fn closure_is_idempotent(n in 1usize..8, raw in proptest::collection::vec((0u32..8, 0u32..8), 0..10)) {
            let pairs: Vec<(u32, u32)> = raw.into_iter().map(|(a, b)| (a % n as u32, b % n as u32)).collect();
            let p = equivalence_closure(n, &pairs);
            let again = equivalence_closure(n, &p.generating_pairs());
            prop_assert_eq!(&p, &again);
            for (a, b) in pairs {
                prop_assert!(p.same(a, b));
            }
        }
    }
}
