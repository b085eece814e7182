use petgraph::unionfind::UnionFind;

use crate::datalog::{evaluate, DatalogProgram, Goal, PredAtom, Rule};
use crate::error::{Error, Result};
use crate::relcore::{equivalence_closure, FiniteStructure, Partition, Signature};

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// `T` is the transitive closure of `<`; the goal asks for a `T`-loop.
pub fn transitive_closure_program() -> DatalogProgram {
    let rules = vec![
        Rule {
            var_names: names(&["x", "y"]),
            head: PredAtom::new("T", &[0, 1]),
            body: vec![PredAtom::new("<", &[0, 1])],
            equalities: vec![],
        },
        Rule {
            var_names: names(&["x", "y", "z"]),
            head: PredAtom::new("T", &[0, 2]),
            body: vec![PredAtom::new("T", &[0, 1]), PredAtom::new("<", &[1, 2])],
            equalities: vec![],
        },
    ];
    let goal = Goal { variable_count: 1, atoms: vec![PredAtom::new("T", &[0, 0])] };
    DatalogProgram::new(
        Signature::new([("<", 2)]).unwrap(),
        Signature::new([("T", 2)]).unwrap(),
        rules,
        Some(goal),
    )
    .unwrap()
}

/// Does the `<`-reduct of `j` map to a dense linear order, i.e. is the
/// transitive closure of `<` loop-free?
pub fn acyclicity_check(j: &FiniteStructure) -> Result<bool> {
    if j.signature().arity_of("<") != Some(2) {
        return Err(Error::SignatureMismatch("acyclicity needs a binary `<`".into()));
    }
    let p = transitive_closure_program();
    let out = evaluate(&p, &j.reduct(&["<"])?)?;
    Ok(!p.goal.as_ref().unwrap().holds(&out))
}

/// The closure `approx` of the I4-premises: symmetric, transitive, reflexive,
/// and `x approx y` whenever `I4(u, v, x, y)` with `u approx v`.
pub fn approx_program() -> DatalogProgram {
    let rules = vec![
        Rule {
            var_names: names(&["x", "y", "u", "v"]),
            head: PredAtom::new("approx", &[0, 1]),
            body: vec![PredAtom::new("I4", &[2, 3, 0, 1]), PredAtom::new("approx", &[2, 3])],
            equalities: vec![],
        },
        Rule {
            var_names: names(&["x", "y", "z"]),
            head: PredAtom::new("approx", &[0, 2]),
            body: vec![PredAtom::new("approx", &[0, 1]), PredAtom::new("approx", &[1, 2])],
            equalities: vec![],
        },
        Rule {
            var_names: names(&["x", "y"]),
            head: PredAtom::new("approx", &[0, 1]),
            body: vec![PredAtom::new("approx", &[1, 0])],
            equalities: vec![],
        },
        Rule {
            var_names: names(&["x", "y"]),
            head: PredAtom::new("approx", &[0, 1]),
            body: vec![],
            equalities: vec![(0, 1)],
        },
    ];
    DatalogProgram::new(
        Signature::new([("I4", 4)]).unwrap(),
        Signature::new([("approx", 2)]).unwrap(),
        rules,
        None,
    )
    .unwrap()
}

/// The union-find fixpoint: merge `x, y` for every `I4(u, v, x, y)` whose
/// first pair is already merged, until stable.
fn approx_union_find(j: &FiniteStructure) -> Partition {
    let n = j.size();
    let i4 = j.relation_by_name("I4").unwrap();
    let mut uf = UnionFind::<usize>::new(n.max(1));
    loop {
        let mut changed = false;
        for t in i4.iter() {
            if uf.equiv(t[0] as usize, t[1] as usize) {
                changed |= uf.union(t[2] as usize, t[3] as usize);
            }
        }
        if !changed {
            break;
        }
    }
    let labels: Vec<u32> = (0..n).map(|x| uf.find(x) as u32).collect();
    Partition::from_labels(&labels)
}

/// The equivalence computed by [`approx_program`] on the I4 facts of `j`,
/// checked against the union-find fixpoint.
pub fn approx_relation(j: &FiniteStructure) -> Result<Partition> {
    if j.signature().arity_of("I4") != Some(4) {
        return Err(Error::SignatureMismatch("the instance has no 4-ary `I4`".into()));
    }
    let p = approx_program();
    let out = evaluate(&p, &j.reduct(&["I4"])?)?;
    let pairs: Vec<(u32, u32)> = out.relation_by_name("approx").unwrap().iter().map(|t| (t[0], t[1])).collect();
    let by_program = equivalence_closure(j.size(), &pairs);
    if pairs.len() != by_program.classes().iter().map(|c| c.len() * c.len()).sum::<usize>() {
        return Err(Error::Invalid("approx is not an equivalence relation".into()));
    }
    let by_union_find = approx_union_find(j);
    if by_program != by_union_find {
        return Err(Error::Invalid("approx program and union-find fixpoint disagree".into()));
    }
    Ok(by_program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{chain, directed_cycle, lt_signature};
    use crate::relcore::{find_homomorphism, StructureBuilder};

    #[test]
    fn acyclicity_examples() {
        assert!(acyclicity_check(&chain(3)).unwrap());
        assert!(!acyclicity_check(&directed_cycle(3)).unwrap());
        assert!(acyclicity_check(&FiniteStructure::empty(lt_signature(), 1)).unwrap());
        assert!(acyclicity_check(&FiniteStructure::empty(Signature::new([("E", 2)]).unwrap(), 1)).is_err());
    }

    #[test]
    fn acyclicity_matches_chain_homomorphism() {
        for n in 1..=4usize {
            for mask in 0..1u32 << (n * n) {
                let mut b = StructureBuilder::new(lt_signature(), n);
                for x in 0..n {
                    for y in 0..n {
                        if mask >> (x * n + y) & 1 == 1 {
                            b.add(0, &[x as u32, y as u32]);
                        }
                    }
                }
                let j = b.build();
                let hom = find_homomorphism(&j, &chain(n), false).unwrap().is_some();
                assert_eq!(acyclicity_check(&j).unwrap(), hom);
            }
        }
    }

    fn i4_instance(n: usize, facts: &[[u32; 4]]) -> FiniteStructure {
        let mut b = StructureBuilder::new(Signature::new([("I4", 4)]).unwrap(), n);
        for f in facts {
            b.add(0, f);
        }
        b.build()
    }

    #[test]
    fn approx_examples() {
        let p = approx_relation(&i4_instance(3, &[[0, 0, 1, 2]])).unwrap();
        assert_eq!(p.classes(), vec![vec![0], vec![1, 2]]);
        assert_eq!(approx_relation(&i4_instance(3, &[])).unwrap(), Partition::identity(3));
        let p = approx_relation(&i4_instance(5, &[[0, 0, 1, 2], [1, 2, 3, 4]])).unwrap();
        assert_eq!(p.num_classes(), 3);
        assert!(p.same(3, 4));
        // A premise whose first pair is never merged has no effect.
        assert_eq!(approx_relation(&i4_instance(4, &[[0, 1, 2, 3]])).unwrap(), Partition::identity(4));
    }
}
