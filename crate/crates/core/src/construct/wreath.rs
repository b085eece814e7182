use crate::agespec::{BoundSpec, Clause, Literal};
use crate::caps::Caps;
use crate::construct::EQUIV;
use crate::error::{Error, Result};
use crate::relcore::{FiniteStructure, Relation, Signature};

fn wreath_signature(a: &Signature, b: &Signature) -> Result<Signature> {
    let joint = a.disjoint_union(b)?;
    if joint.index_of(EQUIV).is_some() {
        return Err(Error::SignatureOverlap(EQUIV.to_string()));
    }
    let mut out = Signature::new(a.symbols().iter().map(|s| (s.name.clone(), s.arity)))?;
    out.push(EQUIV, 2)?;
    for s in b.symbols() {
        out.push(s.name.clone(), s.arity)?;
    }
    Ok(out)
}

/// `A ≀ B` on `A × B`; the pair `(a, b)` is element `b * |A| + a`.
/// Signature: A's symbols, then `E`, then B's symbols.
pub fn wreath_finite(a: &FiniteStructure, b: &FiniteStructure, caps: &Caps) -> Result<FiniteStructure> {
    let sig = wreath_signature(a.signature(), b.signature())?;
    let (na, nb) = (a.size(), b.size());
    caps.check_domain("wreath product", na as u128 * nb as u128)?;
    let pair = |x: u32, y: u32| y * na as u32 + x;
    let mut rels = Vec::new();
    for r in a.relations() {
        let mut flat = Vec::new();
        for cls in 0..nb as u32 {
            for t in r.iter() {
                flat.extend(t.iter().map(|&x| pair(x, cls)));
            }
        }
        rels.push(Relation::from_flat(r.arity(), flat));
    }
    let mut e = Vec::new();
    for cls in 0..nb as u32 {
        for x in 0..na as u32 {
            for y in 0..na as u32 {
                e.extend([pair(x, cls), pair(y, cls)]);
            }
        }
    }
    rels.push(Relation::from_flat(2, e));
    for r in b.relations() {
        let k = r.arity();
        let mut flat = Vec::new();
        let count = na.pow(k as u32);
        caps.check_tuples("wreath product", (r.len() * count) as u128)?;
        for t in r.iter() {
            for code in 0..count as u32 {
                let firsts = crate::relcore::decode_tuple(code, na.max(1), k);
                flat.extend(t.iter().zip(&firsts).map(|(&cls, &x)| pair(x, cls)));
            }
        }
        rels.push(Relation::from_flat(k, flat));
    }
    FiniteStructure::from_relations(sig, na * nb, rels)
}

/// Universal clauses for the age of a wreath product of the presented structures.
pub fn wreath_spec(spec_a: &BoundSpec, spec_b: &BoundSpec) -> Result<BoundSpec> {
    let sig = wreath_signature(&spec_a.signature, &spec_b.signature)?;
    let na = spec_a.signature.len();
    let e = na;
    let a_map: Vec<usize> = (0..na).collect();
    let b_map: Vec<usize> = (0..spec_b.signature.len()).map(|j| na + 1 + j).collect();
    let mut clauses = Vec::new();
    let ident = |n: usize| (0..n).collect::<Vec<usize>>();

    // E is an equivalence relation.
    clauses.push(Clause::new(1, vec![Literal::rel(true, e, &[0, 0])])?);
    clauses.push(Clause::new(2, vec![Literal::rel(false, e, &[0, 1]), Literal::rel(true, e, &[1, 0])])?);
    clauses.push(Clause::new(
        3,
        vec![Literal::rel(false, e, &[0, 1]), Literal::rel(false, e, &[1, 2]), Literal::rel(true, e, &[0, 2])],
    )?);

    // B's relations only depend on E-classes.
    for (j, s) in spec_b.signature.symbols().iter().enumerate() {
        let k = s.arity;
        let xs: Vec<usize> = (0..k).collect();
        let ys: Vec<usize> = (k..2 * k).collect();
        let mut lits: Vec<Literal> = (0..k).map(|i| Literal::rel(false, e, &[xs[i], ys[i]])).collect();
        lits.push(Literal::rel(false, b_map[j], &xs));
        lits.push(Literal::rel(true, b_map[j], &ys));
        clauses.push(Clause::new(2 * k, lits)?);
    }

    // The quotient by E satisfies B's clauses: evaluate them on tuples that
    // meet each class at most once.
    for c in spec_b.clause_form() {
        let n = c.variable_count;
        let base: Vec<Literal> = c.literals.iter().map(|l| l.remap(&b_map, &ident(n))).collect();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        for choice in 0..1u64 << pairs.len() {
            let mut lits = base.clone();
            for (bit, &(i, j)) in pairs.iter().enumerate() {
                if choice >> bit & 1 == 0 {
                    lits.push(Literal::rel(true, e, &[i, j]));
                } else {
                    lits.push(Literal::eq(false, i, j));
                }
            }
            clauses.push(Clause::new(n, lits)?);
        }
    }

    // A's relations live inside single classes.
    for (i, s) in spec_a.signature.symbols().iter().enumerate() {
        let xs: Vec<usize> = (0..s.arity).collect();
        for p in 0..s.arity {
            for q in p + 1..s.arity {
                clauses.push(Clause::new(
                    s.arity,
                    vec![Literal::rel(false, a_map[i], &xs), Literal::rel(true, e, &[p, q])],
                )?);
            }
        }
    }

    // Each class satisfies A's clauses.
    for c in spec_a.clause_form() {
        let n = c.variable_count;
        let mut lits: Vec<Literal> = c.literals.iter().map(|l| l.remap(&a_map, &ident(n))).collect();
        for i in 0..n {
            for j in i + 1..n {
                lits.push(Literal::rel(false, e, &[i, j]));
            }
        }
        clauses.push(Clause::new(n, lits)?);
    }

    let max_sigma = spec_b.signature.max_arity();
    let mbs = 3.max(2 * max_sigma).max(spec_a.max_bound_size).max(spec_b.max_bound_size);
    BoundSpec::new(format!("({})wr({})", spec_a.name, spec_b.name), sig, clauses, None, mbs)
}
