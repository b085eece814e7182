use crate::agespec::{builtin_linear_order, BoundSpec, Clause, Literal};
use crate::caps::Caps;
use crate::construct::wreath_spec;
use crate::error::{Error, Result};
use crate::relcore::{FiniteStructure, Relation, Signature};

/// Order of the inner copy of the rationals in a blowup.
pub const Q_ORDER: &str = "<Q";
/// The wreath equivalence.
pub const EQUIV: &str = "E";
pub const NEQ: &str = "neq";
pub const I4: &str = "I4";
/// The generic linear order superposed in the pipeline.
pub const S_ORDER: &str = "<S";

/// All `(x, y, u, v)` over `0..n` with `x = y ⇒ u = v`.
pub fn i4_relation(n: usize) -> Relation {
    let mut flat = Vec::new();
    let n = n as u32;
    for x in 0..n {
        for y in 0..n {
            for u in 0..n {
                for v in 0..n {
                    if x != y || u == v {
                        flat.extend([x, y, u, v]);
                    }
                }
            }
        }
    }
    Relation::from_flat(4, flat)
}

fn neq_relation(n: usize) -> Relation {
    let n = n as u32;
    Relation::from_flat(2, (0..n).flat_map(|x| (0..n).filter(move |&y| y != x).flat_map(move |y| [x, y])).collect())
}

/// The spec of `(Q;<Q) ≀ B` with `neq` (and optionally `I4`) defined from
/// equality, together with the signature of the blown-up reduct.
pub fn blowup_spec(spec_b: &BoundSpec, tau: &[String], with_i4: bool) -> Result<(BoundSpec, Vec<String>)> {
    for name in [Q_ORDER, EQUIV, NEQ, I4] {
        if spec_b.signature.index_of(name).is_some() {
            return Err(Error::SignatureOverlap(name.to_string()));
        }
    }
    for t in tau {
        if spec_b.signature.index_of(t).is_none() {
            return Err(Error::SignatureMismatch(format!("`{t}` is not a symbol of `{}`", spec_b.name)));
        }
    }
    let w = wreath_spec(&builtin_linear_order(Q_ORDER), spec_b)?;
    let mut sig = w.signature.clone();
    let neq = sig.push(NEQ, 2)?;
    let mut clauses = w.clauses.clone();
    clauses.push(Clause::new(2, vec![Literal::rel(false, neq, &[0, 1]), Literal::eq(false, 0, 1)])?);
    clauses.push(Clause::new(2, vec![Literal::rel(true, neq, &[0, 1]), Literal::eq(true, 0, 1)])?);
    let mut mbs = w.max_bound_size;
    if with_i4 {
        let i4 = sig.push(I4, 4)?;
        let xyuv = [0, 1, 2, 3];
        clauses.push(Clause::new(
            4,
            vec![Literal::rel(false, i4, &xyuv), Literal::eq(false, 0, 1), Literal::eq(true, 2, 3)],
        )?);
        clauses.push(Clause::new(4, vec![Literal::rel(true, i4, &xyuv), Literal::eq(true, 0, 1)])?);
        clauses.push(Clause::new(4, vec![Literal::rel(true, i4, &xyuv), Literal::eq(false, 2, 3)])?);
        mbs = mbs.max(4);
    }
    let mut tau_up: Vec<String> = tau.to_vec();
    tau_up.push(EQUIV.into());
    tau_up.push(NEQ.into());
    if with_i4 {
        tau_up.push(I4.into());
    }
    let name = format!("blowup({}{})", spec_b.name, if with_i4 { ",I4" } else { "" });
    Ok((BoundSpec::new(name, sig, clauses, None, mbs)?, tau_up))
}

/// Spec of the generic superposition: structures whose two reducts are in
/// the respective ages.
pub fn superpose_specs(spec1: &BoundSpec, spec2: &BoundSpec) -> Result<BoundSpec> {
    let sig = spec1.signature.disjoint_union(&spec2.signature)?;
    let off = spec1.signature.len();
    let map2: Vec<usize> = (0..spec2.signature.len()).map(|j| off + j).collect();
    let mut clauses = spec1.clause_form();
    for c in spec2.clause_form() {
        let vars: Vec<usize> = (0..c.variable_count).collect();
        let lits = c.literals.iter().map(|l| l.remap(&map2, &vars)).collect();
        clauses.push(Clause::new(c.variable_count, lits)?);
    }
    let mbs = spec1.max_bound_size.max(spec2.max_bound_size);
    BoundSpec::new(format!("{}*{}", spec1.name, spec2.name), sig, clauses, None, mbs)
}

/// The copy of `a_fin` inside its blowup: τ-relations kept, `E` the
/// diagonal, `neq` all off-diagonal pairs, and optionally `I4`.
pub fn hat_substructure(a_fin: &FiniteStructure, tau: &[String], with_i4: bool) -> Result<FiniteStructure> {
    if a_fin.size() == 0 {
        return Err(Error::Invalid("the structure must be nonempty".into()));
    }
    let n = a_fin.size() as u32;
    let reduct = a_fin.reduct(tau)?;
    let mut extra = vec![
        (EQUIV.to_string(), Relation::from_flat(2, (0..n).flat_map(|x| [x, x]).collect())),
        (NEQ.to_string(), neq_relation(n as usize)),
    ];
    if with_i4 {
        extra.push((I4.to_string(), i4_relation(n as usize)));
    }
    reduct.expand(extra)
}

/// `[m] × a_fin` with element `(i, a)` at `i + m * a`: `E` relates equal
/// second coordinates, `neq` distinct elements, and each relation of `a_fin`
/// holds iff it holds on the second coordinates.
pub fn finite_blowup_model(a_fin: &FiniteStructure, m: usize, caps: &Caps) -> Result<FiniteStructure> {
    if m == 0 {
        return Err(Error::Invalid("m must be at least 1".into()));
    }
    let n = a_fin.size();
    let size = m * n;
    caps.check_domain("blowup model", size as u128)?;
    let mut rels = Vec::new();
    for r in a_fin.relations() {
        let k = r.arity();
        let rows = m.pow(k as u32);
        caps.check_tuples("blowup model", (r.len() * rows) as u128)?;
        let mut flat = Vec::with_capacity(r.len() * rows * k);
        for t in r.iter() {
            for code in 0..rows as u32 {
                let is = crate::relcore::decode_tuple(code, m, k);
                flat.extend(is.iter().zip(t).map(|(&i, &a)| i + m as u32 * a));
            }
        }
        rels.push(Relation::from_flat(k, flat));
    }
    let mut e = Vec::new();
    for x in 0..size as u32 {
        for y in 0..size as u32 {
            if x / m as u32 == y / m as u32 {
                e.extend([x, y]);
            }
        }
    }
    let mut sig: Signature = a_fin.signature().clone();
    sig.push(EQUIV, 2)?;
    sig.push(NEQ, 2)?;
    rels.push(Relation::from_flat(2, e));
    rels.push(neq_relation(size));
    FiniteStructure::from_relations(sig, size, rels)
}

/// [`finite_blowup_model`] expanded by `I4`.
pub fn finite_blowup_model_i4(a_fin: &FiniteStructure, m: usize, caps: &Caps) -> Result<FiniteStructure> {
    let base = finite_blowup_model(a_fin, m, caps)?;
    let n = base.size() as u128;
    caps.check_tuples("blowup model with I4", base.total_tuples() as u128 + n * n * n * n)?;
    base.expand(vec![(I4.to_string(), i4_relation(base.size()))])
}
