use std::fmt;
use std::sync::Arc;

use crate::construct::{full_power_instance, full_power_signature, EQUIV, I4, NEQ};
use crate::caps::Caps;
use crate::datalog::approx_relation;
use crate::error::{Error, Result};
use crate::relcore::{equivalence_closure, quotient, FiniteStructure, Partition, Relation, Signature};

/// Preimages under the class map: a tuple is kept iff its classes are the
/// classes of some tuple of `r`.
fn preimage(r: &Relation, p: &Partition) -> Relation {
    let classes = p.classes();
    let dense = p.dense_index();
    let members = |x: u32| &classes[dense[p.class_of(x) as usize] as usize];
    let mut flat = Vec::new();
    for t in r.iter() {
        let lists: Vec<&Vec<u32>> = t.iter().map(|&x| members(x)).collect();
        let mut idx = vec![0usize; t.len()];
        'prod: loop {
            flat.extend(lists.iter().zip(&idx).map(|(l, &i)| l[i]));
            for j in (0..idx.len()).rev() {
                idx[j] += 1;
                if idx[j] < lists[j].len() {
                    continue 'prod;
                }
                idx[j] = 0;
            }
            break;
        }
    }
    Relation::from_flat(r.arity(), flat)
}

fn require(j: &FiniteStructure, name: &str, arity: usize) -> Result<()> {
    match j.signature().arity_of(name) {
        Some(a) if a == arity => Ok(()),
        _ => Err(Error::SignatureMismatch(format!("the instance needs `{name}/{arity}`"))),
    }
}

/// The quotient by the I4-closure, with `I4` dropped. Homomorphically
/// equivalent to the same-domain preimage structure.
pub fn i4_quotient_reduce(j: &FiniteStructure) -> Result<FiniteStructure> {
    require(j, I4, 4)?;
    let p = approx_relation(j)?;
    let keep: Vec<&str> = j.signature().names().filter(|&n| n != I4).collect();
    quotient(&j.reduct(&keep)?, &p)
}

/// Same domain, `I4` dropped, every relation replaced by its preimage under
/// the I4-closure.
pub fn i4_preimage_reduce(j: &FiniteStructure) -> Result<FiniteStructure> {
    require(j, I4, 4)?;
    let p = approx_relation(j)?;
    let keep: Vec<&str> = j.signature().names().filter(|&n| n != I4).collect();
    let r = j.reduct(&keep)?;
    let rels = r.relations().iter().map(|rel| preimage(rel, &p)).collect();
    FiniteStructure::from_relations(r.signature().clone(), r.size(), rels)
}

/// From the blowup signature back to `tau`: relations closed under the
/// equivalence generated by `E`, plus a constant tuple in every relation for
/// each `neq`-loop.
pub fn blowup_reduce_star(j: &FiniteStructure, tau: &[String]) -> Result<FiniteStructure> {
    require(j, EQUIV, 2)?;
    require(j, NEQ, 2)?;
    let e = j.relation_by_name(EQUIV).unwrap();
    let pairs: Vec<(u32, u32)> = e.iter().map(|t| (t[0], t[1])).collect();
    let p = equivalence_closure(j.size(), &pairs);
    let loops: Vec<u32> = j.relation_by_name(NEQ).unwrap().iter().filter(|t| t[0] == t[1]).map(|t| t[0]).collect();
    let red = j.reduct(tau)?;
    let rels = red
        .relations()
        .iter()
        .map(|r| {
            let mut flat = preimage(r, &p).flat().to_vec();
            for &x in &loops {
                flat.extend(std::iter::repeat_n(x, r.arity()));
            }
            Relation::from_flat(r.arity(), flat)
        })
        .collect();
    let mut out = FiniteStructure::from_relations(red.signature().clone(), red.size(), rels)?;
    if let Some(l) = j.labels() {
        out = out.with_labels(l.to_vec())?;
    }
    Ok(out)
}

/// Expansion by empty `E` and `neq`.
pub fn blowup_expand(j: &FiniteStructure) -> Result<FiniteStructure> {
    j.expand(vec![(EQUIV.to_string(), Relation::empty(2)), (NEQ.to_string(), Relation::empty(2))])
}

type MapFn = dyn Fn(&FiniteStructure) -> Result<FiniteStructure> + Send + Sync;

/// An instance transformation between two signatures.
#[derive(Clone)]
pub struct Reduction {
    pub name: String,
    pub input: Signature,
    pub output: Signature,
    map: Arc<MapFn>,
}

impl fmt::Debug for Reduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Reduction({}: {:?} -> {:?})", self.name, self.input.names().collect::<Vec<_>>(), self.output.names().collect::<Vec<_>>())
    }
}

impl Reduction {
    pub fn new(
        name: impl Into<String>,
        input: Signature,
        output: Signature,
        map: impl Fn(&FiniteStructure) -> Result<FiniteStructure> + Send + Sync + 'static,
    ) -> Reduction {
        Reduction { name: name.into(), input, output, map: Arc::new(map) }
    }

    pub fn identity(sig: Signature) -> Reduction {
        Reduction::new("id", sig.clone(), sig, |j| Ok(j.clone()))
    }

    pub fn apply(&self, j: &FiniteStructure) -> Result<FiniteStructure> {
        if let Some(m) = j.signature().mismatch(&self.input) {
            return Err(Error::SignatureMismatch(format!("input of `{}`: {m}", self.name)));
        }
        let out = (self.map)(&j.aligned_to(&self.input)?)?;
        out.aligned_to(&self.output)
    }

    pub fn blowup_expand(tau: Signature) -> Result<Reduction> {
        let mut out = tau.clone();
        out.push(EQUIV, 2)?;
        out.push(NEQ, 2)?;
        Ok(Reduction::new("expand", tau, out, blowup_expand))
    }

    pub fn blowup_star(tau: Signature) -> Result<Reduction> {
        let mut input = tau.clone();
        input.push(EQUIV, 2)?;
        input.push(NEQ, 2)?;
        let names: Vec<String> = tau.names().map(str::to_string).collect();
        Ok(Reduction::new("star", input, tau, move |j| blowup_reduce_star(j, &names)))
    }

    /// From `tau + E + neq + I4` to `tau + E + neq`.
    pub fn i4_quotient(tau: Signature) -> Result<Reduction> {
        let mut output = tau;
        output.push(EQUIV, 2)?;
        output.push(NEQ, 2)?;
        let mut input = output.clone();
        input.push(I4, 4)?;
        Ok(Reduction::new("i4", input, output, i4_quotient_reduce))
    }

    pub fn full_power(input: Signature, d: usize, caps: Caps) -> Result<Reduction> {
        let output = full_power_signature(&input, d)?;
        Ok(Reduction::new(format!("fullpower{d}"), input, output, move |j| full_power_instance(j, d, &caps)))
    }
}

/// `r2 ∘ r1`.
pub fn compose_reductions(r1: &Reduction, r2: &Reduction) -> Result<Reduction> {
    if let Some(m) = r1.output.mismatch(&r2.input) {
        return Err(Error::SignatureMismatch(format!("`{}` then `{}`: {m}", r1.name, r2.name)));
    }
    let (a, b) = (r1.clone(), r2.clone());
    Ok(Reduction::new(format!("{}.{}", r2.name, r1.name), r1.input.clone(), r2.output.clone(), move |j| {
        b.apply(&a.apply(j)?)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{finite_blowup_model, finite_blowup_model_i4};
    use crate::datalog::acyclicity_check;
    use crate::fixtures::{chain, lt_signature};
    use crate::relcore::{find_homomorphism, StructureBuilder};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tau() -> Vec<String> {
        vec!["<".to_string()]
    }

    fn up_sig(i4: bool) -> Signature {
        let mut s = lt_signature();
        s.push(EQUIV, 2).unwrap();
        s.push(NEQ, 2).unwrap();
        if i4 {
            s.push(I4, 4).unwrap();
        }
        s
    }

    fn random_instance(rng: &mut ChaCha8Rng, i4: bool) -> FiniteStructure {
        let n = rng.gen_range(1..=4usize);
        let mut b = StructureBuilder::new(up_sig(i4), n);
        for sym in 0..3 {
            for x in 0..n as u32 {
                for y in 0..n as u32 {
                    if rng.gen_bool(0.15) {
                        b.add(sym, &[x, y]);
                    }
                }
            }
        }
        if i4 {
            for _ in 0..rng.gen_range(0..4) {
                let t: Vec<u32> = (0..4).map(|_| rng.gen_range(0..n as u32)).collect();
                b.add(3, &t);
            }
        }
        b.build()
    }

    #[test]
    fn star_examples() {
        let mut b = StructureBuilder::new(up_sig(false), 2);
        b.add_named("E", &[0, 1]).unwrap().add_named("<", &[0, 1]).unwrap();
        let j = b.build();
        let s = blowup_reduce_star(&j, &tau()).unwrap();
        assert!(s.holds("<", &[0, 0]));
        assert!(!acyclicity_check(&s).unwrap());
        let model = finite_blowup_model(&chain(2), 2, &Caps::default()).unwrap();
        assert!(find_homomorphism(&j, &model, false).unwrap().is_none());

        let mut b = StructureBuilder::new(up_sig(false), 1);
        b.add_named("neq", &[0, 0]).unwrap();
        assert!(blowup_reduce_star(&b.build(), &tau()).unwrap().holds("<", &[0, 0]));
    }

    #[test]
    fn expand_round_trip() {
        for n in 0..=3usize {
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
                let e = blowup_expand(&j).unwrap();
                assert!(e.relation_by_name("E").unwrap().is_empty());
                assert_eq!(blowup_reduce_star(&e, &tau()).unwrap(), j);
            }
        }
    }

    #[test]
    fn star_reduction_matches_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let model = finite_blowup_model(&chain(4), 4, &Caps::default()).unwrap();
        for _ in 0..400 {
            let j = random_instance(&mut rng, false);
            let via = acyclicity_check(&blowup_reduce_star(&j, &tau()).unwrap()).unwrap();
            let direct = find_homomorphism(&j, &model, false).unwrap().is_some();
            assert_eq!(via, direct, "{j:?}");
        }
    }

    #[test]
    fn i4_examples() {
        let mut b = StructureBuilder::new(up_sig(true), 3);
        b.add_named("I4", &[0, 0, 1, 2]).unwrap();
        let q = i4_quotient_reduce(&b.build()).unwrap();
        assert_eq!(q.size(), 2);
        assert!(q.signature().index_of("I4").is_none());
        let plain = StructureBuilder::new(up_sig(true), 3).build();
        let q = i4_quotient_reduce(&plain).unwrap();
        assert_eq!(q, plain.reduct(&["<", "E", "neq"]).unwrap());
    }

    #[test]
    fn i4_reduction_matches_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let model = finite_blowup_model_i4(&chain(4), 4, &Caps::default()).unwrap();
        let base = finite_blowup_model(&chain(4), 4, &Caps::default()).unwrap();
        for _ in 0..150 {
            let j = random_instance(&mut rng, true);
            let q = i4_quotient_reduce(&j).unwrap();
            let pre = i4_preimage_reduce(&j).unwrap();
            let via = acyclicity_check(&blowup_reduce_star(&q, &tau()).unwrap()).unwrap();
            let via_pre = find_homomorphism(&pre, &base, false).unwrap().is_some();
            let direct = find_homomorphism(&j, &model, false).unwrap().is_some();
            assert_eq!(via, direct, "{j:?}");
            assert_eq!(via_pre, direct);
        }
    }

    #[test]
    fn composition() {
        let tau_sig = lt_signature();
        let id = Reduction::identity(tau_sig.clone());
        let ex = Reduction::blowup_expand(tau_sig.clone()).unwrap();
        let c = compose_reductions(&id, &ex).unwrap();
        assert_eq!(c.apply(&chain(2)).unwrap(), ex.apply(&chain(2)).unwrap());
        let star = Reduction::blowup_star(tau_sig.clone()).unwrap();
        let i4 = Reduction::i4_quotient(tau_sig.clone()).unwrap();
        let chain_red = compose_reductions(&i4, &star).unwrap();
        let mut b = StructureBuilder::new(up_sig(true), 3);
        b.add_named("I4", &[0, 0, 1, 2]).unwrap().add_named("<", &[1, 2]).unwrap();
        assert!(!acyclicity_check(&chain_red.apply(&b.build()).unwrap()).unwrap());
        assert!(compose_reductions(&star, &ex).is_ok());
        assert!(compose_reductions(&ex, &i4).is_err());
        let fp = Reduction::full_power(up_sig(false), 2, Caps::default()).unwrap();
        let j_map = compose_reductions(&ex, &fp).unwrap();
        assert_eq!(j_map.apply(&chain(2)).unwrap().size(), 4);
    }
}
