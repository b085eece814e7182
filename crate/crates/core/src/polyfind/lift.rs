use crate::caps::Caps;
use crate::construct::{full_power_finite, functions, verify_into_orbit, OrbitTemplate};
use crate::error::{Error, Result};
use crate::relcore::{decode_tuple, encode_tuple, equivalence_closure, quotient, FiniteStructure, Partition, Relation};

/// The structure read back from a homomorphism `X^(d) → S2`.
#[derive(Clone, Debug)]
pub struct LiftCertificate {
    /// `X` with every relation of the spec, `R(c)` holding iff some image
    /// type has `R` at positions carrying `c`.
    pub x_prime: FiniteStructure,
    /// `x ∼ x'` iff some image type identifies positions carrying `x`, `x'`.
    pub sim: Partition,
    pub x_tilde: FiniteStructure,
    /// Relations and `∼` come out the same when "some image type" is
    /// replaced by "every image type".
    pub forms_agree: bool,
    pub congruence: bool,
    /// `X` maps into `X'` by the identity on its own relations.
    pub hom_into_x_prime: bool,
    pub in_age: bool,
    /// 1-type of the `∼`-class of each element of `X`.
    pub one_types: Vec<u32>,
}

impl LiftCertificate {
    pub fn is_positive(&self) -> bool {
        self.forms_agree && self.congruence && self.hom_into_x_prime && self.in_age
    }
}

/// Builds `X'`, `∼` and `X̃ = X'/∼` from `h: X^(d) → S2` (indexed in the
/// power encoding) and checks `X̃` against the spec of `S2`.
pub fn lift_homomorphism(x: &FiniteStructure, h: &[u32], s2: &OrbitTemplate, caps: &Caps) -> Result<LiftCertificate> {
    let d = s2.d();
    let fp = full_power_finite(x, d, caps)?;
    if !verify_into_orbit(&fp, s2, h) {
        return Err(Error::Invalid("the map is not a homomorphism from the full power into S2".into()));
    }
    let n = x.size();
    let spec = s2.spec();
    let types = s2.table().types();
    let ys: Vec<Vec<u32>> = (0..fp.size() as u32).map(|c| decode_tuple(c, n, d)).collect();

    // Relations of X', in both forms.
    let mut agree = true;
    let mut rels = Vec::new();
    for (r, sym) in spec.signature.symbols().iter().enumerate() {
        let k = sym.arity;
        let size = n.pow(k as u32);
        let mut some = vec![false; size];
        let mut every = vec![true; size];
        let fs = functions(k, d);
        for (code, y) in ys.iter().enumerate() {
            let t = &types[h[code] as usize];
            for f in &fs {
                let c: Vec<u32> = f.iter().map(|&i| y[i]).collect();
                let at: Vec<u32> = f.iter().map(|&i| t.pattern[i] as u32).collect();
                let holds = t.structure.relation(r).contains(&at);
                let i = encode_tuple(&c, n) as usize;
                some[i] |= holds;
                every[i] &= holds;
            }
        }
        agree &= some == every;
        let tuples = (0..size as u32).filter(|&i| some[i as usize]).map(|i| decode_tuple(i, n, k));
        rels.push(Relation::from_tuples(k, tuples));
    }
    let mut x_prime = FiniteStructure::from_relations(spec.signature.clone(), n, rels)?;
    if let Some(labels) = x.labels() {
        x_prime = x_prime.with_labels(labels.to_vec())?;
    }

    // The equality relation read off the image types.
    let mut some = vec![false; n * n];
    let mut every = vec![true; n * n];
    for (code, y) in ys.iter().enumerate() {
        let t = &types[h[code] as usize];
        for i in 0..d {
            for j in 0..d {
                let e = t.pattern[i] == t.pattern[j];
                let p = y[i] as usize * n + y[j] as usize;
                some[p] |= e;
                every[p] &= e;
            }
        }
    }
    agree &= some == every;
    let pairs: Vec<(u32, u32)> =
        (0..n * n).filter(|&p| some[p]).map(|p| ((p / n) as u32, (p % n) as u32)).collect();
    let sim = equivalence_closure(n, &pairs);
    let is_equivalence = (0..n * n).all(|p| some[p] == sim.same((p / n) as u32, (p % n) as u32));
    let congruence = is_equivalence
        && x_prime.relations().iter().all(|r| {
            r.iter().all(|t| {
                (0..t.len()).all(|i| {
                    (0..n as u32).filter(|&z| sim.same(z, t[i])).all(|z| {
                        let mut u = t.to_vec();
                        u[i] = z;
                        r.contains(&u)
                    })
                })
            })
        });
    let hom_into_x_prime = x
        .relations()
        .iter()
        .zip(x.signature().symbols())
        .all(|(r, sym)| r.iter().all(|t| x_prime.holds(&sym.name, t)));
    let x_tilde = quotient(&x_prime.clone().without_labels(), &sim)?;
    let in_age = spec.in_age(&x_tilde)?;
    let one_types = (0..n as u32)
        .map(|z| {
            let rep = (0..n as u32).find(|&w| sim.same(w, z)).unwrap();
            s2.projection(h[encode_tuple(&vec![rep; d], n) as usize], &[0])
        })
        .collect();
    let cert = LiftCertificate { x_prime, sim, x_tilde, forms_agree: agree, congruence, hom_into_x_prime, in_age, one_types };
    if !cert.is_positive() {
        return Err(Error::Invalid(format!(
            "lifting produced an inconsistent certificate (forms agree {}, congruence {}, hom {}, in age {})",
            cert.forms_agree, cert.congruence, cert.hom_into_x_prime, cert.in_age
        )));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agespec::builtin_linear_order;
    use crate::construct::{build_pcsp, BuildOptions};
    use crate::datalog::blowup_expand;
    use crate::fixtures::{chain, directed_cycle};
    use crate::polyfind::find_full_power_hom;
    use crate::relcore::StructureBuilder;

    fn demo() -> OrbitTemplate {
        let lin = builtin_linear_order("<");
        build_pcsp(&lin, &["<".to_string()], &chain(3), &BuildOptions::default()).unwrap().s2
    }

    #[test]
    fn lifting_examples() {
        let s2 = demo();
        let caps = Caps::default();
        let y = blowup_expand(&chain(2)).unwrap().aligned_to(&s2.base_signature()).unwrap();
        let h = find_full_power_hom(&y, &s2, &caps).unwrap().unwrap();
        let cert = lift_homomorphism(&y, &h.map, &s2, &caps).unwrap();
        assert!(cert.is_positive());
        assert_eq!(cert.x_tilde.size(), 2);
        assert!(cert.x_prime.holds("<", &[0, 1]));

        let mut loop_b = StructureBuilder::new(crate::fixtures::lt_signature(), 1);
        loop_b.add(0, &[0, 0]);
        for x in [loop_b.build(), directed_cycle(3)] {
            let y = blowup_expand(&x).unwrap().aligned_to(&s2.base_signature()).unwrap();
            assert!(find_full_power_hom(&y, &s2, &caps).unwrap().is_none());
        }
    }

    #[test]
    fn rejects_non_homomorphisms() {
        let s2 = demo();
        let y = blowup_expand(&chain(2)).unwrap().aligned_to(&s2.base_signature()).unwrap();
        let bad = vec![0u32; 16];
        assert!(lift_homomorphism(&y, &bad, &s2, &Caps::default()).is_err());
    }
}
