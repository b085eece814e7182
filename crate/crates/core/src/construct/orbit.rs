use crate::agespec::{enumerate_d_types, BoundSpec, DTypeTable};
use crate::caps::Caps;
use crate::construct::{full_power_symbols, functions, DerivedSymbol};
use crate::error::{Error, Result};
use crate::relcore::{FiniteStructure, Relation, Signature};

/// The full power of a homogeneous structure factored by the orbits of its
/// automorphism group, kept in factored form: the elements are the d-types
/// and each derived relation is decided from projections of types.
///
/// A tuple of types is in a derived relation iff some realization of the
/// types is in the corresponding relation of the full power.
#[derive(Clone, Debug)]
pub struct OrbitTemplate {
    spec: BoundSpec,
    tau: Vec<String>,
    d: usize,
    table: DTypeTable,
    signature: Signature,
    symbols: Vec<DerivedSymbol>,
    /// Tables of k-types for k = 1..=kmax (index k - 1).
    ktables: Vec<DTypeTable>,
    /// `proj[k-1][f][t]`: the k-type at the coordinates `f` of type `t`,
    /// `f` indexing the functions `[k] → [d]` in lexicographic order.
    proj: Vec<Vec<Vec<u32>>>,
    /// Per derived symbol: for unary ones the allowed d-types, for hatted
    /// ones the allowed vectors of 1-types.
    unary: Vec<Option<Vec<bool>>>,
    allowed: Vec<Option<Relation>>,
}

fn func_index(f: &[usize], d: usize) -> usize {
    f.iter().fold(0, |acc, &x| acc * d + x)
}

impl OrbitTemplate {
    /// Checks `d ≥ max_bound_size` and `d > max arity` before building.
    pub fn new(spec: &BoundSpec, tau: &[String], d: usize, caps: &Caps) -> Result<OrbitTemplate> {
        let required = spec.max_bound_size.max(spec.signature.max_arity() + 1);
        if d < required {
            return Err(Error::Invalid(format!("orbit template needs d >= {required}, got {d}")));
        }
        OrbitTemplate::new_unchecked(spec, tau, d, caps)
    }

    /// Builds the template for any `d` at least the largest arity in `tau`;
    /// below the bound size the types need not be orbits.
    pub fn new_unchecked(spec: &BoundSpec, tau: &[String], d: usize, caps: &Caps) -> Result<OrbitTemplate> {
        let sub = spec.signature.restrict(tau)?;
        let symbols = full_power_symbols(&sub, d)?;
        let signature = Signature::new(symbols.iter().map(|s| (s.name(), s.arity())))?;
        let table = enumerate_d_types(spec, d, caps)?;
        let kmax = sub.max_arity();
        let mut ktables = Vec::new();
        let mut proj = Vec::new();
        for k in 1..=kmax {
            let kt = if k == d { table.clone() } else { enumerate_d_types(spec, k, caps)? };
            let mut per_f = Vec::new();
            for f in functions(k, d) {
                let col = table
                    .types()
                    .iter()
                    .map(|t| {
                        kt.lookup(&t.project(&f)).map(|i| i as u32).ok_or_else(|| {
                            Error::Invalid(format!("projection of a {d}-type is missing from the {k}-types"))
                        })
                    })
                    .collect::<Result<Vec<u32>>>()?;
                per_f.push(col);
            }
            ktables.push(kt);
            proj.push(per_f);
        }
        let mut unary = Vec::new();
        let mut allowed = Vec::new();
        for sym in &symbols {
            match sym {
                DerivedSymbol::Unary { base, iota } => {
                    let r = spec.symbol(base)?;
                    let set = table
                        .types()
                        .iter()
                        .map(|t| {
                            let tu: Vec<u32> = iota.iter().map(|&c| t.pattern[c] as u32).collect();
                            t.structure.relation(r).contains(&tu)
                        })
                        .collect();
                    unary.push(Some(set));
                    allowed.push(None);
                }
                DerivedSymbol::Hat { base, iota } => {
                    let r = spec.symbol(base)?;
                    let k = iota.len();
                    let kt = &ktables[k - 1];
                    let one = &ktables[0];
                    let mut flat = Vec::new();
                    for t in kt.types() {
                        if t.structure.relation(r).contains(&t.tuple()) {
                            for j in 0..k {
                                flat.push(one.lookup(&t.project(&[j])).unwrap() as u32);
                            }
                        }
                    }
                    unary.push(None);
                    allowed.push(Some(Relation::from_flat(k, flat)));
                }
                DerivedSymbol::Compat { .. } => {
                    unary.push(None);
                    allowed.push(None);
                }
            }
        }
        Ok(OrbitTemplate {
            spec: spec.clone(),
            tau: tau.to_vec(),
            d,
            table,
            signature,
            symbols,
            ktables,
            proj,
            unary,
            allowed,
        })
    }

    pub fn spec(&self) -> &BoundSpec {
        &self.spec
    }

    pub fn tau(&self) -> &[String] {
        &self.tau
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn table(&self) -> &DTypeTable {
        &self.table
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn symbols(&self) -> &[DerivedSymbol] {
        &self.symbols
    }

    /// Number of elements (d-types).
    pub fn size(&self) -> usize {
        self.table.len()
    }

    /// Largest arity in `tau`.
    pub fn kmax(&self) -> usize {
        self.ktables.len()
    }

    /// The signature `tau` whose full power this template interprets.
    pub fn base_signature(&self) -> Signature {
        self.spec.signature.restrict(&self.tau).expect("tau was checked on construction")
    }

    /// Tables of k-types, `k = 1..=` largest arity of `tau`.
    pub fn ktable(&self, k: usize) -> &DTypeTable {
        &self.ktables[k - 1]
    }

    /// The k-type of type `t` at the coordinates `f`.
    pub fn projection(&self, t: u32, f: &[usize]) -> u32 {
        self.proj[f.len() - 1][func_index(f, self.d)][t as usize]
    }

    /// The 1-type vectors admitted by a hatted symbol.
    pub fn hat_allowed(&self, symbol: usize) -> Option<&Relation> {
        self.allowed[symbol].as_ref()
    }

    /// Does the type satisfy the unary symbol?
    pub fn unary_holds(&self, symbol: usize, t: u32) -> Option<bool> {
        self.unary[symbol].as_ref().map(|s| s[t as usize])
    }

    pub fn contains(&self, symbol: usize, tuple: &[u32]) -> bool {
        match &self.symbols[symbol] {
            DerivedSymbol::Unary { .. } => self.unary[symbol].as_ref().unwrap()[tuple[0] as usize],
            DerivedSymbol::Hat { iota, .. } => {
                let ones: Vec<u32> = iota.iter().zip(tuple).map(|(&c, &t)| self.projection(t, &[c])).collect();
                self.allowed[symbol].as_ref().unwrap().contains(&ones)
            }
            DerivedSymbol::Compat { iota, iota2 } => {
                self.projection(tuple[0], iota) == self.projection(tuple[1], iota2)
            }
        }
    }

    pub fn contains_named(&self, name: &str, tuple: &[u32]) -> Result<bool> {
        let i = self
            .signature
            .index_of(name)
            .ok_or_else(|| Error::SignatureMismatch(format!("no symbol `{name}` in the orbit template")))?;
        Ok(self.contains(i, tuple))
    }

    /// Number of tuples in the explicit relations.
    pub fn explicit_tuples(&self) -> u128 {
        let n = self.size() as u128;
        let mut total = 0u128;
        for (i, sym) in self.symbols.iter().enumerate() {
            total += match sym {
                DerivedSymbol::Unary { .. } => self.unary[i].as_ref().unwrap().iter().filter(|&&b| b).count() as u128,
                DerivedSymbol::Hat { iota, .. } => {
                    let mut counts = vec![0u128; self.ktables[0].len()];
                    let mut sum = 0u128;
                    let allowed = self.allowed[i].as_ref().unwrap();
                    for row in allowed.iter() {
                        let mut prod = 1u128;
                        for (j, &o) in row.iter().enumerate() {
                            counts.iter_mut().for_each(|c| *c = 0);
                            for t in 0..n as u32 {
                                counts[self.projection(t, &[iota[j]]) as usize] += 1;
                            }
                            prod *= counts[o as usize];
                        }
                        sum += prod;
                    }
                    sum
                }
                DerivedSymbol::Compat { iota, iota2 } => {
                    let k = iota.len();
                    let mut a = vec![0u128; self.ktables[k - 1].len()];
                    let mut b = vec![0u128; self.ktables[k - 1].len()];
                    for t in 0..n as u32 {
                        a[self.projection(t, iota) as usize] += 1;
                        b[self.projection(t, iota2) as usize] += 1;
                    }
                    a.iter().zip(&b).map(|(x, y)| x * y).sum()
                }
            };
        }
        total
    }

    /// The template as an explicit structure, when it fits the caps.
    pub fn to_structure(&self, caps: &Caps) -> Result<FiniteStructure> {
        caps.check_domain("orbit template", self.size() as u128)?;
        caps.check_tuples("orbit template", self.explicit_tuples())?;
        let n = self.size() as u32;
        let mut rels = Vec::with_capacity(self.symbols.len());
        for (i, sym) in self.symbols.iter().enumerate() {
            let k = sym.arity();
            let mut flat = Vec::new();
            let mut t = vec![0u32; k];
            'all: loop {
                if self.contains(i, &t) {
                    flat.extend_from_slice(&t);
                }
                for slot in t.iter_mut().rev() {
                    *slot += 1;
                    if *slot < n {
                        continue 'all;
                    }
                    *slot = 0;
                }
                break;
            }
            rels.push(Relation::from_flat(k, flat));
        }
        let labels = (0..n).map(|t| format!("t{t}")).collect();
        FiniteStructure::from_relations(self.signature.clone(), n as usize, rels)?.with_labels(labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agespec::{builtin_linear_order, tuple_type_key};
    use crate::construct::full_power_finite;
    use crate::fixtures::chain;
    use crate::relcore::{decode_tuple, is_homomorphism};

    fn lt() -> Vec<String> {
        vec!["<".to_string()]
    }

    #[test]
    fn toy_two_types() {
        let lin = builtin_linear_order("<");
        assert!(OrbitTemplate::new(&lin, &lt(), 2, &Caps::default()).is_err());
        let o = OrbitTemplate::new_unchecked(&lin, &lt(), 2, &Caps::default()).unwrap();
        assert_eq!(o.size(), 3);
        let s = o.to_structure(&Caps::default()).unwrap();
        let r = s.relation_by_name("<@u[1,2]").unwrap();
        assert_eq!(r.len(), 1);
        let t = o.table().get(r.get(0)[0] as usize);
        assert_eq!(t.structure.relation(0).flat(), &[0, 1]);
        for sym in o.symbols() {
            if let DerivedSymbol::Compat { iota, iota2 } = sym {
                if iota == iota2 {
                    for x in 0..3 {
                        assert!(s.holds(&sym.name(), &[x, x]));
                    }
                }
            }
        }
    }

    /// The type map from a full power of an age member is a homomorphism,
    /// and the explicit tuple count agrees with the structure.
    #[test]
    fn quotient_map_is_homomorphism() {
        let lin = builtin_linear_order("<");
        for d in [2, 3] {
            let o = OrbitTemplate::new_unchecked(&lin, &lt(), d, &Caps::default()).unwrap();
            let s2 = o.to_structure(&Caps::default()).unwrap();
            assert_eq!(s2.total_tuples() as u128, o.explicit_tuples());
            for n in 1..=4 {
                let c = chain(n);
                let p = full_power_finite(&c, d, &Caps::default()).unwrap();
                let map: Vec<u32> = (0..p.size() as u32)
                    .map(|x| o.table().lookup(&tuple_type_key(&c, &decode_tuple(x, n, d))).unwrap() as u32)
                    .collect();
                assert!(is_homomorphism(&p, &s2, &map));
                if n >= 2 * d {
                    // Large enough chains realize every tuple of every relation.
                    let mut image = vec![Vec::new(); p.signature().len()];
                    for (i, r) in p.relations().iter().enumerate() {
                        for t in r.iter() {
                            image[i].extend(t.iter().map(|&x| map[x as usize]));
                        }
                    }
                    for (i, r) in s2.relations().iter().enumerate() {
                        assert_eq!(&Relation::from_flat(r.arity(), std::mem::take(&mut image[i])), r);
                    }
                }
            }
        }
    }

    #[test]
    fn representative_independence() {
        // Unary memberships read off any realization agree with the table.
        let lin = builtin_linear_order("<");
        let d = 3;
        let o = OrbitTemplate::new(&lin, &lt(), d, &Caps::default()).unwrap();
        for n in 1..=d + 1 {
            let c = chain(n);
            for x in 0..(n as u32).pow(d as u32) {
                let tu = decode_tuple(x, n, d);
                let t = o.table().lookup(&tuple_type_key(&c, &tu)).unwrap() as u32;
                for (i, sym) in o.symbols().iter().enumerate() {
                    if let DerivedSymbol::Unary { iota, .. } = sym {
                        let here = c.holds("<", &iota.iter().map(|&k| tu[k]).collect::<Vec<_>>());
                        assert_eq!(o.contains(i, &[t]), here);
                    }
                }
            }
        }
    }
}
