//! Homomorphisms from full powers into orbit templates.
//!
//! A map `h: Y^d → S2` is a homomorphism from the full power of `Y` iff all
//! its k-projections factor through `Y^k`: there are `H_k: Y^k → k-types`
//! with `proj_f(h(y)) = H_k(y ∘ f)` for every `f: [k] → [d]`. The search runs
//! over the `H_k` alone. A family `H` comes from some `h` iff on every
//! `min(d, |Y|)`-subset of `Y` it is the projection family of one type, so
//! that is the only constraint besides the ones `R@u` and `R@h` impose on
//! `H_k` and `H_1`. Identities of a polymorphism become identifications
//! of `H` values along maps of `Y`.

use std::collections::HashMap;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;

use crate::agespec::enumerate_d_types;
use crate::caps::{pow_u128, Caps};
use crate::construct::{functions, DerivedSymbol, OrbitTemplate, PcspTemplate};
use crate::error::{Error, Result};
use crate::polyfind::{satisfies_identity, IdentityKind, OperationTable};
use crate::relcore::search::Csp;
use crate::relcore::{decode_tuple, direct_power, encode_tuple, FiniteStructure, Relation};

/// A homomorphism from the `d`-th full power of `Y` into an orbit template.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullPowerSolution {
    pub y_size: usize,
    pub d: usize,
    /// `ktypes[k-1][c]`: the k-type assigned to `c ∈ Y^k` (power encoding).
    pub ktypes: Vec<Vec<u32>>,
    /// The type of each `y ∈ Y^d`, in the power encoding.
    pub map: Vec<u32>,
}

impl FullPowerSolution {
    pub fn image(&self, y: &[u32]) -> u32 {
        self.map[encode_tuple(y, self.y_size) as usize]
    }
}

fn combinations(n: usize, m: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut c: Vec<u32> = (0..m as u32).collect();
    if m > n {
        return out;
    }
    loop {
        out.push(c.clone());
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if (c[i] as usize) < n - m + i {
                break;
            }
        }
        c[i] += 1;
        for j in i + 1..m {
            c[j] = c[j - 1] + 1;
        }
    }
}

fn binomial(n: usize, m: usize) -> u128 {
    if m > n {
        return 0;
    }
    (0..m as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

struct Hidden<'a> {
    s2: &'a OrbitTemplate,
    ny: usize,
    kmax: usize,
    /// First raw variable of each k.
    offset: Vec<usize>,
    class: Vec<u32>,
    classes: usize,
}

impl Hidden<'_> {
    fn raw(&self, c: &[u32]) -> usize {
        self.offset[c.len() - 1] + encode_tuple(c, self.ny) as usize
    }

    fn var(&self, c: &[u32]) -> u32 {
        self.class[self.raw(c)]
    }
}

/// Solves for `h` with `h(y) = h(g ∘ y)` for every partial map `g` of `Y`
/// in `maps` and every `y` inside the domain of `g`.
fn solve_hidden(y: &FiniteStructure, s2: &OrbitTemplate, maps: &[Vec<Option<u32>>], caps: &Caps) -> Result<Option<FullPowerSolution>> {
    let base = s2.base_signature();
    if !y.signature().same_symbols(&base) {
        return Err(Error::SignatureMismatch(format!(
            "instance over {:?}, template over the full power of {:?}",
            y.signature().names().collect::<Vec<_>>(),
            base.names().collect::<Vec<_>>()
        )));
    }
    let ny = y.size();
    let d = s2.d();
    let kmax = s2.kmax();
    if ny == 0 {
        return Ok(Some(FullPowerSolution { y_size: 0, d, ktypes: vec![Vec::new(); kmax], map: Vec::new() }));
    }
    let raw_total: u128 = (1..=kmax).map(|k| pow_u128(ny, k)).sum();
    caps.check_domain("projection variables", raw_total)?;
    let mut offset = Vec::new();
    let mut acc = 0usize;
    for k in 1..=kmax {
        offset.push(acc);
        acc += ny.pow(k as u32);
    }
    let mut uf: UnionFind<u32> = UnionFind::new(acc);
    for g in maps {
        for k in 1..=kmax {
            'c: for code in 0..ny.pow(k as u32) as u32 {
                let c = decode_tuple(code, ny, k);
                let mut gc = Vec::with_capacity(k);
                for &x in &c {
                    match g[x as usize] {
                        Some(v) => gc.push(v),
                        None => continue 'c,
                    }
                }
                uf.union((offset[k - 1] + code as usize) as u32, (offset[k - 1] + encode_tuple(&gc, ny) as usize) as u32);
            }
        }
    }
    let mut class = vec![u32::MAX; acc];
    let mut root_class = vec![u32::MAX; acc];
    let mut classes = 0u32;
    for (x, slot) in class.iter_mut().enumerate() {
        let r = uf.find(x as u32) as usize;
        if root_class[r] == u32::MAX {
            root_class[r] = classes;
            classes += 1;
        }
        *slot = root_class[r];
    }
    caps.check_search_vars("full power search", classes as u128)?;
    let hv = Hidden { s2, ny, kmax, offset, class, classes: classes as usize };
    let Some(sol) = build_csp(&hv, y, caps)?.solve_first() else { return Ok(None) };
    let ktypes: Vec<Vec<u32>> = (1..=kmax)
        .map(|k| (0..ny.pow(k as u32)).map(|c| sol[hv.class[hv.offset[k - 1] + c] as usize]).collect())
        .collect();
    let map = assemble(&hv, &ktypes, caps)?;
    Ok(Some(FullPowerSolution { y_size: ny, d, ktypes, map }))
}

fn build_csp(hv: &Hidden, y: &FiniteStructure, caps: &Caps) -> Result<Csp> {
    let s2 = hv.s2;
    let spec = s2.spec();
    let mut csp = Csp::new();
    let mut kind_of_class = vec![0usize; hv.classes];
    for k in 1..=hv.kmax {
        for code in 0..hv.ny.pow(k as u32) {
            kind_of_class[hv.class[hv.offset[k - 1] + code] as usize] = k;
        }
    }
    for &k in &kind_of_class {
        csp.add_var(s2.ktable(k).len());
    }
    let mut done_unary = Vec::new();
    let mut done_hat = Vec::new();
    for (si, sym) in s2.symbols().iter().enumerate() {
        match sym {
            DerivedSymbol::Unary { base, iota } if !done_unary.contains(base) => {
                done_unary.push(base.clone());
                let r = spec.symbol(base)?;
                let k = iota.len();
                let ok: Vec<u32> = (0..s2.ktable(k).len() as u32)
                    .filter(|&t| {
                        let ty = s2.ktable(k).get(t as usize);
                        ty.structure.relation(r).contains(&ty.tuple())
                    })
                    .collect();
                for c in y.relation_by_name(base).unwrap().iter() {
                    csp.restrict(hv.var(c), ok.iter().copied());
                }
            }
            DerivedSymbol::Hat { base, .. } if !done_hat.contains(base) => {
                done_hat.push(base.clone());
                let allowed = Arc::new(s2.hat_allowed(si).unwrap().clone());
                for c in y.relation_by_name(base).unwrap().iter() {
                    let scope = c.iter().map(|&x| hv.var(&[x])).collect();
                    csp.add_table(scope, allowed.clone());
                }
            }
            _ => {}
        }
    }
    let d = s2.d();
    let m = d.min(hv.ny);
    let subsets = binomial(hv.ny, m);
    let owned;
    let mtable = if m == d {
        s2.table()
    } else {
        owned = enumerate_d_types(spec, m, caps)?;
        &owned
    };
    caps.check_tuples("subset constraints", subsets)?;
    let cols: Vec<Vec<usize>> = (1..=hv.kmax).flat_map(|k| functions(k, m)).collect();
    let mut flat = Vec::with_capacity(mtable.len() * cols.len());
    for t in mtable.types() {
        for f in &cols {
            let kt = s2.ktable(f.len());
            let i = kt
                .lookup(&t.project(f))
                .ok_or_else(|| Error::Invalid("a projection of a type is missing from the k-types".into()))?;
            flat.push(i as u32);
        }
    }
    let rows = Arc::new(Relation::from_flat(cols.len(), flat));
    let mut seen = std::collections::HashSet::new();
    for p in combinations(hv.ny, m) {
        let scope: Vec<u32> = cols.iter().map(|f| hv.var(&f.iter().map(|&i| p[i]).collect::<Vec<_>>())).collect();
        if seen.insert(scope.clone()) {
            csp.add_table(scope, rows.clone());
        }
    }
    Ok(csp)
}

/// Reads off `h` from a consistent family of projections: `h(y)` is the
/// least type whose projections are the `H_k(y ∘ f)`.
fn assemble(hv: &Hidden, ktypes: &[Vec<u32>], caps: &Caps) -> Result<Vec<u32>> {
    let s2 = hv.s2;
    let d = s2.d();
    caps.check_domain("full power", pow_u128(hv.ny, d))?;
    let fs: Vec<Vec<usize>> = (1..=hv.kmax).flat_map(|k| functions(k, d)).collect();
    let mut by_vector: HashMap<Vec<u32>, u32> = HashMap::new();
    for t in 0..s2.size() as u32 {
        let v: Vec<u32> = fs.iter().map(|f| s2.projection(t, f)).collect();
        by_vector.entry(v).or_insert(t);
    }
    let mut map = Vec::with_capacity(hv.ny.pow(d as u32));
    let mut v = vec![0u32; fs.len()];
    for code in 0..hv.ny.pow(d as u32) as u32 {
        let y = decode_tuple(code, hv.ny, d);
        for (slot, f) in v.iter_mut().zip(&fs) {
            let c: Vec<u32> = f.iter().map(|&i| y[i]).collect();
            *slot = ktypes[f.len() - 1][encode_tuple(&c, hv.ny) as usize];
        }
        let t = by_vector
            .get(&v)
            .ok_or_else(|| Error::Invalid(format!("no type has the projections assigned to {y:?}")))?;
        map.push(*t);
    }
    Ok(map)
}

/// A homomorphism from the `d`-th full power of `y` into `s2`, where `y` is
/// over the signature whose full power `s2` interprets.
pub fn find_full_power_hom(y: &FiniteStructure, s2: &OrbitTemplate, caps: &Caps) -> Result<Option<FullPowerSolution>> {
    solve_hidden(y, s2, &[], caps)
}

/// The least solution, read as an `n`-ary polymorphism `S1^n → S2` of a
/// generated template satisfying `kind`. `S1^n` is the full power of the
/// `n`-th power of the hatted structure, so this is a full-power
/// homomorphism search with identities imposed on the projections.
pub fn find_pcsp_polymorphism(t: &PcspTemplate, n: usize, kind: IdentityKind, caps: &Caps) -> Result<Option<OperationTable>> {
    kind.check_arity(n)?;
    let m = t.s_hat.size();
    let y = direct_power(&t.s_hat, n, caps)?;
    let maps: Vec<Vec<Option<u32>>> = kind
        .identity_groups(m)
        .into_iter()
        .map(|group| {
            let mut g = vec![None; y.size()];
            for (a, b) in group {
                g[encode_tuple(&a, m) as usize] = Some(encode_tuple(&b, m));
            }
            g
        })
        .collect();
    let Some(sol) = solve_hidden(&y, &t.s2, &maps, caps)? else { return Ok(None) };
    let n1 = t.s1.size();
    caps.check_domain("polymorphism table", pow_u128(n1, n))?;
    let d = t.d;
    let values = (0..n1.pow(n as u32) as u32)
        .map(|code| {
            let xs: Vec<Vec<u32>> = decode_tuple(code, n1, n).into_iter().map(|x| decode_tuple(x, m, d)).collect();
            let ybar: Vec<u32> = (0..d).map(|c| encode_tuple(&xs.iter().map(|x| x[c]).collect::<Vec<_>>(), m)).collect();
            sol.image(&ybar)
        })
        .collect();
    let f = OperationTable::new(n, n1, t.s2.size(), values)?;
    if !satisfies_identity(&f, kind)? {
        return Err(Error::Invalid("full power search returned a table violating the identities".into()));
    }
    Ok(Some(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agespec::builtin_linear_order;
    use crate::construct::{build_pcsp, full_power_finite, verify_into_orbit, BuildOptions};
    use crate::fixtures::{antichain, chain, directed_cycle};
    use crate::polyfind::find_polymorphism;
    use crate::relcore::find_homomorphism;

    fn lt() -> Vec<String> {
        vec!["<".to_string()]
    }

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(binomial(27, 4), 17550);
    }

    #[test]
    fn agrees_with_explicit_search_on_small_orders() {
        let lin = builtin_linear_order("<");
        let caps = Caps::default();
        for d in 2..=3 {
            let s2 = OrbitTemplate::new_unchecked(&lin, &lt(), d, &caps).unwrap();
            let explicit = s2.to_structure(&caps).unwrap();
            let cases = vec![chain(1), chain(2), chain(3), antichain(2), directed_cycle(2), directed_cycle(3)];
            for y in cases {
                let fp = full_power_finite(&y, d, &caps).unwrap();
                let direct = find_homomorphism(&fp, &explicit, false).unwrap();
                let hidden = find_full_power_hom(&y, &s2, &caps).unwrap();
                assert_eq!(direct.is_some(), hidden.is_some(), "d={d} {y:?}");
                if let Some(h) = hidden {
                    assert!(verify_into_orbit(&fp, &s2, &h.map));
                }
            }
        }
    }

    #[test]
    fn polymorphisms_agree_with_explicit_search() {
        // d = 2 and S = 3-chain over the plain order: small enough to build S2.
        let lin = builtin_linear_order("<");
        let caps = Caps::default();
        let s2 = OrbitTemplate::new_unchecked(&lin, &lt(), 2, &caps).unwrap();
        let explicit = s2.to_structure(&caps).unwrap();
        for s in [chain(2), chain(3)] {
            let s1 = full_power_finite(&s, 2, &caps).unwrap();
            let hom = find_homomorphism(&s1, &explicit, false).unwrap().unwrap().map;
            let t = PcspTemplate {
                s1: s1.clone(),
                s_hat: s.clone(),
                s2: s2.clone(),
                d: 2,
                hom,
                provenance: crate::construct::Provenance {
                    spec: "toy".into(),
                    tau: lt(),
                    s_size: s.size(),
                    with_i4: false,
                    d_override: None,
                    bhat: "toy".into(),
                    tau_hat: lt(),
                },
            };
            for (n, kind) in [(2, IdentityKind::Commutative), (2, IdentityKind::None), (3, IdentityKind::Cyclic(3))] {
                let a = find_pcsp_polymorphism(&t, n, kind, &caps).unwrap();
                let b = find_polymorphism(&s1, &explicit, n, kind, &caps).unwrap();
                assert_eq!(a.is_some(), b.is_some(), "|S|={} n={n} {kind:?}", s.size());
                if let Some(f) = a {
                    assert!(crate::polyfind::preserves(&f, &s1, &explicit).unwrap());
                }
            }
        }
    }

    #[test]
    fn demo_template_has_no_small_cyclic_polymorphism_for_n2() {
        let lin = builtin_linear_order("<");
        let t = build_pcsp(&lin, &lt(), &chain(3), &BuildOptions::default()).unwrap();
        let caps = Caps::default();
        assert!(find_pcsp_polymorphism(&t, 2, IdentityKind::Cyclic(2), &caps).unwrap().is_none());
        // Without identities the type map itself is a witness for n = 1.
        assert!(find_pcsp_polymorphism(&t, 1, IdentityKind::None, &caps).unwrap().is_some());
    }
}
