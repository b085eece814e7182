use std::fmt;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::relcore::{decode_tuple, encode_tuple, FiniteStructure, Relation, Signature};

/// A relation of the full power, with 0-based coordinate maps.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DerivedSymbol {
    /// `R@u[ι]`: unary, `R` holds on the coordinates picked by the injection `ι`.
    Unary { base: String, iota: Vec<usize> },
    /// `R@h[ι]`: k-ary, `R` holds on `(x1[ι1], ..., xk[ιk])`.
    Hat { base: String, iota: Vec<usize> },
    /// `S@c{k}[ι|ι']`: binary, the `ι`-projection of the first argument equals
    /// the `ι'`-projection of the second.
    Compat { iota: Vec<usize>, iota2: Vec<usize> },
}

fn one_based(v: &[usize]) -> String {
    v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for DerivedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivedSymbol::Unary { base, iota } => write!(f, "{base}@u[{}]", one_based(iota)),
            DerivedSymbol::Hat { base, iota } => write!(f, "{base}@h[{}]", one_based(iota)),
            DerivedSymbol::Compat { iota, iota2 } => {
                write!(f, "S@c{{{}}}[{}|{}]", iota.len(), one_based(iota), one_based(iota2))
            }
        }
    }
}

impl DerivedSymbol {
    pub fn name(&self) -> String {
        self.to_string()
    }

    pub fn arity(&self) -> usize {
        match self {
            DerivedSymbol::Unary { .. } => 1,
            DerivedSymbol::Hat { iota, .. } => iota.len(),
            DerivedSymbol::Compat { .. } => 2,
        }
    }

    /// Inverse of [`DerivedSymbol::name`].
    pub fn parse(name: &str) -> Result<DerivedSymbol> {
        let bad = || Error::Invalid(format!("`{name}` is not a full-power symbol name"));
        let list = |s: &str| -> Result<Vec<usize>> {
            s.split(',')
                .map(|p| match p.parse::<usize>() {
                    Ok(i) if i >= 1 => Ok(i - 1),
                    _ => Err(bad()),
                })
                .collect()
        };
        let (base, rest) = name.rsplit_once('@').ok_or_else(bad)?;
        if base.is_empty() {
            return Err(bad());
        }
        let inner = |r: &str, open: &str| -> Result<String> {
            r.strip_prefix(open).and_then(|r| r.strip_suffix(']')).map(str::to_string).ok_or_else(bad)
        };
        if let Some(r) = rest.strip_prefix('u') {
            return Ok(DerivedSymbol::Unary { base: base.into(), iota: list(&inner(r, "[")?)? });
        }
        if let Some(r) = rest.strip_prefix('h') {
            return Ok(DerivedSymbol::Hat { base: base.into(), iota: list(&inner(r, "[")?)? });
        }
        if let Some(r) = rest.strip_prefix("c{") {
            if base != "S" {
                return Err(bad());
            }
            let (k, r) = r.split_once('}').ok_or_else(bad)?;
            let k: usize = k.parse().map_err(|_| bad())?;
            let body = inner(r, "[")?;
            let (a, b) = body.split_once('|').ok_or_else(bad)?;
            let (iota, iota2) = (list(a)?, list(b)?);
            if iota.len() != k || iota2.len() != k {
                return Err(bad());
            }
            return Ok(DerivedSymbol::Compat { iota, iota2 });
        }
        Err(bad())
    }
}

/// All maps `[k] → [d]` in lexicographic order.
pub fn functions(k: usize, d: usize) -> Vec<Vec<usize>> {
    (0..d.pow(k as u32))
        .map(|code| {
            let mut t = vec![0usize; k];
            let mut c = code;
            for slot in t.iter_mut().rev() {
                *slot = c % d;
                c /= d;
            }
            t
        })
        .collect()
}

/// Injective maps `[k] → [d]` in lexicographic order.
pub fn injections(k: usize, d: usize) -> Vec<Vec<usize>> {
    functions(k, d)
        .into_iter()
        .filter(|f| {
            let mut s = f.clone();
            s.sort_unstable();
            s.windows(2).all(|w| w[0] != w[1])
        })
        .collect()
}

/// The derived symbols of the `d`-th full power, in signature order: for each
/// base symbol its unary then hatted relations, then the compatibility
/// relations for each `k` up to the largest arity.
pub fn full_power_symbols(sig: &Signature, d: usize) -> Result<Vec<DerivedSymbol>> {
    if d == 0 {
        return Err(Error::Invalid("d must be at least 1".into()));
    }
    let mut out = Vec::new();
    for s in sig.symbols() {
        if s.arity > d {
            return Err(Error::Invalid(format!("`{}` has arity {} > d = {d}", s.name, s.arity)));
        }
        if s.name.contains('@') {
            return Err(Error::Invalid(format!("base symbol `{}` may not contain `@`", s.name)));
        }
        for iota in injections(s.arity, d) {
            out.push(DerivedSymbol::Unary { base: s.name.clone(), iota });
        }
        for iota in functions(s.arity, d) {
            out.push(DerivedSymbol::Hat { base: s.name.clone(), iota });
        }
    }
    for k in 1..=sig.max_arity() {
        let fs = functions(k, d);
        for a in &fs {
            for b in &fs {
                out.push(DerivedSymbol::Compat { iota: a.clone(), iota2: b.clone() });
            }
        }
    }
    Ok(out)
}

pub fn full_power_signature(sig: &Signature, d: usize) -> Result<Signature> {
    Signature::new(full_power_symbols(sig, d)?.iter().map(|s| (s.name(), s.arity())))
}

/// `S^(d)` on `S^d`, encoded as in [`crate::relcore::direct_power`].
pub fn full_power_finite(s: &FiniteStructure, d: usize, caps: &Caps) -> Result<FiniteStructure> {
    let symbols = full_power_symbols(s.signature(), d)?;
    let m = s.size();
    let n = crate::caps::pow_u128(m, d);
    caps.check_domain("domain", n)?;
    let n = n as usize;
    let elems: Vec<Vec<u32>> = (0..n as u32).map(|x| decode_tuple(x, m, d)).collect();
    // by_coord[c][v]: elements whose coordinate c equals v.
    let mut by_coord = vec![vec![Vec::new(); m]; d];
    for (x, e) in elems.iter().enumerate() {
        for c in 0..d {
            by_coord[c][e[c] as usize].push(x as u32);
        }
    }
    let mut total: u128 = 0;
    let mut rels = Vec::with_capacity(symbols.len());
    for sym in &symbols {
        let mut flat: Vec<u32> = Vec::new();
        match sym {
            DerivedSymbol::Unary { base, iota } => {
                let r = s.relation_by_name(base).unwrap();
                for (x, e) in elems.iter().enumerate() {
                    let t: Vec<u32> = iota.iter().map(|&c| e[c]).collect();
                    if r.contains(&t) {
                        flat.push(x as u32);
                    }
                }
            }
            DerivedSymbol::Hat { base, iota } => {
                let r = s.relation_by_name(base).unwrap();
                let k = iota.len();
                let per = crate::caps::pow_u128(m, k * (d - 1));
                total += per * r.len() as u128;
                caps.check_tuples("tuples", total)?;
                for t in r.iter() {
                    let lists: Vec<&Vec<u32>> = (0..k).map(|j| &by_coord[iota[j]][t[j] as usize]).collect();
                    let mut idx = vec![0usize; k];
                    'prod: loop {
                        flat.extend((0..k).map(|j| lists[j][idx[j]]));
                        for j in (0..k).rev() {
                            idx[j] += 1;
                            if idx[j] < lists[j].len() {
                                continue 'prod;
                            }
                            idx[j] = 0;
                        }
                        break;
                    }
                }
            }
            DerivedSymbol::Compat { iota, iota2 } => {
                for (x, e) in elems.iter().enumerate() {
                    let mut fixed: Vec<Option<u32>> = vec![None; d];
                    let mut ok = true;
                    for (a, b) in iota.iter().zip(iota2) {
                        match fixed[*b] {
                            Some(v) if v != e[*a] => ok = false,
                            _ => fixed[*b] = Some(e[*a]),
                        }
                    }
                    if !ok {
                        continue;
                    }
                    let free: Vec<usize> = (0..d).filter(|&c| fixed[c].is_none()).collect();
                    let mut y: Vec<u32> = fixed.iter().map(|v| v.unwrap_or(0)).collect();
                    total += crate::caps::pow_u128(m, free.len());
                    caps.check_tuples("tuples", total)?;
                    for code in 0..m.pow(free.len() as u32) as u32 {
                        let vals = decode_tuple(code, m, free.len());
                        for (c, v) in free.iter().zip(vals) {
                            y[*c] = v;
                        }
                        flat.extend([x as u32, encode_tuple(&y, m)]);
                    }
                }
            }
        }
        if !matches!(sym, DerivedSymbol::Hat { .. } | DerivedSymbol::Compat { .. }) {
            total += flat.len() as u128;
            caps.check_tuples("tuples", total)?;
        }
        rels.push(Relation::from_flat(sym.arity(), flat));
    }
    let sig = Signature::new(symbols.iter().map(|s| (s.name(), s.arity())))?;
    FiniteStructure::from_relations(sig, n, rels)
}

/// The full power of an instance; the same construction as for templates.
pub fn full_power_instance(j: &FiniteStructure, d: usize, caps: &Caps) -> Result<FiniteStructure> {
    full_power_finite(j, d, caps)
}
