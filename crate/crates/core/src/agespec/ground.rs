//! Grounding of clause specs over a fixed finite domain and a small DPLL
//! solver that enumerates or finds labeled models.

use crate::agespec::{Atom, BoundSpec};
use crate::error::{Error, Result};
use crate::relcore::{decode_tuple, encode_tuple, FiniteStructure, Relation};

/// Propositional literal: `2 * atom` is positive, `2 * atom + 1` negative.
type Lit = u32;

fn neg(l: Lit) -> Lit {
    l ^ 1
}

/// The ground atoms of a signature over `0..m`, ordered by largest element,
/// then symbol, then tuple.
pub(crate) struct AtomSpace {
    m: usize,
    arities: Vec<usize>,
    offsets: Vec<usize>,
    /// Dense (symbol, encoded tuple) index to search order.
    order: Vec<u32>,
    /// Search order to (symbol, encoded tuple).
    atoms: Vec<(usize, u32)>,
}

impl AtomSpace {
    pub(crate) fn new(arities: &[usize], m: usize) -> AtomSpace {
        let mut offsets = Vec::with_capacity(arities.len());
        let mut total = 0usize;
        for &k in arities {
            offsets.push(total);
            total += m.pow(k as u32);
        }
        let mut atoms = Vec::with_capacity(total);
        for top in 0..m as u32 {
            for (s, &k) in arities.iter().enumerate() {
                for code in 0..m.pow(k as u32) as u32 {
                    let t = decode_tuple(code, m, k);
                    if t.iter().copied().max() == Some(top) {
                        atoms.push((s, code));
                    }
                }
            }
        }
        let mut order = vec![0u32; total];
        for (i, &(s, code)) in atoms.iter().enumerate() {
            order[offsets[s] + code as usize] = i as u32;
        }
        AtomSpace { m, arities: arities.to_vec(), offsets, order, atoms }
    }

    pub(crate) fn len(&self) -> usize {
        self.atoms.len()
    }

    pub(crate) fn atom(&self, symbol: usize, tuple: &[u32]) -> u32 {
        self.order[self.offsets[symbol] + encode_tuple(tuple, self.m) as usize]
    }

    /// The structure whose tuples are the true atoms of `model`.
    pub(crate) fn decode(&self, model: &[bool]) -> Vec<Relation> {
        let mut flat: Vec<Vec<u32>> = vec![Vec::new(); self.arities.len()];
        for (i, &(s, code)) in self.atoms.iter().enumerate() {
            if model[i] {
                flat[s].extend(decode_tuple(code, self.m, self.arities[s]));
            }
        }
        flat.into_iter().zip(&self.arities).map(|(f, &k)| Relation::from_flat(k, f)).collect()
    }
}

/// Ground CNF of a spec over `0..m`. `None` means some ground clause is empty.
pub(crate) fn ground_clauses(spec: &BoundSpec, space: &AtomSpace) -> Option<Vec<Vec<Lit>>> {
    let m = space.m;
    let mut out: Vec<Vec<Lit>> = Vec::new();
    for clause in spec.clause_form() {
        let n = clause.variable_count;
        if m == 0 {
            continue;
        }
        let mut asg = vec![0u32; n];
        'assign: loop {
            let mut lits: Vec<Lit> = Vec::new();
            let mut satisfied = false;
            for l in &clause.literals {
                match &l.atom {
                    Atom::Eq(x, y) => {
                        if (asg[*x] == asg[*y]) == l.positive {
                            satisfied = true;
                            break;
                        }
                    }
                    Atom::Rel { symbol, args } => {
                        let t: Vec<u32> = args.iter().map(|&a| asg[a]).collect();
                        let a = space.atom(*symbol, &t);
                        lits.push(2 * a + u32::from(!l.positive));
                    }
                }
            }
            if !satisfied {
                lits.sort_unstable();
                lits.dedup();
                let tautology = lits.windows(2).any(|w| w[0] ^ 1 == w[1]);
                if !tautology {
                    if lits.is_empty() {
                        return None;
                    }
                    out.push(lits);
                }
            }
            for slot in asg.iter_mut().rev() {
                *slot += 1;
                if (*slot as usize) < m {
                    continue 'assign;
                }
                *slot = 0;
            }
            break;
        }
    }
    out.sort_unstable();
    out.dedup();
    Some(out)
}

/// DPLL with occurrence lists; decisions follow atom order, false first.
pub(crate) struct Dpll {
    clauses: Vec<Vec<Lit>>,
    /// For each literal, clauses containing its negation.
    watch: Vec<Vec<usize>>,
    value: Vec<i8>,
    trail: Vec<u32>,
}

impl Dpll {
    pub(crate) fn new(num_atoms: usize, clauses: Vec<Vec<Lit>>) -> Dpll {
        let mut watch = vec![Vec::new(); 2 * num_atoms];
        for (ci, c) in clauses.iter().enumerate() {
            for &l in c {
                watch[neg(l) as usize].push(ci);
            }
        }
        Dpll { clauses, watch, value: vec![-1; num_atoms], trail: Vec::new() }
    }

    fn lit_value(&self, l: Lit) -> i8 {
        let v = self.value[(l >> 1) as usize];
        if v < 0 {
            -1
        } else {
            (v == 1) as i8 ^ (l & 1) as i8
        }
    }

    fn assign(&mut self, l: Lit) {
        self.value[(l >> 1) as usize] = ((l & 1) == 0) as i8;
        self.trail.push(l >> 1);
    }

    /// Makes the given literals true and propagates; false on conflict.
    fn enqueue(&mut self, start: &[Lit]) -> bool {
        let mut queue: Vec<Lit> = Vec::new();
        for &l in start {
            match self.lit_value(l) {
                1 => {}
                0 => return false,
                _ => {
                    self.assign(l);
                    queue.push(l);
                }
            }
        }
        while let Some(l) = queue.pop() {
            for wi in 0..self.watch[l as usize].len() {
                let ci = self.watch[l as usize][wi];
                let mut unit = None;
                let mut open = 0;
                let mut sat = false;
                for &x in &self.clauses[ci] {
                    match self.lit_value(x) {
                        1 => {
                            sat = true;
                            break;
                        }
                        -1 => {
                            open += 1;
                            unit = Some(x);
                        }
                        _ => {}
                    }
                }
                if sat {
                    continue;
                }
                match open {
                    0 => return false,
                    1 => {
                        let u = unit.unwrap();
                        self.assign(u);
                        queue.push(u);
                    }
                    _ => {}
                }
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        for a in self.trail.drain(mark..) {
            self.value[a as usize] = -1;
        }
    }

    /// Root propagation of unit clauses and the given assumptions.
    pub(crate) fn start(&mut self, assumptions: &[Lit]) -> bool {
        if self.clauses.iter().any(|c| c.is_empty()) {
            return false;
        }
        let units: Vec<Lit> = self.clauses.iter().filter(|c| c.len() == 1).map(|c| c[0]).collect();
        self.enqueue(&units) && self.enqueue(assumptions)
    }

    /// Visits every model extending the current root assignment, in
    /// lexicographic order of the atom sequence with false < true.
    pub(crate) fn for_each_model(&mut self, visit: &mut dyn FnMut(&[bool]) -> bool) -> bool {
        let next = self.value.iter().position(|&v| v < 0);
        let Some(a) = next else {
            let model: Vec<bool> = self.value.iter().map(|&v| v == 1).collect();
            return visit(&model);
        };
        for lit in [2 * a as u32 + 1, 2 * a as u32] {
            let mark = self.trail.len();
            if self.enqueue(&[lit]) && !self.for_each_model(visit) {
                self.undo(mark);
                return false;
            }
            self.undo(mark);
        }
        true
    }
}

/// Calls `visit` on each labeled model of `spec` over `0..m` until it
/// returns false.
pub(crate) fn visit_models(
    spec: &BoundSpec,
    m: usize,
    visit: &mut dyn FnMut(Vec<Relation>) -> bool,
) {
    let arities: Vec<usize> = spec.signature.symbols().iter().map(|s| s.arity).collect();
    let space = AtomSpace::new(&arities, m);
    let Some(clauses) = ground_clauses(spec, &space) else {
        return;
    };
    let mut dpll = Dpll::new(space.len(), clauses);
    if !dpll.start(&[]) {
        return;
    }
    dpll.for_each_model(&mut |model| visit(space.decode(model)));
}

/// Expands `partial`, whose symbols are a subset of the spec's, to a member
/// of the age; the least such expansion in search order, or `None`.
pub fn find_expansion(spec: &BoundSpec, partial: &FiniteStructure) -> Result<Option<FiniteStructure>> {
    let mut fixed: Vec<usize> = Vec::new();
    for sym in partial.signature().symbols() {
        match spec.signature.index_of(&sym.name) {
            Some(i) if spec.signature.symbol(i).arity == sym.arity => fixed.push(i),
            _ => {
                return Err(Error::SignatureMismatch(format!(
                    "`{}/{}` is not a symbol of spec `{}`",
                    sym.name, sym.arity, spec.name
                )))
            }
        }
    }
    let m = partial.size();
    let arities: Vec<usize> = spec.signature.symbols().iter().map(|s| s.arity).collect();
    let space = AtomSpace::new(&arities, m);
    let Some(clauses) = ground_clauses(spec, &space) else {
        return Ok(None);
    };
    let mut assumptions = Vec::new();
    for (pi, &si) in fixed.iter().enumerate() {
        let rel = partial.relation(pi);
        for code in 0..m.pow(arities[si] as u32) as u32 {
            let t = decode_tuple(code, m, arities[si]);
            let a = space.atom(si, &t);
            assumptions.push(2 * a + u32::from(!rel.contains(&t)));
        }
    }
    let mut dpll = Dpll::new(space.len(), clauses);
    if !dpll.start(&assumptions) {
        return Ok(None);
    }
    let mut found = None;
    dpll.for_each_model(&mut |model| {
        found = Some(space.decode(model));
        false
    });
    match found {
        None => Ok(None),
        Some(rels) => {
            let mut out = FiniteStructure::from_relations(spec.signature.clone(), m, rels)?;
            if let Some(l) = partial.labels() {
                out = out.with_labels(l.to_vec())?;
            }
            Ok(Some(out))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agespec::builtin_linear_order;
    use crate::fixtures::{antichain, chain, directed_cycle};
    use crate::relcore::Signature;

    fn count(spec: &BoundSpec, m: usize) -> usize {
        let mut n = 0;
        visit_models(spec, m, &mut |_| {
            n += 1;
            true
        });
        n
    }

    #[test]
    fn linear_order_models_are_permutations() {
        let lin = builtin_linear_order("<");
        assert_eq!(count(&lin, 0), 1);
        assert_eq!(count(&lin, 1), 1);
        assert_eq!(count(&lin, 3), 6);
        assert_eq!(count(&lin, 4), 24);
        assert_eq!(count(&lin, 5), 120);
    }

    #[test]
    fn models_are_members_and_distinct() {
        let lin = builtin_linear_order("<");
        let mut seen = std::collections::BTreeSet::new();
        visit_models(&lin, 4, &mut |rels| {
            let f = FiniteStructure::from_relations(lin.signature.clone(), 4, rels).unwrap();
            assert!(lin.in_age(&f).unwrap());
            assert!(seen.insert(f.relation_key()));
            true
        });
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn expansion_of_reducts() {
        let lin = builtin_linear_order("<");
        let empty = FiniteStructure::empty(Signature::new(Vec::<(String, usize)>::new()).unwrap(), 3);
        let e = find_expansion(&lin, &empty).unwrap().unwrap();
        assert!(lin.in_age(&e).unwrap());
        assert_eq!(find_expansion(&lin, &chain(3)).unwrap().unwrap(), chain(3));
        assert!(find_expansion(&lin, &directed_cycle(3)).unwrap().is_none());
        assert!(find_expansion(&lin, &antichain(2)).unwrap().is_none());
    }

    #[test]
    fn unknown_symbol_in_partial() {
        let lin = builtin_linear_order("<");
        let other = FiniteStructure::empty(Signature::new([("R", 2)]).unwrap(), 2);
        assert!(matches!(find_expansion(&lin, &other), Err(Error::SignatureMismatch(_))));
    }
}
