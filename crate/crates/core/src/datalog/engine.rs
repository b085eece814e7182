use std::collections::{HashMap, HashSet};

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::relcore::{FiniteStructure, Relation, Signature};

/// A database is a finite structure over the EDB (or EDB + IDB) signature.
pub type Database = FiniteStructure;

/// `pred(v1, ..., vk)` over rule-local variable indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredAtom {
    pub pred: String,
    pub args: Vec<usize>,
}

impl PredAtom {
    pub fn new(pred: &str, args: &[usize]) -> PredAtom {
        PredAtom { pred: pred.to_string(), args: args.to_vec() }
    }
}

/// `head <- body, equalities`. Variables are `0..var_names.len()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub var_names: Vec<String>,
    pub head: PredAtom,
    pub body: Vec<PredAtom>,
    pub equalities: Vec<(usize, usize)>,
}

/// An existential conjunctive query over the derived database.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Goal {
    pub variable_count: usize,
    pub atoms: Vec<PredAtom>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatalogProgram {
    pub edb: Signature,
    pub idb: Signature,
    pub rules: Vec<Rule>,
    pub goal: Option<Goal>,
}

/// A rule after equalities are unified: variables renumbered densely,
/// `free` variables occur only in the head and range over the domain.
#[derive(Clone, Debug)]
struct Compiled {
    head_pred: usize,
    head: Vec<usize>,
    body: Vec<(usize, Vec<usize>)>,
    vars: usize,
    free: Vec<usize>,
}

impl DatalogProgram {
    pub fn new(edb: Signature, idb: Signature, rules: Vec<Rule>, goal: Option<Goal>) -> Result<DatalogProgram> {
        let all = edb.disjoint_union(&idb)?;
        let check = |a: &PredAtom, vars: usize, what: &str| -> Result<()> {
            let ar = all
                .arity_of(&a.pred)
                .ok_or_else(|| Error::Invalid(format!("{what}: unknown predicate `{}`", a.pred)))?;
            if ar != a.args.len() {
                return Err(Error::Invalid(format!(
                    "{what}: `{}` has arity {ar}, used with {} arguments",
                    a.pred,
                    a.args.len()
                )));
            }
            if a.args.iter().any(|&v| v >= vars) {
                return Err(Error::Invalid(format!("{what}: variable out of range in `{}`", a.pred)));
            }
            Ok(())
        };
        for (i, r) in rules.iter().enumerate() {
            let what = format!("rule {}", i + 1);
            let n = r.var_names.len();
            check(&r.head, n, &what)?;
            if idb.index_of(&r.head.pred).is_none() {
                return Err(Error::Invalid(format!("{what}: head `{}` is not an IDB predicate", r.head.pred)));
            }
            for a in &r.body {
                check(a, n, &what)?;
            }
            if r.equalities.iter().any(|&(x, y)| x >= n || y >= n) {
                return Err(Error::Invalid(format!("{what}: variable out of range in an equality")));
            }
            let mut in_body = vec![false; n];
            for a in &r.body {
                a.args.iter().for_each(|&v| in_body[v] = true);
            }
            for &(x, y) in &r.equalities {
                in_body[x] = true;
                in_body[y] = true;
            }
            if let Some(&v) = r.head.args.iter().find(|&&v| !in_body[v]) {
                return Err(Error::Invalid(format!(
                    "{what}: unsafe rule, head variable `{}` does not occur in the body",
                    r.var_names[v]
                )));
            }
        }
        if let Some(g) = &goal {
            for a in &g.atoms {
                check(a, g.variable_count, "goal")?;
            }
        }
        Ok(DatalogProgram { edb, idb, rules, goal })
    }

    /// EDB then IDB symbols.
    pub fn full_signature(&self) -> Signature {
        self.edb.disjoint_union(&self.idb).expect("checked at construction")
    }

    fn compile(&self) -> Vec<Compiled> {
        let all = self.full_signature();
        self.rules
            .iter()
            .map(|r| {
                let n = r.var_names.len();
                let mut uf = UnionFind::<usize>::new(n.max(1));
                for &(x, y) in &r.equalities {
                    uf.union(x, y);
                }
                let mut dense: HashMap<usize, usize> = HashMap::new();
                let mut id = |v: usize| {
                    let root = uf.find(v);
                    let next = dense.len();
                    *dense.entry(root).or_insert(next)
                };
                let body: Vec<(usize, Vec<usize>)> = r
                    .body
                    .iter()
                    .map(|a| (all.index_of(&a.pred).unwrap(), a.args.iter().map(|&v| id(v)).collect()))
                    .collect();
                let mut bound = 0;
                for (_, args) in &body {
                    bound = args.iter().fold(bound, |b, &v| b.max(v + 1));
                }
                let head: Vec<usize> = r.head.args.iter().map(|&v| id(v)).collect();
                let vars = head.iter().fold(bound, |b, &v| b.max(v + 1));
                let mut free: Vec<usize> = head.iter().copied().filter(|&v| v >= bound).collect();
                free.sort_unstable();
                free.dedup();
                Compiled { head_pred: all.index_of(&r.head.pred).unwrap(), head, body, vars, free }
            })
            .collect()
    }
}

/// Facts per predicate of the full signature.
struct Facts {
    all: Vec<HashSet<Vec<u32>>>,
    lists: Vec<Vec<Vec<u32>>>,
}

impl Facts {
    fn insert(&mut self, p: usize, t: Vec<u32>) -> bool {
        if self.all[p].insert(t.clone()) {
            self.lists[p].push(t);
            true
        } else {
            false
        }
    }
}

/// Source of tuples for one body position: `lists[p][lo..hi]`.
fn join(
    rule: &Compiled,
    ranges: &[(usize, usize)],
    facts: &Facts,
    domain: u32,
    out: &mut Vec<Vec<u32>>,
) {
    let mut binding: Vec<Option<u32>> = vec![None; rule.vars];
    fn go(
        i: usize,
        rule: &Compiled,
        ranges: &[(usize, usize)],
        facts: &Facts,
        domain: u32,
        binding: &mut Vec<Option<u32>>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if i == rule.body.len() {
            emit_free(0, rule, domain, binding, out);
            return;
        }
        let (p, args) = &rule.body[i];
        let (lo, hi) = ranges[i];
        for t in &facts.lists[*p][lo..hi] {
            let mut set = Vec::new();
            let mut ok = true;
            for (&v, &x) in args.iter().zip(t) {
                match binding[v] {
                    Some(y) if y != x => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        binding[v] = Some(x);
                        set.push(v);
                    }
                }
            }
            if ok {
                go(i + 1, rule, ranges, facts, domain, binding, out);
            }
            for v in set {
                binding[v] = None;
            }
        }
    }
    fn emit_free(j: usize, rule: &Compiled, domain: u32, binding: &mut Vec<Option<u32>>, out: &mut Vec<Vec<u32>>) {
        if j == rule.free.len() {
            out.push(rule.head.iter().map(|&v| binding[v].unwrap()).collect());
            return;
        }
        let v = rule.free[j];
        for x in 0..domain {
            binding[v] = Some(x);
            emit_free(j + 1, rule, domain, binding, out);
        }
        binding[v] = None;
    }
    go(0, rule, ranges, facts, domain, &mut binding, out);
}

fn load(p: &DatalogProgram, db: &Database) -> Result<(Signature, Facts)> {
    if let Some(m) = db.signature().mismatch(&p.edb) {
        return Err(Error::SignatureMismatch(format!("database vs EDB: {m}")));
    }
    let all = p.full_signature();
    let mut facts = Facts { all: vec![HashSet::new(); all.len()], lists: vec![Vec::new(); all.len()] };
    for (i, s) in p.edb.symbols().iter().enumerate() {
        for t in db.relation_by_name(&s.name).unwrap().iter() {
            facts.insert(i, t.to_vec());
        }
    }
    Ok((all, facts))
}

fn finish(all: Signature, db: &Database, facts: Facts) -> Result<Database> {
    let rels = all
        .symbols()
        .iter()
        .zip(facts.lists)
        .map(|(s, l)| Relation::from_tuples(s.arity, l))
        .collect();
    let mut out = FiniteStructure::from_relations(all, db.size(), rels)?;
    if let Some(l) = db.labels() {
        out = out.with_labels(l.to_vec())?;
    }
    Ok(out)
}

/// Least fixpoint of the rules over `db`, by semi-naive iteration.
pub fn evaluate(p: &DatalogProgram, db: &Database) -> Result<Database> {
    let (all, mut facts) = load(p, db)?;
    let rules = p.compile();
    let n_edb = p.edb.len();
    let domain = db.size() as u32;
    // [old_end, delta_end) is the delta of each predicate.
    let mut old_end = vec![0usize; all.len()];
    let mut delta_end: Vec<usize> = facts.lists.iter().map(Vec::len).collect();
    let mut first = true;
    loop {
        let mut derived: Vec<(usize, Vec<u32>)> = Vec::new();
        let mut buf = Vec::new();
        for r in &rules {
            let idb_pos: Vec<usize> = (0..r.body.len()).filter(|&i| r.body[i].0 >= n_edb).collect();
            if first {
                let ranges: Vec<(usize, usize)> = r.body.iter().map(|(q, _)| (0, delta_end[*q])).collect();
                join(r, &ranges, &facts, domain, &mut buf);
            } else {
                for &d in &idb_pos {
                    let ranges: Vec<(usize, usize)> = r
                        .body
                        .iter()
                        .enumerate()
                        .map(|(i, (q, _))| match i.cmp(&d) {
                            std::cmp::Ordering::Less if *q >= n_edb => (0, old_end[*q]),
                            std::cmp::Ordering::Equal => (old_end[*q], delta_end[*q]),
                            _ => (0, delta_end[*q]),
                        })
                        .collect();
                    join(r, &ranges, &facts, domain, &mut buf);
                }
            }
            derived.extend(buf.drain(..).map(|t| (r.head_pred, t)));
        }
        first = false;
        old_end.clone_from(&delta_end);
        let mut any = false;
        for (q, t) in derived {
            any |= facts.insert(q, t);
        }
        delta_end = facts.lists.iter().map(Vec::len).collect();
        if !any {
            break;
        }
    }
    finish(all, db, facts)
}

/// Naive iteration: every rule re-evaluated on all facts until nothing changes.
pub fn evaluate_naive(p: &DatalogProgram, db: &Database) -> Result<Database> {
    let (all, mut facts) = load(p, db)?;
    let rules = p.compile();
    let domain = db.size() as u32;
    loop {
        let mut buf = Vec::new();
        let mut derived = Vec::new();
        for r in &rules {
            let ranges: Vec<(usize, usize)> = r.body.iter().map(|(q, _)| (0, facts.lists[*q].len())).collect();
            join(r, &ranges, &facts, domain, &mut buf);
            derived.extend(buf.drain(..).map(|t| (r.head_pred, t)));
        }
        let mut any = false;
        for (q, t) in derived {
            any |= facts.insert(q, t);
        }
        if !any {
            break;
        }
    }
    finish(all, db, facts)
}

/// Does one application of every rule to `full` (over EDB + IDB) add nothing?
pub fn is_closed(p: &DatalogProgram, full: &Database) -> Result<bool> {
    let all = p.full_signature();
    if let Some(m) = full.signature().mismatch(&all) {
        return Err(Error::SignatureMismatch(m));
    }
    let mut facts = Facts { all: vec![HashSet::new(); all.len()], lists: vec![Vec::new(); all.len()] };
    for (i, s) in all.symbols().iter().enumerate() {
        for t in full.relation_by_name(&s.name).unwrap().iter() {
            facts.insert(i, t.to_vec());
        }
    }
    let mut buf = Vec::new();
    for r in &p.compile() {
        let ranges: Vec<(usize, usize)> = r.body.iter().map(|(q, _)| (0, facts.lists[*q].len())).collect();
        join(r, &ranges, &facts, full.size() as u32, &mut buf);
        if buf.drain(..).any(|t| !facts.all[r.head_pred].contains(&t)) {
            return Ok(false);
        }
    }
    Ok(true)
}

impl Goal {
    /// Does the goal hold in a database over the program's full signature?
    pub fn holds(&self, db: &Database) -> bool {
        fn go(i: usize, g: &Goal, db: &Database, b: &mut Vec<Option<u32>>) -> bool {
            if i == g.atoms.len() {
                return true;
            }
            let a = &g.atoms[i];
            let Some(r) = db.relation_by_name(&a.pred) else {
                return false;
            };
            for t in r.iter() {
                let mut set = Vec::new();
                let mut ok = true;
                for (&v, &x) in a.args.iter().zip(t) {
                    match b[v] {
                        Some(y) if y != x => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            b[v] = Some(x);
                            set.push(v);
                        }
                    }
                }
                if ok && go(i + 1, g, db, b) {
                    return true;
                }
                for v in set {
                    b[v] = None;
                }
            }
            false
        }
        go(0, self, db, &mut vec![None; self.variable_count])
    }
}
