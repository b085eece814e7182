//! A finite-domain constraint engine: positive table constraints, an optional
//! all-different group, generalized arc consistency and depth-first search in
//! fixed lexicographic order.
//!
//! Because propagation only removes values that occur in no solution, the
//! first solution reached by the search is the lexicographically least one.

use std::collections::VecDeque;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::relcore::Relation;

#[derive(Clone, Debug)]
struct Con {
    vars: Vec<u32>,
    uvars: Vec<u32>,
    /// For each position, the index of its variable in `uvars`.
    slot: Vec<u16>,
    /// For each entry of `uvars`, its first position.
    first: Vec<u16>,
    repeats: bool,
    table: Arc<Relation>,
}

/// A constraint network over variables `0..n`.
#[derive(Clone, Debug, Default)]
pub struct Csp {
    domains: Vec<FixedBitSet>,
    cons: Vec<Con>,
    distinct: Vec<u32>,
    in_distinct: Vec<bool>,
    failed: bool,
}

/// Search counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub revisions: u64,
}

type Domains = Vec<FixedBitSet>;

impl Csp {
    pub fn new() -> Csp {
        Csp::default()
    }

    /// Adds a variable ranging over `0..size` and returns its index.
    pub fn add_var(&mut self, size: usize) -> u32 {
        let mut d = FixedBitSet::with_capacity(size);
        d.insert_range(..);
        self.domains.push(d);
        self.in_distinct.push(false);
        (self.domains.len() - 1) as u32
    }

    pub fn num_vars(&self) -> usize {
        self.domains.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.cons.len()
    }

    /// Intersects the domain of `var` with `allowed`.
    pub fn restrict(&mut self, var: u32, allowed: impl IntoIterator<Item = u32>) {
        let d = &mut self.domains[var as usize];
        let mut keep = FixedBitSet::with_capacity(d.len());
        for v in allowed {
            if (v as usize) < d.len() {
                keep.insert(v as usize);
            }
        }
        d.intersect_with(&keep);
        if d.is_clear() {
            self.failed = true;
        }
    }

    /// Requires `(vars[0], ..., vars[k-1])` to be a row of `table`.
    pub fn add_table(&mut self, vars: Vec<u32>, table: Arc<Relation>) {
        assert_eq!(vars.len(), table.arity(), "constraint scope differs from table arity");
        if table.is_empty() {
            self.failed = true;
        }
        let mut uvars: Vec<u32> = Vec::new();
        let mut first = Vec::new();
        let mut slot = Vec::with_capacity(vars.len());
        for (p, &v) in vars.iter().enumerate() {
            match uvars.iter().position(|&u| u == v) {
                Some(i) => slot.push(i as u16),
                None => {
                    uvars.push(v);
                    first.push(p as u16);
                    slot.push((uvars.len() - 1) as u16);
                }
            }
        }
        let repeats = uvars.len() < vars.len();
        self.cons.push(Con { vars, uvars, slot, first, repeats, table });
    }

    /// Requires the listed variables to take pairwise distinct values.
    pub fn set_all_different(&mut self, vars: &[u32]) {
        for &v in vars {
            self.in_distinct[v as usize] = true;
        }
        self.distinct = vars.to_vec();
    }

    /// The lexicographically least solution.
    pub fn solve_first(&self) -> Option<Vec<u32>> {
        let mut out = None;
        self.for_each_solution(|s| {
            out = Some(s.to_vec());
            false
        });
        out
    }

    /// Visits solutions in lexicographic order until `visit` returns false.
    pub fn for_each_solution(&self, mut visit: impl FnMut(&[u32]) -> bool) -> SearchStats {
        let mut stats = SearchStats::default();
        if self.failed {
            return stats;
        }
        let var_cons = self.var_constraints();
        let mut doms = self.domains.clone();
        let all: Vec<usize> = (0..self.cons.len()).collect();
        let touched: Vec<u32> = (0..self.domains.len() as u32)
            .filter(|&v| self.in_distinct[v as usize] && doms[v as usize].count_ones(..) == 1)
            .collect();
        if self.propagate(&mut doms, &var_cons, all, touched, &mut stats) {
            self.dfs(doms, 0, &var_cons, &mut visit, &mut stats);
        }
        stats
    }

    pub fn count_solutions(&self, limit: usize) -> usize {
        let mut n = 0;
        self.for_each_solution(|_| {
            n += 1;
            n < limit
        });
        n
    }

    /// Domains after root propagation, or `None` on a wipe-out.
    pub fn root_domains(&self) -> Option<Vec<FixedBitSet>> {
        if self.failed {
            return None;
        }
        let var_cons = self.var_constraints();
        let mut doms = self.domains.clone();
        let all: Vec<usize> = (0..self.cons.len()).collect();
        let mut stats = SearchStats::default();
        self.propagate(&mut doms, &var_cons, all, Vec::new(), &mut stats).then_some(doms)
    }

    fn var_constraints(&self) -> Vec<Vec<usize>> {
        let mut vc = vec![Vec::new(); self.domains.len()];
        for (i, c) in self.cons.iter().enumerate() {
            for &u in &c.uvars {
                vc[u as usize].push(i);
            }
        }
        vc
    }

    /// Returns true to stop the search.
    fn dfs(
        &self,
        doms: Domains,
        from: usize,
        var_cons: &[Vec<usize>],
        visit: &mut dyn FnMut(&[u32]) -> bool,
        stats: &mut SearchStats,
    ) -> bool {
        stats.nodes += 1;
        let next = (from..doms.len()).find(|&v| doms[v].count_ones(..) > 1);
        let Some(var) = next else {
            let sol: Vec<u32> = doms.iter().map(|d| d.ones().next().unwrap() as u32).collect();
            return !visit(&sol);
        };
        let values: Vec<usize> = doms[var].ones().collect();
        for val in values {
            let mut d2 = doms.clone();
            d2[var].clear();
            d2[var].insert(val);
            let queue = var_cons[var].clone();
            let touched = if self.in_distinct[var] { vec![var as u32] } else { Vec::new() };
            if self.propagate(&mut d2, var_cons, queue, touched, stats)
                && self.dfs(d2, var + 1, var_cons, visit, stats)
            {
                return true;
            }
        }
        false
    }

    fn propagate(
        &self,
        doms: &mut Domains,
        var_cons: &[Vec<usize>],
        initial: Vec<usize>,
        touched: Vec<u32>,
        stats: &mut SearchStats,
    ) -> bool {
        let mut inq = vec![false; self.cons.len()];
        let mut queue: VecDeque<usize> = VecDeque::with_capacity(initial.len());
        for c in initial {
            if !inq[c] {
                inq[c] = true;
                queue.push_back(c);
            }
        }
        let mut changed: Vec<u32> = touched;
        loop {
            // Distinctness is propagated eagerly on singletons.
            while let Some(v) = changed.pop() {
                for &c in &var_cons[v as usize] {
                    if !inq[c] {
                        inq[c] = true;
                        queue.push_back(c);
                    }
                }
                if self.in_distinct[v as usize] && doms[v as usize].count_ones(..) == 1 {
                    let val = doms[v as usize].ones().next().unwrap();
                    for &w in &self.distinct {
                        if w != v && doms[w as usize].contains(val) {
                            doms[w as usize].set(val, false);
                            if doms[w as usize].is_clear() {
                                return false;
                            }
                            changed.push(w);
                        }
                    }
                }
            }
            let Some(c) = queue.pop_front() else { return true };
            inq[c] = false;
            stats.revisions += 1;
            if !self.revise(&self.cons[c], doms, &mut changed) {
                return false;
            }
        }
    }

    /// Removes unsupported values; pushes changed variables. False on wipe-out.
    fn revise(&self, con: &Con, doms: &mut Domains, changed: &mut Vec<u32>) -> bool {
        let ku = con.uvars.len();
        let counts: Vec<usize> = con.uvars.iter().map(|&u| doms[u as usize].count_ones(..)).collect();
        let mut product: u128 = 1;
        for &c in &counts {
            product = product.saturating_mul(c as u128);
        }
        let mut support: Vec<FixedBitSet> = con
            .uvars
            .iter()
            .map(|&u| FixedBitSet::with_capacity(doms[u as usize].len()))
            .collect();
        let mut found = vec![0usize; ku];
        let mut missing: usize = counts.iter().sum();
        let rows = con.table.len();

        if product.saturating_mul(8) <= rows as u128 {
            // Enumerate the product of the current domains.
            let values: Vec<Vec<u32>> =
                con.uvars.iter().map(|&u| doms[u as usize].ones().map(|x| x as u32).collect()).collect();
            let mut idx = vec![0usize; ku];
            let mut tuple = vec![0u32; con.vars.len()];
            'outer: loop {
                for (p, s) in con.slot.iter().enumerate() {
                    tuple[p] = values[*s as usize][idx[*s as usize]];
                }
                if con.table.contains(&tuple) {
                    for (i, sup) in support.iter_mut().enumerate() {
                        let v = values[i][idx[i]] as usize;
                        if !sup.put(v) {
                            found[i] += 1;
                            missing -= 1;
                        }
                    }
                    if missing == 0 {
                        break 'outer;
                    }
                }
                let mut i = 0;
                loop {
                    if i == ku {
                        break 'outer;
                    }
                    idx[i] += 1;
                    if idx[i] < values[i].len() {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
            }
        } else {
            // Scan the table rows.
            'rows: for row in con.table.iter() {
                for (p, &v) in con.vars.iter().enumerate() {
                    if !doms[v as usize].contains(row[p] as usize) {
                        continue 'rows;
                    }
                }
                if con.repeats {
                    for (p, s) in con.slot.iter().enumerate() {
                        if row[p] != row[con.first[*s as usize] as usize] {
                            continue 'rows;
                        }
                    }
                }
                for (i, sup) in support.iter_mut().enumerate() {
                    let v = row[con.first[i] as usize] as usize;
                    if !sup.put(v) {
                        found[i] += 1;
                        missing -= 1;
                    }
                }
                if missing == 0 {
                    break;
                }
            }
        }
        if missing == 0 {
            return true;
        }
        for i in 0..ku {
            if found[i] < counts[i] {
                let u = con.uvars[i] as usize;
                if found[i] == 0 {
                    return false;
                }
                doms[u] = std::mem::take(&mut support[i]);
                changed.push(u as u32);
            }
        }
        true
    }
}
