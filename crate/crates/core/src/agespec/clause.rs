use crate::error::{Error, Result};
use crate::relcore::{Relation, Signature};

/// An atomic formula over clause variables `0..variable_count`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// `symbol(args...)`, the symbol given by its index in the spec signature.
    Rel { symbol: usize, args: Vec<usize> },
    /// `x = y`.
    Eq(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

impl Literal {
    pub fn rel(positive: bool, symbol: usize, args: &[usize]) -> Literal {
        Literal { positive, atom: Atom::Rel { symbol, args: args.to_vec() } }
    }

    pub fn eq(positive: bool, x: usize, y: usize) -> Literal {
        Literal { positive, atom: Atom::Eq(x, y) }
    }

    fn max_var(&self) -> usize {
        match &self.atom {
            Atom::Rel { args, .. } => args.iter().copied().max().unwrap_or(0),
            Atom::Eq(x, y) => *x.max(y),
        }
    }

    fn vars(&self) -> Vec<usize> {
        match &self.atom {
            Atom::Rel { args, .. } => args.clone(),
            Atom::Eq(x, y) => vec![*x, *y],
        }
    }

    /// Truth value under `assignment` with relations indexed like the spec signature.
    pub fn holds(&self, rels: &[&Relation], assignment: &[u32]) -> bool {
        let truth = match &self.atom {
            Atom::Rel { symbol, args } => {
                let t: Vec<u32> = args.iter().map(|&a| assignment[a]).collect();
                rels[*symbol].contains(&t)
            }
            Atom::Eq(x, y) => assignment[*x] == assignment[*y],
        };
        truth == self.positive
    }

    /// The same literal with symbols and variables renamed.
    pub fn remap(&self, symbols: &[usize], vars: &[usize]) -> Literal {
        let atom = match &self.atom {
            Atom::Rel { symbol, args } => Atom::Rel {
                symbol: symbols[*symbol],
                args: args.iter().map(|&a| vars[a]).collect(),
            },
            Atom::Eq(x, y) => Atom::Eq(vars[*x], vars[*y]),
        };
        Literal { positive: self.positive, atom }
    }
}

/// A universally quantified disjunction of literals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    pub variable_count: usize,
    pub literals: Vec<Literal>,
}

impl Clause {
    pub fn new(variable_count: usize, literals: Vec<Literal>) -> Result<Clause> {
        if variable_count == 0 {
            return Err(Error::Invalid("a clause needs at least one variable".into()));
        }
        if literals.is_empty() {
            return Err(Error::Invalid("a clause needs at least one literal".into()));
        }
        if let Some(l) = literals.iter().find(|l| l.vars().iter().any(|&v| v >= variable_count)) {
            return Err(Error::Invalid(format!("literal {l:?} uses a variable >= {variable_count}")));
        }
        Ok(Clause { variable_count, literals })
    }

    /// Checks symbol indices and arities against `sig`.
    pub fn validate(&self, sig: &Signature) -> Result<()> {
        for l in &self.literals {
            if let Atom::Rel { symbol, args } = &l.atom {
                if *symbol >= sig.len() {
                    return Err(Error::Invalid(format!("clause uses unknown symbol #{symbol}")));
                }
                let s = sig.symbol(*symbol);
                if s.arity != args.len() {
                    return Err(Error::Invalid(format!(
                        "`{}` has arity {} but the clause applies it to {} variables",
                        s.name,
                        s.arity,
                        args.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Relation symbols mentioned by the clause.
    pub fn symbols(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .literals
            .iter()
            .filter_map(|l| match &l.atom {
                Atom::Rel { symbol, .. } => Some(*symbol),
                Atom::Eq(..) => None,
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// An assignment of the variables to `0..n` falsifying every literal.
    pub fn find_violation(&self, rels: &[&Relation], n: usize) -> Option<Vec<u32>> {
        if n == 0 {
            return None;
        }
        let mut decided: Vec<Vec<&Literal>> = vec![Vec::new(); self.variable_count];
        for l in &self.literals {
            decided[l.max_var()].push(l);
        }
        let mut assignment = vec![0u32; self.variable_count];
        fn go(
            i: usize,
            n: usize,
            decided: &[Vec<&Literal>],
            rels: &[&Relation],
            asg: &mut Vec<u32>,
        ) -> bool {
            if i == asg.len() {
                return true;
            }
            for v in 0..n as u32 {
                asg[i] = v;
                if decided[i].iter().all(|l| !l.holds(rels, asg)) && go(i + 1, n, decided, rels, asg) {
                    return true;
                }
            }
            false
        }
        go(0, n, &decided, rels, &mut assignment).then_some(assignment)
    }
}
