use std::cmp::Ordering;
use std::fmt;

use crate::logic::var::{Lit, Var, VarTable};

/// A propositional clause: a set of literals, sorted ascending in literal
/// order. The empty clause is ⊥.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    pub fn empty() -> Clause {
        Clause::default()
    }

    pub fn unit(lit: Lit) -> Clause {
        Clause { lits: vec![lit] }
    }

    /// Normalizes `lits` into a clause; `None` if it is a tautology.
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Option<Clause> {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return None;
        }
        Some(Clause { lits })
    }

    /// Disjunction of two clauses; `None` if it is a tautology.
    pub fn union(&self, other: &Clause) -> Option<Clause> {
        Clause::new(self.lits.iter().chain(&other.lits).copied())
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.lits.len() == 1
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    /// The ≺-maximal literal.
    pub fn max_lit(&self) -> Option<Lit> {
        self.lits.last().copied()
    }

    pub fn subsumes(&self, other: &Clause) -> bool {
        if self.lits.len() > other.lits.len() {
            return false;
        }
        let mut it = other.lits.iter();
        'outer: for l in &self.lits {
            for m in it.by_ref() {
                match m.cmp(l) {
                    Ordering::Less => continue,
                    Ordering::Equal => continue 'outer,
                    Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    /// Copy of the clause without `lit`.
    pub fn without(&self, lit: Lit) -> Clause {
        Clause {
            lits: self.lits.iter().copied().filter(|l| *l != lit).collect(),
        }
    }

    /// Multiset extension of the literal ordering. For duplicate-free
    /// clauses, `self ≺ other` iff they differ and the largest literal of
    /// the symmetric difference belongs to `other`.
    pub fn multiset_less(&self, other: &Clause) -> bool {
        let (a, b) = (&self.lits, &other.lits);
        let (mut i, mut j) = (a.len(), b.len());
        while i > 0 && j > 0 {
            match a[i - 1].cmp(&b[j - 1]) {
                Ordering::Equal => {
                    i -= 1;
                    j -= 1;
                }
                Ordering::Greater => return false,
                Ordering::Less => return true,
            }
        }
        i == 0 && j > 0
    }

    pub fn eval(&self, value: &impl Fn(Var) -> bool) -> bool {
        self.lits.iter().any(|l| value(l.var()) == l.is_positive())
    }

    pub fn display<'a>(&'a self, table: &'a VarTable) -> ClauseDisplay<'a> {
        ClauseDisplay { clause: self, table }
    }
}

pub struct ClauseDisplay<'a> {
    clause: &'a Clause,
    table: &'a VarTable,
}

impl fmt::Display for ClauseDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clause.is_empty() {
            return f.write_str("⊥");
        }
        for (k, l) in self.clause.lits.iter().enumerate() {
            if k > 0 {
                f.write_str(" ∨ ")?;
            }
            write!(f, "{}", self.table.display_lit(*l))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(t: &VarTable, s: &str) -> Clause {
        Clause::new(s.split_whitespace().map(|tok| match tok.strip_prefix('!') {
            Some(n) => t.lit(n, false).unwrap(),
            None => t.lit(tok, true).unwrap(),
        }))
        .unwrap()
    }

    #[test]
    fn multiset_order() {
        let t = VarTable::new(["A", "B"]).unwrap();
        assert!(lits(&t, "A B").multiset_less(&lits(&t, "!B")));
        assert!(!lits(&t, "!B").multiset_less(&lits(&t, "A B")));
        assert!(lits(&t, "A").multiset_less(&lits(&t, "A B")));
        assert!(Clause::empty().multiset_less(&lits(&t, "A")));
        assert!(!lits(&t, "A").multiset_less(&lits(&t, "A")));
    }

    #[test]
    fn subsumption() {
        let t = VarTable::new(["A", "B", "C"]).unwrap();
        assert!(lits(&t, "A C").subsumes(&lits(&t, "A B C")));
        assert!(!lits(&t, "A !C").subsumes(&lits(&t, "A B C")));
        assert!(Clause::empty().subsumes(&lits(&t, "B")));
    }

    #[test]
    fn tautology_is_rejected() {
        let t = VarTable::new(["A"]).unwrap();
        let a = t.lit("A", true).unwrap();
        assert!(Clause::new([a, a.complement()]).is_none());
        assert_eq!(Clause::new([a, a]).unwrap().len(), 1);
    }
}
