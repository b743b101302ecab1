use std::fmt;

use crate::error::SpecError;
use crate::logic::var::{Lit, Var, VarTable};

/// A consistent set of literals: a partial assignment of Π.
///
/// Literals are kept sorted in calculus order, so equality and hashing are
/// order-insensitive with respect to construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct State {
    lits: Vec<Lit>,
}

impl State {
    pub fn empty() -> State {
        State::default()
    }

    /// Builds a state, rejecting complementary pairs.
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Result<State, Lit> {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        // P and ¬P are adjacent in literal order.
        if let Some(w) = lits.windows(2).find(|w| w[0].var() == w[1].var()) {
            return Err(w[0]);
        }
        Ok(State { lits })
    }

    /// Parses whitespace/comma separated `name` / `!name` literals.
    pub fn parse(table: &VarTable, text: &str) -> Result<State, SpecError> {
        let mut lits = Vec::new();
        for tok in text.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            let (positive, name) = match tok.strip_prefix('!') {
                Some(rest) => (false, rest),
                None => (true, tok),
            };
            let var = table
                .get(name)
                .ok_or_else(|| SpecError::UnknownVariable(name.to_string()))?;
            if var == Var::START {
                return Err(SpecError::ReservedStart);
            }
            lits.push(Lit::new(var, positive));
        }
        State::new(lits).map_err(|l| SpecError::InconsistentLiterals(table.name(l.var()).into()))
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

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    /// The value this state assigns to `var`, if any.
    pub fn value(&self, var: Var) -> Option<bool> {
        if self.contains(var.positive()) {
            Some(true)
        } else if self.contains(var.negative()) {
            Some(false)
        } else {
            None
        }
    }

    /// `S ◁ E`: literals of `self` contradicted by `effect` are replaced and
    /// literals of `effect` not yet present are added.
    pub fn update(&self, effect: &State) -> State {
        let (a, b) = (&self.lits, &effect.lits);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let (va, vb) = (a[i].var(), b[j].var());
            if va < vb {
                out.push(a[i]);
                i += 1;
            } else if vb < va {
                out.push(b[j]);
                j += 1;
            } else {
                out.push(b[j]);
                i += 1;
                j += 1;
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        State { lits: out }
    }

    pub fn positive_vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.lits.iter().filter(|l| l.is_positive()).map(|l| l.var())
    }

    pub fn display<'a>(&'a self, table: &'a VarTable) -> StateDisplay<'a> {
        StateDisplay { state: self, table }
    }
}

pub struct StateDisplay<'a> {
    state: &'a State,
    table: &'a VarTable,
}

impl fmt::Display for StateDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, lit) in self.state.lits.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", self.table.display_lit(*lit))?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> VarTable {
        VarTable::new(["A", "B", "C", "D"]).unwrap()
    }

    #[test]
    fn update_replaces_and_adds() {
        let t = table();
        let s = State::parse(&t, "A B !C").unwrap();
        let e = State::parse(&t, "!B !C D").unwrap();
        assert_eq!(s.update(&e), State::parse(&t, "A !B !C D").unwrap());
    }

    #[test]
    fn update_with_empty_effect() {
        let t = table();
        let s = State::parse(&t, "A !D").unwrap();
        assert_eq!(s.update(&State::empty()), s);
    }

    #[test]
    fn update_flips_single_literal() {
        let t = table();
        let s = State::parse(&t, "A").unwrap();
        let e = State::parse(&t, "!A").unwrap();
        assert_eq!(s.update(&e), e);
    }

    #[test]
    fn rejects_complementary_pair() {
        let t = table();
        assert_eq!(
            State::parse(&t, "A !A"),
            Err(SpecError::InconsistentLiterals("A".into()))
        );
        assert_eq!(State::parse(&t, "start"), Err(SpecError::ReservedStart));
    }

    #[test]
    fn equality_ignores_order() {
        let t = table();
        assert_eq!(State::parse(&t, "B A").unwrap(), State::parse(&t, "A, B, A").unwrap());
        assert_eq!(State::parse(&t, "!C A").unwrap().display(&t).to_string(), "{A, !C}");
    }
}
