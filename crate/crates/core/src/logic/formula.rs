use std::fmt;

use crate::logic::clause::Clause;
use crate::logic::var::{Lit, Var, VarTable};

/// A propositional formula over the variables of a [`VarTable`].
///
/// Binary connectives are n-ary and kept flat: an `And` never has an `And`
/// child, which keeps printing and re-parsing the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Var),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn lit(lit: Lit) -> Formula {
        let atom = Formula::Atom(lit.var());
        if lit.is_positive() {
            atom
        } else {
            Formula::not(atom)
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// Conjunction with flattening; the empty conjunction is `true`.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction with flattening; the empty disjunction is `false`.
    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn eval(&self, value: &impl Fn(Var) -> bool) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(v) => value(*v),
            Formula::Not(f) => !f.eval(value),
            Formula::And(fs) => fs.iter().all(|f| f.eval(value)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(value)),
            Formula::Implies(a, b) => !a.eval(value) || b.eval(value),
        }
    }

    pub fn vars(&self, out: &mut Vec<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(v) => out.push(*v),
            Formula::Not(f) => f.vars(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.vars(out)),
            Formula::Implies(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    pub fn mentions(&self, var: Var) -> bool {
        let mut vs = Vec::new();
        self.vars(&mut vs);
        vs.contains(&var)
    }

    pub fn display<'a>(&'a self, table: &'a VarTable) -> FormulaDisplay<'a> {
        FormulaDisplay { f: self, table }
    }
}

/// Clause normal form of the conjunction of `formulas`, by distribution.
///
/// Tautologies and duplicate literals are removed, as are duplicate clauses.
/// No fresh variables are introduced.
pub fn cnf<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Vec<Clause> {
    let mut out: Vec<Clause> = Vec::new();
    for f in formulas {
        for c in cnf_pos(f) {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    out
}

/// CNF of a single formula.
pub fn cnf_of(f: &Formula) -> Vec<Clause> {
    cnf(std::iter::once(f))
}

fn cnf_pos(f: &Formula) -> Vec<Clause> {
    cnf_signed(f, true)
}

// Clauses of `f` (positive) or of `¬f`, pushing negation inward as we go.
fn cnf_signed(f: &Formula, positive: bool) -> Vec<Clause> {
    match (f, positive) {
        (Formula::True, true) | (Formula::False, false) => Vec::new(),
        (Formula::True, false) | (Formula::False, true) => vec![Clause::empty()],
        (Formula::Atom(v), pol) => vec![Clause::unit(Lit::new(*v, pol))],
        (Formula::Not(g), pol) => cnf_signed(g, !pol),
        (Formula::And(fs), true) => conjoin(fs.iter().map(|g| cnf_signed(g, true))),
        (Formula::Or(fs), false) => conjoin(fs.iter().map(|g| cnf_signed(g, false))),
        (Formula::Or(fs), true) => disjoin(fs.iter().map(|g| cnf_signed(g, true))),
        (Formula::And(fs), false) => disjoin(fs.iter().map(|g| cnf_signed(g, false))),
        (Formula::Implies(a, b), true) => {
            disjoin([cnf_signed(a, false), cnf_signed(b, true)].into_iter())
        }
        (Formula::Implies(a, b), false) => {
            conjoin([cnf_signed(a, true), cnf_signed(b, false)].into_iter())
        }
    }
}

fn conjoin(parts: impl Iterator<Item = Vec<Clause>>) -> Vec<Clause> {
    let mut out: Vec<Clause> = Vec::new();
    for part in parts {
        for c in part {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    out
}

fn disjoin(parts: impl Iterator<Item = Vec<Clause>>) -> Vec<Clause> {
    // Neutral element of disjunction over clause sets is {⊥}.
    let mut acc = vec![Clause::empty()];
    for part in parts {
        let mut next = Vec::with_capacity(acc.len() * part.len().max(1));
        for a in &acc {
            for b in &part {
                if let Some(c) = a.union(b) {
                    if !next.contains(&c) {
                        next.push(c);
                    }
                }
            }
        }
        acc = next;
        if acc.is_empty() {
            break;
        }
    }
    acc
}

pub struct FormulaDisplay<'a> {
    f: &'a Formula,
    table: &'a VarTable,
}

// Precedence: implication < or < and < not/atom.
fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Implies(..) => 0,
        Formula::Or(_) => 1,
        Formula::And(_) => 2,
        _ => 3,
    }
}

impl FormulaDisplay<'_> {
    fn child(&self, f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if prec(f) < min {
            write!(out, "({})", f.display(self.table))
        } else {
            write!(out, "{}", f.display(self.table))
        }
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.f {
            Formula::True => out.write_str("true"),
            Formula::False => out.write_str("false"),
            Formula::Atom(v) => out.write_str(self.table.name(*v)),
            Formula::Not(g) => {
                out.write_str("!")?;
                self.child(g, 3, out)
            }
            Formula::And(fs) | Formula::Or(fs) => {
                let (sep, p) = if matches!(self.f, Formula::And(_)) {
                    (" && ", 3)
                } else {
                    (" || ", 2)
                };
                for (k, g) in fs.iter().enumerate() {
                    if k > 0 {
                        out.write_str(sep)?;
                    }
                    self.child(g, p, out)?;
                }
                Ok(())
            }
            Formula::Implies(a, b) => {
                self.child(a, 1, out)?;
                out.write_str(" -> ")?;
                self.child(b, 0, out)
            }
        }
    }
}
