use std::collections::HashMap;
use std::fmt;

use crate::error::SpecError;

/// Name of the reserved variable that labels the start clause of every state.
pub const START: &str = "start";

/// A propositional variable, identified by its position in a [`VarTable`].
///
/// Positions follow the total variable ordering used by the calculus:
/// `start` is position 0 and every other name follows in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub(crate) u32);

impl Var {
    pub const START: Var = Var(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn positive(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn negative(self) -> Lit {
        Lit::new(self, false)
    }
}

/// A literal. The encoding `var * 2 + negated` makes the derived ordering
/// exactly `P ≺ ¬P ≺ Q` whenever `P ≺ Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | u32::from(!positive))
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn complement(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    pub fn code(self) -> u32 {
        self.0
    }
}

/// The variable set Π of a specification, with names in calculus order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarTable {
    names: Vec<String>,
    index: HashMap<String, Var>,
}

impl VarTable {
    /// Builds a table from user variable names. `start` is added implicitly
    /// and must not be listed.
    pub fn new<I, S>(names: I) -> Result<VarTable, SpecError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut user: Vec<String> = Vec::new();
        for name in names {
            let name = name.into();
            if !is_identifier(&name) {
                return Err(SpecError::InvalidName(name));
            }
            if name == START {
                return Err(SpecError::ReservedStart);
            }
            user.push(name);
        }
        user.sort();
        if let Some(w) = user.windows(2).find(|w| w[0] == w[1]) {
            return Err(SpecError::DuplicateVariable(w[0].clone()));
        }
        let mut names = Vec::with_capacity(user.len() + 1);
        names.push(START.to_string());
        names.extend(user);
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), Var(i as u32)))
            .collect();
        Ok(VarTable { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// Never true: the table always holds `start`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, name: &str) -> Option<Var> {
        self.index.get(name).copied()
    }

    pub fn name(&self, var: Var) -> &str {
        &self.names[var.index()]
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        (0..self.names.len() as u32).map(Var)
    }

    /// Variables other than `start`.
    pub fn user_vars(&self) -> impl Iterator<Item = Var> + '_ {
        (1..self.names.len() as u32).map(Var)
    }

    pub fn lit(&self, name: &str, positive: bool) -> Option<Lit> {
        self.get(name).map(|v| Lit::new(v, positive))
    }

    pub fn display_lit(&self, lit: Lit) -> LitDisplay<'_> {
        LitDisplay { table: self, lit }
    }
}

pub struct LitDisplay<'a> {
    table: &'a VarTable,
    lit: Lit,
}

impl fmt::Display for LitDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.lit.is_positive() {
            f.write_str("!")?;
        }
        f.write_str(self.table.name(self.lit.var()))
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
