use std::sync::Arc;

use crate::error::SpecError;
use crate::logic::formula::Formula;
use crate::logic::state::State;
use crate::logic::var::{Var, VarTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionKind {
    User,
    Rule,
}

/// An indexed transition `χ ⤳ E`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub index: u32,
    pub kind: TransitionKind,
    pub condition: Formula,
    pub effect: State,
}

impl Transition {
    pub fn user(index: u32, condition: Formula, effect: State) -> Transition {
        Transition {
            index,
            kind: TransitionKind::User,
            condition,
            effect,
        }
    }

    pub fn rule(index: u32, condition: Formula, effect: State) -> Transition {
        Transition {
            index,
            kind: TransitionKind::Rule,
            condition,
            effect,
        }
    }

    pub fn is_rule(&self) -> bool {
        self.kind == TransitionKind::Rule
    }
}

/// A PIDL specification `(Π, S_I, C, T_U, T_R)`.
///
/// Transitions are stored in ascending index order. The variable table is
/// shared so that states and formulas can be printed without a reference
/// back to the specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Specification {
    vars: Arc<VarTable>,
    initial: State,
    constraints: Vec<Formula>,
    transitions: Vec<Transition>,
}

impl Specification {
    pub fn new(
        vars: VarTable,
        initial: State,
        constraints: Vec<Formula>,
        mut transitions: Vec<Transition>,
    ) -> Result<Specification, SpecError> {
        let n = vars.len();
        let check_formula = |f: &Formula| -> Result<(), SpecError> {
            let mut vs = Vec::new();
            f.vars(&mut vs);
            for v in vs {
                if v == Var::START {
                    return Err(SpecError::ReservedStart);
                }
                if v.index() >= n {
                    return Err(SpecError::UnknownVariable(format!("#{}", v.index())));
                }
            }
            Ok(())
        };
        let check_state = |s: &State| -> Result<(), SpecError> {
            for l in s.lits() {
                if l.var() == Var::START {
                    return Err(SpecError::ReservedStart);
                }
                if l.var().index() >= n {
                    return Err(SpecError::UnknownVariable(format!("#{}", l.var().index())));
                }
            }
            Ok(())
        };
        check_state(&initial)?;
        constraints.iter().try_for_each(check_formula)?;
        transitions.sort_by_key(|t| t.index);
        if let Some(w) = transitions.windows(2).find(|w| w[0].index == w[1].index) {
            return Err(SpecError::DuplicateIndex(w[0].index));
        }
        for t in &transitions {
            check_formula(&t.condition)?;
            check_state(&t.effect)?;
        }
        Ok(Specification {
            vars: Arc::new(vars),
            initial,
            constraints,
            transitions,
        })
    }

    pub fn vars(&self) -> &VarTable {
        &self.vars
    }

    pub fn shared_vars(&self) -> Arc<VarTable> {
        Arc::clone(&self.vars)
    }

    pub fn initial(&self) -> &State {
        &self.initial
    }

    pub fn constraints(&self) -> &[Formula] {
        &self.constraints
    }

    /// All transitions, ascending by index.
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, index: u32) -> Option<&Transition> {
        self.transitions
            .binary_search_by_key(&index, |t| t.index)
            .ok()
            .map(|k| &self.transitions[k])
    }

    pub fn rules(&self) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(|t| t.kind == TransitionKind::Rule)
    }

    pub fn users(&self) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(|t| t.kind == TransitionKind::User)
    }

    pub fn kind_of(&self, index: u32) -> Option<TransitionKind> {
        self.transition(index).map(|t| t.kind)
    }
}
