//! Brute-force semantic oracle.
//!
//! Enumerates every total valuation extending a state. It exists to check
//! the calculus in tests and is capped at [`ORACLE_LIMIT`] free variables.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::OracleError;
use crate::logic::formula::Formula;
use crate::logic::spec::{Specification, TransitionKind};
use crate::logic::state::State;
use crate::logic::var::{Var, VarTable};

pub const ORACLE_LIMIT: usize = 24;

/// Calls `visit` with every valuation of Π that satisfies `s` (and makes
/// `start` true) until it returns `false`. Returns whether enumeration
/// ran to completion.
fn for_each_extension(
    vars: &VarTable,
    s: &State,
    mut visit: impl FnMut(&dyn Fn(Var) -> bool) -> bool,
) -> Result<bool, OracleError> {
    let free: Vec<Var> = vars.user_vars().filter(|v| s.value(*v).is_none()).collect();
    if free.len() > ORACLE_LIMIT {
        return Err(OracleError::ScaleExceeded {
            vars: free.len(),
            limit: ORACLE_LIMIT,
        });
    }
    let mut slot = vec![usize::MAX; vars.len()];
    for (k, v) in free.iter().enumerate() {
        slot[v.index()] = k;
    }
    for bits in 0u64..(1u64 << free.len()) {
        let value = |v: Var| {
            if v == Var::START {
                return true;
            }
            match s.value(v) {
                Some(b) => b,
                None => bits >> slot[v.index()] & 1 == 1,
            }
        };
        if !visit(&value) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `s ∪ constraints ⊨ phi`, decided by enumeration.
pub fn entails_oracle(
    vars: &VarTable,
    s: &State,
    constraints: &[Formula],
    phi: &Formula,
) -> Result<bool, OracleError> {
    for_each_extension(vars, s, |val| {
        !constraints.iter().all(|c| c.eval(&val)) || phi.eval(&val)
    })
}

/// `s ∪ constraints ⊭ ⊥`, decided by enumeration.
pub fn state_consistent_oracle(vars: &VarTable, s: &State, constraints: &[Formula]) -> Result<bool, OracleError> {
    let exhausted = for_each_extension(vars, s, |val| !constraints.iter().all(|c| c.eval(&val)))?;
    Ok(!exhausted)
}

/// Reachable states of a specification, computed by breadth-first search
/// with every entailment decided by [`entails_oracle`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OracleExploration {
    /// Each reachable state with the transition indexes whose condition it
    /// entails (all of them for an inconsistent state).
    pub fired: BTreeMap<State, BTreeSet<u32>>,
    pub inconsistent: BTreeSet<State>,
    /// `(S, i, T)` for every fired transition.
    pub edges: BTreeSet<(State, u32, State)>,
}

pub fn explore_oracle(spec: &Specification) -> Result<OracleExploration, OracleError> {
    let vars = spec.vars();
    let mut out = OracleExploration::default();
    let mut queue = VecDeque::from([spec.initial().clone()]);
    let mut seen = BTreeSet::from([spec.initial().clone()]);
    while let Some(s) = queue.pop_front() {
        let consistent = state_consistent_oracle(vars, &s, spec.constraints())?;
        let mut fired = BTreeSet::new();
        for t in spec.transitions() {
            if !consistent || entails_oracle(vars, &s, spec.constraints(), &t.condition)? {
                fired.insert(t.index);
            }
        }
        if consistent {
            let rules: Vec<(u32, State)> = spec
                .rules()
                .filter(|t| fired.contains(&t.index))
                .map(|t| (t.index, s.update(&t.effect)))
                .collect();
            let terminal = rules.iter().all(|(_, r)| r == &s);
            let users = spec
                .transitions()
                .iter()
                .filter(|t| terminal && t.kind == TransitionKind::User && fired.contains(&t.index))
                .map(|t| (t.index, s.update(&t.effect)));
            let next: Vec<(u32, State)> = rules.iter().cloned().chain(users).collect();
            for (i, n) in next {
                out.edges.insert((s.clone(), i, n.clone()));
                if seen.insert(n.clone()) {
                    queue.push_back(n);
                }
            }
        } else {
            out.inconsistent.insert(s.clone());
        }
        out.fired.insert(s, fired);
    }
    Ok(out)
}
