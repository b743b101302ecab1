//! Transition semantics on top of the saturation engine.

use std::collections::{BTreeSet, HashMap};

use crate::error::ModelCheckError;
use crate::logic::spec::{Specification, Transition, TransitionKind};
use crate::logic::state::State;
use crate::logic::var::Var;
use crate::saturation::{Path, Saturator};

/// `S ◁ E`
pub fn update(s: &State, e: &State) -> State {
    s.update(e)
}

/// Transitions of `kind` whose condition is entailed by `s ∪ C`, ascending
/// by index. Empty when `s ∪ C` is unsatisfiable, and for user transitions
/// also when `s` is not rule-terminal.
pub fn applicable_transitions<'a>(s: &State, spec: &'a Specification, kind: TransitionKind) -> Vec<&'a Transition> {
    let sat = Saturator::new(spec).saturate(s, &Path::empty());
    if sat.bottom_star {
        return Vec::new();
    }
    let rule_terminal = spec.rules().filter(|t| sat.fires(t.index)).all(|t| &s.update(&t.effect) == s);
    if kind == TransitionKind::User && !rule_terminal {
        return Vec::new();
    }
    spec.transitions()
        .iter()
        .filter(|t| t.kind == kind && sat.fires(t.index))
        .collect()
}

/// Every entailed rule leaves `s` unchanged.
pub fn is_rule_terminal(s: &State, spec: &Specification) -> bool {
    applicable_transitions(s, spec, TransitionKind::Rule)
        .iter()
        .all(|t| &s.update(&t.effect) == s)
}

/// Maps states to total valuations, each given by its set of true variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Interpretation {
    map: HashMap<State, BTreeSet<Var>>,
}

impl Interpretation {
    pub fn new() -> Interpretation {
        Interpretation::default()
    }

    pub fn insert(&mut self, state: State, valuation: impl IntoIterator<Item = Var>) {
        self.map.insert(state, valuation.into_iter().collect());
    }

    pub fn get(&self, state: &State) -> Option<&BTreeSet<Var>> {
        self.map.get(state)
    }
}

/// Whether every valuation assigned to a state of `reachable` extends the
/// state, makes `start` true and satisfies all constraints.
pub fn is_model(interp: &Interpretation, spec: &Specification, reachable: &[State]) -> Result<bool, ModelCheckError> {
    for s in reachable {
        let val = interp
            .get(s)
            .ok_or_else(|| ModelCheckError::UnmappedState(s.display(spec.vars()).to_string()))?;
        let value = |v: Var| val.contains(&v);
        if !value(Var::START) || s.lits().iter().any(|l| value(l.var()) != l.is_positive()) {
            return Ok(false);
        }
        if !spec.constraints().iter().all(|c| c.eval(&value)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_spec_text;

    const EXAMPLE4: &str = "[vars]\nA B C D\n[init]\n!A !B\n[constraints]\nB -> C\n[user]\n1: !A ~> A B\n[rules]\n2: C ~> D\n";

    fn names(spec: &Specification, xs: &[&str]) -> Vec<Var> {
        let mut v: Vec<Var> = xs.iter().map(|x| spec.vars().get(x).unwrap()).collect();
        v.push(Var::START);
        v
    }

    #[test]
    fn update_example() {
        let t = crate::logic::var::VarTable::new(["A", "B", "C", "D"]).unwrap();
        let s = State::parse(&t, "A B !C").unwrap();
        let e = State::parse(&t, "!B !C D").unwrap();
        assert_eq!(update(&s, &e), State::parse(&t, "A !B !C D").unwrap());
    }

    #[test]
    fn rule_application() {
        let spec = parse_spec_text("[vars]\nA B C\n[rules]\n1: A && C ~> B\n").unwrap();
        let s = State::parse(spec.vars(), "A !B C").unwrap();
        let rs: Vec<u32> = applicable_transitions(&s, &spec, TransitionKind::Rule).iter().map(|t| t.index).collect();
        assert_eq!(rs, [1]);
    }

    #[test]
    fn rule_terminal_examples() {
        let spec = parse_spec_text(
            "[vars]\nA B C D E\n[rules]\n1: A ~> B !C\n2: !C ~> D\n3: A && !D ~> E\n",
        )
        .unwrap();
        let s = State::parse(spec.vars(), "A B !C D !E").unwrap();
        assert!(is_rule_terminal(&s, &spec));
        let ex4 = parse_spec_text(EXAMPLE4).unwrap();
        let s1 = State::parse(ex4.vars(), "A B").unwrap();
        assert!(!is_rule_terminal(&s1, &ex4));
        assert!(applicable_transitions(&s1, &ex4, TransitionKind::User).is_empty());
    }

    #[test]
    fn example4_interpretations() {
        let spec = parse_spec_text(EXAMPLE4).unwrap();
        let t = spec.vars();
        let si = State::parse(t, "!A !B").unwrap();
        let s1 = State::parse(t, "A B").unwrap();
        let s2 = State::parse(t, "A B D").unwrap();
        let reachable = [si.clone(), s1.clone(), s2.clone()];
        let mut good = Interpretation::new();
        good.insert(si.clone(), names(&spec, &[]));
        good.insert(s1.clone(), names(&spec, &["A", "B", "C"]));
        good.insert(s2.clone(), names(&spec, &["A", "B", "C", "D"]));
        assert_eq!(is_model(&good, &spec, &reachable), Ok(true));
        let mut bad = good.clone();
        bad.insert(s1, names(&spec, &["A", "B"]));
        assert_eq!(is_model(&bad, &spec, &reachable), Ok(false));
        let mut partial = Interpretation::new();
        partial.insert(si, names(&spec, &[]));
        assert!(is_model(&partial, &spec, &reachable).is_err());
    }
}
