//! Translation of a validated model into a PIDL specification.
//!
//! Variables: `d_Yes`/`d_No` per boolean decision, `d_o` per enumeration
//! option, `Visible_d` per decision and one variable per asset. Rules get
//! indexes `1..=R` in model order; user transitions follow, one per
//! boolean value or enumeration option.

use serde::Serialize;

use crate::analysis::Check;
use crate::dopler::expr::{Action, Expr};
use crate::dopler::model::{DecisionKind, DoplerModel, ModelError};
use crate::logic::formula::Formula;
use crate::logic::spec::{Specification, Transition};
use crate::logic::state::State;
use crate::logic::var::{Lit, Var, VarTable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecisionVars {
    Boolean { yes: Var, no: Var },
    Enumeration(Vec<Var>),
}

impl DecisionVars {
    /// Every value variable of the decision.
    pub fn all(&self) -> Vec<Var> {
        match self {
            DecisionVars::Boolean { yes, no } => vec![*yes, *no],
            DecisionVars::Enumeration(vs) => vs.clone(),
        }
    }
}

/// Where a translated constraint came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Visibility { decision: usize },
    Cardinality { decision: usize },
    Inclusion { asset: usize },
    Includes { asset: usize, target: usize },
    Excludes { asset: usize, target: usize },
    Constraint { index: usize },
}

impl Origin {
    pub fn is_asset(self) -> bool {
        matches!(self, Origin::Inclusion { .. } | Origin::Includes { .. } | Origin::Excludes { .. })
    }
}

/// A value a user may pick for a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Option(usize),
}

/// What a transition index stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Rule(usize),
    User { decision: usize, value: Value },
}

/// The variables assigned to model elements.
#[derive(Debug, Clone)]
pub struct VarMap {
    pub decisions: Vec<DecisionVars>,
    pub visible: Vec<Var>,
    pub assets: Vec<Var>,
}

impl VarMap {
    fn pos(v: Var) -> Formula {
        Formula::Atom(v)
    }

    /// The variable set by choosing `value` for decision `d`.
    pub fn value_var(&self, d: usize, value: Value) -> Var {
        match (&self.decisions[d], value) {
            (DecisionVars::Boolean { yes, .. }, Value::Bool(true)) => *yes,
            (DecisionVars::Boolean { no, .. }, Value::Bool(false)) => *no,
            (DecisionVars::Enumeration(vs), Value::Option(o)) => vs[o],
            _ => panic!("value does not match the decision type"),
        }
    }

    /// The effect of assigning `value` to decision `d`.
    pub fn value_effect(&self, d: usize, value: Value) -> Vec<Lit> {
        match (&self.decisions[d], value) {
            (DecisionVars::Boolean { yes, no }, Value::Bool(true)) => vec![yes.positive(), no.negative()],
            (DecisionVars::Boolean { yes, no }, Value::Bool(false)) => vec![no.positive(), yes.negative()],
            (DecisionVars::Enumeration(vs), Value::Option(o)) => vec![vs[o].positive()],
            _ => panic!("value does not match the decision type"),
        }
    }

    pub fn is_taken(&self, d: usize) -> Formula {
        Formula::or(self.decisions[d].all().into_iter().map(Self::pos))
    }

    pub fn expr(&self, e: &Expr) -> Formula {
        match e {
            Expr::True => Formula::True,
            Expr::False => Formula::False,
            Expr::Yes(d) => Self::pos(self.value_var(*d, Value::Bool(true))),
            Expr::No(d) => Self::pos(self.value_var(*d, Value::Bool(false))),
            Expr::Selected(d, o) => Self::pos(self.value_var(*d, Value::Option(*o))),
            Expr::IsTaken(d) => self.is_taken(*d),
            Expr::ContainsOnly(d, o) => {
                let DecisionVars::Enumeration(vs) = &self.decisions[*d] else {
                    panic!("containsOnly on a boolean decision");
                };
                Formula::and(
                    vs.iter()
                        .enumerate()
                        .map(|(k, &v)| if k == *o { Self::pos(v) } else { Formula::not(Self::pos(v)) }),
                )
            }
            Expr::Asset(a) => Self::pos(self.assets[*a]),
            Expr::Not(e) => Formula::not(self.expr(e)),
            Expr::And(es) => Formula::and(es.iter().map(|e| self.expr(e))),
            Expr::Or(es) => Formula::or(es.iter().map(|e| self.expr(e))),
        }
    }
}

/// Cardinality formulas for an enumeration over `vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cardinality {
    /// No `max + 1` options together.
    pub at_most: Vec<Formula>,
    /// Some `n - min + 1` cover contains a selected option.
    pub at_least: Vec<Formula>,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

pub fn cardinality(vars: &[Var], min: usize, max: usize) -> Cardinality {
    let n = vars.len();
    let at_most = if max >= n {
        Vec::new()
    } else {
        subsets(n, max + 1)
            .into_iter()
            .map(|s| Formula::not(Formula::and(s.into_iter().map(|k| Formula::Atom(vars[k])))))
            .collect()
    };
    let at_least = if min == 0 {
        Vec::new()
    } else {
        subsets(n, n - min + 1)
            .into_iter()
            .map(|s| Formula::or(s.into_iter().map(|k| Formula::Atom(vars[k]))))
            .collect()
    };
    Cardinality { at_most, at_least }
}

/// The raw cardinality formulas of an enumeration: pairwise exclusion when
/// at most one option may be chosen, an at-least-one disjunction when one
/// is required, and nothing when unconstrained.
pub fn enumeration_constraints(vars: &[Var], min: usize, max: usize) -> Vec<Formula> {
    let c = cardinality(vars, min, max);
    c.at_most.into_iter().chain(c.at_least).collect()
}

#[derive(Debug, Clone)]
pub struct Translation {
    pub spec: Specification,
    pub vars: VarMap,
    /// Parallel to `spec.constraints()`.
    pub origins: Vec<Origin>,
    /// `steps[i - 1]` is what transition `i` stands for.
    pub steps: Vec<Step>,
    pub checks: Vec<Check>,
}

impl Translation {
    pub fn step(&self, index: u32) -> Option<Step> {
        self.steps.get((index as usize).checked_sub(1)?).copied()
    }

    /// The index of the user transition assigning `value` to `d`.
    pub fn user_index(&self, d: usize, value: Value) -> Option<u32> {
        self.steps
            .iter()
            .position(|s| *s == Step::User { decision: d, value })
            .map(|k| k as u32 + 1)
    }

    pub fn rule_count(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Rule(_))).count()
    }
}

pub fn translate_expression(vars: &VarMap, e: &Expr) -> Formula {
    vars.expr(e)
}

pub fn translate(model: &DoplerModel) -> Result<Translation, ModelError> {
    let mut names: Vec<String> = Vec::new();
    for d in &model.decisions {
        match &d.kind {
            DecisionKind::Boolean => {
                names.push(format!("{}_Yes", d.name));
                names.push(format!("{}_No", d.name));
            }
            DecisionKind::Enumeration { options, .. } => {
                names.extend(options.iter().map(|o| format!("{}_{o}", d.name)));
            }
        }
        names.push(format!("Visible_{}", d.name));
    }
    names.extend(model.assets.iter().map(|a| a.name.clone()));
    let table = VarTable::new(names).map_err(|e| ModelError::Invalid {
        field: "decisions".into(),
        message: format!("translated variable names collide: {e}"),
    })?;
    let var = |n: &str| table.get(n).expect("declared above");
    let vars = VarMap {
        decisions: model
            .decisions
            .iter()
            .map(|d| match &d.kind {
                DecisionKind::Boolean => DecisionVars::Boolean {
                    yes: var(&format!("{}_Yes", d.name)),
                    no: var(&format!("{}_No", d.name)),
                },
                DecisionKind::Enumeration { options, .. } => {
                    DecisionVars::Enumeration(options.iter().map(|o| var(&format!("{}_{o}", d.name))).collect())
                }
            })
            .collect(),
        visible: model.decisions.iter().map(|d| var(&format!("Visible_{}", d.name))).collect(),
        assets: model.assets.iter().map(|a| var(&a.name)).collect(),
    };

    let mut constraints = Vec::new();
    let mut origins = Vec::new();
    for (k, d) in model.decisions.iter().enumerate() {
        if d.visibility != Expr::False {
            constraints.push(Formula::implies(vars.expr(&d.visibility), Formula::Atom(vars.visible[k])));
            origins.push(Origin::Visibility { decision: k });
        }
        if let DecisionKind::Enumeration { min, max, .. } = d.kind {
            let DecisionVars::Enumeration(vs) = &vars.decisions[k] else { unreachable!() };
            let c = cardinality(vs, min, max);
            let taken = vars.is_taken(k);
            let bounds = c
                .at_most
                .into_iter()
                .chain((!c.at_least.is_empty()).then(|| Formula::implies(taken, Formula::and(c.at_least))));
            for f in bounds {
                constraints.push(f);
                origins.push(Origin::Cardinality { decision: k });
            }
        }
    }
    for (k, a) in model.assets.iter().enumerate() {
        let me = Formula::Atom(vars.assets[k]);
        if let Some(inc) = &a.inclusion {
            constraints.push(Formula::implies(vars.expr(inc), me.clone()));
            origins.push(Origin::Inclusion { asset: k });
        }
        for &b in &a.includes {
            constraints.push(Formula::implies(me.clone(), Formula::Atom(vars.assets[b])));
            origins.push(Origin::Includes { asset: k, target: b });
        }
        for &b in &a.excludes {
            constraints.push(Formula::implies(me.clone(), Formula::not(Formula::Atom(vars.assets[b]))));
            origins.push(Origin::Excludes { asset: k, target: b });
        }
    }
    for (k, c) in model.constraints.iter().enumerate() {
        constraints.push(vars.expr(c));
        origins.push(Origin::Constraint { index: k });
    }

    let mut transitions = Vec::new();
    let mut steps = Vec::new();
    for (k, r) in model.rules.iter().enumerate() {
        let mut lits = Vec::new();
        for a in &r.actions {
            let (d, v) = match *a {
                Action::SetBool(d, b) => (d, Value::Bool(b)),
                Action::SetValue(d, o) => (d, Value::Option(o)),
            };
            lits.extend(vars.value_effect(d, v));
        }
        let effect = State::new(lits).map_err(|_| ModelError::Invalid {
            field: format!("rules[{k}].then"),
            message: "contradictory actions".into(),
        })?;
        transitions.push(Transition::rule(k as u32 + 1, vars.expr(&r.condition), effect));
        steps.push(Step::Rule(k));
    }
    for (k, d) in model.decisions.iter().enumerate() {
        let values: Vec<Value> = match &d.kind {
            DecisionKind::Boolean => vec![Value::Bool(true), Value::Bool(false)],
            DecisionKind::Enumeration { options, .. } => (0..options.len()).map(Value::Option).collect(),
        };
        let untaken = Formula::and(vars.decisions[k].all().into_iter().map(|v| Formula::not(Formula::Atom(v))));
        let condition = Formula::and([Formula::Atom(vars.visible[k]), untaken]);
        for value in values {
            let effect = State::new(vars.value_effect(k, value)).expect("value effects are consistent");
            transitions.push(Transition::user(steps.len() as u32 + 1, condition.clone(), effect));
            steps.push(Step::User { decision: k, value });
        }
    }

    let initial = State::new(vars.decisions.iter().flat_map(|d| d.all()).map(Var::negative)).expect("distinct variables");
    let checks = model
        .checks
        .iter()
        .map(|c| Check {
            name: c.name.clone(),
            formula: vars.expr(&c.formula),
        })
        .collect();
    let spec = Specification::new(table, initial, constraints, transitions).map_err(|e| ModelError::Invalid {
        field: "model".into(),
        message: e.to_string(),
    })?;
    Ok(Translation {
        spec,
        vars,
        origins,
        steps,
        checks,
    })
}
