//! Interactive configuration sessions.
//!
//! After every user choice the rules are applied one at a time, lowest
//! applicable index first, until none changes the state. A session is a
//! pure value: the service layer owns ids, locking and persistence.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use thiserror::Error;

use crate::dopler::translate::DecisionVars;
use crate::dopler::{Conflict, DecisionKind, Finding, ModelVocabulary, SpecVocabulary, Value, Vocabulary};
use crate::load::{Model, Report};
use crate::logic::formula::Formula;
use crate::logic::spec::TransitionKind;
use crate::logic::state::State;
use crate::saturation::{Path, Saturator};

/// A user choice. For models, `decision` names a decision and `value` is
/// `true`/`false` or an option name; for raw specifications, `decision` is
/// a user transition index and `value` is absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Choice {
    pub decision: String,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "value_string")]
    pub value: Option<String>,
}

impl Choice {
    pub fn new(decision: impl Into<String>, value: impl Into<String>) -> Choice {
        Choice {
            decision: decision.into(),
            value: Some(value.into()),
        }
    }

    pub fn transition(index: u32) -> Choice {
        Choice {
            decision: index.to_string(),
            value: None,
        }
    }
}

/// Accepts JSON booleans as well as strings for `value`.
fn value_string<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    match Option::<Json>::deserialize(d)? {
        None | Some(Json::Null) => Ok(None),
        Some(Json::Bool(b)) => Ok(Some(b.to_string())),
        Some(Json::String(s)) => Ok(Some(s)),
        Some(other) => Err(serde::de::Error::custom(format!("value must be a string or boolean, got {other}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Consistent and rule-terminal: waiting for a choice.
    Ready,
    Inconsistent,
    NonTerminating,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: u32,
    pub before: State,
    pub after: State,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    Inconsistent(Conflict),
    /// Applying `rule` would revisit `state`.
    Cycle { rule: u32, state: State },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropagationTrace {
    /// The user transition that started propagation; `None` at startup.
    pub choice: Option<u32>,
    /// The state propagation started from.
    pub start: State,
    pub steps: Vec<TraceStep>,
    /// Propagation reached a consistent rule-terminal state.
    pub terminal: bool,
    pub diagnostic: Option<Diagnostic>,
}

impl PropagationTrace {
    pub fn end(&self) -> &State {
        self.steps.last().map_or(&self.start, |s| &s.after)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryEntry {
    pub index: u32,
    pub choice: Choice,
    /// The state before the choice.
    pub snapshot: State,
    pub trace: PropagationTrace,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("unknown decision `{0}`")]
    UnknownDecision(String),
    #[error("invalid value {value:?} for `{decision}`")]
    InvalidValue { decision: String, value: Option<String> },
    #[error("decision `{0}` is not visible")]
    NotVisible(String),
    #[error("decision `{0}` is already taken")]
    AlreadyTaken(String),
    #[error("transition {0} is not applicable")]
    NotApplicable(String),
    #[error("the session is {0:?}; retract a decision first")]
    Blocked(Status),
    #[error("propagation revisits a state via rule {rule}; the choice was rolled back")]
    Cycle { rule: u32, trace: Box<PropagationTrace> },
    #[error("decision `{0}` was not taken by the user")]
    NotInHistory(String),
}

#[derive(Debug, Clone)]
pub struct Session {
    model: Arc<Model>,
    current: State,
    status: Status,
    history: Vec<HistoryEntry>,
    startup: PropagationTrace,
    last: Option<PropagationTrace>,
}

impl Session {
    pub fn new(model: Arc<Model>) -> Session {
        let start = model.spec().initial().clone();
        let trace = propagate(&model, None, start.clone());
        let (current, status) = match &trace.diagnostic {
            None => (trace.end().clone(), Status::Ready),
            Some(Diagnostic::Inconsistent(_)) => (trace.end().clone(), Status::Inconsistent),
            Some(Diagnostic::Cycle { .. }) => (start, Status::NonTerminating),
        };
        Session {
            model,
            current,
            status,
            history: Vec::new(),
            last: Some(trace.clone()),
            startup: trace,
        }
    }

    /// Rebuilds a session by taking `choices` in order.
    pub fn replay(model: Arc<Model>, choices: &[Choice]) -> Result<Session, SessionError> {
        let mut s = Session::new(model);
        for c in choices {
            s.take(c)?;
        }
        Ok(s)
    }

    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    pub fn current(&self) -> &State {
        &self.current
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn startup(&self) -> &PropagationTrace {
        &self.startup
    }

    pub fn last_trace(&self) -> Option<&PropagationTrace> {
        self.last.as_ref()
    }

    pub fn choices(&self) -> Vec<Choice> {
        self.history.iter().map(|h| h.choice.clone()).collect()
    }

    /// The user transition a choice stands for, normalizing the choice.
    fn resolve(&self, c: &Choice) -> Result<(u32, Choice), SessionError> {
        match &*self.model {
            Model::Spec(spec) => {
                let index: u32 = c.decision.parse().map_err(|_| SessionError::UnknownDecision(c.decision.clone()))?;
                if spec.kind_of(index) != Some(TransitionKind::User) {
                    return Err(SessionError::UnknownDecision(c.decision.clone()));
                }
                if c.value.is_some() {
                    return Err(SessionError::InvalidValue {
                        decision: c.decision.clone(),
                        value: c.value.clone(),
                    });
                }
                Ok((index, Choice::transition(index)))
            }
            Model::Dopler { model, translation } => {
                let d = model
                    .decision_index(&c.decision)
                    .ok_or_else(|| SessionError::UnknownDecision(c.decision.clone()))?;
                let invalid = || SessionError::InvalidValue {
                    decision: c.decision.clone(),
                    value: c.value.clone(),
                };
                let v = c.value.as_deref().ok_or_else(invalid)?;
                let value = match &model.decisions[d].kind {
                    DecisionKind::Boolean => match v {
                        "true" => Value::Bool(true),
                        "false" => Value::Bool(false),
                        _ => return Err(invalid()),
                    },
                    DecisionKind::Enumeration { options, .. } => {
                        Value::Option(options.iter().position(|o| o == v).ok_or_else(invalid)?)
                    }
                };
                let index = translation.user_index(d, value).expect("every value has a transition");
                Ok((index, Choice::new(&c.decision, v)))
            }
        }
    }

    /// Applies a choice and propagates. An inconsistent outcome is kept and
    /// flagged; a propagation cycle rolls the choice back.
    pub fn take(&mut self, c: &Choice) -> Result<PropagationTrace, SessionError> {
        if self.status != Status::Ready {
            return Err(SessionError::Blocked(self.status));
        }
        let (index, choice) = self.resolve(c)?;
        let spec = self.model.spec();
        let t = spec.transition(index).expect("resolved index");
        let sat = Saturator::new(spec);
        if !sat.entails(&self.current, &t.condition) {
            return Err(match &*self.model {
                Model::Spec(_) => SessionError::NotApplicable(choice.decision),
                Model::Dopler { model, translation } => {
                    let d = model.decision_index(&choice.decision).expect("resolved");
                    let taken = translation.vars.decisions[d].all().iter().any(|&v| self.current.value(v) == Some(true));
                    if taken {
                        SessionError::AlreadyTaken(choice.decision)
                    } else {
                        SessionError::NotVisible(choice.decision)
                    }
                }
            });
        }
        let trace = propagate(&self.model, Some(index), self.current.update(&t.effect));
        match &trace.diagnostic {
            Some(Diagnostic::Cycle { rule, .. }) => {
                return Err(SessionError::Cycle {
                    rule: *rule,
                    trace: Box::new(trace),
                })
            }
            Some(Diagnostic::Inconsistent(_)) => self.status = Status::Inconsistent,
            None => self.status = Status::Ready,
        }
        self.history.push(HistoryEntry {
            index,
            choice,
            snapshot: std::mem::replace(&mut self.current, trace.end().clone()),
            trace: trace.clone(),
        });
        self.last = Some(trace.clone());
        Ok(trace)
    }

    /// What [`Session::take`] would do, without changing the session.
    pub fn whatif(&self, c: &Choice) -> Result<PropagationTrace, SessionError> {
        self.clone().take(c)
    }

    /// Restores the state before `decision` was taken, undoing every later
    /// choice as well.
    pub fn retract(&mut self, decision: &str) -> Result<&State, SessionError> {
        let pos = self
            .history
            .iter()
            .position(|h| h.choice.decision == decision)
            .ok_or_else(|| SessionError::NotInHistory(decision.to_string()))?;
        self.current = self.history[pos].snapshot.clone();
        self.history.truncate(pos);
        self.status = Status::Ready;
        self.last = Some(self.history.last().map_or(&self.startup, |h| &h.trace).clone());
        Ok(&self.current)
    }

    fn vocabulary(&self) -> Box<dyn Vocabulary + '_> {
        match &*self.model {
            Model::Dopler { model, translation } => Box::new(ModelVocabulary { model, translation }),
            Model::Spec(spec) => Box::new(SpecVocabulary(spec)),
        }
    }

    /// The view document; `analysis` is the cached full analysis of the
    /// model, if any.
    pub fn view(&self, analysis: Option<&Report>) -> View {
        let spec = self.model.spec();
        let vars = spec.vars();
        let vocab = self.vocabulary();
        let sat = Saturator::new(spec);
        let ready = self.status == Status::Ready;
        let s = &self.current;
        let mut decisions = Vec::new();
        let mut visible = Vec::new();
        let mut assets = Vec::new();
        match &*self.model {
            Model::Dopler { model, translation } => {
                let tv = &translation.vars;
                let vis = if ready {
                    sat.entails_all(s, &tv.visible.iter().map(|&v| Formula::Atom(v)).collect::<Vec<_>>())
                } else {
                    vec![false; tv.visible.len()]
                };
                for (k, d) in model.decisions.iter().enumerate() {
                    let (kind, values, value) = match (&d.kind, &tv.decisions[k]) {
                        (DecisionKind::Boolean, DecisionVars::Boolean { yes, no }) => {
                            let value = match (s.value(*yes), s.value(*no)) {
                                (Some(true), _) => Json::Bool(true),
                                (_, Some(true)) => Json::Bool(false),
                                _ => Json::Null,
                            };
                            ("boolean", vec!["true".to_string(), "false".to_string()], value)
                        }
                        (DecisionKind::Enumeration { options, .. }, DecisionVars::Enumeration(vs)) => {
                            let sel: Vec<Json> = vs
                                .iter()
                                .zip(options)
                                .filter(|(v, _)| s.value(**v) == Some(true))
                                .map(|(_, o)| Json::String(o.clone()))
                                .collect();
                            let value = match sel.len() {
                                0 => Json::Null,
                                1 => sel[0].clone(),
                                _ => Json::Array(sel),
                            };
                            ("enumeration", options.clone(), value)
                        }
                        _ => unreachable!("decision variables follow the decision kind"),
                    };
                    let taken = !value.is_null();
                    if vis[k] && !taken {
                        visible.push(ChoiceView {
                            decision: d.name.clone(),
                            kind,
                            values: values.clone(),
                        });
                    }
                    decisions.push(DecisionView {
                        name: d.name.clone(),
                        kind,
                        value,
                        visible: vis[k],
                    });
                }
                if self.status != Status::Inconsistent {
                    let queries: Vec<Formula> = tv
                        .assets
                        .iter()
                        .flat_map(|&a| [Formula::Atom(a), Formula::not(Formula::Atom(a))])
                        .collect();
                    let ans = sat.entails_all(s, &queries);
                    for (k, a) in model.assets.iter().enumerate() {
                        assets.push(AssetView {
                            name: a.name.clone(),
                            included: if ans[2 * k] {
                                Some(true)
                            } else if ans[2 * k + 1] {
                                Some(false)
                            } else {
                                None
                            },
                        });
                    }
                }
            }
            Model::Spec(_) => {
                if ready && crate::logic::semantics::is_rule_terminal(s, spec) {
                    let sat = sat.saturate(s, &Path::empty());
                    for t in spec.users().filter(|t| sat.fires(t.index)) {
                        visible.push(ChoiceView {
                            decision: t.index.to_string(),
                            kind: "transition",
                            values: Vec::new(),
                        });
                    }
                }
            }
        }
        let trace_view = |t: &PropagationTrace| TraceView {
            choice: t.choice,
            start: vocab.state(&t.start),
            steps: t
                .steps
                .iter()
                .map(|st| StepView {
                    rule: st.rule,
                    description: vocab.rule(st.rule),
                    state: vocab.state(&st.after),
                })
                .collect(),
            terminal: t.terminal,
            diagnostic: t.diagnostic.as_ref().map(|d| diagnostic_view(&*vocab, d)),
        };
        let diagnostic = match self.status {
            Status::Ready => None,
            Status::Inconsistent => self
                .history
                .last()
                .map(|h| &h.trace)
                .unwrap_or(&self.startup)
                .diagnostic
                .as_ref()
                .map(|d| diagnostic_view(&*vocab, d)),
            Status::NonTerminating => self.startup.diagnostic.as_ref().map(|d| diagnostic_view(&*vocab, d)),
        };
        View {
            status: self.status,
            state: s.lits().iter().map(|&l| vars.display_lit(l).to_string()).collect(),
            summary: vocab.state(s),
            decisions,
            visible,
            assets,
            history: self
                .history
                .iter()
                .map(|h| HistoryView {
                    decision: h.choice.decision.clone(),
                    value: h.choice.value.clone(),
                    index: h.index,
                    rules_fired: h.trace.steps.len(),
                })
                .collect(),
            diagnostic,
            last_trace: self.last.as_ref().map(trace_view),
            overlay: analysis.map(|r| Overlay::new(r, s)),
        }
    }
}

fn diagnostic_view(vocab: &dyn Vocabulary, d: &Diagnostic) -> DiagnosticView {
    match d {
        Diagnostic::Inconsistent(c) => DiagnosticView {
            kind: "inconsistent",
            message: c.description.clone(),
            constraints: c
                .constraints
                .iter()
                .map(|&k| vocab.spec().constraints()[k].display(vocab.spec().vars()).to_string())
                .collect(),
        },
        Diagnostic::Cycle { rule, state } => DiagnosticView {
            kind: "cycle",
            message: format!("{} would revisit {}", vocab.rule(*rule), vocab.state(state)),
            constraints: Vec::new(),
        },
    }
}

/// Deterministic rule propagation from `start`.
fn propagate(model: &Model, choice: Option<u32>, start: State) -> PropagationTrace {
    let spec = model.spec();
    let sat = Saturator::new(spec);
    let mut seen = HashSet::from([start.clone()]);
    let mut trace = PropagationTrace {
        choice,
        start: start.clone(),
        steps: Vec::new(),
        terminal: false,
        diagnostic: None,
    };
    let mut cur = start;
    loop {
        let s = sat.saturate(&cur, &Path::empty());
        if !s.is_consistent() {
            let conflict = match model {
                Model::Dopler { model, translation } => ModelVocabulary { model, translation }.conflict(&cur),
                Model::Spec(spec) => SpecVocabulary(spec).conflict(&cur),
            };
            trace.diagnostic = Some(Diagnostic::Inconsistent(conflict));
            return trace;
        }
        let next = spec
            .rules()
            .filter(|t| s.fires(t.index))
            .map(|t| (t.index, cur.update(&t.effect)))
            .find(|(_, n)| *n != cur);
        let Some((rule, next)) = next else {
            trace.terminal = true;
            return trace;
        };
        if !seen.insert(next.clone()) {
            trace.diagnostic = Some(Diagnostic::Cycle { rule, state: next });
            return trace;
        }
        trace.steps.push(TraceStep {
            rule,
            before: cur,
            after: next.clone(),
        });
        cur = next;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionView {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: &'static str,
    /// `null` when untaken; a list when an enumeration holds several options.
    pub value: Json,
    pub visible: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChoiceView {
    pub decision: String,
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssetView {
    pub name: String,
    /// Entailed included, entailed excluded, or undetermined.
    pub included: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HistoryView {
    pub decision: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    pub index: u32,
    pub rules_fired: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagnosticView {
    pub kind: &'static str,
    pub message: String,
    /// The culprit constraints, as formulas.
    pub constraints: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepView {
    pub rule: u32,
    pub description: String,
    pub state: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceView {
    pub choice: Option<u32>,
    pub start: String,
    pub steps: Vec<StepView>,
    pub terminal: bool,
    pub diagnostic: Option<DiagnosticView>,
}

/// Anomalies from the cached analysis, focused on the current state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Overlay {
    pub states: usize,
    pub counts: BTreeMap<&'static str, usize>,
    /// The current state's vertex in the state graph.
    pub vertex: Option<usize>,
    /// Findings that involve the current vertex.
    pub findings: Vec<Finding>,
}

impl Overlay {
    pub fn new(r: &Report, current: &State) -> Overlay {
        let vertex = r.exploration.index_of(current);
        let mut counts = BTreeMap::new();
        for f in &r.findings {
            *counts.entry(f.class.name()).or_insert(0) += 1;
        }
        Overlay {
            states: r.exploration.states.len(),
            counts,
            vertex,
            findings: r
                .findings
                .iter()
                .filter(|f| vertex.is_some_and(|v| f.states.contains(&v)))
                .cloned()
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct View {
    pub status: Status,
    /// Current literals.
    pub state: Vec<String>,
    /// The current state in decision terms.
    pub summary: String,
    pub decisions: Vec<DecisionView>,
    /// Visible, untaken decisions and their allowed values.
    pub visible: Vec<ChoiceView>,
    pub assets: Vec<AssetView>,
    pub history: Vec<HistoryView>,
    pub diagnostic: Option<DiagnosticView>,
    pub last_trace: Option<TraceView>,
    pub overlay: Option<Overlay>,
}
