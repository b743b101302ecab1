//! Anomaly detection on models, reported in decision and asset terms.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::analysis::{analyze, Analysis, AnalysisOptions, DEFAULT_CYCLE_LIMIT};
use crate::dopler::model::{DecisionKind, DoplerModel, ModelError};
use crate::dopler::translate::{translate, DecisionVars, Origin, Translation};
use crate::logic::clause::Clause;
use crate::logic::formula::cnf_of;
use crate::logic::spec::Specification;
use crate::logic::state::State;
use crate::saturation::{explore_with, satisfiable, ExplorationResult, ExploreError, ExploreOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyClass {
    Inconsistency,
    Incompleteness,
    Redundancy,
    Cycle,
    RuleConfluence,
    NonTermination,
    UserConfluence,
    AssetConflict,
}

impl AnomalyClass {
    pub const ALL: [AnomalyClass; 8] = [
        AnomalyClass::Inconsistency,
        AnomalyClass::Incompleteness,
        AnomalyClass::Redundancy,
        AnomalyClass::Cycle,
        AnomalyClass::RuleConfluence,
        AnomalyClass::NonTermination,
        AnomalyClass::UserConfluence,
        AnomalyClass::AssetConflict,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AnomalyClass::Inconsistency => "inconsistency",
            AnomalyClass::Incompleteness => "incompleteness",
            AnomalyClass::Redundancy => "redundancy",
            AnomalyClass::Cycle => "cycle",
            AnomalyClass::RuleConfluence => "rule_confluence",
            AnomalyClass::NonTermination => "non_termination",
            AnomalyClass::UserConfluence => "user_confluence",
            AnomalyClass::AssetConflict => "asset_conflict",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub class: AnomalyClass,
    pub description: String,
    /// State graph vertices the finding is about.
    pub states: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct AnomalyReport {
    pub translation: Translation,
    pub exploration: ExplorationResult,
    pub analysis: Analysis,
    pub findings: Vec<Finding>,
}

impl AnomalyReport {
    pub fn count(&self, class: AnomalyClass) -> usize {
        self.findings.iter().filter(|f| f.class == class).count()
    }

    pub fn of(&self, class: AnomalyClass) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(move |f| f.class == class)
    }

    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AnomalyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Explore(#[from] ExploreError),
}

/// A minimal set of constraint indexes (into `spec.constraints()`) that is
/// unsatisfiable together with `state`, found by deletion. `None` if the
/// state is consistent.
pub fn minimal_conflict(spec: &Specification, state: &State) -> Option<Vec<usize>> {
    let groups: Vec<Vec<Clause>> = spec.constraints().iter().map(cnf_of).collect();
    let nvars = spec.vars().len();
    let sat = |keep: &[usize]| {
        let clauses: Vec<Clause> = keep.iter().flat_map(|&k| groups[k].iter().cloned()).collect();
        satisfiable(nvars, state, &clauses)
    };
    let mut keep: Vec<usize> = (0..groups.len()).collect();
    if sat(&keep) {
        return None;
    }
    let mut i = 0;
    while i < keep.len() {
        let without: Vec<usize> = keep.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &k)| k).collect();
        if sat(&without) {
            i += 1;
        } else {
            keep = without;
        }
    }
    Some(keep)
}

/// Why a state is inconsistent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conflict {
    pub description: String,
    /// Set when the conflict involves asset constraints.
    pub asset_conflict: Option<String>,
    /// Constraint indexes of a minimal conflicting subset.
    pub constraints: Vec<usize>,
}

/// How findings name states, transitions and conflicts.
pub trait Vocabulary {
    fn spec(&self) -> &Specification;
    fn state(&self, s: &State) -> String;
    fn rule(&self, index: u32) -> String;
    fn choice(&self, index: u32) -> String;
    fn conflict(&self, s: &State) -> Conflict;
    /// What changes along a sequence of states.
    fn changing(&self, states: &[&State]) -> String;
}

/// Findings over a raw specification, in literal terms.
pub struct SpecVocabulary<'a>(pub &'a Specification);

impl Vocabulary for SpecVocabulary<'_> {
    fn spec(&self) -> &Specification {
        self.0
    }

    fn state(&self, s: &State) -> String {
        s.display(self.0.vars()).to_string()
    }

    fn rule(&self, index: u32) -> String {
        let t = self.0.transition(index).expect("rule index");
        format!(
            "rule {index} ({} ~> {})",
            t.condition.display(self.0.vars()),
            t.effect.display(self.0.vars())
        )
    }

    fn choice(&self, index: u32) -> String {
        format!("transition {index}")
    }

    fn conflict(&self, s: &State) -> Conflict {
        let mus = minimal_conflict(self.0, s).unwrap_or_default();
        let why: Vec<String> = mus
            .iter()
            .map(|&k| self.0.constraints()[k].display(self.0.vars()).to_string())
            .collect();
        Conflict {
            description: format!("{}: violates {}", self.state(s), why.join("; ")),
            asset_conflict: None,
            constraints: mus,
        }
    }

    fn changing(&self, states: &[&State]) -> String {
        let vars = self.0.vars();
        let changed: Vec<&str> = vars
            .user_vars()
            .filter(|&v| states.iter().any(|s| s.value(v) != states[0].value(v)))
            .map(|v| vars.name(v))
            .collect();
        changed.join(", ")
    }
}

/// Findings over a model, in decision and asset terms.
pub struct ModelVocabulary<'a> {
    pub model: &'a DoplerModel,
    pub translation: &'a Translation,
}

impl Vocabulary for ModelVocabulary<'_> {
    fn spec(&self) -> &Specification {
        &self.translation.spec
    }

    fn state(&self, s: &State) -> String {
        describe_state(self.model, self.translation, s)
    }

    fn rule(&self, index: u32) -> String {
        let r = &self.model.document.rules[index as usize - 1];
        format!("rule {index} (if {} then {})", r.condition, r.then.join(", "))
    }

    fn choice(&self, index: u32) -> String {
        let t = self.translation.spec.transition(index).expect("user index");
        describe_state(self.model, self.translation, &t.effect)
    }

    fn conflict(&self, s: &State) -> Conflict {
        let (model, tr) = (self.model, self.translation);
        let mus = minimal_conflict(&tr.spec, s).unwrap_or_default();
        let origins: Vec<Origin> = mus.iter().map(|&k| tr.origins[k]).collect();
        let why: Vec<String> = origins.iter().map(|&o| describe_origin(model, o)).collect();
        let over = overfull(model, tr, s);
        let description = if over.is_empty() {
            format!("{}: violates {}", self.state(s), why.join("; "))
        } else {
            format!("{}: {}", self.state(s), over.join(", "))
        };
        let asset_conflict = origins.iter().any(|o| o.is_asset()).then(|| {
            let targets: BTreeSet<&str> = origins
                .iter()
                .filter_map(|o| match *o {
                    Origin::Includes { target, .. } | Origin::Excludes { target, .. } => {
                        Some(model.assets[target].name.as_str())
                    }
                    _ => None,
                })
                .collect();
            let subject = if targets.is_empty() {
                String::new()
            } else {
                format!(" over {}", targets.into_iter().collect::<Vec<_>>().join(", "))
            };
            format!("asset conflict{subject} in {}: {}", self.state(s), why.join("; "))
        });
        Conflict {
            description,
            asset_conflict,
            constraints: mus,
        }
    }

    fn changing(&self, states: &[&State]) -> String {
        changing_decisions(self.model, self.translation, states).join(", ")
    }
}

pub fn describe_state(model: &DoplerModel, tr: &Translation, state: &State) -> String {
    let mut parts = Vec::new();
    for (k, d) in model.decisions.iter().enumerate() {
        match (&tr.vars.decisions[k], &d.kind) {
            (DecisionVars::Boolean { yes, no }, _) => {
                match (state.value(*yes), state.value(*no)) {
                    (Some(true), Some(true)) => parts.push(format!("{}=true and false", d.name)),
                    (Some(true), _) => parts.push(format!("{}=true", d.name)),
                    (_, Some(true)) => parts.push(format!("{}=false", d.name)),
                    _ => {}
                }
            }
            (DecisionVars::Enumeration(vs), DecisionKind::Enumeration { options, .. }) => {
                let sel: Vec<&str> = vs
                    .iter()
                    .zip(options)
                    .filter(|(v, _)| state.value(**v) == Some(true))
                    .map(|(_, o)| o.as_str())
                    .collect();
                match sel.len() {
                    0 => {}
                    1 => parts.push(format!("{}={}", d.name, sel[0])),
                    _ => parts.push(format!("{} ∈ {{{}}}", d.name, sel.join(", "))),
                }
            }
            _ => unreachable!("decision variables follow the decision kind"),
        }
    }
    if parts.is_empty() {
        "nothing decided".into()
    } else {
        parts.join(", ")
    }
}

pub fn describe_origin(model: &DoplerModel, o: Origin) -> String {
    let doc = &model.document;
    match o {
        Origin::Visibility { decision } => format!("visibility condition of {}", model.decisions[decision].name),
        Origin::Cardinality { decision } => format!("cardinality of {}", model.decisions[decision].name),
        Origin::Inclusion { asset } => format!(
            "inclusion condition of {} ({})",
            model.assets[asset].name,
            doc.assets[asset].inclusion.as_deref().unwrap_or("true")
        ),
        Origin::Includes { asset, target } => {
            format!("{} includes {}", model.assets[asset].name, model.assets[target].name)
        }
        Origin::Excludes { asset, target } => {
            format!("{} excludes {}", model.assets[asset].name, model.assets[target].name)
        }
        Origin::Constraint { index } => format!("constraint `{}`", doc.constraints[index]),
    }
}

/// Enumerations holding more options than allowed in `state`.
fn overfull(model: &DoplerModel, tr: &Translation, state: &State) -> Vec<String> {
    let mut out = Vec::new();
    for (k, d) in model.decisions.iter().enumerate() {
        if let (DecisionVars::Enumeration(vs), DecisionKind::Enumeration { options, max, .. }) =
            (&tr.vars.decisions[k], &d.kind)
        {
            let sel: Vec<&str> = vs
                .iter()
                .zip(options)
                .filter(|(v, _)| state.value(**v) == Some(true))
                .map(|(_, o)| o.as_str())
                .collect();
            if sel.len() > *max {
                out.push(format!("{} ∈ {{{}}} simultaneously", d.name, sel.join(", ")));
            }
        }
    }
    out
}

/// Decisions whose value differs somewhere along `states`.
fn changing_decisions(model: &DoplerModel, tr: &Translation, states: &[&State]) -> Vec<String> {
    let mut out = Vec::new();
    for (k, d) in model.decisions.iter().enumerate() {
        let vs = tr.vars.decisions[k].all();
        let first = vs.iter().map(|v| states[0].value(*v)).collect::<Vec<_>>();
        if states.iter().any(|s| vs.iter().map(|v| s.value(*v)).collect::<Vec<_>>() != first) {
            out.push(d.name.clone());
        }
    }
    out
}

pub fn detect_anomalies(model: &DoplerModel) -> Result<AnomalyReport, AnomalyError> {
    detect_anomalies_with(model, &ExploreOptions::default(), DEFAULT_CYCLE_LIMIT)
}

pub fn detect_anomalies_with(
    model: &DoplerModel,
    opts: &ExploreOptions,
    cycle_limit: usize,
) -> Result<AnomalyReport, AnomalyError> {
    let tr = translate(model)?;
    let exploration = explore_with(&tr.spec, opts)?;
    let analysis = analyze(
        &tr.spec,
        &exploration,
        &AnalysisOptions {
            checks: tr.checks.clone(),
            cycle_limit,
        },
    );
    let findings = findings(
        &ModelVocabulary {
            model,
            translation: &tr,
        },
        &analysis,
    );
    Ok(AnomalyReport {
        translation: tr,
        exploration,
        analysis,
        findings,
    })
}

/// Describes every anomaly of `a`, in the order: inconsistency,
/// incompleteness, redundancy, cycles, rule confluence, non-termination,
/// user confluence, asset conflicts.
pub fn findings<V: Vocabulary + ?Sized>(vocab: &V, a: &Analysis) -> Vec<Finding> {
    let g = &a.graph;
    let state = |v: usize| vocab.state(&g.vertices[v]);
    let mut out = Vec::new();
    let mut assets = Vec::new();

    for &v in &a.inconsistent {
        let c = vocab.conflict(&g.vertices[v]);
        out.push(Finding {
            class: AnomalyClass::Inconsistency,
            description: format!("{} (path {})", c.description, g.paths[v]),
            states: vec![v],
        });
        if let Some(description) = c.asset_conflict {
            assets.push(Finding {
                class: AnomalyClass::AssetConflict,
                description,
                states: vec![v],
            });
        }
    }

    for inc in a.incomplete() {
        for &v in &inc.vertices {
            out.push(Finding {
                class: AnomalyClass::Incompleteness,
                description: format!("check `{}` does not hold in terminal state {}", inc.check, state(v)),
                states: vec![v],
            });
        }
    }

    for r in &a.redundancy {
        out.push(Finding {
            class: AnomalyClass::Redundancy,
            description: format!(
                "{} and {} both lead from {} to {}",
                vocab.rule(r.first),
                vocab.rule(r.second),
                state(r.source),
                state(r.target)
            ),
            states: vec![r.source, r.target],
        });
    }

    if a.cycles.exists {
        for w in &a.cycles.witnesses {
            let states: Vec<&State> = w.iter().map(|&v| &g.vertices[v]).collect();
            out.push(Finding {
                class: AnomalyClass::Cycle,
                description: format!(
                    "cycle through {} states changing {}, starting at {}",
                    w.len() - 1,
                    vocab.changing(&states),
                    state(w[0])
                ),
                states: w.clone(),
            });
        }
        if a.cycles.witnesses.is_empty() {
            out.push(Finding {
                class: AnomalyClass::Cycle,
                description: "the state graph has a cycle".into(),
                states: Vec::new(),
            });
        }
    }

    if let Some((v, t1, t2)) = a.rule_confluence.counterexample {
        out.push(Finding {
            class: AnomalyClass::RuleConfluence,
            description: format!("from {}, rule propagation can end in {} or in {}", state(v), state(t1), state(t2)),
            states: vec![v, t1, t2],
        });
    }
    if let Some(&first) = a.rule_confluence.non_terminating.first() {
        let nt = &a.rule_confluence.non_terminating;
        out.push(Finding {
            class: AnomalyClass::NonTermination,
            description: format!("rule propagation never terminates from {} states, e.g. {}", nt.len(), state(first)),
            states: nt.clone(),
        });
    }

    if let Some(c) = &a.user_confluence.counterexample {
        let choices: Vec<String> = c.users.iter().map(|&i| vocab.choice(i)).collect();
        let choices = if choices.is_empty() { "no user choices".to_string() } else { choices.join(", ") };
        out.push(Finding {
            class: AnomalyClass::UserConfluence,
            description: format!(
                "choosing {choices} in different orders ends in {} or in {}",
                state(c.first.1),
                state(c.second.1)
            ),
            states: vec![c.first.0, c.first.1, c.second.0, c.second.1],
        });
    }

    out.extend(assets);
    out
}
