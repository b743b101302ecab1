//! State graph construction and the anomaly checks.

pub mod checks;
pub mod cycles;
pub mod export;
pub mod graph;

use serde_json::json;

pub use checks::{
    check_inconsistency, check_incompleteness, check_incompleteness_all, check_redundancy, check_rule_confluence,
    check_user_confluence, model_witness, next_rule_terminal, user_index_sets, Redundancy, RuleConfluence,
    UserConfluence, UserCounterexample,
};
pub use cycles::{find_cycles, Cycles, DEFAULT_CYCLE_LIMIT};
pub use graph::{build_state_graph, GraphEdge, StateGraph};

use crate::logic::formula::Formula;
use crate::logic::spec::Specification;
use crate::saturation::ExplorationResult;

/// A named formula every rule-terminal state should entail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub formula: Formula,
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub checks: Vec<Check>,
    pub cycle_limit: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            checks: Vec::new(),
            cycle_limit: DEFAULT_CYCLE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incompleteness {
    pub check: String,
    pub formula: String,
    pub vertices: Vec<usize>,
}

/// Every check run over one state graph.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub graph: StateGraph,
    pub inconsistent: Vec<usize>,
    /// One entry per check, including the satisfied ones.
    pub incompleteness: Vec<Incompleteness>,
    pub redundancy: Vec<Redundancy>,
    pub cycles: Cycles,
    pub rule_confluence: RuleConfluence,
    pub user_confluence: UserConfluence,
}

pub fn analyze(spec: &Specification, r: &ExplorationResult, opts: &AnalysisOptions) -> Analysis {
    let graph = build_state_graph(r, spec);
    let formulas: Vec<Formula> = opts.checks.iter().map(|c| c.formula.clone()).collect();
    let incomplete = check_incompleteness_all(&graph, spec, &formulas);
    Analysis {
        inconsistent: check_inconsistency(&graph),
        incompleteness: opts
            .checks
            .iter()
            .zip(incomplete)
            .map(|(c, vertices)| Incompleteness {
                check: c.name.clone(),
                formula: c.formula.display(spec.vars()).to_string(),
                vertices,
            })
            .collect(),
        redundancy: check_redundancy(&graph),
        cycles: find_cycles(&graph, opts.cycle_limit),
        rule_confluence: check_rule_confluence(&graph),
        user_confluence: check_user_confluence(&graph),
        graph,
    }
}

impl Analysis {
    pub fn incomplete(&self) -> impl Iterator<Item = &Incompleteness> {
        self.incompleteness.iter().filter(|i| !i.vertices.is_empty())
    }

    pub fn has_anomalies(&self) -> bool {
        !self.inconsistent.is_empty()
            || self.incomplete().next().is_some()
            || !self.redundancy.is_empty()
            || self.cycles.exists
            || !self.rule_confluence.confluent
            || !self.rule_confluence.non_terminating.is_empty()
            || !self.user_confluence.confluent
    }

    pub fn anomalies_json(&self) -> serde_json::Value {
        let g = &self.graph;
        json!({
            "inconsistent": self.inconsistent.iter().map(|&v| json!({
                "vertex": v,
                "state": g.state_string(v),
                "path": g.paths[v].indexes(),
            })).collect::<Vec<_>>(),
            "incomplete": self.incomplete().map(|i| json!({
                "check": i.check,
                "formula": i.formula,
                "vertices": i.vertices,
            })).collect::<Vec<_>>(),
            "redundant": self.redundancy,
            "cycles": self.cycles,
            "rule_confluence": self.rule_confluence,
            "user_confluence": self.user_confluence,
        })
    }
}
