use std::sync::Arc;

use crate::logic::spec::{Specification, TransitionKind};
use crate::logic::state::State;
use crate::logic::var::VarTable;
use crate::saturation::{ExplorationResult, Path};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphEdge {
    pub source: usize,
    pub label: u32,
    pub target: usize,
    pub kind: TransitionKind,
}

impl GraphEdge {
    pub fn is_self_loop(&self) -> bool {
        self.source == self.target
    }

    pub fn is_rule(&self) -> bool {
        self.kind == TransitionKind::Rule
    }
}

/// The reachable states and the fired transitions between them.
///
/// Vertices are numbered in canonical path order; vertex 0 is the initial
/// state. Edges are sorted by source, then label, and include self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateGraph {
    pub vertices: Vec<State>,
    pub paths: Vec<Path>,
    pub consistent: Vec<bool>,
    pub edges: Vec<GraphEdge>,
    vars: Arc<VarTable>,
}

pub fn build_state_graph(r: &ExplorationResult, spec: &Specification) -> StateGraph {
    let edges = r
        .edges
        .iter()
        .map(|e| GraphEdge {
            source: e.source,
            label: e.label,
            target: e.target,
            kind: spec.kind_of(e.label).expect("edge label names a transition"),
        })
        .collect();
    StateGraph {
        vertices: r.states.clone(),
        paths: r.saturations.iter().map(|s| s.path.clone()).collect(),
        consistent: r.saturations.iter().map(|s| s.is_consistent()).collect(),
        edges,
        vars: spec.shared_vars(),
    }
}

impl StateGraph {
    pub const INITIAL: usize = 0;

    pub fn vars(&self) -> &VarTable {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn outgoing(&self, v: usize) -> &[GraphEdge] {
        let lo = self.edges.partition_point(|e| e.source < v);
        let hi = self.edges.partition_point(|e| e.source <= v);
        &self.edges[lo..hi]
    }

    /// Edges between distinct vertices.
    pub fn proper_edges(&self) -> impl Iterator<Item = &GraphEdge> {
        self.edges.iter().filter(|e| !e.is_self_loop())
    }

    /// Consistent, and every fired rule leaves the state unchanged.
    pub fn is_rule_terminal(&self, v: usize) -> bool {
        self.consistent[v] && self.outgoing(v).iter().all(|e| !e.is_rule() || e.is_self_loop())
    }

    /// Where rule propagation stops: rule-terminal or inconsistent.
    pub fn is_endpoint(&self, v: usize) -> bool {
        !self.consistent[v] || self.is_rule_terminal(v)
    }

    /// Successor lists without self-loops or parallel edges.
    pub(crate) fn successors(&self, rules_only: bool) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len()];
        for e in self.proper_edges().filter(|e| !rules_only || e.is_rule()) {
            adj[e.source].push(e.target);
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    pub fn state_string(&self, v: usize) -> String {
        self.vertices[v].display(&self.vars).to_string()
    }
}
