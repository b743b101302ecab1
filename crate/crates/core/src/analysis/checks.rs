use std::collections::{BTreeMap, BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::analysis::graph::StateGraph;
use crate::logic::formula::Formula;
use crate::logic::semantics::Interpretation;
use crate::logic::spec::{Specification, TransitionKind};
use crate::logic::var::Var;
use crate::saturation::Saturator;

/// Vertices whose state is inconsistent with the constraints, in canonical
/// order. Their witness paths are `g.paths[v]`.
pub fn check_inconsistency(g: &StateGraph) -> Vec<usize> {
    (0..g.len()).filter(|&v| !g.consistent[v]).collect()
}

/// A model of the specification: each reachable state mapped to a total
/// valuation satisfying it and the constraints. `None` if some reachable
/// state is inconsistent.
pub fn model_witness(g: &StateGraph, spec: &Specification) -> Option<Interpretation> {
    let sat = Saturator::new(spec);
    let mut interp = Interpretation::new();
    for s in &g.vertices {
        let m = sat.model(s)?;
        interp.insert(
            s.clone(),
            m.iter().enumerate().filter(|(_, b)| **b).map(|(k, _)| Var(k as u32)),
        );
    }
    Some(interp)
}

/// Consistent rule-terminal vertices that do not entail `phi`.
pub fn check_incompleteness(g: &StateGraph, spec: &Specification, phi: &Formula) -> Vec<usize> {
    check_incompleteness_all(g, spec, std::slice::from_ref(phi)).remove(0)
}

/// [`check_incompleteness`] for several formulas, saturating each vertex
/// once.
pub fn check_incompleteness_all(g: &StateGraph, spec: &Specification, phis: &[Formula]) -> Vec<Vec<usize>> {
    let sat = Saturator::new(spec);
    let mut out = vec![Vec::new(); phis.len()];
    for v in (0..g.len()).filter(|&v| g.is_rule_terminal(v)) {
        for (k, entailed) in sat.entails_all(&g.vertices[v], phis).into_iter().enumerate() {
            if !entailed {
                out[k].push(v);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Redundancy {
    pub first: u32,
    pub second: u32,
    pub source: usize,
    pub target: usize,
}

/// Pairs of rules `i < j` with edges `(S, i, T)` and `(S, j, T)`, `S ≠ T`.
pub fn check_redundancy(g: &StateGraph) -> Vec<Redundancy> {
    let mut out = Vec::new();
    for v in 0..g.len() {
        let rules: Vec<_> = g.outgoing(v).iter().filter(|e| e.is_rule() && !e.is_self_loop()).collect();
        for (a, e) in rules.iter().enumerate() {
            for f in &rules[a + 1..] {
                if e.target == f.target {
                    out.push(Redundancy {
                        first: e.label,
                        second: f.label,
                        source: v,
                        target: e.target,
                    });
                }
            }
        }
    }
    out
}

/// Strongly connected components of `adj`, each sorted, in an unspecified
/// but deterministic order.
pub(crate) fn components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut g = DiGraph::<(), ()>::with_capacity(adj.len(), 0);
    for _ in 0..adj.len() {
        g.add_node(());
    }
    for (v, ws) in adj.iter().enumerate() {
        for &w in ws {
            g.add_edge(NodeIndex::new(v), NodeIndex::new(w), ());
        }
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            c.sort_unstable();
            c
        })
        .collect()
}

/// The two smallest elements of a set.
fn cap2(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v.truncate(2);
    v
}

/// For each vertex, the endpoints (rule-terminal or inconsistent vertices)
/// reachable over rule edges, truncated to the two smallest. An endpoint's
/// set is itself; an empty set means propagation never stops.
pub fn next_rule_terminal(g: &StateGraph) -> Vec<Vec<usize>> {
    let adj = g.successors(true);
    // tarjan_scc yields components in reverse topological order: every
    // component's successors come before it.
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); g.len()];
    for comp in components(&adj) {
        let mut acc = Vec::new();
        for &v in &comp {
            if g.is_endpoint(v) {
                acc.push(v);
            }
            for &w in &adj[v] {
                if comp.binary_search(&w).is_err() {
                    acc.extend_from_slice(&out[w]);
                }
            }
        }
        let acc = cap2(acc);
        for &v in &comp {
            out[v] = if g.is_endpoint(v) { vec![v] } else { acc.clone() };
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleConfluence {
    pub confluent: bool,
    /// A vertex with two distinct next endpoints.
    pub counterexample: Option<(usize, usize, usize)>,
    /// Vertices from which rule propagation never reaches an endpoint.
    pub non_terminating: Vec<usize>,
}

pub fn check_rule_confluence(g: &StateGraph) -> RuleConfluence {
    let next = next_rule_terminal(g);
    let counterexample = next.iter().enumerate().find(|(_, n)| n.len() > 1).map(|(v, n)| (v, n[0], n[1]));
    RuleConfluence {
        confluent: counterexample.is_none(),
        counterexample,
        non_terminating: (0..g.len()).filter(|&v| next[v].is_empty()).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UserCounterexample {
    /// The shared set of user transition indexes.
    pub users: Vec<u32>,
    /// `(vertex, its next endpoint)` for two different endpoints.
    pub first: (usize, usize),
    pub second: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UserConfluence {
    pub confluent: bool,
    pub counterexample: Option<UserCounterexample>,
}

/// `U(S)`: the sets of user transition indexes witnessed on paths from the
/// initial vertex to each vertex.
pub fn user_index_sets(g: &StateGraph) -> Vec<BTreeSet<Vec<u32>>> {
    let mut sets: Vec<BTreeSet<Vec<u32>>> = vec![BTreeSet::new(); g.len()];
    if g.is_empty() {
        return sets;
    }
    sets[StateGraph::INITIAL].insert(Vec::new());
    let mut queue = VecDeque::from([(StateGraph::INITIAL, Vec::new())]);
    while let Some((v, u)) = queue.pop_front() {
        for e in g.outgoing(v) {
            let mut next = u.clone();
            if e.kind == TransitionKind::User {
                if let Err(k) = next.binary_search(&e.label) {
                    next.insert(k, e.label);
                }
            }
            if sets[e.target].insert(next.clone()) {
                queue.push_back((e.target, next));
            }
        }
    }
    sets
}

pub fn check_user_confluence(g: &StateGraph) -> UserConfluence {
    let next = next_rule_terminal(g);
    let sets = user_index_sets(g);
    // For every user-index set: the distinct endpoints seen so far, each
    // with the vertex it was reached from.
    let mut by_set: BTreeMap<&Vec<u32>, Vec<(usize, usize)>> = BTreeMap::new();
    for v in 0..g.len() {
        for u in &sets[v] {
            let seen = by_set.entry(u).or_default();
            for &t in &next[v] {
                if seen.len() < 2 && seen.iter().all(|&(_, s)| s != t) {
                    seen.push((v, t));
                }
            }
        }
    }
    let counterexample = by_set.into_iter().find(|(_, s)| s.len() > 1).map(|(u, s)| UserCounterexample {
        users: u.clone(),
        first: s[0],
        second: s[1],
    });
    UserConfluence {
        confluent: counterexample.is_none(),
        counterexample,
    }
}
