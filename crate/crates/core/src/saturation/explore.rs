//! Exhaustive state exploration.
//!
//! Breadth-first over start clauses: a level holds all states first reached
//! by paths of one length, discovered in lexicographic path order, so the
//! first path to reach a state is its ≺-least one. The states of a level are
//! saturated in parallel and their successors collected sequentially, which
//! keeps the result independent of the thread count.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::logic::spec::{Specification, TransitionKind};
use crate::logic::state::State;
use crate::saturation::engine::{StateSaturation, Saturator};
use crate::saturation::labeled::Path;

#[derive(Debug, Clone, Default)]
pub struct ExploreOptions {
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    pub deadline: Option<Instant>,
    /// Stop after the first level that contains an inconsistent state.
    pub stop_at_first_inconsistency: bool,
    /// Retain clause sets in every saturation.
    pub keep_clauses: bool,
    pub max_states: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("time limit reached after {states} states")]
    Timeout { states: usize },
    #[error("state limit of {limit} exceeded")]
    TooManyStates { limit: usize },
    #[error("could not build thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct Edge {
    pub source: usize,
    pub label: u32,
    pub target: usize,
}

/// States are numbered in canonical order: by the ≺-least path reaching
/// them. State 0 is the initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplorationResult {
    pub states: Vec<State>,
    pub saturations: Vec<StateSaturation>,
    /// Sorted by source, then label.
    pub edges: Vec<Edge>,
    /// False if exploration stopped early at an inconsistent state.
    pub complete: bool,
    index: HashMap<State, usize>,
}

impl ExplorationResult {
    pub fn index_of(&self, state: &State) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn canonical_path(&self, id: usize) -> &Path {
        &self.saturations[id].path
    }

    pub fn is_consistent(&self, id: usize) -> bool {
        self.saturations[id].is_consistent()
    }

    pub fn inconsistent(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.states.len()).filter(|&i| !self.is_consistent(i))
    }

    pub fn outgoing(&self, id: usize) -> &[Edge] {
        let lo = self.edges.partition_point(|e| e.source < id);
        let hi = self.edges.partition_point(|e| e.source <= id);
        &self.edges[lo..hi]
    }
}

pub fn explore(spec: &Specification) -> ExplorationResult {
    explore_with(spec, &ExploreOptions::default()).expect("unbounded exploration cannot fail")
}

pub fn explore_with(spec: &Specification, opts: &ExploreOptions) -> Result<ExplorationResult, ExploreError> {
    match opts.jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| ExploreError::Pool(e.to_string()))?;
            pool.install(|| run(spec, opts))
        }
        None => run(spec, opts),
    }
}

fn run(spec: &Specification, opts: &ExploreOptions) -> Result<ExplorationResult, ExploreError> {
    let sat = Saturator::new(spec);
    let mut states = vec![spec.initial().clone()];
    let mut paths = vec![Path::empty()];
    let mut index = HashMap::from([(spec.initial().clone(), 0)]);
    let mut saturations: Vec<StateSaturation> = Vec::new();
    let mut edges = Vec::new();
    let mut level = 0..1;
    let mut complete = true;
    let timed_out = |n: usize| opts.deadline.is_some_and(|d| Instant::now() >= d).then_some(ExploreError::Timeout { states: n });

    while !level.is_empty() {
        if let Some(e) = timed_out(states.len()) {
            return Err(e);
        }
        let done: Vec<Option<StateSaturation>> = level
            .clone()
            .into_par_iter()
            .map(|id| {
                if opts.deadline.is_some_and(|d| Instant::now() >= d) {
                    return None;
                }
                Some(if opts.keep_clauses {
                    sat.saturate_keeping(&states[id], &paths[id])
                } else {
                    sat.saturate(&states[id], &paths[id])
                })
            })
            .collect();
        for s in done {
            match s {
                Some(s) => saturations.push(s),
                None => return Err(ExploreError::Timeout { states: states.len() }),
            }
        }
        let next_start = states.len();
        for id in level.clone() {
            for (label, target) in successors(spec, &states[id], &saturations[id]) {
                let t = match index.get(&target) {
                    Some(&t) => t,
                    None => {
                        let t = states.len();
                        if opts.max_states.is_some_and(|m| t >= m) {
                            return Err(ExploreError::TooManyStates {
                                limit: opts.max_states.unwrap(),
                            });
                        }
                        index.insert(target.clone(), t);
                        paths.push(paths[id].extend(label));
                        states.push(target);
                        t
                    }
                };
                edges.push(Edge { source: id, label, target: t });
            }
        }
        if opts.stop_at_first_inconsistency && level.clone().any(|id| saturations[id].bottom_star) {
            // Drop the unsaturated frontier.
            complete = false;
            for s in states.drain(saturations.len()..) {
                index.remove(&s);
            }
            edges.retain(|e| e.target < states.len());
            break;
        }
        level = next_start..states.len();
    }

    edges.sort();
    log::debug!("explored {} states, {} edges", states.len(), edges.len());
    Ok(ExplorationResult {
        states,
        saturations,
        edges,
        complete,
        index,
    })
}

/// Fired transitions of a saturated state, ascending by index: every rule
/// whose condition is entailed, and every entailed user transition if all
/// entailed rules leave the state unchanged.
pub fn successors(spec: &Specification, state: &State, sat: &StateSaturation) -> Vec<(u32, State)> {
    if sat.bottom_star {
        return Vec::new();
    }
    let mut rules = Vec::new();
    let mut terminal = true;
    for t in spec.rules().filter(|t| sat.fires(t.index)) {
        let next = state.update(&t.effect);
        terminal &= &next == state;
        rules.push((t.index, next));
    }
    let mut out = rules;
    if terminal {
        out.extend(
            spec.transitions()
                .iter()
                .filter(|t| t.kind == TransitionKind::User && sat.fires(t.index))
                .map(|t| (t.index, state.update(&t.effect))),
        );
    }
    out.sort_by_key(|(i, _)| *i);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_spec_text;

    #[test]
    fn example4_states() {
        let spec = parse_spec_text(
            "[vars]\nA B C D\n[init]\n!A !B\n[constraints]\nB -> C\n[user]\n1: !A ~> A B\n[rules]\n2: C ~> D\n",
        )
        .unwrap();
        let r = explore(&spec);
        let t = spec.vars();
        let shown: Vec<String> = r.states.iter().map(|s| s.display(t).to_string()).collect();
        assert_eq!(shown, ["{!A, !B}", "{A, B}", "{A, B, D}"]);
        assert_eq!(
            r.edges,
            [
                Edge { source: 0, label: 1, target: 1 },
                Edge { source: 1, label: 2, target: 2 },
                // C ~> D still fires once D holds.
                Edge { source: 2, label: 2, target: 2 },
            ]
        );
        assert_eq!(r.canonical_path(2).indexes(), &[1, 2]);
    }

    #[test]
    fn no_transitions() {
        let spec = parse_spec_text("[vars]\nA\n[init]\nA\n").unwrap();
        let r = explore(&spec);
        assert_eq!(r.states.len(), 1);
        assert!(r.edges.is_empty());
    }

    #[test]
    fn flip_flop() {
        let spec = parse_spec_text("[vars]\nA\n[init]\nA\n[rules]\n1: A ~> !A\n2: !A ~> A\n").unwrap();
        let r = explore(&spec);
        assert_eq!(r.states.len(), 2);
        assert_eq!(
            r.edges,
            [Edge { source: 0, label: 1, target: 1 }, Edge { source: 1, label: 2, target: 0 }]
        );
    }

    #[test]
    fn self_loops_are_recorded() {
        let spec = parse_spec_text("[vars]\nA\n[init]\nA\n[rules]\n1: A ~> A\n").unwrap();
        let r = explore(&spec);
        assert_eq!(r.states.len(), 1);
        assert_eq!(r.edges, [Edge { source: 0, label: 1, target: 0 }]);
    }
}
