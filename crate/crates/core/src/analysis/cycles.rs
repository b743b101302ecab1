//! Simple cycles of length at least two.
//!
//! Existence is decided exactly from the strongly connected components.
//! Witnesses are enumerated with Johnson's algorithm, smallest start vertex
//! first, and capped.

use serde::Serialize;

use crate::analysis::checks::components;
use crate::analysis::graph::StateGraph;

pub const DEFAULT_CYCLE_LIMIT: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cycles {
    pub exists: bool,
    /// Vertex sequences `S_1, ..., S_n` with `S_1 = S_n`.
    pub witnesses: Vec<Vec<usize>>,
    /// More cycles exist than were enumerated.
    pub truncated: bool,
}

pub fn find_cycles(g: &StateGraph, limit: usize) -> Cycles {
    let adj = g.successors(false);
    let cyclic: Vec<bool> = {
        let mut c = vec![false; g.len()];
        for comp in components(&adj) {
            if comp.len() > 1 {
                for v in comp {
                    c[v] = true;
                }
            }
        }
        c
    };
    let exists = cyclic.iter().any(|&c| c);
    let mut out = Cycles {
        exists,
        witnesses: Vec::new(),
        truncated: false,
    };
    if !exists {
        return out;
    }
    for s in 0..g.len() {
        if !cyclic[s] {
            continue;
        }
        // The component of `s` in the subgraph induced by vertices ≥ s.
        let sub: Vec<Vec<usize>> = adj
            .iter()
            .enumerate()
            .map(|(v, ws)| {
                if v < s || !cyclic[v] {
                    Vec::new()
                } else {
                    ws.iter().copied().filter(|&w| w >= s && cyclic[w]).collect()
                }
            })
            .collect();
        let Some(comp) = components(&sub).into_iter().find(|c| c.binary_search(&s).is_ok()) else {
            continue;
        };
        if comp.len() < 2 {
            continue;
        }
        let mut in_comp = vec![false; g.len()];
        for &v in &comp {
            in_comp[v] = true;
        }
        if !circuits(s, &sub, &in_comp, limit, &mut out) {
            return out;
        }
    }
    out
}

/// Johnson's CIRCUIT procedure from `s`, iteratively. Returns false once
/// the limit is hit.
fn circuits(s: usize, adj: &[Vec<usize>], in_comp: &[bool], limit: usize, out: &mut Cycles) -> bool {
    let n = adj.len();
    let mut blocked = vec![false; n];
    let mut b: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut path = vec![s];
    // (vertex, next successor position, found a circuit below)
    let mut frames: Vec<(usize, usize, bool)> = vec![(s, 0, false)];
    blocked[s] = true;
    while let Some(top) = frames.last_mut() {
        let (v, i) = (top.0, top.1);
        if i < adj[v].len() {
            top.1 += 1;
            let w = adj[v][i];
            if !in_comp[w] {
                continue;
            }
            if w == s {
                top.2 = true;
                if out.witnesses.len() >= limit {
                    out.truncated = true;
                    return false;
                }
                let mut c = path.clone();
                c.push(s);
                out.witnesses.push(c);
            } else if !blocked[w] {
                blocked[w] = true;
                path.push(w);
                frames.push((w, 0, false));
            }
        } else {
            let found = top.2;
            frames.pop();
            path.pop();
            if found {
                unblock(v, &mut blocked, &mut b);
                if let Some(parent) = frames.last_mut() {
                    parent.2 = true;
                }
            } else {
                for &w in &adj[v] {
                    if in_comp[w] && !b[w].contains(&v) {
                        b[w].push(v);
                    }
                }
            }
        }
    }
    true
}

fn unblock(u: usize, blocked: &mut [bool], b: &mut [Vec<usize>]) {
    let mut stack = vec![u];
    while let Some(x) = stack.pop() {
        if blocked[x] {
            blocked[x] = false;
            stack.extend(std::mem::take(&mut b[x]));
        }
    }
}
