//! Byte-stable DOT and JSON renderings of a state graph.

use std::fmt::Write;

use serde::Serialize;

use crate::analysis::graph::StateGraph;
use crate::analysis::Analysis;
use crate::logic::spec::TransitionKind;

/// One node per state, labeled with its positive literals; user edges are
/// dashed and inconsistent states drawn in red.
pub fn to_dot(g: &StateGraph) -> String {
    let mut out = String::from("digraph states {\n  node [shape=box];\n");
    for (v, s) in g.vertices.iter().enumerate() {
        let pos: Vec<&str> = s.positive_vars().map(|x| g.vars().name(x)).collect();
        let label = if pos.is_empty() { "∅".to_string() } else { pos.join(", ") };
        let extra = if g.consistent[v] { "" } else { ", color=red" };
        writeln!(out, "  s{v} [label=\"{label}\"{extra}];").unwrap();
    }
    for e in &g.edges {
        let style = if e.kind == TransitionKind::User { ", style=dashed" } else { "" };
        writeln!(out, "  s{} -> s{} [label=\"{}\"{style}];", e.source, e.target, e.label).unwrap();
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize)]
struct VertexDoc {
    id: usize,
    state: Vec<String>,
    consistent: bool,
    rule_terminal: bool,
}

#[derive(Serialize)]
struct EdgeDoc {
    source: usize,
    label: u32,
    target: usize,
    kind: TransitionKind,
}

#[derive(Serialize)]
struct GraphDoc<'a> {
    vertices: Vec<VertexDoc>,
    edges: Vec<EdgeDoc>,
    canonical_paths: Vec<&'a [u32]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    anomalies: Option<serde_json::Value>,
}

/// `{vertices, edges, canonical_paths, anomalies}`, pretty-printed with a
/// trailing newline.
pub fn to_json(g: &StateGraph, analysis: Option<&Analysis>) -> String {
    let doc = GraphDoc {
        vertices: g
            .vertices
            .iter()
            .enumerate()
            .map(|(v, s)| VertexDoc {
                id: v,
                state: s.lits().iter().map(|&l| g.vars().display_lit(l).to_string()).collect(),
                consistent: g.consistent[v],
                rule_terminal: g.is_rule_terminal(v),
            })
            .collect(),
        edges: g
            .edges
            .iter()
            .map(|e| EdgeDoc {
                source: e.source,
                label: e.label,
                target: e.target,
                kind: e.kind,
            })
            .collect(),
        canonical_paths: g.paths.iter().map(|p| p.indexes()).collect(),
        anomalies: analysis.map(Analysis::anomalies_json),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("graph documents serialize");
    s.push('\n');
    s
}
