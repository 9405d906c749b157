use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{Edge, EdgeKind, ProcessGraph};
use crate::icn::{Icn, IcnId};

/// Serialized form of a process graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub icns: Vec<Icn>,
    pub edges: Vec<Edge>,
    pub roots: Vec<IcnId>,
    pub next_id: u32,
}

impl From<ProcessGraph> for GraphDocument {
    fn from(g: ProcessGraph) -> Self {
        let roots = g.roots();
        GraphDocument { icns: g.icns.into_values().collect(), edges: g.edges, roots, next_id: g.next_id }
    }
}

impl From<GraphDocument> for ProcessGraph {
    fn from(d: GraphDocument) -> Self {
        ProcessGraph {
            icns: d.icns.into_iter().map(|i| (i.id, i)).collect(),
            edges: d.edges,
            next_id: d.next_id,
        }
    }
}

fn style(kind: EdgeKind) -> &'static str {
    match kind {
        EdgeKind::Detailing => "solid",
        EdgeKind::Exploration => "dashed",
        EdgeKind::Causality => "dotted",
        EdgeKind::Generalization => "bold",
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering with one node per cluster and styled typed edges.
pub fn to_dot(g: &ProcessGraph) -> String {
    let mut out = String::from("digraph icn {\n  rankdir=TB;\n  node [shape=box];\n");
    for icn in g.icns.values() {
        let _ = writeln!(out, "  n{} [label={}];", icn.id.0, quote(&format!("{} [{}]", icn.id, icn.image)));
    }
    for e in &g.edges {
        let mut label = e.kind.as_str().to_string();
        if !e.elements.is_empty() {
            let lemmas: Vec<&str> = e.elements.iter().map(|x| x.lemma.as_str()).collect();
            label = format!("{label}: {}", lemmas.join(", "));
        }
        let _ = writeln!(
            out,
            "  n{} -> n{} [label={}, style={}];",
            e.from.0,
            e.to.0,
            quote(&label),
            style(e.kind)
        );
    }
    out.push_str("}\n");
    out
}
