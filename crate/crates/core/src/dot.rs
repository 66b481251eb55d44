//! Graphviz rendering of a Firm graph.

use std::fmt::Write;

use crate::firm::{FirmGraph, Mode, NodeId, NodeKind};

/// Renders the reachable graph as a DOT digraph: one cluster per Block,
/// dashed containment edges and solid reference edges labelled with their
/// index.
pub fn to_dot(graph: &FirmGraph) -> String {
    let mut out = String::from("digraph firm {\n  node [shape=box];\n");
    let members = graph.block_members();
    for (block, nodes) in &members {
        let _ = writeln!(out, "  subgraph cluster_{block} {{");
        let _ = writeln!(out, "    label=\"{block}\";");
        let _ = writeln!(out, "    {block} [label=\"Block\", shape=ellipse];");
        for &n in nodes {
            let _ = writeln!(out, "    {n} [label=\"{}\"];", escape(&label(graph, n)));
        }
        out.push_str("  }\n");
    }
    for n in graph.reachable() {
        if let Some(b) = graph.block_of(n) {
            let _ = writeln!(out, "  {n} -> {b} [style=dashed];");
        }
        for (index, target) in references(graph, n) {
            let _ = writeln!(out, "  {n} -> {target} [label=\"{index}\"];");
        }
    }
    out.push_str("}\n");
    out
}

fn references(graph: &FirmGraph, n: NodeId) -> Vec<(i64, NodeId)> {
    match graph.kind(n) {
        NodeKind::Block { predecs } => predecs.iter().map(|(&k, &v)| (k, v)).collect(),
        NodeKind::Phi { alternatives } => alternatives.iter().map(|(&k, &v)| (k, v)).collect(),
        kind => kind.operands().into_iter().enumerate().map(|(i, (v, _))| (i as i64, v)).collect(),
    }
}

fn label(graph: &FirmGraph, n: NodeId) -> String {
    let node = graph.node(n);
    let mut s = match &node.kind {
        NodeKind::ProjX { selection, .. } => format!("Proj_X[{selection}]"),
        NodeKind::ProjN { pos, .. } => format!("Proj_N[{pos}]"),
        k => k.name().to_string(),
    };
    if node.mode != Mode::NotYetComputed {
        let _ = write!(s, " {}", node.mode);
    }
    match &node.kind {
        NodeKind::NumericConst { value: Some(v), .. } => {
            let _ = write!(s, " {v}");
        }
        NodeKind::NumericConst { unparsed, value: None } | NodeKind::SymConst { unparsed } => {
            let _ = write!(s, " {unparsed}");
        }
        _ => {}
    }
    s
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
