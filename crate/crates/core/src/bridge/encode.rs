use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use super::*;
use crate::firm::{ConstValue, FirmGraph, NodeId, NodeKind};
use crate::gxl::{GxlAttr, GxlDocument, GxlEdge, GxlGraph, GxlNode, GxlPart, GxlValue};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("graph has no End node")]
    NoEnd,
    #[error("node class {0} has no entry in the metamodel")]
    UnmappedClass(String),
    #[error("{kind} node {node} cannot be expressed in the wire format: {reason}")]
    Inexpressible {
        kind: &'static str,
        node: NodeId,
        reason: &'static str,
    },
}

/// Encodes the reachable part of `graph` as the object graph `graph_id`,
/// preceded by `metamodel`. Node ids are `node10000`, `node10001`, ... in
/// depth-first order from End; Proj_X nodes are folded into `#True` /
/// `#False` typed block edges.
pub fn encode(
    graph: &FirmGraph,
    metamodel: &GxlGraph,
    classname_to_meta_id: &BTreeMap<String, String>,
    graph_id: &str,
) -> Result<GxlDocument, EncodeError> {
    let end = graph.end().ok_or(EncodeError::NoEnd)?;
    let order = graph.reachable();
    let mut reserved: HashSet<String> = GxlDocument { graphs: vec![metamodel.clone()], location: None }
        .element_ids()
        .into_iter()
        .map(str::to_string)
        .collect();
    reserved.insert(graph_id.to_string());

    let start_block = graph.start().and_then(|s| graph.block_of(s));
    let end_block = graph.block_of(end);
    let mut object = GxlGraph::new(graph_id);
    object.type_ref = Some(OBJECTMODEL_HREFS[0].to_string());

    // Pass 1: nodes.
    let mut gxl_id: HashMap<NodeId, String> = HashMap::new();
    let mut counter = 10000u64;
    for &n in &order {
        let kind = graph.kind(n);
        let class = match kind {
            NodeKind::ProjX { .. } => continue,
            NodeKind::ProjN { .. } if is_argument_tuple(graph, n) => continue,
            NodeKind::ProjN { .. } if is_argument(graph, n) => "Argument",
            NodeKind::ProjN { .. } => {
                return Err(EncodeError::Inexpressible {
                    kind: "Proj_N",
                    node: n,
                    reason: "only projections of Start's argument tuple have a wire form",
                })
            }
            NodeKind::Block { .. } => {
                let special = if Some(n) == start_block {
                    "StartBlock"
                } else if Some(n) == end_block {
                    "EndBlock"
                } else {
                    "Block"
                };
                if classname_to_meta_id.contains_key(special) {
                    special
                } else {
                    "Block"
                }
            }
            NodeKind::NumericConst { .. } => "Const",
            NodeKind::NoMem
            | NodeKind::Store { .. }
            | NodeKind::Free { .. }
            | NodeKind::Load { .. }
            | NodeKind::Alloc { .. }
            | NodeKind::Sel { .. }
            | NodeKind::Call { .. }
            | NodeKind::TupleN { .. }
            | NodeKind::SymConst { .. }
            | NodeKind::Unknown
            | NodeKind::BadNumeric
            | NodeKind::UnknownNumeric => {
                return Err(EncodeError::Inexpressible {
                    kind: kind.name(),
                    node: n,
                    reason: "no wire mapping is defined for this kind",
                })
            }
            other => other.name(),
        };
        let meta = classname_to_meta_id
            .get(class)
            .ok_or_else(|| EncodeError::UnmappedClass(class.to_string()))?;
        let id = loop {
            let candidate = format!("node{counter}");
            counter += 1;
            if !reserved.contains(&candidate) {
                break candidate;
            }
        };
        let mut node = GxlNode::new(id.clone());
        node.type_ref = Some(format!("#{meta}"));
        match kind {
            NodeKind::NumericConst { unparsed, value } => {
                let v = match value {
                    Some(ConstValue::Int { bits, .. }) => GxlValue::Int(*bits),
                    Some(ConstValue::Float { value, .. }) => GxlValue::Float(*value),
                    Some(ConstValue::Bool(b)) => GxlValue::Int(*b as i64),
                    None => GxlValue::Str(unparsed.clone()),
                };
                node.attrs.push(GxlAttr::new(ATTR_VALUE, v));
            }
            NodeKind::ProjN { pos, .. } => node.attrs.push(GxlAttr::new(ATTR_POSITION, GxlValue::Int(*pos))),
            _ => {}
        }
        gxl_id.insert(n, id);
        object.parts.push(GxlPart::Node(node));
    }

    // Pass 2: edges, containment first, then fields by position.
    let target = |from: NodeId, to: NodeId| -> Result<&String, EncodeError> {
        gxl_id.get(&to).ok_or(EncodeError::Inexpressible {
            kind: graph.kind(from).name(),
            node: from,
            reason: "it refers to a node without a wire form in this field",
        })
    };
    let mut edges = Vec::new();
    for &n in &order {
        let Some(from) = gxl_id.get(&n) else { continue };
        let mut push = |to: &String, pos: i64, type_ref: Option<&str>| {
            let mut e = GxlEdge::new(from.clone(), to.clone());
            e.type_ref = type_ref.map(str::to_string);
            e.attrs.push(GxlAttr::new(ATTR_POSITION, GxlValue::Int(pos)));
            edges.push(e);
        };
        if let Some(b) = graph.block_of(n) {
            push(target(n, b)?, BLOCK_CONTAINMENT_ORDER, None);
        }
        match graph.kind(n) {
            NodeKind::Block { predecs } => {
                for (&k, &cf) in predecs {
                    if let NodeKind::ProjX { input, selection } = graph.kind(cf) {
                        let ty = if *selection == 0 { EDGE_FALSE } else { EDGE_TRUE };
                        push(target(n, *input)?, k, Some(ty));
                    } else {
                        push(target(n, cf)?, k, None);
                    }
                }
            }
            NodeKind::Return { memstate, results } => {
                push(target(n, *memstate)?, 0, None);
                for (i, &r) in results.iter().enumerate() {
                    push(target(n, r)?, i as i64 + 1, None);
                }
            }
            NodeKind::Phi { alternatives } => {
                for (&k, &v) in alternatives {
                    push(target(n, v)?, k, None);
                }
            }
            NodeKind::ProjN { predec, .. } => {
                let start = match graph.kind(*predec) {
                    NodeKind::ProjN { predec: s, .. } => *s,
                    _ => unreachable!("argument shape checked in pass 1"),
                };
                push(target(n, start)?, 0, None);
            }
            kind => {
                for (i, (op, _)) in kind.operands().into_iter().enumerate() {
                    push(target(n, op)?, i as i64, None);
                }
            }
        }
    }
    object.parts.extend(edges.into_iter().map(GxlPart::Edge));

    Ok(GxlDocument {
        graphs: vec![metamodel.clone(), object],
        location: None,
    })
}

/// `Proj_N(Start, START_POS_ARGUMENTS)`.
fn is_argument_tuple(graph: &FirmGraph, n: NodeId) -> bool {
    matches!(graph.kind(n), NodeKind::ProjN { predec, pos: START_POS_ARGUMENTS }
        if matches!(graph.kind(*predec), NodeKind::Start))
}

/// `Proj_N(Proj_N(Start, START_POS_ARGUMENTS), k)`.
fn is_argument(graph: &FirmGraph, n: NodeId) -> bool {
    matches!(graph.kind(n), NodeKind::ProjN { predec, .. } if is_argument_tuple(graph, *predec))
}
