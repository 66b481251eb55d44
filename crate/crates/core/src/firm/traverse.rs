use std::collections::{BTreeSet, HashMap, HashSet};

use super::{FirmGraph, NodeId, NodeKind};

/// Depth-first walk from End over block and field references. Every node,
/// and in particular every Block, is entered at most once, so the walk
/// terminates on cyclic control flow. `visitor` sees nodes in preorder.
/// Returns the set of Blocks entered.
pub fn visit_blocks_once(graph: &FirmGraph, mut visitor: impl FnMut(NodeId)) -> BTreeSet<NodeId> {
    let mut blocks = BTreeSet::new();
    let Some(end) = graph.end() else { return blocks };
    let mut seen = HashSet::new();
    let mut stack = vec![end];
    while let Some(n) = stack.pop() {
        if !seen.insert(n) {
            continue;
        }
        if graph.kind(n).is_block() {
            blocks.insert(n);
        }
        visitor(n);
        let succ = graph.successors_in_visit_order(n);
        stack.extend(succ.into_iter().rev().filter(|s| !seen.contains(s)));
    }
    blocks
}

/// Kind with references blanked out and the constant spelling dropped.
fn shape(kind: &NodeKind) -> NodeKind {
    let mut k = kind.clone();
    k.map_operands(|_| NodeId(0));
    if let NodeKind::NumericConst { unparsed, value: Some(_) } = &mut k {
        unparsed.clear();
    }
    k
}

/// Whether the reachable parts of two graphs are equal up to renaming of
/// node ids. Locations and GXL ids are ignored.
pub fn isomorphic(g1: &FirmGraph, g2: &FirmGraph) -> bool {
    let (Some(e1), Some(e2)) = (g1.end(), g2.end()) else {
        return g1.end().is_none() && g2.end().is_none();
    };
    let mut fwd: HashMap<NodeId, NodeId> = HashMap::new();
    let mut bwd: HashMap<NodeId, NodeId> = HashMap::new();
    let mut work = vec![(e1, e2)];
    while let Some((a, b)) = work.pop() {
        match (fwd.get(&a), bwd.get(&b)) {
            (Some(&x), _) if x != b => return false,
            (_, Some(&y)) if y != a => return false,
            (Some(_), Some(_)) => continue,
            _ => {}
        }
        fwd.insert(a, b);
        bwd.insert(b, a);
        let (na, nb) = (g1.node(a), g2.node(b));
        if na.mode != nb.mode || na.block.is_some() != nb.block.is_some() || shape(&na.kind) != shape(&nb.kind) {
            return false;
        }
        let sa = g1.successors_in_visit_order(a);
        let sb = g2.successors_in_visit_order(b);
        if sa.len() != sb.len() {
            return false;
        }
        work.extend(sa.into_iter().zip(sb));
    }
    true
}
