//! Structural consistency checks over a Firm graph.
//!
//! Error codes:
//!
//! | code | rule |
//! |------|------|
//! | C1 | every block but the end block has exactly one control-flow node |
//! | C2 | the end block has no control-flow node |
//! | C3 | a Phi has as many alternatives as its block has predecessors |
//! | C4 | Phi alternative keys are `0..n` |
//! | C5 | Block predecessor keys are `0..n` |
//! | E1 | every block is reachable from the start block |
//! | E2 | the data dependences inside a block (Phis excluded) are acyclic |
//!
//! Warnings W1..W4 flag a start block holding more than Start, its
//! constants and its projections, a start block with predecessors, an end block holding more than End, and
//! constants outside the start block.
//!
//! Start counts as its block's control-flow node only while some Block
//! names it as a predecessor, so a start block may end in a Cond or Return
//! instead.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use crate::diag::{Diagnostic, SourceLocation};
use crate::firm::{visit_blocks_once, FirmGraph, Mode, NodeId, NodeKind};

/// Runs every check; an empty result means the graph is valid.
pub fn check(graph: &FirmGraph) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let Some(end) = graph.end() else {
        out.push(Diagnostic::error(None, "graph has no end node"));
        return out;
    };
    let mut order = Vec::new();
    let blocks = visit_blocks_once(graph, |n| order.push(n));
    let mut members: BTreeMap<NodeId, Vec<NodeId>> = blocks.iter().map(|&b| (b, Vec::new())).collect();
    for &n in &order {
        if let Some(b) = graph.block_of(n) {
            members.entry(b).or_default().push(n);
        }
    }
    let loc = |n: NodeId| graph.node(n).location.clone();
    let start = graph.start().filter(|s| order.contains(s));
    let start_block = graph.start().and_then(|s| graph.block_of(s));
    let end_block = graph.block_of(end).expect("End lives in a block");

    let start_is_cf = start.is_some_and(|s| {
        blocks
            .iter()
            .any(|&b| graph.predecs(b).is_some_and(|p| p.values().any(|&cf| cf == s)))
    });
    let control_flow = |b: NodeId| -> Vec<NodeId> {
        members[&b]
            .iter()
            .copied()
            .filter(|&n| graph.kind(n).is_terminator() || (start_is_cf && Some(n) == start))
            .collect()
    };

    for &b in &blocks {
        let cfs = control_flow(b);
        if b == end_block {
            if !cfs.is_empty() {
                out.push(
                    Diagnostic::error(loc(cfs[0]), "The block containing the end node does contain a jump/cond node")
                        .with_code("C2"),
                );
            }
        } else if cfs.len() > 1 {
            let text = format!(
                "Block contains more than one control flow, namely defined at {} and defined at {}",
                show(&loc(cfs[0])),
                show(&loc(cfs[1]))
            );
            out.push(Diagnostic::error(loc(b), text).with_code("C1"));
        } else if cfs.is_empty() {
            out.push(Diagnostic::error(loc(b), "this block does not contain a jump/cond node").with_code("C1"));
        }
        let predecs = graph.predecs(b).expect("visited blocks are blocks");
        if !check_index_set(predecs.keys().copied()) {
            out.push(
                Diagnostic::error(loc(b), "block predecessors (/outgoing edges) not numbered from zero, consecutively.")
                    .with_code("C5"),
            );
        }
    }

    for &n in &order {
        if let NodeKind::Phi { alternatives } = graph.kind(n) {
            let block = graph.block_of(n).expect("Phi lives in a block");
            let predecs = graph.predecs(block).expect("block");
            if predecs.len() != alternatives.len() {
                out.push(
                    Diagnostic::error(
                        loc(n),
                        "phi node has not the same count of outgoing edges(/input) as containing block.",
                    )
                    .with_code("C3"),
                );
            }
            if !check_index_set(alternatives.keys().copied()) {
                out.push(
                    Diagnostic::error(loc(n), "phi node alternatives not numbered from zero, consecutively.")
                        .with_code("C4"),
                );
            }
        }
    }

    if let Some(sb) = start_block.filter(|b| blocks.contains(b)) {
        let reached = forward_reachable(graph, &blocks, sb);
        for &b in &blocks {
            if !reached.contains(&b) {
                out.push(Diagnostic::error(loc(b), "block is not reachable from the start block").with_code("E1"));
            }
        }
    }

    for (&b, nodes) in &members {
        if let Some(n) = data_cycle(graph, b, nodes) {
            out.push(Diagnostic::error(loc(n), "data dependence cycle inside a block").with_code("E2"));
        }
    }

    if let Some(sb) = start_block.filter(|b| blocks.contains(b)) {
        let extra = |n: NodeId| match graph.kind(n) {
            NodeKind::NumericConst { .. } | NodeKind::SymConst { .. } => false,
            NodeKind::ProjN { predec, .. } => match graph.kind(*predec) {
                NodeKind::ProjN { predec, .. } => Some(*predec) != start,
                _ => Some(*predec) != start,
            },
            _ => Some(n) != start,
        };
        if members[&sb].iter().any(|&n| extra(n)) {
            out.push(
                Diagnostic::warning(loc(sb), "start block contains nodes other than the start node").with_code("W1"),
            );
        }
        if !graph.predecs(sb).expect("block").is_empty() {
            out.push(Diagnostic::warning(loc(sb), "start block has predecessors").with_code("W2"));
        }
    }
    if members[&end_block].iter().any(|&n| n != end) {
        out.push(Diagnostic::warning(loc(end_block), "end block contains nodes other than the end node").with_code("W3"));
    }
    for &n in &order {
        if matches!(graph.kind(n), NodeKind::NumericConst { .. }) && graph.block_of(n) != start_block {
            out.push(Diagnostic::warning(loc(n), "constant is not contained in the start block").with_code("W4"));
        }
    }
    out
}

fn show(l: &Option<SourceLocation>) -> String {
    l.as_ref().map(|l| l.to_string()).unwrap_or_else(|| "<unknown>".into())
}

/// Blocks reachable from `from` along control flow.
fn forward_reachable(graph: &FirmGraph, blocks: &BTreeSet<NodeId>, from: NodeId) -> HashSet<NodeId> {
    let mut succ: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    for &b in blocks {
        for &cf in graph.predecs(b).expect("block").values() {
            if let Some(src) = graph.block_of(cf) {
                succ.entry(src).or_default().push(b);
            }
        }
    }
    let mut seen = HashSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(b) = queue.pop_front() {
        for &s in succ.get(&b).into_iter().flatten() {
            if seen.insert(s) {
                queue.push_back(s);
            }
        }
    }
    seen
}

/// A node on a dependence cycle among the non-Phi members of `block`.
fn data_cycle(graph: &FirmGraph, block: NodeId, nodes: &[NodeId]) -> Option<NodeId> {
    let inside = |n: NodeId| graph.block_of(n) == Some(block) && !matches!(graph.kind(n), NodeKind::Phi { .. });
    let mut state: HashMap<NodeId, bool> = HashMap::new(); // false: on stack, true: finished
    for &root in nodes.iter().filter(|&&n| inside(n)) {
        if state.contains_key(&root) {
            continue;
        }
        let mut stack: Vec<(NodeId, Vec<NodeId>)> = vec![(root, deps(graph, root, &inside))];
        state.insert(root, false);
        while let Some((n, pending)) = stack.last_mut() {
            match pending.pop() {
                Some(m) => match state.get(&m) {
                    Some(false) => return Some(m),
                    Some(true) => {}
                    None => {
                        state.insert(m, false);
                        let d = deps(graph, m, &inside);
                        stack.push((m, d));
                    }
                },
                None => {
                    state.insert(*n, true);
                    stack.pop();
                }
            }
        }
    }
    None
}

fn deps(graph: &FirmGraph, n: NodeId, inside: &impl Fn(NodeId) -> bool) -> Vec<NodeId> {
    graph.kind(n).operands().into_iter().map(|(m, _)| m).filter(|&m| inside(m)).collect()
}

/// Whether `keys` is exactly `{0, ..., len-1}`.
pub fn check_index_set(keys: impl IntoIterator<Item = i64>) -> bool {
    let keys: BTreeSet<i64> = keys.into_iter().collect();
    let count = keys.len() as i64;
    keys.iter().all(|&i| (0..count).contains(&i))
}

/// Selector modes a Cond accepts: `b` and the integer modes.
pub fn is_valid_cond_selector(mode: Mode) -> bool {
    mode == Mode::B || mode.is_integer()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::firm::{BinaryOp, ConstValue};

    const NYC: Mode = Mode::NotYetComputed;

    fn codes(g: &FirmGraph) -> Vec<&'static str> {
        check(g).iter().filter(|d| d.is_error()).map(|d| d.code.unwrap()).collect()
    }

    fn block(g: &mut FirmGraph, predecs: &[(i64, NodeId)]) -> NodeId {
        g.add(NodeKind::Block { predecs: predecs.iter().copied().collect() }, None, NYC).unwrap()
    }

    fn konst(g: &mut FirmGraph, b: NodeId, v: i64) -> NodeId {
        let kind = NodeKind::NumericConst { unparsed: v.to_string(), value: Some(ConstValue::int(Mode::Is, v)) };
        g.add(kind, Some(b), Mode::Is).unwrap()
    }

    /// SB{Start} -> B1{Return} -> EB{End}
    fn minimal() -> FirmGraph {
        let mut g = FirmGraph::new();
        let sb = block(&mut g, &[]);
        let s = g.add(NodeKind::Start, Some(sb), NYC).unwrap();
        let b1 = block(&mut g, &[(0, s)]);
        let r = g.add(NodeKind::Return { memstate: s, results: vec![] }, Some(b1), NYC).unwrap();
        let eb = block(&mut g, &[(0, r)]);
        g.add(NodeKind::End, Some(eb), NYC).unwrap();
        g
    }

    #[test]
    fn minimal_graph_is_clean() {
        assert_eq!(check(&minimal()), vec![]);
    }

    fn returning(in_start: bool) -> FirmGraph {
        let mut g = FirmGraph::new();
        let sb = block(&mut g, &[]);
        let s = g.add(NodeKind::Start, Some(sb), NYC).unwrap();
        let args = g.add(NodeKind::ProjN { predec: s, pos: 2 }, Some(sb), NYC).unwrap();
        let a0 = g.add(NodeKind::ProjN { predec: args, pos: 0 }, Some(sb), NYC).unwrap();
        let k = konst(&mut g, sb, 1);
        let b1 = block(&mut g, &[(0, s)]);
        let sum_block = if in_start { sb } else { b1 };
        let sum = g.add(NodeKind::Binary { op: BinaryOp::Add, left: a0, right: k }, Some(sum_block), NYC).unwrap();
        let r = g.add(NodeKind::Return { memstate: s, results: vec![sum] }, Some(b1), NYC).unwrap();
        let eb = block(&mut g, &[(0, r)]);
        g.add(NodeKind::End, Some(eb), NYC).unwrap();
        g
    }

    #[test]
    fn start_block_may_hold_constants_and_arguments() {
        assert_eq!(check(&returning(false)), vec![]);
        let warned: Vec<_> = check(&returning(true)).iter().map(|d| d.code.unwrap()).collect();
        assert_eq!(warned, vec!["W1"]);
    }

    #[test]
    fn two_jumps_in_one_block() {
        let mut g = FirmGraph::new();
        let sb = block(&mut g, &[]);
        let s = g.add(NodeKind::Start, Some(sb), NYC).unwrap();
        let b1 = block(&mut g, &[(0, s)]);
        let j1 = g.add(NodeKind::Jmp, Some(b1), NYC).unwrap();
        let j2 = g.add(NodeKind::Jmp, Some(b1), NYC).unwrap();
        let b2 = block(&mut g, &[(0, j1), (1, j2)]);
        let r = g.add(NodeKind::Return { memstate: s, results: vec![] }, Some(b2), NYC).unwrap();
        let eb = block(&mut g, &[(0, r)]);
        g.add(NodeKind::End, Some(eb), NYC).unwrap();
        let d = check(&g);
        assert_eq!(codes(&g), vec!["C1"]);
        assert!(d[0].text.starts_with("Block contains more than one control flow"));
    }

    #[test]
    fn phi_count_and_numbering_are_separate_findings() {
        let build = |block_keys: &[i64]| {
            let mut g = FirmGraph::new();
            let sb = block(&mut g, &[]);
            let s = g.add(NodeKind::Start, Some(sb), NYC).unwrap();
            let j = g.add(NodeKind::Jmp, Some(sb), NYC).unwrap();
            let _ = s;
            let preds: Vec<(i64, NodeId)> = block_keys.iter().map(|&k| (k, j)).collect();
            let b1 = block(&mut g, &preds);
            let c = konst(&mut g, sb, 1);
            let phi = g
                .add(NodeKind::Phi { alternatives: BTreeMap::from([(0, c), (2, c)]) }, Some(b1), Mode::Is)
                .unwrap();
            let r = g.add(NodeKind::Return { memstate: s, results: vec![phi] }, Some(b1), NYC).unwrap();
            let eb = block(&mut g, &[(0, r)]);
            g.add(NodeKind::End, Some(eb), NYC).unwrap();
            g
        };
        assert_eq!(codes(&build(&[0, 1, 2])), vec!["C3", "C4"]);
        assert_eq!(codes(&build(&[0, 1])), vec!["C4"]);
    }

    #[test]
    fn index_sets() {
        assert!(check_index_set([]));
        assert!(check_index_set([0, 1, 2]));
        assert!(check_index_set([2, 0, 1]));
        assert!(!check_index_set([0, 2]));
        assert!(!check_index_set([-1, 0]));
    }

    #[test]
    fn cond_selector_modes() {
        assert!(is_valid_cond_selector(Mode::B));
        assert!(is_valid_cond_selector(Mode::Is));
        assert!(is_valid_cond_selector(Mode::Bu));
        assert!(!is_valid_cond_selector(Mode::F));
        assert!(!is_valid_cond_selector(Mode::NotYetComputed));
    }

    #[test]
    fn data_cycle_is_found() {
        let mut g = minimal();
        let end = g.end().unwrap();
        let eb = g.block_of(end).unwrap();
        let r = g.predecs(eb).unwrap()[&0];
        let b1 = g.block_of(r).unwrap();
        let s = g.start().unwrap();
        let c = konst(&mut g, b1, 1);
        let a = g.add(NodeKind::Binary { op: BinaryOp::Add, left: c, right: c }, Some(b1), Mode::Is).unwrap();
        g.replace_kind(a, NodeKind::Binary { op: BinaryOp::Add, left: a, right: c }).unwrap();
        g.replace_kind(r, NodeKind::Return { memstate: s, results: vec![a] }).unwrap();
        assert_eq!(codes(&g), vec!["E2"]);
    }

    #[test]
    fn check_is_pure() {
        let g = minimal();
        let copy = g.clone();
        let _ = check(&g);
        assert_eq!(g, copy);
    }
}
