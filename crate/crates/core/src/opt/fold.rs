//! Constant propagation over a copy-on-write rewrite.
//!
//! The rewrite has two phases. First every reachable node gets a
//! [`RewriteOutcome`]: folded operations and decided `Proj_X` nodes directly,
//! and every node that transitively refers to one of them needs a fresh
//! version. Then the fresh versions are allocated in one go and their
//! references patched, which handles cyclic control flow without recursion.
//! Nodes outside that closure keep their ids.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::{eval_binary, eval_unary, PassReport, RewriteOutcome};
use crate::diag::Diagnostic;
use crate::firm::{BinaryOp, ConstValue, FirmGraph, FirmNode, Mode, NodeId, NodeKind};
use crate::verify::is_valid_cond_selector;

pub const COND_SELECTOR_ERROR: &str = "argument to cond must be of integer type";

/// Replaces constant Unary/Binary nodes by fresh constants and resolves
/// `Proj_X` nodes of Conds with a constant selector. With `fold_cmp` off,
/// Cmp nodes are left alone.
pub fn fold_constants(graph: &mut FirmGraph, fold_cmp: bool) -> (PassReport, Vec<Diagnostic>) {
    let mut report = PassReport::new("fold");
    let mut diagnostics = Vec::new();
    let Some(end) = graph.end() else {
        return (report, diagnostics);
    };
    let order = graph.reachable();
    let values = constant_values(graph, &order, fold_cmp);

    let mut outcome: HashMap<NodeId, RewriteOutcome> = HashMap::new();
    let mut folded: Vec<(NodeId, ConstValue)> = Vec::new();
    let mut jumps: Vec<NodeId> = Vec::new();
    let mut bad_conds: HashSet<NodeId> = HashSet::new();
    for &n in &order {
        match graph.kind(n) {
            NodeKind::Unary { .. } | NodeKind::Binary { .. } => {
                if let Some(v) = values.get(&n) {
                    folded.push((n, *v));
                }
            }
            NodeKind::ProjX { input, selection } => {
                let NodeKind::Cond { selector } = graph.kind(*input) else { continue };
                let Some(v) = values.get(selector) else { continue };
                if !is_valid_cond_selector(v.mode()) {
                    if bad_conds.insert(*input) {
                        diagnostics.push(
                            Diagnostic::error(graph.node(*input).location.clone(), COND_SELECTOR_ERROR)
                                .with_code("T1"),
                        );
                    }
                } else if v.as_i64() == Some(*selection) {
                    jumps.push(n);
                } else {
                    outcome.insert(n, RewriteOutcome::RemovedFromAggregate);
                }
            }
            _ => {}
        }
    }
    let direct: BTreeSet<NodeId> = folded
        .iter()
        .map(|(n, _)| *n)
        .chain(jumps.iter().copied())
        .chain(outcome.keys().copied())
        .collect();
    if direct.is_empty() {
        return (report, diagnostics);
    }

    let mut referrers: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    for &n in &order {
        for s in graph.successors_in_visit_order(n) {
            referrers.entry(s).or_default().push(n);
        }
    }
    let mut stale: HashSet<NodeId> = HashSet::new();
    let mut queue: VecDeque<NodeId> = direct.iter().copied().collect();
    while let Some(n) = queue.pop_front() {
        for &r in referrers.get(&n).into_iter().flatten() {
            if !direct.contains(&r) && stale.insert(r) {
                queue.push_back(r);
            }
        }
    }

    for &n in order.iter().filter(|n| stale.contains(n)) {
        let copy = graph.push_clone(n);
        outcome.insert(n, RewriteOutcome::Replaced(copy));
    }
    let moved = |outcome: &HashMap<NodeId, RewriteOutcome>, b: NodeId| match outcome.get(&b) {
        Some(RewriteOutcome::Replaced(c)) => *c,
        _ => b,
    };
    for (n, v) in folded {
        let block = graph.block_of(n).map(|b| moved(&outcome, b));
        let node = FirmNode {
            kind: NodeKind::NumericConst { unparsed: v.to_string(), value: Some(v) },
            block,
            mode: v.mode(),
            location: graph.node(n).location.clone(),
            gxl_id: None,
        };
        let c = graph.push(node);
        outcome.insert(n, RewriteOutcome::Replaced(c));
        report.nodes_replaced += 1;
    }
    for n in jumps {
        let block = graph.block_of(n).map(|b| moved(&outcome, b));
        let node = FirmNode {
            kind: NodeKind::Jmp,
            block,
            mode: Mode::NotYetComputed,
            location: graph.node(n).location.clone(),
            gxl_id: None,
        };
        let j = graph.push(node);
        outcome.insert(n, RewriteOutcome::Replaced(j));
        report.nodes_replaced += 1;
    }

    for &n in order.iter().filter(|n| stale.contains(n)) {
        let copy = moved(&outcome, n);
        let mut kind = graph.kind(n).clone();
        if let NodeKind::Block { predecs } = &mut kind {
            let before = predecs.len();
            predecs.retain(|_, cf| !matches!(outcome.get(cf), Some(RewriteOutcome::RemovedFromAggregate)));
            report.edges_removed += before - predecs.len();
        }
        kind.map_operands(|m| moved(&outcome, m));
        let block = graph.block_of(n).map(|b| moved(&outcome, b));
        let node = graph.node_mut(copy);
        node.kind = kind;
        node.block = block;
    }
    let start = graph.start().map(|s| moved(&outcome, s));
    graph.set_roots(Some(moved(&outcome, end)), start);
    report.changed = report.counts_changed();
    (report, diagnostics)
}

/// Known values of reachable constants and foldable operations.
fn constant_values(graph: &FirmGraph, order: &[NodeId], fold_cmp: bool) -> HashMap<NodeId, ConstValue> {
    let mut values: HashMap<NodeId, Option<ConstValue>> = HashMap::new();
    let mut entered: HashSet<NodeId> = HashSet::new();
    for &root in order {
        let mut stack = vec![(root, false)];
        while let Some((n, ready)) = stack.pop() {
            if values.contains_key(&n) {
                continue;
            }
            let operands: Vec<NodeId> = match graph.kind(n) {
                NodeKind::Unary { on, .. } => vec![*on],
                NodeKind::Binary { left, right, .. } => vec![*left, *right],
                NodeKind::NumericConst { value, .. } => {
                    values.insert(n, *value);
                    continue;
                }
                _ => {
                    values.insert(n, None);
                    continue;
                }
            };
            if !ready {
                if entered.insert(n) {
                    stack.push((n, true));
                    stack.extend(operands.into_iter().map(|o| (o, false)));
                }
                continue;
            }
            let get = |o: &NodeId| values.get(o).cloned().flatten();
            let mode = graph.node(n).mode;
            let v = match graph.kind(n) {
                NodeKind::Unary { op, on } => get(on).and_then(|v| eval_unary(*op, mode, v)),
                NodeKind::Binary { op: BinaryOp::Cmp, .. } if !fold_cmp => None,
                NodeKind::Binary { op, left, right } => match (get(left), get(right)) {
                    (Some(l), Some(r)) => eval_binary(*op, mode, l, r),
                    _ => None,
                },
                _ => unreachable!(),
            };
            values.insert(n, v);
        }
    }
    values.into_iter().filter_map(|(n, v)| v.map(|v| (n, v))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::firm::isomorphic;
    use std::collections::BTreeMap;

    const NYC: Mode = Mode::NotYetComputed;

    fn konst(g: &mut FirmGraph, b: NodeId, v: i64) -> NodeId {
        let kind = NodeKind::NumericConst { unparsed: v.to_string(), value: Some(ConstValue::int(Mode::Is, v)) };
        g.add(kind, Some(b), Mode::Is).unwrap()
    }

    fn block(g: &mut FirmGraph, predecs: &[(i64, NodeId)]) -> NodeId {
        g.add(NodeKind::Block { predecs: predecs.iter().copied().collect() }, None, NYC).unwrap()
    }

    /// SB{Start, args} -> B1{Return(result)} -> EB{End}; `result` gets SB, B1
    /// and the argument tuple.
    fn with_result(f: impl FnOnce(&mut FirmGraph, NodeId, NodeId, NodeId) -> NodeId) -> FirmGraph {
        let mut g = FirmGraph::new();
        let sb = block(&mut g, &[]);
        let s = g.add(NodeKind::Start, Some(sb), NYC).unwrap();
        let args = g.add(NodeKind::ProjN { predec: s, pos: 2 }, Some(sb), NYC).unwrap();
        let b1 = block(&mut g, &[(0, s)]);
        let res = f(&mut g, sb, b1, args);
        let r = g.add(NodeKind::Return { memstate: s, results: vec![res] }, Some(b1), NYC).unwrap();
        let eb = block(&mut g, &[(0, r)]);
        g.add(NodeKind::End, Some(eb), NYC).unwrap();
        g
    }

    fn returned(g: &FirmGraph) -> NodeId {
        let eb = g.block_of(g.end().unwrap()).unwrap();
        match g.kind(g.predecs(eb).unwrap()[&0]) {
            NodeKind::Return { results, .. } => results[0],
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn add_of_constants_becomes_constant() {
        let mut g = with_result(|g, sb, b1, _| {
            let a = konst(g, sb, 2);
            let b = konst(g, sb, 3);
            g.add(NodeKind::Binary { op: BinaryOp::Add, left: a, right: b }, Some(b1), NYC).unwrap()
        });
        let (report, diags) = fold_constants(&mut g, true);
        assert!(diags.is_empty());
        assert!(report.changed);
        assert_eq!(report.nodes_replaced, 1);
        let r = returned(&g);
        assert!(matches!(g.kind(r), NodeKind::NumericConst { value: Some(v), .. } if *v == ConstValue::int(Mode::Is, 5)));
        assert_eq!(g.node(r).mode, Mode::Is);
    }

    #[test]
    fn constant_free_graph_is_untouched() {
        let mut g = with_result(|g, _, b1, args| {
            let a = g.add(NodeKind::ProjN { predec: args, pos: 0 }, Some(b1), NYC).unwrap();
            g.add(NodeKind::Binary { op: BinaryOp::Add, left: a, right: a }, Some(b1), NYC).unwrap()
        });
        let before = g.clone();
        let (report, _) = fold_constants(&mut g, true);
        assert!(!report.changed);
        assert_eq!(g, before);
    }

    #[test]
    fn untouched_subgraphs_are_shared() {
        let mut shared = None;
        let mut g = with_result(|g, sb, b1, args| {
            let a = g.add(NodeKind::ProjN { predec: args, pos: 0 }, Some(b1), NYC).unwrap();
            let x = g.add(NodeKind::Unary { op: crate::firm::UnaryOp::Minus, on: a }, Some(b1), NYC).unwrap();
            shared = Some(x);
            let c = konst(g, sb, 2);
            let d = konst(g, sb, 3);
            let k = g.add(NodeKind::Binary { op: BinaryOp::Mul, left: c, right: d }, Some(b1), NYC).unwrap();
            g.add(NodeKind::Binary { op: BinaryOp::Add, left: x, right: k }, Some(b1), NYC).unwrap()
        });
        fold_constants(&mut g, true);
        let r = returned(&g);
        let NodeKind::Binary { left, right, .. } = g.kind(r) else { panic!() };
        assert_eq!(Some(*left), shared);
        assert!(matches!(g.kind(*right), NodeKind::NumericConst { .. }));
    }

    /// SB{Start, Cond(Const c)} with both Proj_X feeding B1, which returns.
    fn cond_graph(c: ConstValue) -> FirmGraph {
        let mut g = FirmGraph::new();
        let sb = block(&mut g, &[]);
        let s = g.add(NodeKind::Start, Some(sb), NYC).unwrap();
        let m = c.mode();
        let k = g.add(NodeKind::NumericConst { unparsed: c.to_string(), value: Some(c) }, Some(sb), m).unwrap();
        let cond = g.add(NodeKind::Cond { selector: k }, Some(sb), NYC).unwrap();
        let t = g.add(NodeKind::ProjX { input: cond, selection: 1 }, Some(sb), NYC).unwrap();
        let f = g.add(NodeKind::ProjX { input: cond, selection: 0 }, Some(sb), NYC).unwrap();
        let b1 = block(&mut g, &[(0, t), (1, f)]);
        let r = g.add(NodeKind::Return { memstate: s, results: vec![] }, Some(b1), NYC).unwrap();
        let eb = block(&mut g, &[(0, r)]);
        g.add(NodeKind::End, Some(eb), NYC).unwrap();
        g
    }

    fn b1_predecs(g: &FirmGraph) -> BTreeMap<i64, NodeId> {
        let eb = g.block_of(g.end().unwrap()).unwrap();
        let r = g.predecs(eb).unwrap()[&0];
        g.predecs(g.block_of(r).unwrap()).unwrap().clone()
    }

    #[test]
    fn constant_cond_turns_taken_arm_into_jmp() {
        let mut g = cond_graph(ConstValue::int(Mode::Is, 1));
        let (report, diags) = fold_constants(&mut g, true);
        assert!(diags.is_empty());
        assert_eq!(report.edges_removed, 1);
        let p = b1_predecs(&g);
        assert_eq!(p.keys().copied().collect::<Vec<_>>(), vec![0]);
        assert!(matches!(g.kind(p[&0]), NodeKind::Jmp));
    }

    #[test]
    fn float_selector_is_a_type_error() {
        let mut g = cond_graph(ConstValue::float(Mode::F, 1.0));
        let before = g.clone();
        let (report, diags) = fold_constants(&mut g, true);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].text, COND_SELECTOR_ERROR);
        assert!(!report.changed);
        assert!(isomorphic(&before, &g));
    }

    #[test]
    fn self_loop_converges() {
        let mut g = FirmGraph::new();
        let sb = block(&mut g, &[]);
        let s = g.add(NodeKind::Start, Some(sb), NYC).unwrap();
        let k = konst(&mut g, sb, 0);
        let cond = g.add(NodeKind::Cond { selector: k }, Some(sb), NYC).unwrap();
        let t = g.add(NodeKind::ProjX { input: cond, selection: 1 }, Some(sb), NYC).unwrap();
        let f = g.add(NodeKind::ProjX { input: cond, selection: 0 }, Some(sb), NYC).unwrap();
        let l = block(&mut g, &[(0, t)]);
        let c2 = konst(&mut g, l, 1);
        let lc = g.add(NodeKind::Cond { selector: c2 }, Some(l), NYC).unwrap();
        let back = g.add(NodeKind::ProjX { input: lc, selection: 1 }, Some(l), NYC).unwrap();
        let out = g.add(NodeKind::ProjX { input: lc, selection: 0 }, Some(l), NYC).unwrap();
        g.set_block_predec(l, 1, back).unwrap();
        let x = block(&mut g, &[(0, f), (1, out)]);
        let r = g.add(NodeKind::Return { memstate: s, results: vec![] }, Some(x), NYC).unwrap();
        let eb = block(&mut g, &[(0, r)]);
        g.add(NodeKind::End, Some(eb), NYC).unwrap();
        let (report, _) = fold_constants(&mut g, true);
        assert!(report.changed);
        assert_eq!(report.edges_removed, 2);
        let p = b1_predecs(&g);
        assert_eq!(p.len(), 1);
        assert!(matches!(g.kind(p[&0]), NodeKind::Jmp));
        let (again, _) = fold_constants(&mut g, true);
        assert!(!again.changed);
    }

    #[test]
    fn cmp_can_be_left_alone() {
        let build = || {
            with_result(|g, sb, b1, _| {
                let a = konst(g, sb, 2);
                g.add(NodeKind::Binary { op: BinaryOp::Cmp, left: a, right: a }, Some(b1), NYC).unwrap()
            })
        };
        let mut g = build();
        assert!(!fold_constants(&mut g, false).0.changed);
        let mut g = build();
        fold_constants(&mut g, true);
        let r = returned(&g);
        assert_eq!(g.node(r).mode, Mode::B);
    }
}
