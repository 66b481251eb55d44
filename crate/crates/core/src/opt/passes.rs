//! Control-flow clean-up after folding.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::PassReport;
use crate::firm::{FirmGraph, FirmNode, NodeId, NodeKind};

fn reachable_blocks(graph: &FirmGraph) -> Vec<NodeId> {
    graph.reachable().into_iter().filter(|&n| graph.kind(n).is_block()).collect()
}

/// Drops Block predecessors that originate in dead blocks. The start block
/// is alive, and a block is alive iff one of its predecessors is Start or
/// lies in an alive block (least fixpoint, so unreachable loops die).
pub fn eliminate_dead_blocks(graph: &mut FirmGraph) -> PassReport {
    let mut report = PassReport::new("dead-blocks");
    let blocks = reachable_blocks(graph);
    let start_block = graph.start().and_then(|s| graph.block_of(s));
    let mut alive: HashSet<NodeId> = start_block.into_iter().collect();
    let live_edge = |graph: &FirmGraph, alive: &HashSet<NodeId>, cf: NodeId| {
        matches!(graph.kind(cf), NodeKind::Start) || graph.block_of(cf).is_some_and(|b| alive.contains(&b))
    };
    loop {
        let before = alive.len();
        for &b in &blocks {
            if !alive.contains(&b) && graph.predecs(b).expect("block").values().any(|&cf| live_edge(graph, &alive, cf)) {
                alive.insert(b);
            }
        }
        if alive.len() == before {
            break;
        }
    }
    for &b in &blocks {
        let predecs = graph.predecs(b).expect("block");
        let dead: Vec<i64> = predecs
            .iter()
            .filter(|(_, &cf)| !live_edge(graph, &alive, cf))
            .map(|(&k, _)| k)
            .collect();
        if dead.is_empty() {
            continue;
        }
        let emptied = dead.len() == predecs.len();
        for k in dead {
            graph.remove_block_predec(b, k).expect("block");
            report.edges_removed += 1;
        }
        if emptied && Some(b) != start_block {
            report.blocks_removed += 1;
        }
    }
    report.changed = report.counts_changed();
    report
}

/// Renumbers each Block's predecessor keys to `0..n` in order, applying the
/// same map to the Phis of that block. Phi entries without a matching
/// predecessor are dropped.
pub fn normalize_predec_indices(graph: &mut FirmGraph) -> PassReport {
    let mut report = PassReport::new("normalize");
    let order = graph.reachable();
    let mut phis: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    for &n in &order {
        if let NodeKind::Phi { .. } = graph.kind(n) {
            phis.entry(graph.block_of(n).expect("Phi lives in a block")).or_default().push(n);
        }
    }
    let blocks: Vec<NodeId> = order.iter().copied().filter(|&n| graph.kind(n).is_block()).collect();
    for b in blocks {
        let predecs = graph.predecs(b).expect("block");
        if predecs.keys().copied().eq(0..predecs.len() as i64) {
            continue;
        }
        let renumber: BTreeMap<i64, i64> = predecs.keys().enumerate().map(|(i, &k)| (k, i as i64)).collect();
        let dense: BTreeMap<i64, NodeId> = predecs.iter().map(|(k, &cf)| (renumber[k], cf)).collect();
        graph.node_mut(b).kind = NodeKind::Block { predecs: dense };
        report.nodes_replaced += 1;
        for &p in phis.get(&b).into_iter().flatten() {
            let NodeKind::Phi { alternatives } = &mut graph.node_mut(p).kind else { unreachable!() };
            let old = std::mem::take(alternatives);
            report.edges_removed += old.keys().filter(|k| !renumber.contains_key(k)).count();
            *alternatives = old.into_iter().filter_map(|(k, v)| renumber.get(&k).map(|&k| (k, v))).collect();
        }
    }
    report.changed = report.counts_changed();
    report
}

/// Restricts every Phi to the keys its block still has. A Phi left with one
/// alternative is replaced by it, one left with none by Bad.
pub fn eliminate_dead_phis(graph: &mut FirmGraph) -> PassReport {
    let mut report = PassReport::new("dead-phis");
    let order = graph.reachable();
    let mut replace: HashMap<NodeId, NodeId> = HashMap::new();
    for &n in &order {
        let NodeKind::Phi { alternatives } = graph.kind(n) else { continue };
        let block = graph.block_of(n).expect("Phi lives in a block");
        let keys = graph.predecs(block).expect("block");
        let kept: BTreeMap<i64, NodeId> =
            alternatives.iter().filter(|(k, _)| keys.contains_key(k)).map(|(&k, &v)| (k, v)).collect();
        match kept.len() {
            0 => {
                let bad = bad_in(graph, n);
                replace.insert(n, bad);
            }
            1 => {
                replace.insert(n, *kept.values().next().expect("one entry"));
            }
            len if len < alternatives.len() => {
                report.edges_removed += alternatives.len() - len;
                graph.node_mut(n).kind = NodeKind::Phi { alternatives: kept };
            }
            _ => {}
        }
    }
    if !replace.is_empty() {
        report.phis_removed = replace.len();
        let targets: HashMap<NodeId, NodeId> = replace.keys().map(|&p| (p, resolve(graph, &replace, p))).collect();
        for n in graph.reachable() {
            graph.node_mut(n).kind.map_operands(|m| targets.get(&m).copied().unwrap_or(m));
        }
    }
    report.changed = report.counts_changed();
    report
}

fn bad_in(graph: &mut FirmGraph, phi: NodeId) -> NodeId {
    let node = graph.node(phi);
    let bad = FirmNode {
        kind: NodeKind::Bad,
        block: node.block,
        mode: node.mode,
        location: node.location.clone(),
        gxl_id: None,
    };
    graph.push(bad)
}

/// Follows chains of replaced Phis; a chain that closes on itself denotes no
/// value and becomes Bad.
fn resolve(graph: &mut FirmGraph, replace: &HashMap<NodeId, NodeId>, phi: NodeId) -> NodeId {
    let mut seen = HashSet::from([phi]);
    let mut at = replace[&phi];
    while let Some(&next) = replace.get(&at) {
        if !seen.insert(at) {
            return bad_in(graph, phi);
        }
        at = next;
    }
    at
}
