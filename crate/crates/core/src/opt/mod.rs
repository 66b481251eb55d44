//! Constant folding and the control-flow simplification it enables, run to
//! a fixed point.

mod eval;
mod fold;
mod passes;

pub use eval::{eval_binary, eval_unary};
pub use fold::{fold_constants, COND_SELECTOR_ERROR};
pub use passes::{eliminate_dead_blocks, eliminate_dead_phis, normalize_predec_indices};

use std::collections::BTreeSet;
use std::fmt;

use crate::diag::Diagnostic;
use crate::dot::to_dot;
use crate::firm::{FirmGraph, NodeId};

/// What became of one reference during a rewrite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewriteOutcome {
    Unchanged,
    Replaced(NodeId),
    /// The reference disappears from its indexed aggregate (a Block's
    /// predecessor map).
    RemovedFromAggregate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassReport {
    pub pass: &'static str,
    pub nodes_replaced: usize,
    pub edges_removed: usize,
    pub blocks_removed: usize,
    pub phis_removed: usize,
    pub changed: bool,
}

impl PassReport {
    pub fn new(pass: &'static str) -> Self {
        PassReport { pass, nodes_replaced: 0, edges_removed: 0, blocks_removed: 0, phis_removed: 0, changed: false }
    }

    fn counts_changed(&self) -> bool {
        self.nodes_replaced + self.edges_removed + self.blocks_removed + self.phis_removed > 0
    }
}

impl fmt::Display for PassReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} replaced, {} edges removed, {} blocks removed, {} phis removed",
            self.pass, self.nodes_replaced, self.edges_removed, self.blocks_removed, self.phis_removed
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pass {
    Fold,
    DeadBlocks,
    Normalize,
    DeadPhis,
}

impl Pass {
    /// Pipeline order of one iteration.
    pub const ALL: [Pass; 4] = [Pass::Fold, Pass::DeadBlocks, Pass::Normalize, Pass::DeadPhis];

    pub fn name(self) -> &'static str {
        match self {
            Pass::Fold => "fold",
            Pass::DeadBlocks => "dead-blocks",
            Pass::Normalize => "normalize",
            Pass::DeadPhis => "dead-phis",
        }
    }

    pub fn from_name(s: &str) -> Option<Pass> {
        Pass::ALL.into_iter().find(|p| p.name() == s)
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimizeOptions {
    pub max_iterations: usize,
    pub enabled: BTreeSet<Pass>,
    /// Fold Cmp as equality.
    pub fold_cmp: bool,
    pub emit_dot_after_each_stage: bool,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            max_iterations: 16,
            enabled: Pass::ALL.into_iter().collect(),
            fold_cmp: true,
            emit_dot_after_each_stage: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub graph: FirmGraph,
    pub reports: Vec<PassReport>,
    pub diagnostics: Vec<Diagnostic>,
    /// Iterations run, including the final one that changed nothing.
    pub iterations: usize,
    pub converged: bool,
    /// `(stage name, DOT text)`, filled when stage dumps are requested.
    pub stages: Vec<(String, String)>,
}

impl OptimizeOutcome {
    /// Iterations in which at least one pass changed the graph.
    pub fn changing_iterations(&self) -> usize {
        let per_iteration = self.reports.len() / self.iterations.max(1);
        self.reports.chunks(per_iteration.max(1)).filter(|c| c.iter().any(|r| r.changed)).count()
    }
}

fn run_pass(graph: &mut FirmGraph, pass: Pass, fold_cmp: bool, diagnostics: &mut Vec<Diagnostic>) -> PassReport {
    match pass {
        Pass::Fold => {
            let (report, diags) = fold_constants(graph, fold_cmp);
            for d in diags {
                if !diagnostics.contains(&d) {
                    diagnostics.push(d);
                }
            }
            report
        }
        Pass::DeadBlocks => eliminate_dead_blocks(graph),
        Pass::Normalize => normalize_predec_indices(graph),
        Pass::DeadPhis => eliminate_dead_phis(graph),
    }
}

/// Runs the enabled passes in pipeline order until an iteration changes
/// nothing or `max_iterations` is reached. The input graph is not modified.
pub fn optimize(graph: &FirmGraph, options: &OptimizeOptions) -> OptimizeOutcome {
    let mut out = OptimizeOutcome {
        graph: graph.clone(),
        reports: Vec::new(),
        diagnostics: Vec::new(),
        iterations: 0,
        converged: false,
        stages: Vec::new(),
    };
    if options.emit_dot_after_each_stage {
        out.stages.push(("00-input".into(), to_dot(&out.graph)));
    }
    let max = options.max_iterations.max(1);
    while out.iterations < max {
        out.iterations += 1;
        let mut changed = false;
        for pass in Pass::ALL.into_iter().filter(|p| options.enabled.contains(p)) {
            let report = run_pass(&mut out.graph, pass, options.fold_cmp, &mut out.diagnostics);
            changed |= report.changed;
            out.reports.push(report);
            if options.emit_dot_after_each_stage {
                out.stages.push((format!("{:02}-{}", out.iterations, pass), to_dot(&out.graph)));
            }
        }
        if !changed {
            out.converged = true;
            break;
        }
    }
    if !out.converged {
        out.diagnostics.push(
            Diagnostic::warning(None, format!("optimizer stopped after {max} iterations with passes still changing the graph"))
                .with_code("O1"),
        );
    }
    out
}

/// The fixed pass sequence fold, normalize, dead-blocks, dead-phis, fold
/// with no iteration. Kept to compare against [`optimize`].
pub fn single_pass_pipeline(graph: &FirmGraph, fold_cmp: bool) -> (FirmGraph, Vec<PassReport>) {
    let mut g = graph.clone();
    let mut diags = Vec::new();
    let reports = [Pass::Fold, Pass::Normalize, Pass::DeadBlocks, Pass::DeadPhis, Pass::Fold]
        .into_iter()
        .map(|p| run_pass(&mut g, p, fold_cmp, &mut diags))
        .collect();
    (g, reports)
}
