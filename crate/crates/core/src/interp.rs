//! Reference evaluator for loop-free, memory-free Firm graphs.

use std::collections::HashMap;

use thiserror::Error;

use crate::bridge::START_POS_ARGUMENTS;
use crate::firm::{ConstValue, FirmGraph, NodeId, NodeKind, UnaryOp};
use crate::opt::{eval_binary, eval_unary};

/// Evaluation failures. They name kinds rather than node ids so results of
/// different graphs compare equal.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InterpError {
    #[error("{0} nodes cannot be evaluated")]
    Unsupported(&'static str),
    #[error("step limit of {0} block transitions exceeded")]
    StepLimitExceeded(usize),
    #[error("argument {0} was not supplied")]
    MissingArgument(i64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} has no constant value for its operands")]
    NoValue(&'static str),
    #[error("a Bad value was used")]
    BadValue,
    #[error("no control flow leaves the current block")]
    NoSuccessor,
    #[error("Phi read in a block entered through no matching edge")]
    PhiWithoutEdge,
    #[error("graph has no {0} node")]
    MissingRoot(&'static str),
}

/// Runs the graph from its start block with `args` bound to the Argument
/// projections and returns the results of the Return reached.
pub fn evaluate(graph: &FirmGraph, args: &[ConstValue], step_limit: usize) -> Result<Vec<ConstValue>, InterpError> {
    let start = graph.start().ok_or(InterpError::MissingRoot("Start"))?;
    graph.end().ok_or(InterpError::MissingRoot("End"))?;
    let members = graph.block_members();
    let mut successors: HashMap<NodeId, Vec<(NodeId, i64)>> = HashMap::new();
    for &b in members.keys() {
        for (&k, &cf) in graph.predecs(b).expect("block") {
            successors.entry(cf).or_default().push((b, k));
        }
    }
    let mut machine = Machine { graph, args, entered: HashMap::new(), memo: HashMap::new() };
    let mut block = graph.block_of(start).expect("Start lives in a block");
    let mut steps = 0;
    loop {
        let nodes = members.get(&block).map(Vec::as_slice).unwrap_or(&[]);
        let find = |pred: fn(&NodeKind) -> bool| nodes.iter().copied().find(|&n| pred(graph.kind(n)));
        let cf = if let Some(r) = find(|k| matches!(k, NodeKind::Return { .. })) {
            let NodeKind::Return { results, .. } = graph.kind(r) else { unreachable!() };
            return results.iter().map(|&v| machine.value(v)).collect();
        } else if let Some(c) = find(|k| matches!(k, NodeKind::Cond { .. })) {
            let NodeKind::Cond { selector } = graph.kind(c) else { unreachable!() };
            let v = machine.value(*selector)?;
            let sel = v.as_i64().ok_or(InterpError::Unsupported("Cond on a non-integer selector"))?;
            successors
                .keys()
                .copied()
                .filter(|&p| matches!(graph.kind(p), NodeKind::ProjX { input, selection } if *input == c && *selection == sel))
                .min()
                .ok_or(InterpError::NoSuccessor)?
        } else if let Some(j) = find(|k| matches!(k, NodeKind::Jmp)) {
            j
        } else if nodes.contains(&start) {
            start
        } else {
            return Err(InterpError::NoSuccessor);
        };
        let &(next, key) = successors.get(&cf).and_then(|s| s.first()).ok_or(InterpError::NoSuccessor)?;
        steps += 1;
        if steps > step_limit {
            return Err(InterpError::StepLimitExceeded(step_limit));
        }
        machine.entered.insert(next, key);
        machine.memo.clear();
        block = next;
    }
}

struct Machine<'a> {
    graph: &'a FirmGraph,
    args: &'a [ConstValue],
    /// Predecessor key through which each block was last entered.
    entered: HashMap<NodeId, i64>,
    memo: HashMap<NodeId, ConstValue>,
}

impl Machine<'_> {
    fn value(&mut self, n: NodeId) -> Result<ConstValue, InterpError> {
        if let Some(v) = self.memo.get(&n) {
            return Ok(*v);
        }
        let graph = self.graph;
        let mode = graph.node(n).mode;
        let v = match graph.kind(n) {
            NodeKind::NumericConst { value: Some(v), .. } => *v,
            NodeKind::NumericConst { value: None, .. } => return Err(InterpError::NoValue("NumericConst")),
            NodeKind::ProjN { predec, pos } => match graph.kind(*predec) {
                NodeKind::ProjN { predec: s, pos: START_POS_ARGUMENTS } if matches!(graph.kind(*s), NodeKind::Start) => {
                    usize::try_from(*pos)
                        .ok()
                        .and_then(|i| self.args.get(i))
                        .cloned()
                        .ok_or(InterpError::MissingArgument(*pos))?
                }
                _ => return Err(InterpError::Unsupported("Proj_N")),
            },
            NodeKind::Unary { op, on } => {
                if matches!(op, UnaryOp::Rotl | UnaryOp::Shl | UnaryOp::Shr | UnaryOp::Shrs) {
                    return Err(InterpError::Unsupported(op.name()));
                }
                let v = self.value(*on)?;
                eval_unary(*op, mode, v).ok_or(InterpError::NoValue(op.name()))?
            }
            NodeKind::Binary { op, left, right } => {
                let l = self.value(*left)?;
                let r = self.value(*right)?;
                let zero = r.as_i64() == Some(0) || matches!(r, ConstValue::Float { value, .. } if value == 0.0);
                match eval_binary(*op, mode, l, r) {
                    Some(v) => v,
                    None if zero && matches!(op, crate::firm::BinaryOp::Div | crate::firm::BinaryOp::Mod) => {
                        return Err(InterpError::DivisionByZero)
                    }
                    None => return Err(InterpError::NoValue(op.name())),
                }
            }
            NodeKind::Mux { first, second, third } => {
                let pick = if self.value(*first)?.is_truthy() { *second } else { *third };
                self.value(pick)?
            }
            NodeKind::Phi { alternatives } => {
                let block = graph.block_of(n).expect("Phi lives in a block");
                let key = self.entered.get(&block).ok_or(InterpError::PhiWithoutEdge)?;
                let v = *alternatives.get(key).ok_or(InterpError::PhiWithoutEdge)?;
                self.value(v)?
            }
            NodeKind::Bad | NodeKind::BadNumeric => return Err(InterpError::BadValue),
            k => return Err(InterpError::Unsupported(k.name())),
        };
        self.memo.insert(n, v);
        Ok(v)
    }
}

/// Parses a comma-separated argument vector: integers become `Is`, reals
/// `D`, and `true`/`false` become `b`. A `:Mode` suffix picks the mode.
pub fn parse_args(text: &str) -> Result<Vec<ConstValue>, String> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|t| parse_arg(t.trim())).collect()
}

fn parse_arg(t: &str) -> Result<ConstValue, String> {
    let (lit, mode) = match t.rsplit_once(':') {
        Some((lit, m)) => (lit, Some(m.parse::<crate::firm::Mode>()?)),
        None => (t, None),
    };
    let bad = || format!("illegal argument value: {t}");
    match lit {
        "true" | "false" => return Ok(ConstValue::Bool(lit == "true")),
        _ => {}
    }
    if let Ok(i) = lit.parse::<i64>() {
        let m = mode.unwrap_or(crate::firm::Mode::Is);
        return if m.is_integer() {
            Ok(ConstValue::int(m, i))
        } else if m.is_float() {
            Ok(ConstValue::float(m, i as f64))
        } else {
            Err(bad())
        };
    }
    let f = crate::gxl::parse_float(lit).ok_or_else(bad)?;
    let m = mode.unwrap_or(crate::firm::Mode::D);
    if m.is_float() {
        Ok(ConstValue::float(m, f))
    } else {
        Err(bad())
    }
}
