//! The Firm graph IR.
//!
//! A program is an arena of nodes reachable from its unique End node.
//! References always point from a node to its predecessors. Blocks are the
//! only nodes allowed to close cycles: a Block's `predecs` map names the
//! control-flow nodes that enter it, and those live in other (or the same)
//! blocks.

mod traverse;
mod value;

pub use traverse::{isomorphic, visit_blocks_once};
pub use value::{ConstValue, Mode};

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::diag::SourceLocation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Numeric,
    ControlFlow,
    MemoryState,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Numeric => "Numeric",
            Role::ControlFlow => "ControlFlow",
            Role::MemoryState => "MemoryState",
        })
    }
}

/// A subset of [`Role`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RoleSet(u8);

impl RoleSet {
    pub const EMPTY: RoleSet = RoleSet(0);
    pub const ALL: RoleSet = RoleSet(0b111);

    const fn bit(r: Role) -> u8 {
        match r {
            Role::Numeric => 1,
            Role::ControlFlow => 2,
            Role::MemoryState => 4,
        }
    }

    pub const fn of(roles: &[Role]) -> RoleSet {
        let mut bits = 0;
        let mut i = 0;
        while i < roles.len() {
            bits |= Self::bit(roles[i]);
            i += 1;
        }
        RoleSet(bits)
    }

    pub fn contains(self, r: Role) -> bool {
        self.0 & Self::bit(r) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Role> {
        [Role::Numeric, Role::ControlFlow, Role::MemoryState]
            .into_iter()
            .filter(move |r| self.contains(*r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Conv,
    Minus,
    Not,
    Rotl,
    Shl,
    Shr,
    Shrs,
}

impl UnaryOp {
    pub const ALL: [UnaryOp; 7] = [
        UnaryOp::Conv,
        UnaryOp::Minus,
        UnaryOp::Not,
        UnaryOp::Rotl,
        UnaryOp::Shl,
        UnaryOp::Shr,
        UnaryOp::Shrs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Conv => "Conv",
            UnaryOp::Minus => "Minus",
            UnaryOp::Not => "Not",
            UnaryOp::Rotl => "Rotl",
            UnaryOp::Shl => "Shl",
            UnaryOp::Shr => "Shr",
            UnaryOp::Shrs => "Shrs",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    And,
    Div,
    Eor,
    Mod,
    Mul,
    Or,
    Sub,
    Cmp,
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 9] = [
        BinaryOp::Add,
        BinaryOp::And,
        BinaryOp::Div,
        BinaryOp::Eor,
        BinaryOp::Mod,
        BinaryOp::Mul,
        BinaryOp::Or,
        BinaryOp::Sub,
        BinaryOp::Cmp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Add => "Add",
            BinaryOp::And => "And",
            BinaryOp::Div => "Div",
            BinaryOp::Eor => "Eor",
            BinaryOp::Mod => "Mod",
            BinaryOp::Mul => "Mul",
            BinaryOp::Or => "Or",
            BinaryOp::Sub => "Sub",
            BinaryOp::Cmp => "Cmp",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Block { predecs: BTreeMap<i64, NodeId> },
    End,
    Cond { selector: NodeId },
    Start,
    Return { memstate: NodeId, results: Vec<NodeId> },
    Jmp,
    ProjX { input: NodeId, selection: i64 },
    NoMem,
    Sync { predecs: Vec<NodeId> },
    Store { pre_state: NodeId, position: NodeId, value: NodeId },
    Free { pre_state: NodeId, position: NodeId },
    Phi { alternatives: BTreeMap<i64, NodeId> },
    ProjN { predec: NodeId, pos: i64 },
    TupleN { combines: Vec<NodeId> },
    Call { combines: Vec<NodeId>, pre_state: NodeId },
    NumericConst { unparsed: String, value: Option<ConstValue> },
    SymConst { unparsed: String },
    Unary { op: UnaryOp, on: NodeId },
    Binary { op: BinaryOp, left: NodeId, right: NodeId },
    Mux { first: NodeId, second: NodeId, third: NodeId },
    Alloc { pre_state: NodeId, size: NodeId },
    Load { pre_state: NodeId, position: NodeId },
    Sel { pre_state: NodeId, position: NodeId },
    Bad,
    Unknown,
    BadNumeric,
    UnknownNumeric,
}

/// What a reference field demands of its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldReq {
    Role(Role),
    /// The field must point at a Cond node (`Proj_X.input`).
    Cond,
}

impl fmt::Display for FieldReq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldReq::Role(r) => write!(f, "{r}"),
            FieldReq::Cond => f.write_str("Cond"),
        }
    }
}

impl NodeKind {
    /// Class name of the kind (operators report their own name).
    pub fn name(&self) -> &'static str {
        match self {
            NodeKind::Block { .. } => "Block",
            NodeKind::End => "End",
            NodeKind::Cond { .. } => "Cond",
            NodeKind::Start => "Start",
            NodeKind::Return { .. } => "Return",
            NodeKind::Jmp => "Jmp",
            NodeKind::ProjX { .. } => "Proj_X",
            NodeKind::NoMem => "NoMem",
            NodeKind::Sync { .. } => "Sync",
            NodeKind::Store { .. } => "Store",
            NodeKind::Free { .. } => "Free",
            NodeKind::Phi { .. } => "Phi",
            NodeKind::ProjN { .. } => "Proj_N",
            NodeKind::TupleN { .. } => "Tuple_N",
            NodeKind::Call { .. } => "Call",
            NodeKind::NumericConst { .. } => "NumericConst",
            NodeKind::SymConst { .. } => "SymConst",
            NodeKind::Unary { op, .. } => op.name(),
            NodeKind::Binary { op, .. } => op.name(),
            NodeKind::Mux { .. } => "Mux",
            NodeKind::Alloc { .. } => "Alloc",
            NodeKind::Load { .. } => "Load",
            NodeKind::Sel { .. } => "Sel",
            NodeKind::Bad => "Bad",
            NodeKind::Unknown => "Unknown",
            NodeKind::BadNumeric => "BadNumeric",
            NodeKind::UnknownNumeric => "UnknownNumeric",
        }
    }

    pub fn is_block(&self) -> bool {
        matches!(self, NodeKind::Block { .. })
    }

    /// Kinds that carry a numeric mode.
    pub fn is_numeric_node(&self) -> bool {
        matches!(
            self,
            NodeKind::Phi { .. }
                | NodeKind::ProjN { .. }
                | NodeKind::TupleN { .. }
                | NodeKind::Call { .. }
                | NodeKind::NumericConst { .. }
                | NodeKind::SymConst { .. }
                | NodeKind::Unary { .. }
                | NodeKind::Binary { .. }
                | NodeKind::Mux { .. }
                | NodeKind::Alloc { .. }
                | NodeKind::Load { .. }
                | NodeKind::Sel { .. }
                | NodeKind::BadNumeric
                | NodeKind::UnknownNumeric
        )
    }

    /// Jmp, Cond and Return: the nodes that end a block's execution.
    pub fn is_terminator(&self) -> bool {
        matches!(self, NodeKind::Jmp | NodeKind::Cond { .. } | NodeKind::Return { .. })
    }

    /// Reference fields in declaration order, each with its requirement.
    pub fn operands(&self) -> Vec<(NodeId, FieldReq)> {
        use FieldReq::Role as R;
        use Role::*;
        match self {
            NodeKind::Block { predecs } => predecs.values().map(|&n| (n, R(ControlFlow))).collect(),
            NodeKind::Cond { selector } => vec![(*selector, R(Numeric))],
            NodeKind::Return { memstate, results } => std::iter::once((*memstate, R(MemoryState)))
                .chain(results.iter().map(|&n| (n, R(Numeric))))
                .collect(),
            NodeKind::ProjX { input, .. } => vec![(*input, FieldReq::Cond)],
            NodeKind::Sync { predecs } => predecs.iter().map(|&n| (n, R(MemoryState))).collect(),
            NodeKind::Store { pre_state, position, value } => {
                vec![(*pre_state, R(MemoryState)), (*position, R(Numeric)), (*value, R(Numeric))]
            }
            NodeKind::Free { pre_state, position } => vec![(*pre_state, R(MemoryState)), (*position, R(Numeric))],
            NodeKind::Phi { alternatives } => alternatives.values().map(|&n| (n, R(Numeric))).collect(),
            NodeKind::ProjN { predec, .. } => vec![(*predec, R(Numeric))],
            NodeKind::TupleN { combines } => combines.iter().map(|&n| (n, R(Numeric))).collect(),
            NodeKind::Call { combines, pre_state } => combines
                .iter()
                .map(|&n| (n, R(Numeric)))
                .chain(std::iter::once((*pre_state, R(MemoryState))))
                .collect(),
            NodeKind::Unary { on, .. } => vec![(*on, R(Numeric))],
            NodeKind::Binary { left, right, .. } => vec![(*left, R(Numeric)), (*right, R(Numeric))],
            NodeKind::Mux { first, second, third } => {
                vec![(*first, R(Numeric)), (*second, R(Numeric)), (*third, R(Numeric))]
            }
            NodeKind::Alloc { pre_state, size } => vec![(*pre_state, R(MemoryState)), (*size, R(Numeric))],
            NodeKind::Load { pre_state, position } | NodeKind::Sel { pre_state, position } => {
                vec![(*pre_state, R(MemoryState)), (*position, R(Numeric))]
            }
            NodeKind::End
            | NodeKind::Start
            | NodeKind::Jmp
            | NodeKind::NoMem
            | NodeKind::NumericConst { .. }
            | NodeKind::SymConst { .. }
            | NodeKind::Bad
            | NodeKind::Unknown
            | NodeKind::BadNumeric
            | NodeKind::UnknownNumeric => Vec::new(),
        }
    }

    /// Applies `f` to every reference field, in the order of [`operands`](Self::operands).
    pub fn map_operands(&mut self, mut f: impl FnMut(NodeId) -> NodeId) {
        let mut g = |n: &mut NodeId| *n = f(*n);
        match self {
            NodeKind::Block { predecs } => predecs.values_mut().for_each(g),
            NodeKind::Cond { selector } => g(selector),
            NodeKind::Return { memstate, results } => {
                g(memstate);
                results.iter_mut().for_each(g);
            }
            NodeKind::ProjX { input, .. } => g(input),
            NodeKind::Sync { predecs } => predecs.iter_mut().for_each(g),
            NodeKind::Store { pre_state, position, value } => {
                g(pre_state);
                g(position);
                g(value);
            }
            NodeKind::Free { pre_state, position }
            | NodeKind::Load { pre_state, position }
            | NodeKind::Sel { pre_state, position } => {
                g(pre_state);
                g(position);
            }
            NodeKind::Phi { alternatives } => alternatives.values_mut().for_each(g),
            NodeKind::ProjN { predec, .. } => g(predec),
            NodeKind::TupleN { combines } => combines.iter_mut().for_each(g),
            NodeKind::Call { combines, pre_state } => {
                combines.iter_mut().for_each(&mut g);
                g(pre_state);
            }
            NodeKind::Unary { on, .. } => g(on),
            NodeKind::Binary { left, right, .. } => {
                g(left);
                g(right);
            }
            NodeKind::Mux { first, second, third } => {
                g(first);
                g(second);
                g(third);
            }
            NodeKind::Alloc { pre_state, size } => {
                g(pre_state);
                g(size);
            }
            NodeKind::End
            | NodeKind::Start
            | NodeKind::Jmp
            | NodeKind::NoMem
            | NodeKind::NumericConst { .. }
            | NodeKind::SymConst { .. }
            | NodeKind::Bad
            | NodeKind::Unknown
            | NodeKind::BadNumeric
            | NodeKind::UnknownNumeric => {}
        }
    }
}

/// Roles implemented by a node kind.
pub fn implements_role(kind: &NodeKind) -> RoleSet {
    use Role::*;
    match kind {
        NodeKind::Start | NodeKind::Bad | NodeKind::Unknown => RoleSet::ALL,
        NodeKind::Block { .. } | NodeKind::End | NodeKind::Cond { .. } => RoleSet::EMPTY,
        NodeKind::Return { .. } | NodeKind::Jmp | NodeKind::ProjX { .. } => RoleSet::of(&[ControlFlow]),
        NodeKind::NoMem | NodeKind::Sync { .. } | NodeKind::Store { .. } | NodeKind::Free { .. } => {
            RoleSet::of(&[MemoryState])
        }
        NodeKind::Call { .. } | NodeKind::Alloc { .. } | NodeKind::Load { .. } | NodeKind::Sel { .. } => {
            RoleSet::of(&[Numeric, MemoryState])
        }
        NodeKind::Phi { .. }
        | NodeKind::ProjN { .. }
        | NodeKind::TupleN { .. }
        | NodeKind::NumericConst { .. }
        | NodeKind::SymConst { .. }
        | NodeKind::Unary { .. }
        | NodeKind::Binary { .. }
        | NodeKind::Mux { .. }
        | NodeKind::BadNumeric
        | NodeKind::UnknownNumeric => RoleSet::of(&[Numeric]),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirmNode {
    pub kind: NodeKind,
    /// Containing block; absent iff the node is a Block.
    pub block: Option<NodeId>,
    pub mode: Mode,
    pub location: Option<SourceLocation>,
    pub gxl_id: Option<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FirmError {
    #[error("node {0} does not exist in this graph")]
    UnknownNode(NodeId),
    #[error("{kind}.{field} must refer to a {required} node, but {target} is not one")]
    RoleViolation {
        kind: &'static str,
        field: usize,
        required: FieldReq,
        target: &'static str,
    },
    #[error("{0} nodes must be contained in a block")]
    MissingBlock(&'static str),
    #[error("a Block is not contained in a block")]
    BlockInBlock,
    #[error("block reference of {kind} points to {target}, not to a Block")]
    NotABlock { kind: &'static str, target: &'static str },
    #[error("graph already has an End node")]
    DuplicateEnd,
    #[error("graph already has a Start node")]
    DuplicateStart,
    #[error("{0} is not a Block")]
    ExpectedBlock(NodeId),
}

/// Arena of Firm nodes. Nodes are never deleted; a node that can no longer
/// be reached from End is simply dead.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FirmGraph {
    nodes: Vec<FirmNode>,
    end: Option<NodeId>,
    start: Option<NodeId>,
}

impl FirmGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a node after checking block placement and the roles of every
    /// referenced node. Modes of kinds without a numeric value are stored as
    /// [`Mode::NotYetComputed`].
    pub fn add_node(
        &mut self,
        kind: NodeKind,
        block: Option<NodeId>,
        mode: Mode,
        location: Option<SourceLocation>,
        gxl_id: Option<String>,
    ) -> Result<NodeId, FirmError> {
        match kind {
            NodeKind::End if self.end.is_some() => return Err(FirmError::DuplicateEnd),
            NodeKind::Start if self.start.is_some() => return Err(FirmError::DuplicateStart),
            _ => {}
        }
        self.check_block(&kind, block)?;
        self.check_operands(&kind)?;
        let id = self.push(FirmNode {
            mode: if kind.is_numeric_node() { mode } else { Mode::NotYetComputed },
            kind,
            block,
            location,
            gxl_id,
        });
        match self.nodes[id.index()].kind {
            NodeKind::End => self.end = Some(id),
            NodeKind::Start => self.start = Some(id),
            _ => {}
        }
        Ok(id)
    }

    /// Shorthand for [`add_node`](Self::add_node) without location or GXL id.
    pub fn add(&mut self, kind: NodeKind, block: Option<NodeId>, mode: Mode) -> Result<NodeId, FirmError> {
        self.add_node(kind, block, mode, None, None)
    }

    pub(crate) fn push(&mut self, node: FirmNode) -> NodeId {
        let id = NodeId(u32::try_from(self.nodes.len()).expect("arena overflow"));
        self.nodes.push(node);
        id
    }

    /// Adds a copy of an existing node without the End/Start uniqueness
    /// check; used by rewriters that re-root the graph afterwards.
    pub(crate) fn push_clone(&mut self, of: NodeId) -> NodeId {
        let node = self.nodes[of.index()].clone();
        self.push(node)
    }

    pub(crate) fn set_roots(&mut self, end: Option<NodeId>, start: Option<NodeId>) {
        self.end = end;
        self.start = start;
    }

    fn check_block(&self, kind: &NodeKind, block: Option<NodeId>) -> Result<(), FirmError> {
        match (kind.is_block(), block) {
            (true, Some(_)) => Err(FirmError::BlockInBlock),
            (true, None) => Ok(()),
            (false, None) => Err(FirmError::MissingBlock(kind.name())),
            (false, Some(b)) => {
                let target = self.try_node(b)?;
                if target.kind.is_block() {
                    Ok(())
                } else {
                    Err(FirmError::NotABlock {
                        kind: kind.name(),
                        target: target.kind.name(),
                    })
                }
            }
        }
    }

    fn check_operands(&self, kind: &NodeKind) -> Result<(), FirmError> {
        for (field, (target, req)) in kind.operands().into_iter().enumerate() {
            let t = &self.try_node(target)?.kind;
            let ok = match req {
                FieldReq::Role(r) => implements_role(t).contains(r),
                FieldReq::Cond => matches!(t, NodeKind::Cond { .. }),
            };
            if !ok {
                return Err(FirmError::RoleViolation {
                    kind: kind.name(),
                    field,
                    required: req,
                    target: t.name(),
                });
            }
        }
        Ok(())
    }

    fn try_node(&self, id: NodeId) -> Result<&FirmNode, FirmError> {
        self.nodes.get(id.index()).ok_or(FirmError::UnknownNode(id))
    }

    pub fn node(&self, id: NodeId) -> &FirmNode {
        &self.nodes[id.index()]
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id.index()].kind
    }

    /// Containing block of a non-Block node.
    pub fn block_of(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].block
    }

    pub fn end(&self) -> Option<NodeId> {
        self.end
    }

    pub fn start(&self) -> Option<NodeId> {
        self.start
    }

    /// Number of nodes in the arena, live or dead.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    /// Replaces the kind of `id`, re-checking roles. Used by rewrites and by
    /// builders that must close cycles.
    pub fn replace_kind(&mut self, id: NodeId, kind: NodeKind) -> Result<(), FirmError> {
        let old = &self.try_node(id)?.kind;
        if old.is_block() != kind.is_block() {
            return Err(FirmError::ExpectedBlock(id));
        }
        self.check_operands(&kind)?;
        let node = &mut self.nodes[id.index()];
        if !kind.is_numeric_node() {
            node.mode = Mode::NotYetComputed;
        }
        node.kind = kind;
        Ok(())
    }

    pub fn set_mode(&mut self, id: NodeId, mode: Mode) {
        let node = &mut self.nodes[id.index()];
        if node.kind.is_numeric_node() {
            node.mode = mode;
        }
    }

    pub fn set_block_predec(&mut self, block: NodeId, key: i64, cf: NodeId) -> Result<(), FirmError> {
        let target = &self.try_node(cf)?.kind;
        if !implements_role(target).contains(Role::ControlFlow) {
            return Err(FirmError::RoleViolation {
                kind: "Block",
                field: 0,
                required: FieldReq::Role(Role::ControlFlow),
                target: target.name(),
            });
        }
        match &mut self.nodes[block.index()].kind {
            NodeKind::Block { predecs } => {
                predecs.insert(key, cf);
                Ok(())
            }
            _ => Err(FirmError::ExpectedBlock(block)),
        }
    }

    pub fn remove_block_predec(&mut self, block: NodeId, key: i64) -> Result<Option<NodeId>, FirmError> {
        match &mut self.nodes[block.index()].kind {
            NodeKind::Block { predecs } => Ok(predecs.remove(&key)),
            _ => Err(FirmError::ExpectedBlock(block)),
        }
    }

    /// Unchecked access for rewriters that keep roles intact themselves.
    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut FirmNode {
        &mut self.nodes[id.index()]
    }

    /// Predecessor map of a Block.
    pub fn predecs(&self, block: NodeId) -> Option<&BTreeMap<i64, NodeId>> {
        match self.kind(block) {
            NodeKind::Block { predecs } => Some(predecs),
            _ => None,
        }
    }

    /// Every reference of `id`: its block first, then its fields.
    pub fn successors_in_visit_order(&self, id: NodeId) -> Vec<NodeId> {
        let node = self.node(id);
        node.block
            .into_iter()
            .chain(node.kind.operands().into_iter().map(|(n, _)| n))
            .collect()
    }

    /// Nodes reachable from End in depth-first preorder (block reference
    /// first, then fields in declaration order).
    pub fn reachable(&self) -> Vec<NodeId> {
        let mut order = Vec::new();
        visit_blocks_once(self, |n| order.push(n));
        order
    }

    /// Reachable non-Block nodes contained in `block`.
    pub fn nodes_in_block(&self, block: NodeId) -> Vec<NodeId> {
        self.reachable()
            .into_iter()
            .filter(|&n| self.block_of(n) == Some(block))
            .collect()
    }

    /// Reachable non-Block nodes grouped by their block.
    pub fn block_members(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut out: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for n in self.reachable() {
            match self.block_of(n) {
                Some(b) => out.entry(b).or_default().push(n),
                None => {
                    out.entry(n).or_default();
                }
            }
        }
        out
    }

    /// Count of reachable nodes per kind name.
    pub fn census(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for n in self.reachable() {
            *out.entry(self.kind(n).name()).or_insert(0) += 1;
        }
        out
    }
}
