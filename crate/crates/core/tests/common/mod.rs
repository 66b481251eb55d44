//! Generators and fixtures shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use gxlfirm::firm::{BinaryOp, ConstValue, FirmGraph, Mode, NodeId, NodeKind, UnaryOp};
use gxlfirm::gxl::{
    Direction, Edgemode, GxlAttr, GxlDocument, GxlEdge, GxlGraph, GxlNode, GxlPart, GxlRel, GxlRelend, GxlValue,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const NYC: Mode = Mode::NotYetComputed;
/// Arguments every generated graph may read.
pub const ARG_COUNT: usize = 3;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- GXL

struct DocGen<'r> {
    rng: &'r mut StdRng,
    next_id: usize,
}

impl DocGen<'_> {
    fn fresh(&mut self) -> String {
        self.next_id += 1;
        format!("e{}", self.next_id)
    }

    fn maybe<T>(&mut self, f: impl FnOnce(&mut Self) -> T) -> Option<T> {
        if self.rng.random_bool(0.5) {
            Some(f(self))
        } else {
            None
        }
    }

    fn text(&mut self) -> String {
        const CHARS: &[char] = &['a', 'b', 'Z', '0', ' ', '<', '>', '&', '"', '\'', '\t', '\n', '\r', 'ü', '€', '#', '/'];
        let len = self.rng.random_range(0..8);
        (0..len).map(|_| CHARS[self.rng.random_range(0..CHARS.len())]).collect()
    }

    fn ident(&mut self) -> String {
        const NAMES: &[&str] = &["name", "position", "value", "weight", "label", "x_1", "kind"];
        NAMES[self.rng.random_range(0..NAMES.len())].to_string()
    }

    fn href(&mut self) -> String {
        const HREFS: &[&str] = &["#Block", "#Add", "http://example.org/schema.gxl#T", "#True", "other.gxl#x"];
        HREFS[self.rng.random_range(0..HREFS.len())].to_string()
    }

    fn value(&mut self, depth: u32) -> GxlValue {
        let pick = self.rng.random_range(0..if depth < 2 { 10 } else { 6 });
        let items = |g: &mut Self| {
            let n = g.rng.random_range(0..3);
            (0..n).map(|_| g.value(depth + 1)).collect()
        };
        match pick {
            0 => GxlValue::Locator(self.href()),
            1 => GxlValue::Bool(self.rng.random()),
            2 => GxlValue::Int(match self.rng.random_range(0..4) {
                0 => i64::MIN,
                1 => i64::MAX,
                _ => self.rng.random_range(-1000..1000),
            }),
            3 => GxlValue::Float(match self.rng.random_range(0..6) {
                0 => f64::INFINITY,
                1 => f64::NEG_INFINITY,
                2 => -0.0,
                3 => 1e-300,
                _ => self.rng.random_range(-1e6..1e6),
            }),
            4 => GxlValue::Str(self.text()),
            5 => GxlValue::Enum(self.ident()),
            6 => GxlValue::Seq(items(self)),
            7 => GxlValue::Set(items(self)),
            8 => GxlValue::Bag(items(self)),
            _ => GxlValue::Tup(items(self)),
        }
    }

    fn attrs(&mut self, depth: u32) -> Vec<GxlAttr> {
        let n = self.rng.random_range(0..3);
        (0..n)
            .map(|_| GxlAttr {
                id: self.maybe(|g| g.fresh()),
                name: self.ident(),
                kind: self.maybe(|g| g.ident()),
                attrs: if depth == 0 { self.attrs(1) } else { Vec::new() },
                value: self.value(0),
                location: None,
            })
            .collect()
    }

    fn graph(&mut self, depth: u32) -> GxlGraph {
        let mut g = GxlGraph::new(self.fresh());
        g.type_ref = self.maybe(|g| g.href());
        g.role = self.maybe(|g| g.ident());
        g.edgeids = self.rng.random();
        g.hypergraph = self.rng.random();
        g.edgemode = [Edgemode::Directed, Edgemode::Undirected, Edgemode::DefaultDirected, Edgemode::DefaultUndirected]
            [self.rng.random_range(0..4)];
        g.attrs = self.attrs(0);
        let mut node_ids = Vec::new();
        for _ in 0..self.rng.random_range(0..5) {
            let mut n = GxlNode::new(self.fresh());
            n.type_ref = self.maybe(|g| g.href());
            n.attrs = self.attrs(0);
            if depth < 2 && self.rng.random_bool(0.2) {
                n.subgraphs.push(self.graph(depth + 1));
            }
            node_ids.push(n.id.clone());
            g.parts.push(GxlPart::Node(n));
        }
        if node_ids.is_empty() {
            return g;
        }
        for _ in 0..self.rng.random_range(0..4) {
            let from = node_ids[self.rng.random_range(0..node_ids.len())].clone();
            let to = node_ids[self.rng.random_range(0..node_ids.len())].clone();
            let mut e = GxlEdge::new(from, to);
            e.id = self.maybe(|g| g.fresh());
            e.type_ref = self.maybe(|g| g.href());
            e.fromorder = self.maybe(|g| g.rng.random_range(-5..5));
            e.toorder = self.maybe(|g| g.rng.random_range(-5..5));
            e.isdirected = self.maybe(|g| g.rng.random());
            e.attrs = self.attrs(0);
            g.parts.push(GxlPart::Edge(e));
        }
        for _ in 0..self.rng.random_range(0..2) {
            let relends = (0..self.rng.random_range(0..3))
                .map(|_| GxlRelend {
                    target: node_ids[self.rng.random_range(0..node_ids.len())].clone(),
                    role: self.maybe(|g| g.ident()),
                    direction: self.maybe(|g| [Direction::In, Direction::Out, Direction::None][g.rng.random_range(0..3)]),
                    startorder: self.maybe(|g| g.rng.random_range(0..9)),
                    endorder: self.maybe(|g| g.rng.random_range(0..9)),
                    attrs: self.attrs(1),
                    location: None,
                })
                .collect();
            g.parts.push(GxlPart::Rel(GxlRel {
                id: self.maybe(|g| g.fresh()),
                type_ref: self.maybe(|g| g.href()),
                isdirected: self.maybe(|g| g.rng.random()),
                attrs: self.attrs(0),
                subgraphs: Vec::new(),
                relends,
                location: None,
            }));
        }
        g
    }
}

/// A valid document with unique ids and resolvable, acyclic references.
pub fn random_document(rng: &mut StdRng) -> GxlDocument {
    let mut gen = DocGen { rng, next_id: 0 };
    let n = gen.rng.random_range(1..4);
    GxlDocument { graphs: (0..n).map(|_| gen.graph(0)).collect(), location: None }
}

// ---------------------------------------------------------------- Firm

pub fn block(g: &mut FirmGraph, predecs: &[(i64, NodeId)]) -> NodeId {
    g.add(NodeKind::Block { predecs: predecs.iter().copied().collect() }, None, NYC).unwrap()
}

pub fn konst(g: &mut FirmGraph, b: NodeId, v: i64) -> NodeId {
    let kind = NodeKind::NumericConst { unparsed: v.to_string(), value: Some(ConstValue::int(Mode::Is, v)) };
    g.add(kind, Some(b), Mode::Is).unwrap()
}

pub fn binary(g: &mut FirmGraph, b: NodeId, op: BinaryOp, left: NodeId, right: NodeId) -> NodeId {
    g.add(NodeKind::Binary { op, left, right }, Some(b), NYC).unwrap()
}

pub fn phi(g: &mut FirmGraph, b: NodeId, alternatives: &[(i64, NodeId)]) -> NodeId {
    g.add(NodeKind::Phi { alternatives: alternatives.iter().copied().collect() }, Some(b), NYC).unwrap()
}

/// Cond in `b` with its true and false projections.
pub fn cond(g: &mut FirmGraph, b: NodeId, selector: NodeId) -> (NodeId, NodeId) {
    let c = g.add(NodeKind::Cond { selector }, Some(b), NYC).unwrap();
    let t = g.add(NodeKind::ProjX { input: c, selection: 1 }, Some(b), NYC).unwrap();
    let f = g.add(NodeKind::ProjX { input: c, selection: 0 }, Some(b), NYC).unwrap();
    (t, f)
}

/// Ends the graph: `Return(results)` in `b`, then the end block.
pub fn finish(g: &mut FirmGraph, b: NodeId, start: NodeId, results: Vec<NodeId>) -> NodeId {
    let r = g.add(NodeKind::Return { memstate: start, results }, Some(b), NYC).unwrap();
    let eb = block(g, &[(0, r)]);
    g.add(NodeKind::End, Some(eb), NYC).unwrap();
    eb
}

fn start_block(g: &mut FirmGraph) -> (NodeId, NodeId) {
    let sb = block(g, &[]);
    let s = g.add(NodeKind::Start, Some(sb), NYC).unwrap();
    (sb, s)
}

struct FirmGen<'r> {
    rng: &'r mut StdRng,
    g: FirmGraph,
    sb: NodeId,
    blocks: usize,
    max_blocks: usize,
}

impl FirmGen<'_> {
    fn pick(&mut self, from: &[NodeId]) -> NodeId {
        from[self.rng.random_range(0..from.len())]
    }

    fn fits(&self, n: usize) -> bool {
        self.blocks + n <= self.max_blocks
    }

    fn new_block(&mut self, predecs: &[(i64, NodeId)]) -> NodeId {
        self.blocks += 1;
        block(&mut self.g, predecs)
    }

    fn compute(&mut self, b: NodeId, avail: &mut Vec<NodeId>) {
        for _ in 0..self.rng.random_range(0..4) {
            let v = match self.rng.random_range(0..12) {
                0 => {
                    let op = [UnaryOp::Minus, UnaryOp::Not][self.rng.random_range(0..2)];
                    let on = self.pick(avail);
                    self.g.add(NodeKind::Unary { op, on }, Some(b), NYC).unwrap()
                }
                1 => {
                    let (x, y) = (self.pick(avail), self.pick(avail));
                    let sel = binary(&mut self.g, b, BinaryOp::Cmp, x, y);
                    let (second, third) = (self.pick(avail), self.pick(avail));
                    self.g.add(NodeKind::Mux { first: sel, second, third }, Some(b), NYC).unwrap()
                }
                k => {
                    const OPS: [BinaryOp; 10] = [
                        BinaryOp::Add,
                        BinaryOp::Add,
                        BinaryOp::Sub,
                        BinaryOp::Mul,
                        BinaryOp::And,
                        BinaryOp::Or,
                        BinaryOp::Eor,
                        BinaryOp::Div,
                        BinaryOp::Mod,
                        BinaryOp::Sub,
                    ];
                    let (l, r) = (self.pick(avail), self.pick(avail));
                    binary(&mut self.g, b, OPS[k - 2], l, r)
                }
            };
            avail.push(v);
        }
        if self.rng.random_bool(0.3) {
            let v = self.rng.random_range(-4..5);
            avail.push(konst(&mut self.g, b, v));
        }
    }

    fn selector(&mut self, b: NodeId, avail: &[NodeId]) -> NodeId {
        match self.rng.random_range(0..4) {
            0 => {
                let v = self.rng.random_range(0..2);
                let sb = self.sb;
                konst(&mut self.g, sb, v)
            }
            1 => {
                let sb = self.sb;
                let x = konst(&mut self.g, sb, self.rng.random_range(0..3));
                let y = konst(&mut self.g, sb, self.rng.random_range(0..3));
                binary(&mut self.g, b, BinaryOp::Cmp, x, y)
            }
            _ => {
                let (x, y) = (self.pick(avail), self.pick(avail));
                binary(&mut self.g, b, BinaryOp::Cmp, x, y)
            }
        }
    }

    /// A sequence of straight and branching segments starting in `cur`;
    /// returns the block control ends in.
    fn region(&mut self, mut cur: NodeId, avail: &mut Vec<NodeId>, depth: u32, required: bool) -> NodeId {
        let mut first = required;
        while first || (self.fits(1) && self.rng.random_bool(0.6)) {
            first = false;
            if self.fits(2) && self.rng.random_bool(0.6) {
                cur = self.branch(cur, avail, depth);
            } else {
                let j = self.g.add(NodeKind::Jmp, Some(cur), NYC).unwrap();
                cur = self.new_block(&[(0, j)]);
                self.compute(cur, avail);
            }
        }
        cur
    }

    fn branch(&mut self, cur: NodeId, avail: &mut Vec<NodeId>, depth: u32) -> NodeId {
        let sel = self.selector(cur, avail);
        let (t, f) = cond(&mut self.g, cur, sel);
        let mut arms = Vec::new();
        // The join's block is held back while the arms are built.
        self.max_blocks -= 1;
        for p in [t, f] {
            let mut arm_avail = avail.clone();
            let exit = if self.fits(1) && self.rng.random_bool(0.6) {
                let a = self.new_block(&[(0, p)]);
                self.compute(a, &mut arm_avail);
                let last = if depth < 2 && self.fits(1) && self.rng.random_bool(0.3) {
                    self.region(a, &mut arm_avail, depth + 1, false)
                } else {
                    a
                };
                self.g.add(NodeKind::Jmp, Some(last), NYC).unwrap()
            } else {
                p
            };
            arms.push((exit, arm_avail));
        }
        self.max_blocks += 1;
        let join = self.new_block(&[(0, arms[0].0), (1, arms[1].0)]);
        for _ in 0..self.rng.random_range(1..3) {
            let a = self.pick(&arms[0].1.clone());
            let b = self.pick(&arms[1].1.clone());
            avail.push(phi(&mut self.g, join, &[(0, a), (1, b)]));
        }
        self.compute(join, avail);
        join
    }
}

/// A loop-free, memory-free graph with 3 to 12 blocks reading
/// [`ARG_COUNT`] Is arguments.
pub fn random_graph(rng: &mut StdRng) -> FirmGraph {
    let max_blocks = rng.random_range(3..=12);
    let mut g = FirmGraph::new();
    let (sb, start) = start_block(&mut g);
    let args = g.add(NodeKind::ProjN { predec: start, pos: 2 }, Some(sb), NYC).unwrap();
    let mut avail: Vec<NodeId> =
        (0..ARG_COUNT as i64).map(|i| g.add(NodeKind::ProjN { predec: args, pos: i }, Some(sb), NYC).unwrap()).collect();
    for _ in 0..rng.random_range(1..4) {
        let v = if rng.random_bool(0.1) { i32::MAX as i64 } else { rng.random_range(-8..9) };
        avail.push(konst(&mut g, sb, v));
    }
    let mut gen = FirmGen { rng, g, sb, blocks: 2, max_blocks };
    let mut cur = sb;
    if gen.rng.random_bool(0.3) {
        cur = gen.new_block(&[(0, start)]);
    }
    gen.compute(cur, &mut avail);
    let required = cur == sb;
    let last = gen.region(cur, &mut avail, 0, required);
    let n = gen.rng.random_range(1..3);
    let results = (0..n).map(|_| gen.pick(&avail)).collect();
    let mut g = gen.g;
    finish(&mut g, last, start, results);
    g
}

/// Small-valued argument vectors hit Cmp equalities often.
pub fn random_args(rng: &mut StdRng) -> Vec<ConstValue> {
    (0..ARG_COUNT)
        .map(|_| {
            let v = match rng.random_range(0..10) {
                0 => i32::MIN as i64,
                1 => i32::MAX as i64,
                _ => rng.random_range(-3..4),
            };
            ConstValue::int(Mode::Is, v)
        })
        .collect()
}

// ---------------------------------------------------------------- fixtures

/// SB{Start} -> B1{Return} -> EB{End}: no diagnostics at all.
pub fn minimal() -> FirmGraph {
    let mut g = FirmGraph::new();
    let (_, s) = start_block(&mut g);
    let b1 = block(&mut g, &[(0, s)]);
    finish(&mut g, b1, s, vec![]);
    g
}

/// SB{Start, Cond(Const c)}: the true arm runs through T{Jmp}, the false arm
/// flows straight into J{Phi(7, 9), Return}.
pub fn diamond(c: i64) -> FirmGraph {
    let mut g = FirmGraph::new();
    let (sb, s) = start_block(&mut g);
    let k = konst(&mut g, sb, c);
    let (pt, pf) = cond(&mut g, sb, k);
    let t = block(&mut g, &[(0, pt)]);
    let tj = g.add(NodeKind::Jmp, Some(t), NYC).unwrap();
    let j = block(&mut g, &[(0, tj), (1, pf)]);
    let a = konst(&mut g, sb, 7);
    let b = konst(&mut g, sb, 9);
    let p = phi(&mut g, j, &[(0, a), (1, b)]);
    finish(&mut g, j, s, vec![p]);
    g
}

/// Two stacked diamonds: the second Cond's selector is a Phi of the first
/// join that only becomes constant once the first Cond is folded, and the
/// returned value adds 1 to a Phi of the second join.
pub fn nested_diamond() -> FirmGraph {
    let mut g = FirmGraph::new();
    let (sb, s) = start_block(&mut g);
    let one = konst(&mut g, sb, 1);
    let zero = konst(&mut g, sb, 0);
    let seven = konst(&mut g, sb, 7);
    let nine = konst(&mut g, sb, 9);
    let (pt1, pf1) = cond(&mut g, sb, one);
    let t1 = block(&mut g, &[(0, pt1)]);
    let tj1 = g.add(NodeKind::Jmp, Some(t1), NYC).unwrap();
    let j1 = block(&mut g, &[(0, tj1), (1, pf1)]);
    let sel = phi(&mut g, j1, &[(0, one), (1, zero)]);
    let (pt2, pf2) = cond(&mut g, j1, sel);
    let t2 = block(&mut g, &[(0, pt2)]);
    let tj2 = g.add(NodeKind::Jmp, Some(t2), NYC).unwrap();
    let j2 = block(&mut g, &[(0, tj2), (1, pf2)]);
    let v = phi(&mut g, j2, &[(0, seven), (1, nine)]);
    let sum = binary(&mut g, j2, BinaryOp::Add, v, one);
    finish(&mut g, j2, s, vec![sum]);
    g
}

/// One fixture per verifier error code, each failing only that check.
pub fn verifier_matrix() -> Vec<(&'static str, FirmGraph)> {
    vec![
        ("C1", two_jumps()),
        ("C2", control_flow_in_end_block()),
        ("C3", phi_count_mismatch()),
        ("C4", phi_keys_with_gap()),
        ("C5", block_keys_with_gap()),
        ("E1", unreachable_loop()),
        ("E2", data_cycle()),
    ]
}

fn two_jumps() -> FirmGraph {
    let mut g = FirmGraph::new();
    let (_, s) = start_block(&mut g);
    let b1 = block(&mut g, &[(0, s)]);
    let j1 = g.add(NodeKind::Jmp, Some(b1), NYC).unwrap();
    let j2 = g.add(NodeKind::Jmp, Some(b1), NYC).unwrap();
    let b2 = block(&mut g, &[(0, j1), (1, j2)]);
    finish(&mut g, b2, s, vec![]);
    g
}

fn control_flow_in_end_block() -> FirmGraph {
    let mut g = FirmGraph::new();
    let (_, s) = start_block(&mut g);
    let b1 = block(&mut g, &[(0, s)]);
    let eb = finish(&mut g, b1, s, vec![]);
    let j = g.add(NodeKind::Jmp, Some(eb), NYC).unwrap();
    g.set_block_predec(eb, 1, j).unwrap();
    g
}

fn join_with(block_keys: &[i64], phi_keys: &[i64]) -> FirmGraph {
    let mut g = FirmGraph::new();
    let (sb, s) = start_block(&mut g);
    let j = g.add(NodeKind::Jmp, Some(sb), NYC).unwrap();
    let predecs: Vec<(i64, NodeId)> = block_keys.iter().map(|&k| (k, j)).collect();
    let b = block(&mut g, &predecs);
    let alternatives: Vec<(i64, NodeId)> = phi_keys.iter().map(|&k| (k, konst(&mut g, sb, k))).collect();
    let p = phi(&mut g, b, &alternatives);
    finish(&mut g, b, s, vec![p]);
    g
}

fn phi_count_mismatch() -> FirmGraph {
    join_with(&[0, 1, 2], &[0, 1])
}

fn phi_keys_with_gap() -> FirmGraph {
    join_with(&[0, 1], &[0, 2])
}

fn block_keys_with_gap() -> FirmGraph {
    let mut g = FirmGraph::new();
    let (sb, s) = start_block(&mut g);
    let j = g.add(NodeKind::Jmp, Some(sb), NYC).unwrap();
    let b = block(&mut g, &[(0, j), (2, j)]);
    finish(&mut g, b, s, vec![]);
    g
}

/// L{Cond} loops on itself and feeds X, but nothing enters L.
fn unreachable_loop() -> FirmGraph {
    let mut g = FirmGraph::new();
    let (sb, s) = start_block(&mut g);
    let k = konst(&mut g, sb, 1);
    let l = block(&mut g, &[]);
    let (back, out) = cond(&mut g, l, k);
    g.set_block_predec(l, 0, back).unwrap();
    let x = block(&mut g, &[(0, s), (1, out)]);
    finish(&mut g, x, s, vec![]);
    g
}

fn data_cycle() -> FirmGraph {
    let mut g = FirmGraph::new();
    let (sb, s) = start_block(&mut g);
    let b1 = block(&mut g, &[(0, s)]);
    let c = konst(&mut g, sb, 1);
    let a = binary(&mut g, b1, BinaryOp::Add, c, c);
    g.replace_kind(a, NodeKind::Binary { op: BinaryOp::Add, left: a, right: c }).unwrap();
    finish(&mut g, b1, s, vec![a]);
    g
}

/// Error codes of a graph's diagnostics, sorted.
pub fn error_codes(g: &FirmGraph) -> Vec<&'static str> {
    let mut codes: Vec<&'static str> =
        gxlfirm::verify::check(g).iter().filter(|d| d.is_error()).map(|d| d.code.unwrap_or("?")).collect();
    codes.sort();
    codes
}

/// Reachable node count per kind.
pub fn census(g: &FirmGraph) -> BTreeMap<&'static str, usize> {
    g.census()
}

/// Serialized GXL for `g` under the default metamodel.
pub fn gxl_bytes(g: &FirmGraph) -> Vec<u8> {
    let (meta, map) = gxlfirm::bridge::default_metamodel();
    let doc = gxlfirm::bridge::encode(g, &meta, &map, "Graph").expect("fixture is encodable");
    gxlfirm::gxl::serialize_gxl(&doc)
}

/// Writes `g` as `name` inside `dir`.
pub fn write_gxl(dir: &std::path::Path, name: &str, g: &FirmGraph) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, gxl_bytes(g)).unwrap();
    path
}
