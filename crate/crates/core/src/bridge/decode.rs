use std::collections::{BTreeMap, HashMap, HashSet};

use super::*;
use crate::diag::{has_errors, Diagnostic, SourceLocation};
use crate::firm::{BinaryOp, ConstValue, FirmGraph, Mode, NodeId, NodeKind, Role, UnaryOp, implements_role};
use crate::gxl::{find_attr, GxlDocument, GxlEdge, GxlGraph, GxlNode, GxlPart, GxlValue};

#[derive(Debug, Clone)]
pub struct DecodeResult {
    /// Present iff no error was reported.
    pub graph: Option<FirmGraph>,
    pub metamodel: Option<GxlGraph>,
    pub classname_to_meta_id: BTreeMap<String, String>,
    /// Id of the object graph, when one was found.
    pub object_graph_id: Option<String>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Node classes recognised but not translated.
const MEMORY_CLASSES: [&str; 9] = ["NoMem", "Store", "Free", "Load", "Alloc", "Sel", "Call", "Tuple_N", "SymConst"];

/// Decodes a two-graph case document into a Firm graph.
pub fn decode(doc: &GxlDocument) -> DecodeResult {
    let mut d = Decoder::default();
    let (metamodel, object) = d.classify(doc);
    let mut result = DecodeResult {
        graph: None,
        metamodel: metamodel.cloned(),
        classname_to_meta_id: BTreeMap::new(),
        object_graph_id: object.map(|g| g.id.clone()),
        diagnostics: Vec::new(),
    };
    if let (Some(meta), Some(object)) = (metamodel, object) {
        d.read_metamodel(meta);
        d.collect_object(object);
        d.find_start_and_end();
        if !has_errors(&d.diags) {
            let end = d.end_node.expect("checked");
            d.in_progress.insert(end.id.as_str());
            if let Some(id) = d.convert(end) {
                d.done.insert(end.id.as_str(), id);
            }
            d.resolve_pending();
            if let Some(start) = d.start_node {
                if !d.done.contains_key(start.id.as_str()) && !has_errors(&d.diags) {
                    d.in_progress.insert(start.id.as_str());
                    if let Some(id) = d.convert(start) {
                        d.done.insert(start.id.as_str(), id);
                    }
                }
            }
        }
    }
    result.classname_to_meta_id = d.class_to_meta.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    if !has_errors(&d.diags) {
        result.graph = Some(d.graph);
    }
    result.diagnostics = d.diags;
    result
}

#[derive(Clone, Copy)]
enum Expect {
    Role(Role),
    Block,
    Cond,
    Start,
}

impl Expect {
    fn name(self) -> &'static str {
        match self {
            Expect::Role(Role::Numeric) => "Numeric",
            Expect::Role(Role::ControlFlow) => "ControlFlow",
            Expect::Role(Role::MemoryState) => "MemoryState",
            Expect::Block => "Block",
            Expect::Cond => "Cond",
            Expect::Start => "Start",
        }
    }

    fn accepts(self, kind: &NodeKind) -> bool {
        match self {
            Expect::Role(r) => implements_role(kind).contains(r),
            Expect::Block => kind.is_block(),
            Expect::Cond => matches!(kind, NodeKind::Cond { .. }),
            Expect::Start => matches!(kind, NodeKind::Start),
        }
    }
}

#[derive(Default)]
struct Decoder<'a> {
    diags: Vec<Diagnostic>,
    graph: FirmGraph,
    meta_to_class: HashMap<&'a str, &'a str>,
    class_to_meta: BTreeMap<&'a str, &'a str>,
    nodes: Vec<&'a GxlNode>,
    node_by_id: HashMap<&'a str, &'a GxlNode>,
    outgoing: HashMap<&'a str, BTreeMap<i64, &'a GxlEdge>>,
    class_of: HashMap<&'a str, &'a str>,
    start_node: Option<&'a GxlNode>,
    end_node: Option<&'a GxlNode>,
    done: HashMap<&'a str, NodeId>,
    in_progress: HashSet<&'a str>,
    failed: HashSet<&'a str>,
    pending: Vec<(&'a GxlNode, NodeId, i64, &'a GxlEdge)>,
    all_args: HashMap<NodeId, NodeId>,
}

impl<'a> Decoder<'a> {
    fn error(&mut self, at: &Option<SourceLocation>, text: impl Into<String>) {
        self.diags.push(Diagnostic::error(at.clone(), text));
    }

    fn classify(&mut self, doc: &'a GxlDocument) -> (Option<&'a GxlGraph>, Option<&'a GxlGraph>) {
        let (mut meta, mut object) = (None, None);
        for g in &doc.graphs {
            let Some(href) = g.type_ref.as_deref() else {
                self.error(&g.location, format!("graph {} has no type", g.id));
                continue;
            };
            if href == METAMODEL_HREF {
                if meta.is_some() {
                    self.error(&g.location, "more than one metamodel graph");
                } else {
                    meta = Some(g);
                }
            } else if OBJECTMODEL_HREFS.contains(&href) {
                if object.is_some() {
                    self.error(&g.location, "more than one object model graph");
                } else {
                    object = Some(g);
                }
            }
        }
        if meta.is_none() {
            self.error(&doc.location, format!("no metamodel graph (type {METAMODEL_HREF}) found"));
        }
        if object.is_none() {
            self.error(
                &doc.location,
                format!("no object model graph (type {}) found", OBJECTMODEL_HREFS.join(" or ")),
            );
        }
        (meta, object)
    }

    fn read_metamodel(&mut self, meta: &'a GxlGraph) {
        for n in meta.nodes() {
            match find_attr(&n.attrs, ATTR_NAME) {
                None => {}
                Some(GxlValue::Str(name)) => {
                    self.meta_to_class.insert(&n.id, name);
                    self.class_to_meta.insert(name, &n.id);
                }
                Some(_) => self.error(&n.location, "name attribute of a meta-node must carry a string value"),
            }
        }
    }

    fn collect_object(&mut self, object: &'a GxlGraph) {
        for p in &object.parts {
            if let GxlPart::Node(n) = p {
                self.nodes.push(n);
                self.node_by_id.insert(&n.id, n);
            }
        }
        for e in object.edges() {
            let position = match find_attr(&e.attrs, ATTR_POSITION) {
                Some(GxlValue::Int(i)) => *i,
                _ => {
                    self.error(&e.location, "integer position attribute required for all edges");
                    continue;
                }
            };
            if !self.node_by_id.contains_key(e.from.as_str()) {
                self.error(&e.location, "start of each edge must be a node of the object graph");
                continue;
            }
            let map = self.outgoing.entry(e.from.as_str()).or_default();
            if let Some(old) = map.get(&position) {
                let previous = old.location.as_ref().map(|l| l.to_string()).unwrap_or_else(|| "?".into());
                let text = format!("duplicate use of order number {position} for this node and previously for {previous}");
                self.error(&e.location, text);
                continue;
            }
            map.insert(position, e);
        }
    }

    fn find_start_and_end(&mut self) {
        if self.nodes.is_empty() {
            self.diags.push(Diagnostic::error(None, "no model nodes found"));
        }
        for &n in &self.nodes.clone() {
            let Some(href) = n.type_ref.as_deref() else {
                self.error(&n.location, format!("node {} has no type", n.id));
                continue;
            };
            let Some(class) = href.strip_prefix('#').and_then(|id| self.meta_to_class.get(id)).copied() else {
                self.error(&n.location, format!("unknown node type \"{href}\""));
                continue;
            };
            self.class_of.insert(&n.id, class);
            if class == "End" {
                if self.end_node.is_some() {
                    self.error(&n.location, "A second end node found");
                } else {
                    self.end_node = Some(n);
                }
            } else if class == "Start" {
                if self.start_node.is_some() {
                    self.error(&n.location, "A second start node found");
                } else {
                    self.start_node = Some(n);
                }
            }
        }
        if self.end_node.is_none() {
            self.diags.push(Diagnostic::error(None, "no end node in graph"));
        }
        if self.start_node.is_none() {
            self.diags.push(Diagnostic::error(None, "no start node in graph"));
        }
    }

    fn describe(&self, node: &GxlNode, position: i64, expect: Expect) -> String {
        format!(
            "expecting an edge starting at position {position} of node {} of type {} pointing to an encoding of a {}",
            node.id,
            self.class_of.get(node.id.as_str()).copied().unwrap_or("?"),
            expect.name()
        )
    }

    /// Translation of the node at the end of `node`'s edge at `position`.
    fn target(&mut self, node: &'a GxlNode, position: i64, expect: Expect) -> Option<NodeId> {
        let Some(edge) = self.outgoing.get(node.id.as_str()).and_then(|m| m.get(&position)).copied() else {
            let text = format!("no edge at this position; {}", self.describe(node, position, expect));
            self.error(&node.location, text);
            return None;
        };
        self.follow(node, edge, position, expect)
    }

    fn follow(&mut self, node: &'a GxlNode, edge: &'a GxlEdge, position: i64, expect: Expect) -> Option<NodeId> {
        let Some(&to) = self.node_by_id.get(edge.to.as_str()) else {
            let text = format!("edge points to something not a graph node; {}", self.describe(node, position, expect));
            self.error(&edge.location, text);
            return None;
        };
        let id = if let Some(&id) = self.done.get(to.id.as_str()) {
            id
        } else if self.failed.contains(to.id.as_str()) {
            return None;
        } else {
            if !self.in_progress.insert(to.id.as_str()) {
                let text = format!(
                    "cyclic reference through non-Block nodes is not supported; {}",
                    self.describe(node, position, expect)
                );
                self.error(&to.location, text);
                return None;
            }
            let Some(id) = self.convert(to) else {
                self.failed.insert(to.id.as_str());
                return None;
            };
            self.done.insert(to.id.as_str(), id);
            id
        };
        let kind = self.graph.kind(id);
        if !expect.accepts(kind) {
            let text = format!(
                "translation result is of type {} but {} is expected; {}",
                kind.name(),
                expect.name(),
                self.describe(node, position, expect)
            );
            self.error(&to.location, text);
            return None;
        }
        Some(id)
    }

    fn add(&mut self, node: &GxlNode, kind: NodeKind, block: Option<NodeId>, mode: Mode) -> Option<NodeId> {
        match self.graph.add_node(kind, block, mode, node.location.clone(), Some(node.id.clone())) {
            Ok(id) => Some(id),
            Err(e) => {
                self.error(&node.location, e.to_string());
                None
            }
        }
    }

    fn outgoing_keys(&self, node: &GxlNode) -> Vec<i64> {
        self.outgoing
            .get(node.id.as_str())
            .map(|m| m.keys().copied().collect())
            .unwrap_or_default()
    }

    fn convert(&mut self, node: &'a GxlNode) -> Option<NodeId> {
        let class = self.class_of[node.id.as_str()];
        if BLOCK_TYPES.contains(&class) {
            return self.convert_block(node);
        }
        if MEMORY_CLASSES.contains(&class) {
            self.error(&node.location, format!("memory operations are not supported: {class} node {}", node.id));
            return None;
        }
        let block = self.target(node, BLOCK_CONTAINMENT_ORDER, Expect::Block)?;
        let nyc = Mode::NotYetComputed;
        let b = Some(block);
        match class {
            "Return" => {
                let memstate = self.target(node, 0, Expect::Role(Role::MemoryState));
                let keys: Vec<i64> = self.outgoing_keys(node).into_iter().filter(|&k| k > 0).collect();
                if keys.iter().enumerate().any(|(i, &k)| k != i as i64 + 1) {
                    self.error(&node.location, "Return results are not numbered consecutively from position 1");
                    return None;
                }
                let mut results = Vec::new();
                for k in keys {
                    results.push(self.target(node, k, Expect::Role(Role::Numeric)));
                }
                let results = results.into_iter().collect::<Option<Vec<_>>>()?;
                self.add(node, NodeKind::Return { memstate: memstate?, results }, b, nyc)
            }
            "Start" => self.add(node, NodeKind::Start, b, nyc),
            "Jmp" => self.add(node, NodeKind::Jmp, b, nyc),
            "End" => self.add(node, NodeKind::End, b, nyc),
            "Bad" => self.add(node, NodeKind::Bad, b, nyc),
            "Phi" => {
                let mut alternatives = BTreeMap::new();
                let mut ok = true;
                for k in self.outgoing_keys(node) {
                    if k == BLOCK_CONTAINMENT_ORDER {
                        continue;
                    }
                    match self.target(node, k, Expect::Role(Role::Numeric)) {
                        Some(v) => {
                            alternatives.insert(k, v);
                        }
                        None => ok = false,
                    }
                }
                ok.then_some(())?;
                self.add(node, NodeKind::Phi { alternatives }, b, nyc)
            }
            "Cond" => {
                let selector = self.target(node, 0, Expect::Role(Role::Numeric))?;
                self.add(node, NodeKind::Cond { selector }, b, nyc)
            }
            "Sync" => {
                let keys: Vec<i64> = self.outgoing_keys(node).into_iter().filter(|&k| k >= 0).collect();
                let mut predecs = Vec::new();
                for k in keys {
                    predecs.push(self.target(node, k, Expect::Role(Role::MemoryState)));
                }
                let predecs = predecs.into_iter().collect::<Option<Vec<_>>>()?;
                self.add(node, NodeKind::Sync { predecs }, b, nyc)
            }
            "Argument" => {
                let start = self.target(node, 0, Expect::Start)?;
                let Some(GxlValue::Int(pos)) = find_attr(&node.attrs, ATTR_POSITION) else {
                    self.error(&node.location, "position attribute missing for Argument");
                    return None;
                };
                let all = self.all_args(start)?;
                self.add(node, NodeKind::ProjN { predec: all, pos: *pos }, b, nyc)
            }
            "Const" => {
                let (unparsed, value) = self.const_value(node)?;
                let mode = value.mode();
                self.add(node, NodeKind::NumericConst { unparsed, value: Some(value) }, b, mode)
            }
            "Mux" => {
                let first = self.target(node, 0, Expect::Role(Role::Numeric));
                let second = self.target(node, 1, Expect::Role(Role::Numeric));
                let third = self.target(node, 2, Expect::Role(Role::Numeric));
                let kind = NodeKind::Mux { first: first?, second: second?, third: third? };
                self.add(node, kind, b, nyc)
            }
            _ => {
                if let Some(op) = UnaryOp::from_name(class) {
                    let on = self.target(node, 0, Expect::Role(Role::Numeric))?;
                    self.add(node, NodeKind::Unary { op, on }, b, nyc)
                } else if let Some(op) = BinaryOp::from_name(class) {
                    let left = self.target(node, 0, Expect::Role(Role::Numeric));
                    let right = self.target(node, 1, Expect::Role(Role::Numeric));
                    self.add(node, NodeKind::Binary { op, left: left?, right: right? }, b, nyc)
                } else {
                    self.error(&node.location, format!("no rule for node {} of type {class}", node.id));
                    None
                }
            }
        }
    }

    fn convert_block(&mut self, node: &'a GxlNode) -> Option<NodeId> {
        let block = self.add(node, NodeKind::Block { predecs: BTreeMap::new() }, None, Mode::NotYetComputed)?;
        // Registered before the predecessors are converted: control flow may
        // loop back into this block.
        self.done.insert(node.id.as_str(), block);
        let edges: Vec<(i64, &'a GxlEdge)> = self
            .outgoing
            .get(node.id.as_str())
            .map(|m| m.iter().map(|(k, e)| (*k, *e)).collect())
            .unwrap_or_default();
        for (i, edge) in edges {
            let to = edge.to.as_str();
            if self.in_progress.contains(to) && !self.done.contains_key(to) {
                // A loop back into this block; wired once the target exists.
                self.pending.push((node, block, i, edge));
            } else {
                self.block_predec(node, block, i, edge);
            }
        }
        Some(block)
    }

    fn block_predec(&mut self, node: &'a GxlNode, block: NodeId, i: i64, edge: &'a GxlEdge) {
        let branch = match edge.type_ref.as_deref() {
            Some(EDGE_TRUE) => Some(1),
            Some(EDGE_FALSE) => Some(0),
            _ => None,
        };
        let cf = match branch {
            Some(selection) => {
                let Some(cond) = self.follow(node, edge, i, Expect::Cond) else { return };
                let cond_node = self.graph.node(cond);
                let (cond_block, cond_loc) = (cond_node.block, cond_node.location.clone());
                let kind = NodeKind::ProjX { input: cond, selection };
                match self.graph.add_node(kind, cond_block, Mode::NotYetComputed, cond_loc, None) {
                    Ok(p) => p,
                    Err(e) => {
                        self.error(&edge.location, e.to_string());
                        return;
                    }
                }
            }
            None => match self.follow(node, edge, i, Expect::Role(Role::ControlFlow)) {
                Some(cf) => cf,
                None => return,
            },
        };
        if let Err(e) = self.graph.set_block_predec(block, i, cf) {
            self.error(&edge.location, e.to_string());
        }
    }

    fn resolve_pending(&mut self) {
        while let Some((node, block, i, edge)) = self.pending.pop() {
            self.block_predec(node, block, i, edge);
        }
    }

    /// The shared projection of Start's argument tuple.
    fn all_args(&mut self, start: NodeId) -> Option<NodeId> {
        if let Some(&p) = self.all_args.get(&start) {
            return Some(p);
        }
        let s = self.graph.node(start);
        let (block, location) = (s.block, s.location.clone());
        let kind = NodeKind::ProjN { predec: start, pos: START_POS_ARGUMENTS };
        let p = self.graph.add_node(kind, block, Mode::NotYetComputed, location, None).ok()?;
        self.all_args.insert(start, p);
        Some(p)
    }

    fn const_value(&mut self, node: &GxlNode) -> Option<(String, ConstValue)> {
        let kind = match find_attr(&node.attrs, ATTR_VALUE) {
            None => {
                self.error(&node.location, format!("constant {} has no value attribute", node.id));
                return None;
            }
            Some(GxlValue::Int(i)) => {
                return match i32::try_from(*i) {
                    Ok(v) => Some((v.to_string(), ConstValue::int(Mode::Is, v as i64))),
                    Err(_) => {
                        self.error(&node.location, format!("integer constant out of range: {i}"));
                        None
                    }
                };
            }
            Some(GxlValue::Float(f)) => {
                let v = ConstValue::float(Mode::F, *f);
                return Some((v.to_string(), v));
            }
            Some(GxlValue::Locator(_)) => "locator",
            Some(GxlValue::Bool(_)) => "boolean",
            Some(GxlValue::Str(_)) => "string",
            Some(GxlValue::Enum(_)) => "enum",
            Some(_) => "aggregate",
        };
        self.error(&node.location, format!("constants of {kind} type should not appear"));
        None
    }
}
