//! Typed model of GXL 1.0 documents.
//!
//! The model mirrors the element structure of the GXL DTD: a document is a
//! sequence of graphs, a graph holds nodes, edges and hyperedges ("rels"),
//! and every attributed element carries a list of typed attribute values.
//! Cross references (`from`, `to`, `target`) are kept as element IDs; the
//! parser guarantees that they resolve.

mod parse;
mod write;

pub use parse::{parse_gxl, parse_gxl_with_id, ParseOutcome};
pub(crate) use parse::parse_float;
pub use write::{serialize_gxl, serialize_gxl_string};
pub(crate) use write::format_float;

use crate::diag::SourceLocation;

/// Namespace bound to the `xlink` prefix.
pub const XLINK_NS: &str = "http://www.w3.org/1999/xlink";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GxlDocument {
    pub graphs: Vec<GxlGraph>,
    pub location: Option<SourceLocation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Edgemode {
    #[default]
    Directed,
    Undirected,
    DefaultDirected,
    DefaultUndirected,
}

impl Edgemode {
    pub fn as_str(self) -> &'static str {
        match self {
            Edgemode::Directed => "directed",
            Edgemode::Undirected => "undirected",
            Edgemode::DefaultDirected => "defaultdirected",
            Edgemode::DefaultUndirected => "defaultundirected",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "directed" => Edgemode::Directed,
            "undirected" => Edgemode::Undirected,
            "defaultdirected" => Edgemode::DefaultDirected,
            "defaultundirected" => Edgemode::DefaultUndirected,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
    None,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::Out => "out",
            Direction::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "in" => Direction::In,
            "out" => Direction::Out,
            "none" => Direction::None,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GxlGraph {
    pub id: String,
    pub type_ref: Option<String>,
    pub role: Option<String>,
    pub edgeids: bool,
    pub hypergraph: bool,
    pub edgemode: Edgemode,
    pub attrs: Vec<GxlAttr>,
    pub parts: Vec<GxlPart>,
    pub location: Option<SourceLocation>,
}

impl GxlGraph {
    pub fn new(id: impl Into<String>) -> Self {
        GxlGraph {
            id: id.into(),
            type_ref: None,
            role: None,
            edgeids: false,
            hypergraph: false,
            edgemode: Edgemode::Directed,
            attrs: Vec::new(),
            parts: Vec::new(),
            location: None,
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &GxlNode> {
        self.parts.iter().filter_map(|p| match p {
            GxlPart::Node(n) => Some(n),
            _ => None,
        })
    }

    pub fn edges(&self) -> impl Iterator<Item = &GxlEdge> {
        self.parts.iter().filter_map(|p| match p {
            GxlPart::Edge(e) => Some(e),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GxlPart {
    Node(GxlNode),
    Edge(GxlEdge),
    Rel(GxlRel),
}

impl GxlPart {
    pub fn id(&self) -> Option<&str> {
        match self {
            GxlPart::Node(n) => Some(&n.id),
            GxlPart::Edge(e) => e.id.as_deref(),
            GxlPart::Rel(r) => r.id.as_deref(),
        }
    }

    pub fn subgraphs(&self) -> &[GxlGraph] {
        match self {
            GxlPart::Node(n) => &n.subgraphs,
            GxlPart::Edge(e) => &e.subgraphs,
            GxlPart::Rel(r) => &r.subgraphs,
        }
    }

    pub fn location(&self) -> Option<&SourceLocation> {
        match self {
            GxlPart::Node(n) => n.location.as_ref(),
            GxlPart::Edge(e) => e.location.as_ref(),
            GxlPart::Rel(r) => r.location.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GxlNode {
    pub id: String,
    pub type_ref: Option<String>,
    pub attrs: Vec<GxlAttr>,
    pub subgraphs: Vec<GxlGraph>,
    pub location: Option<SourceLocation>,
}

impl GxlNode {
    pub fn new(id: impl Into<String>) -> Self {
        GxlNode {
            id: id.into(),
            type_ref: None,
            attrs: Vec::new(),
            subgraphs: Vec::new(),
            location: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GxlEdge {
    pub id: Option<String>,
    pub type_ref: Option<String>,
    /// ID of the source part.
    pub from: String,
    /// ID of the target part.
    pub to: String,
    pub fromorder: Option<i64>,
    pub toorder: Option<i64>,
    pub isdirected: Option<bool>,
    pub attrs: Vec<GxlAttr>,
    pub subgraphs: Vec<GxlGraph>,
    pub location: Option<SourceLocation>,
}

impl GxlEdge {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        GxlEdge {
            id: None,
            type_ref: None,
            from: from.into(),
            to: to.into(),
            fromorder: None,
            toorder: None,
            isdirected: None,
            attrs: Vec::new(),
            subgraphs: Vec::new(),
            location: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GxlRel {
    pub id: Option<String>,
    pub type_ref: Option<String>,
    pub isdirected: Option<bool>,
    pub attrs: Vec<GxlAttr>,
    pub subgraphs: Vec<GxlGraph>,
    pub relends: Vec<GxlRelend>,
    pub location: Option<SourceLocation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GxlRelend {
    /// ID of the target part.
    pub target: String,
    pub role: Option<String>,
    pub direction: Option<Direction>,
    pub startorder: Option<i64>,
    pub endorder: Option<i64>,
    pub attrs: Vec<GxlAttr>,
    pub location: Option<SourceLocation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GxlAttr {
    pub id: Option<String>,
    pub name: String,
    pub kind: Option<String>,
    /// Attributes of the attribute itself (GXL allows nesting).
    pub attrs: Vec<GxlAttr>,
    pub value: GxlValue,
    pub location: Option<SourceLocation>,
}

impl GxlAttr {
    pub fn new(name: impl Into<String>, value: GxlValue) -> Self {
        GxlAttr {
            id: None,
            name: name.into(),
            kind: None,
            attrs: Vec::new(),
            value,
            location: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GxlValue {
    Locator(String),
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Enum(String),
    Seq(Vec<GxlValue>),
    Set(Vec<GxlValue>),
    Bag(Vec<GxlValue>),
    Tup(Vec<GxlValue>),
}

impl GxlValue {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            GxlValue::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            GxlValue::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Element name used for this value in XML.
    pub fn tag(&self) -> &'static str {
        match self {
            GxlValue::Locator(_) => "locator",
            GxlValue::Bool(_) => "bool",
            GxlValue::Int(_) => "int",
            GxlValue::Float(_) => "float",
            GxlValue::Str(_) => "string",
            GxlValue::Enum(_) => "enum",
            GxlValue::Seq(_) => "seq",
            GxlValue::Set(_) => "set",
            GxlValue::Bag(_) => "bag",
            GxlValue::Tup(_) => "tup",
        }
    }
}

/// Value of the first attribute named `name`, in document order.
pub fn find_attr<'a>(attrs: &'a [GxlAttr], name: &str) -> Option<&'a GxlValue> {
    attrs.iter().find(|a| a.name == name).map(|a| &a.value)
}

impl GxlDocument {
    /// Copy of the document with every source location removed, for
    /// structural comparison.
    pub fn without_locations(&self) -> GxlDocument {
        let mut doc = self.clone();
        doc.location = None;
        doc.graphs.iter_mut().for_each(strip_graph);
        doc
    }

    /// Equality ignoring source locations.
    pub fn structurally_eq(&self, other: &GxlDocument) -> bool {
        self.without_locations() == other.without_locations()
    }

    /// All element IDs in document order (graphs, parts and attributes).
    pub fn element_ids(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for g in &self.graphs {
            collect_graph_ids(g, &mut out);
        }
        out
    }
}

fn collect_graph_ids<'a>(g: &'a GxlGraph, out: &mut Vec<&'a str>) {
    out.push(&g.id);
    collect_attr_ids(&g.attrs, out);
    for p in &g.parts {
        if let Some(id) = p.id() {
            out.push(id);
        }
        match p {
            GxlPart::Node(n) => collect_attr_ids(&n.attrs, out),
            GxlPart::Edge(e) => collect_attr_ids(&e.attrs, out),
            GxlPart::Rel(r) => {
                collect_attr_ids(&r.attrs, out);
                for re in &r.relends {
                    collect_attr_ids(&re.attrs, out);
                }
            }
        }
        for sg in p.subgraphs() {
            collect_graph_ids(sg, out);
        }
    }
}

fn collect_attr_ids<'a>(attrs: &'a [GxlAttr], out: &mut Vec<&'a str>) {
    for a in attrs {
        if let Some(id) = &a.id {
            out.push(id);
        }
        collect_attr_ids(&a.attrs, out);
    }
}

fn strip_graph(g: &mut GxlGraph) {
    g.location = None;
    strip_attrs(&mut g.attrs);
    for p in &mut g.parts {
        match p {
            GxlPart::Node(n) => {
                n.location = None;
                strip_attrs(&mut n.attrs);
                n.subgraphs.iter_mut().for_each(strip_graph);
            }
            GxlPart::Edge(e) => {
                e.location = None;
                strip_attrs(&mut e.attrs);
                e.subgraphs.iter_mut().for_each(strip_graph);
            }
            GxlPart::Rel(r) => {
                r.location = None;
                strip_attrs(&mut r.attrs);
                r.subgraphs.iter_mut().for_each(strip_graph);
                for re in &mut r.relends {
                    re.location = None;
                    strip_attrs(&mut re.attrs);
                }
            }
        }
    }
}

fn strip_attrs(attrs: &mut [GxlAttr]) {
    for a in attrs {
        a.location = None;
        strip_attrs(&mut a.attrs);
    }
}
