//! Translation between GXL documents and Firm graphs.
//!
//! A case file holds two graphs. The metamodel graph describes the Firm node
//! classes: each of its nodes carries a `name` attribute with a class name.
//! The object graph holds the program: each node's `type` points (with a
//! local `#id` href) at its class in the metamodel, and each edge carries an
//! integer `position` attribute telling which field of the source node it
//! fills. Position -1 is the containment edge from a node to its block.

mod decode;
mod encode;

pub use decode::{decode, DecodeResult};
pub use encode::{encode, EncodeError};

use std::collections::BTreeMap;

use crate::gxl::{GxlAttr, GxlGraph, GxlNode, GxlPart, GxlValue};

pub const METAMODEL_HREF: &str = "http://www.gupro.de/GXL/gxl-1.0.gxl#gxl-1.0";
pub const OBJECTMODEL_HREFS: [&str; 2] = ["#Firm", "#InstructionSelection"];
pub const ATTR_NAME: &str = "name";
pub const ATTR_POSITION: &str = "position";
pub const ATTR_VALUE: &str = "value";
pub const BLOCK_TYPES: [&str; 3] = ["Block", "StartBlock", "EndBlock"];
pub const BLOCK_CONTAINMENT_ORDER: i64 = -1;
pub const EDGE_TRUE: &str = "#True";
pub const EDGE_FALSE: &str = "#False";
pub const START_POS_STACKFRAME: i64 = 0;
pub const START_POS_HEAP: i64 = 1;
pub const START_POS_ARGUMENTS: i64 = 2;

/// Node classes with a wire mapping, in the order [`default_metamodel`]
/// lists them.
pub const WIRE_CLASSES: [&str; 31] = [
    "Block", "StartBlock", "EndBlock", "Start", "End", "Return", "Jmp", "Cond", "Phi", "Const", "Argument", "Sync",
    "Bad", "Conv", "Minus", "Not", "Rotl", "Shl", "Shr", "Shrs", "Add", "And", "Cmp", "Div", "Eor", "Mod", "Mul",
    "Or", "Sub", "Mux", "Firm",
];

/// A metamodel covering every class with a wire mapping, plus the `True`
/// and `False` edge classes. Node ids equal the class names, so the object
/// graph's type hrefs read `#Add`, `#Cond` and so on.
pub fn default_metamodel() -> (GxlGraph, BTreeMap<String, String>) {
    let mut g = GxlGraph::new("SCE_Firm");
    g.type_ref = Some(METAMODEL_HREF.to_string());
    let mut map = BTreeMap::new();
    for class in WIRE_CLASSES.iter().chain(&["True", "False"]) {
        let mut n = GxlNode::new(*class);
        n.attrs.push(GxlAttr::new(ATTR_NAME, GxlValue::Str(class.to_string())));
        g.parts.push(GxlPart::Node(n));
        map.insert(class.to_string(), class.to_string());
    }
    (g, map)
}
