use std::collections::{HashMap, HashSet};

use roxmltree::{Node, ParsingOptions};

use super::*;
use crate::diag::{has_errors, Diagnostic, SourceLocation};

/// Result of [`parse_gxl`]: the document is present iff no error was reported.
#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub document: Option<GxlDocument>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parses a GXL document. Locations are reported against the id `<input>`.
pub fn parse_gxl(bytes: &[u8]) -> ParseOutcome {
    parse_gxl_with_id(bytes, "<input>")
}

/// Parses a GXL document, using `document_id` (usually the file name) in
/// every source location.
pub fn parse_gxl_with_id(bytes: &[u8], document_id: &str) -> ParseOutcome {
    let mut diagnostics = Vec::new();
    let text = match std::str::from_utf8(bytes) {
        Ok(t) => t,
        Err(e) => {
            diagnostics.push(Diagnostic::error(
                Some(SourceLocation::new(document_id, 1, 1)),
                format!("input is not valid UTF-8: {e}"),
            ));
            return ParseOutcome { document: None, diagnostics };
        }
    };
    let options = ParsingOptions {
        allow_dtd: true,
        ..ParsingOptions::default()
    };
    let xml = match roxmltree::Document::parse_with_options(text, options) {
        Ok(x) => x,
        Err(e) => {
            let pos = e.pos();
            diagnostics.push(Diagnostic::error(
                Some(SourceLocation::new(document_id, pos.row.max(1), pos.col.max(1))),
                format!("malformed XML: {e}"),
            ));
            return ParseOutcome { document: None, diagnostics };
        }
    };

    let mut parser = Parser {
        xml: &xml,
        document_id,
        diagnostics: Vec::new(),
        ids: HashMap::new(),
    };
    let doc = parser.document(xml.root_element());
    let mut diagnostics = parser.diagnostics;
    if let Some(doc) = &doc {
        if !has_errors(&diagnostics) {
            check_references(doc, &mut diagnostics);
        }
    }
    let document = if has_errors(&diagnostics) { None } else { doc };
    ParseOutcome { document, diagnostics }
}

struct Parser<'a, 'input> {
    xml: &'a roxmltree::Document<'input>,
    document_id: &'a str,
    diagnostics: Vec<Diagnostic>,
    ids: HashMap<String, Option<SourceLocation>>,
}

fn is_element(n: &Node<'_, '_>, name: &str) -> bool {
    n.is_element() && n.tag_name().name() == name && n.tag_name().namespace().is_none()
}

impl Parser<'_, '_> {
    fn loc(&self, n: Node<'_, '_>) -> Option<SourceLocation> {
        let pos = self.xml.text_pos_at(n.range().start);
        Some(SourceLocation::new(self.document_id, pos.row, pos.col))
    }

    fn error(&mut self, n: Node<'_, '_>, text: impl Into<String>) {
        let loc = self.loc(n);
        self.diagnostics.push(Diagnostic::error(loc, text));
    }

    fn register_id(&mut self, n: Node<'_, '_>, id: &str) {
        let loc = self.loc(n);
        if let Some(previous) = self.ids.get(id).cloned() {
            self.diagnostics
                .push(Diagnostic::error(loc, format!("illegal homonymous element ID: {id}")));
            if previous.is_some() {
                self.diagnostics.push(Diagnostic::hint(previous, "previous use here"));
            }
        } else {
            self.ids.insert(id.to_string(), loc);
        }
    }

    fn required_attr(&mut self, n: Node<'_, '_>, name: &str) -> Option<String> {
        match n.attribute(name) {
            Some(v) => Some(v.to_string()),
            None => {
                self.error(n, format!("missing attribute '{name}' on <{}>", n.tag_name().name()));
                None
            }
        }
    }

    fn href(&mut self, n: Node<'_, '_>) -> Option<String> {
        match n.attribute((XLINK_NS, "href")) {
            Some(v) => Some(v.to_string()),
            None => {
                self.error(n, format!("missing attribute 'xlink:href' on <{}>", n.tag_name().name()));
                None
            }
        }
    }

    fn opt_int_attr(&mut self, n: Node<'_, '_>, name: &str) -> Option<i64> {
        let v = n.attribute(name)?;
        match v.trim().parse::<i64>() {
            Ok(i) => Some(i),
            Err(_) => {
                self.error(n, format!("illegal integer: {v}"));
                None
            }
        }
    }

    fn opt_bool_attr(&mut self, n: Node<'_, '_>, name: &str) -> Option<bool> {
        match n.attribute(name)? {
            "true" => Some(true),
            "false" => Some(false),
            other => {
                self.error(n, format!("unknown enum attribute value for '{name}': {other}"));
                None
            }
        }
    }

    fn unexpected(&mut self, child: Node<'_, '_>, parent: &str) {
        if child.is_element() {
            self.error(
                child,
                format!("unexpected element <{}> inside <{parent}>", child.tag_name().name()),
            );
        } else if child.is_text() && !child.text().unwrap_or("").trim().is_empty() {
            self.error(child, format!("unexpected text inside <{parent}>"));
        }
    }

    fn document(&mut self, root: Node<'_, '_>) -> Option<GxlDocument> {
        if !is_element(&root, "gxl") {
            self.error(
                root,
                format!("root element must be <gxl>, found <{}>", root.tag_name().name()),
            );
            return None;
        }
        let mut doc = GxlDocument {
            graphs: Vec::new(),
            location: self.loc(root),
        };
        for child in root.children() {
            if is_element(&child, "graph") {
                if let Some(g) = self.graph(child) {
                    doc.graphs.push(g);
                }
            } else {
                self.unexpected(child, "gxl");
            }
        }
        Some(doc)
    }

    fn graph(&mut self, n: Node<'_, '_>) -> Option<GxlGraph> {
        let id = self.required_attr(n, "id");
        if let Some(id) = &id {
            self.register_id(n, id);
        }
        let mut g = GxlGraph::new(id.clone().unwrap_or_default());
        g.location = self.loc(n);
        g.role = n.attribute("role").map(str::to_string);
        g.edgeids = self.opt_bool_attr(n, "edgeids").unwrap_or(false);
        g.hypergraph = self.opt_bool_attr(n, "hypergraph").unwrap_or(false);
        if let Some(mode) = n.attribute("edgemode") {
            match Edgemode::parse(mode) {
                Some(m) => g.edgemode = m,
                None => self.error(n, format!("unknown enum attribute value for 'edgemode': {mode}")),
            }
        }
        for child in n.children() {
            if is_element(&child, "type") {
                g.type_ref = self.type_ref(child, g.type_ref.is_some());
            } else if is_element(&child, "attr") {
                if let Some(a) = self.attr(child) {
                    g.attrs.push(a);
                }
            } else if is_element(&child, "node") {
                if let Some(p) = self.node(child) {
                    g.parts.push(GxlPart::Node(p));
                }
            } else if is_element(&child, "edge") {
                if let Some(p) = self.edge(child) {
                    g.parts.push(GxlPart::Edge(p));
                }
            } else if is_element(&child, "rel") {
                if let Some(p) = self.rel(child) {
                    g.parts.push(GxlPart::Rel(p));
                }
            } else {
                self.unexpected(child, "graph");
            }
        }
        id.map(|_| g)
    }

    fn type_ref(&mut self, n: Node<'_, '_>, duplicate: bool) -> Option<String> {
        if duplicate {
            self.error(n, "more than one <type> element");
        }
        self.href(n)
    }

    /// Shared content of node, edge and rel: type, attrs, nested graphs.
    /// Returns the children this routine did not consume.
    fn typed_content<'x, 'i>(
        &mut self,
        n: Node<'x, 'i>,
        type_ref: &mut Option<String>,
        attrs: &mut Vec<GxlAttr>,
        subgraphs: &mut Vec<GxlGraph>,
    ) -> Vec<Node<'x, 'i>> {
        let mut rest = Vec::new();
        for child in n.children() {
            if is_element(&child, "type") {
                *type_ref = self.type_ref(child, type_ref.is_some());
            } else if is_element(&child, "attr") {
                if let Some(a) = self.attr(child) {
                    attrs.push(a);
                }
            } else if is_element(&child, "graph") {
                if let Some(g) = self.graph(child) {
                    subgraphs.push(g);
                }
            } else {
                rest.push(child);
            }
        }
        rest
    }

    fn node(&mut self, n: Node<'_, '_>) -> Option<GxlNode> {
        let id = self.required_attr(n, "id")?;
        self.register_id(n, &id);
        let mut node = GxlNode::new(id);
        node.location = self.loc(n);
        let rest = self.typed_content(n, &mut node.type_ref, &mut node.attrs, &mut node.subgraphs);
        for child in rest {
            self.unexpected(child, "node");
        }
        Some(node)
    }

    fn edge(&mut self, n: Node<'_, '_>) -> Option<GxlEdge> {
        let from = self.required_attr(n, "from");
        let to = self.required_attr(n, "to");
        let mut edge = GxlEdge::new(from.clone().unwrap_or_default(), to.clone().unwrap_or_default());
        edge.location = self.loc(n);
        if let Some(id) = n.attribute("id") {
            self.register_id(n, id);
            edge.id = Some(id.to_string());
        }
        edge.fromorder = self.opt_int_attr(n, "fromorder");
        edge.toorder = self.opt_int_attr(n, "toorder");
        edge.isdirected = self.opt_bool_attr(n, "isdirected");
        let rest = self.typed_content(n, &mut edge.type_ref, &mut edge.attrs, &mut edge.subgraphs);
        for child in rest {
            self.unexpected(child, "edge");
        }
        (from.is_some() && to.is_some()).then_some(edge)
    }

    fn rel(&mut self, n: Node<'_, '_>) -> Option<GxlRel> {
        let mut rel = GxlRel {
            id: None,
            type_ref: None,
            isdirected: self.opt_bool_attr(n, "isdirected"),
            attrs: Vec::new(),
            subgraphs: Vec::new(),
            relends: Vec::new(),
            location: self.loc(n),
        };
        if let Some(id) = n.attribute("id") {
            self.register_id(n, id);
            rel.id = Some(id.to_string());
        }
        let rest = self.typed_content(n, &mut rel.type_ref, &mut rel.attrs, &mut rel.subgraphs);
        for child in rest {
            if is_element(&child, "relend") {
                if let Some(re) = self.relend(child) {
                    rel.relends.push(re);
                }
            } else {
                self.unexpected(child, "rel");
            }
        }
        Some(rel)
    }

    fn relend(&mut self, n: Node<'_, '_>) -> Option<GxlRelend> {
        let target = self.required_attr(n, "target")?;
        let direction = match n.attribute("direction") {
            None => None,
            Some(d) => match Direction::parse(d) {
                Some(d) => Some(d),
                None => {
                    self.error(n, format!("unknown enum attribute value for 'direction': {d}"));
                    None
                }
            },
        };
        let mut relend = GxlRelend {
            target,
            role: n.attribute("role").map(str::to_string),
            direction,
            startorder: self.opt_int_attr(n, "startorder"),
            endorder: self.opt_int_attr(n, "endorder"),
            attrs: Vec::new(),
            location: self.loc(n),
        };
        for child in n.children() {
            if is_element(&child, "attr") {
                if let Some(a) = self.attr(child) {
                    relend.attrs.push(a);
                }
            } else {
                self.unexpected(child, "relend");
            }
        }
        Some(relend)
    }

    fn attr(&mut self, n: Node<'_, '_>) -> Option<GxlAttr> {
        let name = self.required_attr(n, "name");
        let id = n.attribute("id").map(str::to_string);
        if let Some(id) = &id {
            self.register_id(n, id);
        }
        let mut nested = Vec::new();
        let mut value = None;
        for child in n.children() {
            if is_element(&child, "attr") {
                if let Some(a) = self.attr(child) {
                    nested.push(a);
                }
            } else if child.is_element() && is_value_tag(child.tag_name().name()) {
                if value.is_some() {
                    self.error(child, "attribute carries more than one value");
                }
                value = self.value(child);
            } else {
                self.unexpected(child, "attr");
            }
        }
        if value.is_none() && !n.children().any(|c| c.is_element() && is_value_tag(c.tag_name().name())) {
            self.error(n, "attribute without value");
        }
        Some(GxlAttr {
            id,
            name: name?,
            kind: n.attribute("kind").map(str::to_string),
            attrs: nested,
            value: value?,
            location: self.loc(n),
        })
    }

    fn value(&mut self, n: Node<'_, '_>) -> Option<GxlValue> {
        let tag = n.tag_name().name();
        match tag {
            "locator" => {
                for child in n.children() {
                    self.unexpected(child, "locator");
                }
                self.href(n).map(GxlValue::Locator)
            }
            "bool" => {
                let text = self.pcdata(n)?;
                match text.trim() {
                    "true" => Some(GxlValue::Bool(true)),
                    "false" => Some(GxlValue::Bool(false)),
                    _ => {
                        self.error(n, format!("illegal boolean: {text}"));
                        None
                    }
                }
            }
            "int" => {
                let text = self.pcdata(n)?;
                match text.trim().parse::<i64>() {
                    Ok(i) => Some(GxlValue::Int(i)),
                    Err(_) => {
                        self.error(n, format!("illegal integer: {text}"));
                        None
                    }
                }
            }
            "float" => {
                let text = self.pcdata(n)?;
                match parse_float(text.trim()) {
                    Some(f) => Some(GxlValue::Float(f)),
                    None => {
                        self.error(n, format!("illegal float: {text}"));
                        None
                    }
                }
            }
            "string" => self.pcdata(n).map(GxlValue::Str),
            "enum" => self.pcdata(n).map(GxlValue::Enum),
            "seq" | "set" | "bag" | "tup" => {
                let mut elems = Vec::new();
                for child in n.children() {
                    if child.is_element() && is_value_tag(child.tag_name().name()) {
                        if let Some(v) = self.value(child) {
                            elems.push(v);
                        }
                    } else {
                        self.unexpected(child, tag);
                    }
                }
                Some(match tag {
                    "seq" => GxlValue::Seq(elems),
                    "set" => GxlValue::Set(elems),
                    "bag" => GxlValue::Bag(elems),
                    _ => GxlValue::Tup(elems),
                })
            }
            _ => unreachable!("checked by is_value_tag"),
        }
    }

    /// Character content of a leaf value element.
    fn pcdata(&mut self, n: Node<'_, '_>) -> Option<String> {
        let mut text = String::new();
        for child in n.children() {
            if child.is_text() {
                text.push_str(child.text().unwrap_or(""));
            } else if child.is_element() {
                self.error(child, format!("unexpected element <{}> inside <{}>", child.tag_name().name(), n.tag_name().name()));
                return None;
            }
        }
        Some(text)
    }
}

fn is_value_tag(name: &str) -> bool {
    matches!(
        name,
        "locator" | "bool" | "int" | "float" | "string" | "enum" | "seq" | "set" | "bag" | "tup"
    )
}

pub(crate) fn parse_float(text: &str) -> Option<f64> {
    match text {
        "Infinity" | "+Infinity" => Some(f64::INFINITY),
        "-Infinity" => Some(f64::NEG_INFINITY),
        _ => text.parse::<f64>().ok(),
    }
}

/// Checks that every `from`/`to`/`target` names a part of the document and
/// that parts do not depend on each other cyclically.
fn check_references(doc: &GxlDocument, diags: &mut Vec<Diagnostic>) {
    let mut parts: HashMap<&str, &GxlPart> = HashMap::new();
    let mut all: Vec<&GxlPart> = Vec::new();
    fn collect<'a>(g: &'a GxlGraph, parts: &mut HashMap<&'a str, &'a GxlPart>, all: &mut Vec<&'a GxlPart>) {
        for p in &g.parts {
            if let Some(id) = p.id() {
                parts.insert(id, p);
            }
            all.push(p);
            for sg in p.subgraphs() {
                collect(sg, parts, all);
            }
        }
    }
    for g in &doc.graphs {
        collect(g, &mut parts, &mut all);
    }

    let mut unresolved = false;
    for p in &all {
        for target in references(p) {
            if !parts.contains_key(target) {
                diags.push(Diagnostic::error(p.location().cloned(), format!("undefined IDREF: {target}")));
                unresolved = true;
            }
        }
    }
    if unresolved {
        return;
    }

    // Depth-first search over "is needed to construct" dependencies.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let key = |p: &GxlPart| p as *const GxlPart;
    let mut marks: HashMap<*const GxlPart, Mark> = HashMap::new();
    let deps = |p: &'_ GxlPart| -> Vec<*const GxlPart> {
        let mut out: Vec<*const GxlPart> = references(p).map(|id| key(parts[id])).collect();
        for sg in p.subgraphs() {
            out.extend(sg.parts.iter().map(key));
        }
        out
    };
    let by_key: HashMap<*const GxlPart, &GxlPart> = all.iter().map(|p| (key(p), *p)).collect();
    let mut reported: HashSet<*const GxlPart> = HashSet::new();
    for start in &all {
        if marks.contains_key(&key(start)) {
            continue;
        }
        let mut stack: Vec<(*const GxlPart, Vec<*const GxlPart>)> = vec![(key(start), deps(start))];
        marks.insert(key(start), Mark::Active);
        while let Some((current, pending)) = stack.last_mut() {
            match pending.pop() {
                Some(next) => match marks.get(&next) {
                    Some(Mark::Done) => {}
                    Some(Mark::Active) => {
                        if reported.insert(next) {
                            diags.push(Diagnostic::error(
                                by_key[&next].location().cloned(),
                                "cyclic cross-reference",
                            ));
                        }
                    }
                    None => {
                        marks.insert(next, Mark::Active);
                        let d = deps(by_key[&next]);
                        stack.push((next, d));
                    }
                },
                None => {
                    marks.insert(*current, Mark::Done);
                    stack.pop();
                }
            }
        }
    }
}

fn references(p: &GxlPart) -> Box<dyn Iterator<Item = &str> + '_> {
    match p {
        GxlPart::Node(_) => Box::new(std::iter::empty()),
        GxlPart::Edge(e) => Box::new([e.from.as_str(), e.to.as_str()].into_iter()),
        GxlPart::Rel(r) => Box::new(r.relends.iter().map(|re| re.target.as_str())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(out: &ParseOutcome) -> Vec<String> {
        out.diagnostics.iter().filter(|d| d.is_error()).map(|d| d.text.clone()).collect()
    }

    #[test]
    fn minimal_document() {
        let out = parse_gxl(br#"<gxl><graph id="g" edgemode="directed"/></gxl>"#);
        let doc = out.document.expect("parses");
        assert_eq!(doc.graphs.len(), 1);
        assert_eq!(doc.graphs[0].id, "g");
        assert_eq!(doc.graphs[0].edgemode, Edgemode::Directed);
        assert!(doc.graphs[0].parts.is_empty());
    }

    #[test]
    fn position_attribute_on_edge() {
        let src = br#"<gxl><graph id="g">
            <node id="a"/><node id="b"/>
            <edge from="a" to="b"><attr name="position"><int>0</int></attr></edge>
        </graph></gxl>"#;
        let doc = parse_gxl(src).document.unwrap();
        let edge = doc.graphs[0].edges().next().unwrap();
        assert_eq!(find_attr(&edge.attrs, "position"), Some(&GxlValue::Int(0)));
    }

    #[test]
    fn undefined_idref_is_located_at_the_edge() {
        let src = "<gxl><graph id=\"g\">\n  <node id=\"a\"/>\n  <edge from=\"nosuch\" to=\"a\"/>\n</graph></gxl>";
        let out = parse_gxl_with_id(src.as_bytes(), "t.gxl");
        assert!(out.document.is_none());
        let d = out.diagnostics.iter().find(|d| d.is_error()).unwrap();
        assert_eq!(d.text, "undefined IDREF: nosuch");
        assert_eq!(d.location, Some(SourceLocation::new("t.gxl", 3, 3)));
    }

    #[test]
    fn forward_references_resolve() {
        let src = br#"<gxl><graph id="g"><edge from="a" to="b"/><node id="a"/><node id="b"/></graph></gxl>"#;
        assert!(parse_gxl(src).document.is_some());
    }

    #[test]
    fn duplicate_ids_are_rejected_with_hint() {
        let src = br#"<gxl><graph id="g"><node id="a"/><node id="a"/></graph></gxl>"#;
        let out = parse_gxl(src);
        assert!(out.document.is_none());
        assert_eq!(errors(&out), vec!["illegal homonymous element ID: a"]);
        assert!(out.diagnostics.iter().any(|d| d.text == "previous use here"));
    }

    #[test]
    fn graph_and_node_ids_share_one_namespace() {
        let src = br#"<gxl><graph id="x"><node id="x"/></graph></gxl>"#;
        assert!(parse_gxl(src).document.is_none());
    }

    #[test]
    fn malformed_values() {
        for (src, msg) in [
            ("<int>1x</int>", "illegal integer: 1x"),
            ("<float>abc</float>", "illegal float: abc"),
            ("<bool>yes</bool>", "illegal boolean: yes"),
        ] {
            let doc = format!(r#"<gxl><graph id="g"><attr name="v">{src}</attr></graph></gxl>"#);
            let out = parse_gxl(doc.as_bytes());
            assert!(out.document.is_none(), "{src}");
            assert_eq!(errors(&out), vec![msg.to_string()]);
        }
    }

    #[test]
    fn unknown_enum_attribute_value() {
        let out = parse_gxl(br#"<gxl><graph id="g" edgemode="sideways"/></gxl>"#);
        assert!(out.document.is_none());
        assert!(errors(&out)[0].contains("sideways"));
    }

    #[test]
    fn fromorder_must_be_an_integer() {
        let src = br#"<gxl><graph id="g"><node id="a"/><edge from="a" to="a" fromorder="x"/></graph></gxl>"#;
        let out = parse_gxl(src);
        assert_eq!(errors(&out), vec!["illegal integer: x"]);
    }

    #[test]
    fn self_referential_edge_is_cyclic() {
        let src = br#"<gxl><graph id="g"><node id="a"/><edge id="e" from="e" to="a"/></graph></gxl>"#;
        let out = parse_gxl(src);
        assert_eq!(errors(&out), vec!["cyclic cross-reference"]);
    }

    #[test]
    fn edge_inside_its_own_source_node_is_cyclic() {
        let src = br#"<gxl><graph id="g"><node id="a"><graph id="sub"><edge from="a" to="a"/></graph></node></graph></gxl>"#;
        let out = parse_gxl(src);
        assert_eq!(errors(&out), vec!["cyclic cross-reference"]);
    }

    #[test]
    fn edges_may_reference_edges() {
        let src = br#"<gxl><graph id="g"><node id="a"/><edge id="e1" from="a" to="a"/><edge from="e1" to="a"/></graph></gxl>"#;
        assert!(parse_gxl(src).document.is_some());
    }

    #[test]
    fn xlink_hrefs_and_doctype() {
        let src = br##"<?xml version="1.0"?>
<!DOCTYPE gxl SYSTEM "http://www.gupro.de/GXL/gxl-1.0.dtd">
<gxl xmlns:xlink="http://www.w3.org/1999/xlink">
  <graph id="g">
    <type xlink:href="#Firm"/>
    <node id="n"><attr name="l"><locator xlink:href="http://x/y"/></attr></node>
  </graph>
</gxl>"##;
        let out = parse_gxl(src);
        let doc = out.document.unwrap_or_else(|| panic!("{:?}", out.diagnostics));
        assert_eq!(doc.graphs[0].type_ref.as_deref(), Some("#Firm"));
        let node = doc.graphs[0].nodes().next().unwrap();
        assert_eq!(node.attrs[0].value, GxlValue::Locator("http://x/y".into()));
        assert_eq!(node.location.as_ref().unwrap().line, 6);
        assert_eq!(node.location.as_ref().unwrap().column, 5);
    }

    #[test]
    fn malformed_xml_is_reported() {
        let out = parse_gxl(b"<gxl><graph id='g'></gxl>");
        assert!(out.document.is_none());
        assert!(errors(&out)[0].starts_with("malformed XML"));
    }

    #[test]
    fn nested_aggregates() {
        let src = br#"<gxl><graph id="g"><attr name="a"><seq><int>1</int><tup><bool>true</bool><string> s </string></tup><set/></seq></attr></graph></gxl>"#;
        let doc = parse_gxl(src).document.unwrap();
        assert_eq!(
            doc.graphs[0].attrs[0].value,
            GxlValue::Seq(vec![
                GxlValue::Int(1),
                GxlValue::Tup(vec![GxlValue::Bool(true), GxlValue::Str(" s ".into())]),
                GxlValue::Set(vec![]),
            ])
        );
    }
}
