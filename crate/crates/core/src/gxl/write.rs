use std::fmt::Write as _;

use super::*;

/// Canonical XML rendering of `doc` as UTF-8 bytes.
pub fn serialize_gxl(doc: &GxlDocument) -> Vec<u8> {
    serialize_gxl_string(doc).into_bytes()
}

/// Canonical XML rendering of `doc`: fixed attribute and child order,
/// two-space indentation, values inline.
pub fn serialize_gxl_string(doc: &GxlDocument) -> String {
    let mut w = Writer { out: String::new() };
    w.out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    if doc.graphs.is_empty() {
        let _ = writeln!(w.out, "<gxl xmlns:xlink=\"{XLINK_NS}\"/>");
        return w.out;
    }
    let _ = writeln!(w.out, "<gxl xmlns:xlink=\"{XLINK_NS}\">");
    for g in &doc.graphs {
        w.graph(g, 1);
    }
    w.out.push_str("</gxl>\n");
    w.out
}

struct Writer {
    out: String,
}

struct Attrs(Vec<(&'static str, String)>);

impl Attrs {
    fn new() -> Self {
        Attrs(Vec::new())
    }

    fn add(&mut self, name: &'static str, value: impl Into<String>) -> &mut Self {
        self.0.push((name, value.into()));
        self
    }

    fn opt<T: ToString>(&mut self, name: &'static str, value: Option<T>) -> &mut Self {
        if let Some(v) = value {
            self.0.push((name, v.to_string()));
        }
        self
    }
}

impl Writer {
    fn indent(&mut self, depth: usize) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
    }

    fn start(&mut self, depth: usize, tag: &str, attrs: &Attrs, empty: bool) {
        self.indent(depth);
        self.out.push('<');
        self.out.push_str(tag);
        for (name, value) in &attrs.0 {
            let _ = write!(self.out, " {name}=\"{}\"", escape(value, true));
        }
        self.out.push_str(if empty { "/>\n" } else { ">\n" });
    }

    fn end(&mut self, depth: usize, tag: &str) {
        self.indent(depth);
        let _ = writeln!(self.out, "</{tag}>");
    }

    fn type_ref(&mut self, t: &Option<String>, depth: usize) {
        if let Some(href) = t {
            self.indent(depth);
            let _ = writeln!(self.out, "<type xlink:href=\"{}\"/>", escape(href, true));
        }
    }

    fn graph(&mut self, g: &GxlGraph, depth: usize) {
        let mut a = Attrs::new();
        a.add("id", g.id.clone()).opt("role", g.role.as_ref());
        if g.edgeids {
            a.add("edgeids", "true");
        }
        if g.hypergraph {
            a.add("hypergraph", "true");
        }
        a.add("edgemode", g.edgemode.as_str());
        let empty = g.type_ref.is_none() && g.attrs.is_empty() && g.parts.is_empty();
        self.start(depth, "graph", &a, empty);
        if empty {
            return;
        }
        self.type_ref(&g.type_ref, depth + 1);
        self.attrs(&g.attrs, depth + 1);
        for p in &g.parts {
            match p {
                GxlPart::Node(n) => self.node(n, depth + 1),
                GxlPart::Edge(e) => self.edge(e, depth + 1),
                GxlPart::Rel(r) => self.rel(r, depth + 1),
            }
        }
        self.end(depth, "graph");
    }

    fn typed_body(&mut self, tag: &str, attrs: &Attrs, t: &Option<String>, a: &[GxlAttr], sub: &[GxlGraph], depth: usize) {
        let empty = t.is_none() && a.is_empty() && sub.is_empty();
        self.start(depth, tag, attrs, empty);
        if empty {
            return;
        }
        self.type_ref(t, depth + 1);
        self.attrs(a, depth + 1);
        for g in sub {
            self.graph(g, depth + 1);
        }
        self.end(depth, tag);
    }

    fn node(&mut self, n: &GxlNode, depth: usize) {
        let mut a = Attrs::new();
        a.add("id", n.id.clone());
        self.typed_body("node", &a, &n.type_ref, &n.attrs, &n.subgraphs, depth);
    }

    fn edge(&mut self, e: &GxlEdge, depth: usize) {
        let mut a = Attrs::new();
        a.opt("id", e.id.as_ref())
            .add("from", e.from.clone())
            .add("to", e.to.clone())
            .opt("fromorder", e.fromorder)
            .opt("toorder", e.toorder)
            .opt("isdirected", e.isdirected);
        self.typed_body("edge", &a, &e.type_ref, &e.attrs, &e.subgraphs, depth);
    }

    fn rel(&mut self, r: &GxlRel, depth: usize) {
        let mut a = Attrs::new();
        a.opt("id", r.id.as_ref()).opt("isdirected", r.isdirected);
        let empty = r.type_ref.is_none() && r.attrs.is_empty() && r.subgraphs.is_empty() && r.relends.is_empty();
        self.start(depth, "rel", &a, empty);
        if empty {
            return;
        }
        self.type_ref(&r.type_ref, depth + 1);
        self.attrs(&r.attrs, depth + 1);
        for g in &r.subgraphs {
            self.graph(g, depth + 1);
        }
        for re in &r.relends {
            let mut a = Attrs::new();
            a.add("target", re.target.clone())
                .opt("role", re.role.as_ref())
                .opt("direction", re.direction.map(Direction::as_str))
                .opt("startorder", re.startorder)
                .opt("endorder", re.endorder);
            let empty = re.attrs.is_empty();
            self.start(depth + 1, "relend", &a, empty);
            if !empty {
                self.attrs(&re.attrs, depth + 2);
                self.end(depth + 1, "relend");
            }
        }
        self.end(depth, "rel");
    }

    fn attrs(&mut self, attrs: &[GxlAttr], depth: usize) {
        for attr in attrs {
            let mut a = Attrs::new();
            a.opt("id", attr.id.as_ref())
                .add("name", attr.name.clone())
                .opt("kind", attr.kind.as_ref());
            if attr.attrs.is_empty() {
                self.indent(depth);
                self.out.push_str("<attr");
                for (name, value) in &a.0 {
                    let _ = write!(self.out, " {name}=\"{}\"", escape(value, true));
                }
                self.out.push('>');
                self.value(&attr.value);
                self.out.push_str("</attr>\n");
            } else {
                self.start(depth, "attr", &a, false);
                self.attrs(&attr.attrs, depth + 1);
                self.indent(depth + 1);
                self.value(&attr.value);
                self.out.push('\n');
                self.end(depth, "attr");
            }
        }
    }

    fn value(&mut self, v: &GxlValue) {
        let tag = v.tag();
        let text = match v {
            GxlValue::Locator(href) => {
                let _ = write!(self.out, "<locator xlink:href=\"{}\"/>", escape(href, true));
                return;
            }
            GxlValue::Seq(items) | GxlValue::Set(items) | GxlValue::Bag(items) | GxlValue::Tup(items) => {
                if items.is_empty() {
                    let _ = write!(self.out, "<{tag}/>");
                } else {
                    let _ = write!(self.out, "<{tag}>");
                    for item in items {
                        self.value(item);
                    }
                    let _ = write!(self.out, "</{tag}>");
                }
                return;
            }
            GxlValue::Bool(b) => b.to_string(),
            GxlValue::Int(i) => i.to_string(),
            GxlValue::Float(f) => format_float(*f),
            GxlValue::Str(s) | GxlValue::Enum(s) => s.clone(),
        };
        if text.is_empty() {
            let _ = write!(self.out, "<{tag}/>");
        } else {
            let _ = write!(self.out, "<{tag}>{}</{tag}>", escape(&text, false));
        }
    }
}

/// Float text that parses back to the identical value.
pub(crate) fn format_float(f: f64) -> String {
    if f.is_nan() {
        "NaN".into()
    } else if f == f64::INFINITY {
        "Infinity".into()
    } else if f == f64::NEG_INFINITY {
        "-Infinity".into()
    } else {
        format!("{f:?}")
    }
}

fn escape(s: &str, in_attribute: bool) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\r' => out.push_str("&#13;"),
            '\t' if in_attribute => out.push_str("&#9;"),
            '\n' if in_attribute => out.push_str("&#10;"),
            _ => out.push(c),
        }
    }
    out
}
