//! GEXF 1.2draft export and import.
//!
//! Node roles, aliases and edge kinds travel as GEXF attributes so an
//! exported graph can be read back without loss of names or relations.

use std::collections::{BTreeMap, HashMap};

use quick_xml::events::{BytesDecl, BytesEnd, BytesStart, BytesText, Event};
use quick_xml::{Reader, Writer};

use super::CorpusError;
use crate::community::Partition;
use crate::graph::{
    Attribution, EdgeKind, NodeId, PatternNode, TaxonomyGraph, TaxonomyNode, Version,
};

const NAMESPACE: &str = "http://www.gexf.net/1.2draft";
const DESCRIPTION_PREFIX: &str = "darkgraph taxonomy graph version ";

const NODE_ATTRS: &[(&str, &str, &str)] = &[
    ("0", "role", "string"),
    ("1", "canonical_name", "string"),
    ("2", "community", "integer"),
    ("3", "in_degree", "integer"),
    ("4", "aliases", "string"),
    ("5", "definition", "string"),
    ("6", "tags", "string"),
    ("7", "citation_key", "string"),
    ("8", "domain", "string"),
];
const EDGE_ATTRS: &[(&str, &str, &str)] = &[("0", "kind", "string"), ("1", "rationale", "string")];

fn attr_id(table: &[(&'static str, &'static str, &'static str)], title: &str) -> &'static str {
    table
        .iter()
        .find(|(_, t, _)| *t == title)
        .map(|(id, _, _)| *id)
        .expect("attribute declared")
}

struct XmlOut(Writer<Vec<u8>>);

impl XmlOut {
    fn event(&mut self, event: Event<'_>) {
        self.0.write_event(event).expect("writing to memory cannot fail");
    }

    fn open(&mut self, name: &str, attrs: &[(&str, &str)]) {
        let start = BytesStart::new(name).with_attributes(attrs.iter().copied());
        self.event(Event::Start(start));
    }

    fn empty(&mut self, name: &str, attrs: &[(&str, &str)]) {
        let start = BytesStart::new(name).with_attributes(attrs.iter().copied());
        self.event(Event::Empty(start));
    }

    fn close(&mut self, name: &str) {
        self.event(Event::End(BytesEnd::new(name)));
    }

    fn text_element(&mut self, name: &str, text: &str) {
        self.open(name, &[]);
        self.event(Event::Text(BytesText::new(text)));
        self.close(name);
    }

    fn attvalues(&mut self, values: &[(&str, String)]) {
        if values.is_empty() {
            return;
        }
        self.open("attvalues", &[]);
        for (id, value) in values {
            self.empty("attvalue", &[("for", id), ("value", value)]);
        }
        self.close("attvalues");
    }
}

pub(super) fn export(graph: &TaxonomyGraph, communities: Option<&Partition>) -> String {
    let mut out = XmlOut(Writer::new_with_indent(Vec::new(), b' ', 2));
    out.event(Event::Decl(BytesDecl::new("1.0", Some("UTF-8"), None)));
    out.open("gexf", &[("xmlns", NAMESPACE), ("version", "1.2")]);
    out.open("meta", &[]);
    out.text_element("creator", "darkgraph");
    out.text_element(
        "description",
        &format!("{DESCRIPTION_PREFIX}{}", graph.version()),
    );
    out.close("meta");
    out.open("graph", &[("mode", "static"), ("defaultedgetype", "directed")]);
    for (class, table) in [("node", NODE_ATTRS), ("edge", EDGE_ATTRS)] {
        out.open("attributes", &[("class", class)]);
        for (id, title, ty) in table {
            out.empty("attribute", &[("id", id), ("title", title), ("type", ty)]);
        }
        out.close("attributes");
    }

    let mut in_degree: BTreeMap<&NodeId, usize> = BTreeMap::new();
    for edge in graph.edges() {
        *in_degree.entry(&edge.dst).or_default() += 1;
    }
    let community_attr = |id: &NodeId, values: &mut Vec<(&str, String)>| {
        if let Some(c) = communities.and_then(|p| p.assignment.get(id)) {
            values.push((attr_id(NODE_ATTRS, "community"), c.to_string()));
        }
    };
    let na = |title| attr_id(NODE_ATTRS, title);

    out.open("nodes", &[]);
    for taxonomy in graph.taxonomies() {
        let mut values = vec![
            (na("role"), "taxonomy".to_owned()),
            (na("canonical_name"), taxonomy.label.clone()),
        ];
        community_attr(&taxonomy.id, &mut values);
        values.push((
            na("in_degree"),
            in_degree.get(&taxonomy.id).copied().unwrap_or(0).to_string(),
        ));
        values.push((na("citation_key"), taxonomy.citation_key.clone()));
        values.push((na("domain"), taxonomy.domain.clone()));
        out.open("node", &[("id", taxonomy.id.as_str()), ("label", &taxonomy.label)]);
        out.attvalues(&values);
        out.close("node");
    }
    for pattern in graph.patterns() {
        let mut values = vec![
            (na("role"), "pattern".to_owned()),
            (na("canonical_name"), pattern.canonical_name.clone()),
        ];
        community_attr(&pattern.id, &mut values);
        values.push((
            na("in_degree"),
            in_degree.get(&pattern.id).copied().unwrap_or(0).to_string(),
        ));
        values.push((
            na("aliases"),
            serde_json::to_string(&pattern.aliases).expect("aliases serialize"),
        ));
        values.push((na("definition"), pattern.definition.clone()));
        values.push((
            na("tags"),
            pattern.tags.iter().cloned().collect::<Vec<_>>().join(";"),
        ));
        out.open(
            "node",
            &[("id", pattern.id.as_str()), ("label", &pattern.canonical_name)],
        );
        out.attvalues(&values);
        out.close("node");
    }
    out.close("nodes");

    out.open("edges", &[]);
    for edge in graph.edges() {
        out.open(
            "edge",
            &[
                ("id", edge.id.as_str()),
                ("source", edge.src.as_str()),
                ("target", edge.dst.as_str()),
                ("type", "directed"),
            ],
        );
        out.attvalues(&[
            (attr_id(EDGE_ATTRS, "kind"), edge.kind.as_str().to_owned()),
            (attr_id(EDGE_ATTRS, "rationale"), edge.rationale.clone()),
        ]);
        out.close("edge");
    }
    out.close("edges");
    out.close("graph");
    out.close("gexf");
    let mut text = String::from_utf8(out.0.into_inner()).expect("xml output is utf-8");
    text.push('\n');
    text
}

/// Result of reading a GEXF document.
#[derive(Debug, Clone)]
pub struct GexfImport {
    pub graph: TaxonomyGraph,
    /// Recoverable oddities, such as edges without a kind attribute.
    pub warnings: Vec<String>,
}

#[derive(Default)]
struct RawNode {
    id: String,
    label: Option<String>,
    values: HashMap<String, String>,
}

#[derive(Default)]
struct RawEdge {
    source: String,
    target: String,
    values: HashMap<String, String>,
}

enum Open {
    Node(RawNode),
    Edge(RawEdge),
}

fn syntax(reader: &Reader<&[u8]>, message: impl Into<String>) -> CorpusError {
    let (line, column) = position(reader);
    CorpusError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn position(reader: &Reader<&[u8]>) -> (usize, usize) {
    let offset = usize::try_from(reader.buffer_position()).unwrap_or(usize::MAX);
    let consumed = &reader.get_ref()[..offset.min(reader.get_ref().len())];
    let line = consumed.iter().filter(|&&b| b == b'\n').count() + 1;
    let column = consumed.iter().rev().take_while(|&&b| b != b'\n').count() + 1;
    (line, column)
}

fn attributes(
    reader: &Reader<&[u8]>,
    element: &BytesStart<'_>,
) -> Result<HashMap<String, String>, CorpusError> {
    let mut out = HashMap::new();
    for attr in element.attributes() {
        let attr = attr.map_err(|e| syntax(reader, e.to_string()))?;
        let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
        let value = attr
            .unescape_value()
            .map_err(|e| syntax(reader, e.to_string()))?
            .into_owned();
        out.insert(key, value);
    }
    Ok(out)
}

/// Read a GEXF document written by [`super::export_graph`] or a structurally
/// equivalent tool.
pub fn import_gexf(text: &str) -> Result<GexfImport, CorpusError> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);

    let mut titles: HashMap<(String, String), String> = HashMap::new();
    let mut attr_class = String::new();
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut open: Option<Open> = None;
    let mut in_description = false;
    let mut version = None;
    let mut saw_root = false;

    loop {
        let event = reader
            .read_event()
            .map_err(|e| syntax(&reader, e.to_string()))?;
        let (element, is_empty) = match &event {
            Event::Start(e) => (Some(e.clone()), false),
            Event::Empty(e) => (Some(e.clone()), true),
            Event::End(e) => {
                match e.name().as_ref() {
                    b"node" => {
                        if let Some(Open::Node(n)) = open.take() {
                            nodes.push(n);
                        }
                    }
                    b"edge" => {
                        if let Some(Open::Edge(e)) = open.take() {
                            edges.push(e);
                        }
                    }
                    b"description" => in_description = false,
                    _ => {}
                }
                continue;
            }
            Event::Text(t) => {
                if in_description {
                    let body = t.unescape().map_err(|e| syntax(&reader, e.to_string()))?;
                    version = body
                        .trim()
                        .strip_prefix(DESCRIPTION_PREFIX)
                        .and_then(parse_version);
                }
                continue;
            }
            Event::Eof => break,
            _ => continue,
        };
        let Some(element) = element else { continue };
        let attrs = attributes(&reader, &element)?;
        match element.name().as_ref() {
            b"gexf" => saw_root = true,
            b"description" if !is_empty => in_description = true,
            b"attributes" => {
                attr_class = attrs.get("class").cloned().unwrap_or_else(|| "node".into());
            }
            b"attribute" => {
                let (Some(id), Some(title)) = (attrs.get("id"), attrs.get("title")) else {
                    return Err(syntax(&reader, "attribute declaration needs id and title"));
                };
                titles.insert((attr_class.clone(), id.clone()), title.clone());
            }
            b"node" => {
                let id = attrs
                    .get("id")
                    .cloned()
                    .ok_or_else(|| syntax(&reader, "node without id"))?;
                let node = RawNode {
                    label: attrs.get("label").cloned(),
                    id,
                    values: HashMap::new(),
                };
                if node.label.is_none() {
                    return Err(syntax(
                        &reader,
                        format!("node `{}` has no label (name) attribute", node.id),
                    ));
                }
                if is_empty {
                    nodes.push(node);
                } else {
                    open = Some(Open::Node(node));
                }
            }
            b"edge" => {
                let (Some(source), Some(target)) = (attrs.get("source"), attrs.get("target"))
                else {
                    return Err(syntax(&reader, "edge needs source and target"));
                };
                let edge = RawEdge {
                    source: source.clone(),
                    target: target.clone(),
                    values: HashMap::new(),
                };
                if is_empty {
                    edges.push(edge);
                } else {
                    open = Some(Open::Edge(edge));
                }
            }
            b"attvalue" => {
                let (Some(key), Some(value)) = (attrs.get("for"), attrs.get("value")) else {
                    return Err(syntax(&reader, "attvalue needs for and value"));
                };
                match open.as_mut() {
                    Some(Open::Node(n)) => {
                        let title = titles
                            .get(&("node".to_owned(), key.clone()))
                            .cloned()
                            .unwrap_or_else(|| key.clone());
                        n.values.insert(title, value.clone());
                    }
                    Some(Open::Edge(e)) => {
                        let title = titles
                            .get(&("edge".to_owned(), key.clone()))
                            .cloned()
                            .unwrap_or_else(|| key.clone());
                        e.values.insert(title, value.clone());
                    }
                    None => {}
                }
            }
            _ => {}
        }
    }
    if !saw_root {
        return Err(CorpusError::Syntax {
            line: 1,
            column: 1,
            message: "missing <gexf> root element".into(),
        });
    }
    build(nodes, edges, version)
}

fn parse_version(text: &str) -> Option<Version> {
    let (major, minor) = text.split_once('.')?;
    Some(Version::new(major.parse().ok()?, minor.parse().ok()?))
}

fn build(
    nodes: Vec<RawNode>,
    edges: Vec<RawEdge>,
    version: Option<Version>,
) -> Result<GexfImport, CorpusError> {
    let mut warnings = Vec::new();
    let mut graph = TaxonomyGraph::new();
    let (taxonomies, patterns): (Vec<_>, Vec<_>) = nodes
        .into_iter()
        .partition(|n| n.values.get("role").map(String::as_str) == Some("taxonomy"));

    for raw in patterns {
        let label = raw.label.unwrap_or_default();
        let aliases: Vec<Attribution> = match raw.values.get("aliases") {
            Some(json) => serde_json::from_str(json).map_err(|e| CorpusError::Syntax {
                line: 0,
                column: 0,
                message: format!("aliases of node `{}`: {e}", raw.id),
            })?,
            None => {
                warnings.push(format!(
                    "node `{}` has no aliases; attributing it to the import",
                    raw.id
                ));
                vec![Attribution::new("gexf-import", label.clone(), "GEXF")]
            }
        };
        let mut node = PatternNode::new(label, aliases)
            .with_definition(raw.values.get("definition").cloned().unwrap_or_default())
            .with_tags(
                raw.values
                    .get("tags")
                    .map(|t| t.split(';').filter(|s| !s.is_empty()).map(str::to_owned).collect())
                    .unwrap_or_else(Vec::new),
            );
        node.id = NodeId::new(raw.id);
        graph = graph.add_node(node)?;
    }
    for raw in taxonomies {
        let label = raw.label.unwrap_or_default();
        let citation_key = raw
            .values
            .get("citation_key")
            .cloned()
            .unwrap_or_else(|| label.replace(' ', ""));
        let mut node = TaxonomyNode::new(
            label,
            citation_key,
            raw.values.get("domain").cloned().unwrap_or_default(),
        );
        node.id = NodeId::new(raw.id);
        graph = graph.add_node(node)?;
    }
    for raw in edges {
        let kind = match raw.values.get("kind") {
            Some(text) => EdgeKind::parse(text).ok_or_else(|| CorpusError::Syntax {
                line: 0,
                column: 0,
                message: format!("unknown edge kind `{text}`"),
            })?,
            None => {
                let message = format!(
                    "edge {} -> {} has no kind attribute; assuming employs",
                    raw.source, raw.target
                );
                log::warn!("{message}");
                warnings.push(message);
                EdgeKind::Employs
            }
        };
        let rationale = raw.values.get("rationale").cloned().unwrap_or_default();
        graph = graph.add_edge(
            kind,
            &NodeId::new(raw.source),
            &NodeId::new(raw.target),
            rationale,
        )?;
    }
    if let Some(version) = version {
        graph = graph.with_version(version);
    }
    Ok(GexfImport { graph, warnings })
}
