//! Corpus documents (`.dpcorpus.json`) and interchange exports.
//!
//! A corpus document lists taxonomies, the patterns they define and the
//! relations between them. Edge declarations refer to taxonomies by key or
//! label and to patterns by name.

mod dot;
mod gexf;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::Partition;
use crate::graph::{Attribution, EdgeKind, GraphError, NodeId, PatternNode, TaxonomyGraph, TaxonomyNode};

pub use gexf::{import_gexf, GexfImport};

pub const SCHEMA_VERSION: u32 = 1;
pub const CORPUS_EXTENSION: &str = ".dpcorpus.json";

const SEED_CORPUS: &str = include_str!("../../data/seed.dpcorpus.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusDocument {
    pub schema_version: u32,
    #[serde(default)]
    pub taxonomies: Vec<TaxonomyDecl>,
    #[serde(default)]
    pub patterns: Vec<PatternDecl>,
    #[serde(default)]
    pub edges: Vec<EdgeDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxonomyDecl {
    /// Citation key, e.g. `Brignull2010`.
    pub key: String,
    /// First author and year, e.g. `Brignull 2010`.
    pub label: String,
    #[serde(default)]
    pub domain: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternDecl {
    pub name: String,
    pub sources: Vec<SourceDecl>,
    #[serde(default)]
    pub definition: String,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceDecl {
    /// Key of a declared taxonomy.
    pub taxonomy: String,
    pub original_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDecl {
    pub kind: EdgeKind,
    pub from: String,
    pub to: String,
    #[serde(default)]
    pub rationale: String,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    UnsupportedSchema(u32),
    #[error("unknown reference `{name}` in {context}")]
    UnknownReference { name: String, context: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl CorpusError {
    fn syntax(err: serde_json::Error) -> Self {
        CorpusError::Syntax {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

impl CorpusDocument {
    pub fn empty() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            taxonomies: Vec::new(),
            patterns: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CorpusError> {
        serde_json::from_str(text).map_err(CorpusError::syntax)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("corpus serialization cannot fail");
        out.push('\n');
        out
    }

    /// Build the version 1.0 graph. Every declaration becomes exactly one
    /// node or edge.
    pub fn to_graph(&self) -> Result<TaxonomyGraph, CorpusError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CorpusError::UnsupportedSchema(self.schema_version));
        }
        let mut graph = TaxonomyGraph::new();
        let mut by_key: HashMap<&str, &TaxonomyDecl> = HashMap::new();
        let mut taxonomy_refs: HashMap<String, NodeId> = HashMap::new();
        for decl in &self.taxonomies {
            let node = TaxonomyNode::new(&decl.label, &decl.key, &decl.domain);
            taxonomy_refs.insert(decl.key.to_lowercase(), node.id.clone());
            taxonomy_refs.insert(decl.label.to_lowercase(), node.id.clone());
            by_key.insert(decl.key.as_str(), decl);
            graph = graph.add_node(node)?;
        }
        for decl in &self.patterns {
            let mut aliases = Vec::with_capacity(decl.sources.len());
            for source in &decl.sources {
                let taxonomy =
                    by_key
                        .get(source.taxonomy.as_str())
                        .ok_or_else(|| CorpusError::UnknownReference {
                            name: source.taxonomy.clone(),
                            context: format!("sources of pattern `{}`", decl.name),
                        })?;
                aliases.push(Attribution::new(
                    NodeId::slug(&taxonomy.label),
                    &source.original_name,
                    &taxonomy.key,
                ));
            }
            let node = PatternNode::new(&decl.name, aliases)
                .with_definition(&decl.definition)
                .with_tags(decl.tags.iter().cloned());
            graph = graph.add_node(node)?;
        }
        for (index, decl) in self.edges.iter().enumerate() {
            let resolve = |name: &str| {
                taxonomy_refs
                    .get(&name.to_lowercase())
                    .cloned()
                    .or_else(|| graph.find_pattern_by_name(name).map(|p| p.id.clone()))
                    .ok_or_else(|| CorpusError::UnknownReference {
                        name: name.to_owned(),
                        context: format!("edge #{index}"),
                    })
            };
            let src = resolve(&decl.from)?;
            let dst = resolve(&decl.to)?;
            graph = graph.add_edge(decl.kind, &src, &dst, &decl.rationale)?;
        }
        Ok(graph)
    }
}

/// Parse a corpus document into a version 1.0 graph.
pub fn parse_corpus(text: &str) -> Result<TaxonomyGraph, CorpusError> {
    CorpusDocument::from_json(text)?.to_graph()
}

/// Raw text of the shipped seed corpus.
pub fn seed_corpus_text() -> &'static str {
    SEED_CORPUS
}

/// The shipped seed corpus as a version 1.0 graph.
pub fn seed_graph() -> TaxonomyGraph {
    parse_corpus(SEED_CORPUS).expect("shipped seed corpus parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Gexf,
    Dot,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gexf" => Ok(ExportFormat::Gexf),
            "dot" => Ok(ExportFormat::Dot),
            other => Err(format!("unknown export format `{other}` (expected gexf or dot)")),
        }
    }
}

/// Render the graph for external tools. Community ids are attached when a
/// partition of the same graph is supplied.
pub fn export_graph(
    graph: &TaxonomyGraph,
    format: ExportFormat,
    communities: Option<&Partition>,
) -> String {
    match format {
        ExportFormat::Gexf => gexf::export(graph, communities),
        ExportFormat::Dot => dot::export(graph, communities),
    }
}
