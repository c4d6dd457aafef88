//! Typed directed graph of taxonomies and the dark patterns they define.
//!
//! Two node roles exist: [`TaxonomyNode`]s, which only point outward with
//! [`EdgeKind::BelongsTo`] edges, and [`PatternNode`]s, which point at other
//! patterns with [`EdgeKind::Employs`] edges. A pattern's in-degree counts how
//! often it is used across the integrated taxonomy.
//!
//! Graphs are immutable snapshots. Every mutating operation borrows the
//! current value and returns a new one.

mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use validate::{Rule, Violation};

/// Stable node identifier in slug form.
///
/// Assigned from the canonical name at creation and never renamed, so journal
/// references keep resolving after merges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(value: impl Into<String>) -> Self {
        Self(value.into())
    }

    /// Slug of a display name: lowercase ASCII alphanumerics joined by `-`.
    pub fn slug(name: &str) -> Self {
        let mut out = String::with_capacity(name.len());
        let mut pending_dash = false;
        for ch in name.chars().flat_map(char::to_lowercase) {
            if ch.is_alphanumeric() {
                if pending_dash && !out.is_empty() {
                    out.push('-');
                }
                pending_dash = false;
                out.push(ch);
            } else {
                pending_dash = true;
            }
        }
        Self(out)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(value: &str) -> Self {
        Self(value.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(String);

impl EdgeId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Where a pattern name came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Attribution {
    pub source_taxonomy: NodeId,
    pub original_name: String,
    /// First author plus year, e.g. `Brignull2010`.
    pub citation_key: String,
}

impl Attribution {
    pub fn new(
        source_taxonomy: impl Into<NodeId>,
        original_name: impl Into<String>,
        citation_key: impl Into<String>,
    ) -> Self {
        Self {
            source_taxonomy: source_taxonomy.into(),
            original_name: original_name.into(),
            citation_key: citation_key.into(),
        }
    }
}

impl From<String> for NodeId {
    fn from(value: String) -> Self {
        Self(value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternNode {
    pub id: NodeId,
    pub canonical_name: String,
    pub aliases: Vec<Attribution>,
    #[serde(default)]
    pub definition: String,
    #[serde(default)]
    pub tags: BTreeSet<String>,
    /// Canonical names of patterns merged into this one.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub former_names: BTreeSet<String>,
}

impl PatternNode {
    /// New pattern whose id is the slug of `canonical_name`.
    pub fn new(canonical_name: impl Into<String>, aliases: Vec<Attribution>) -> Self {
        let canonical_name = canonical_name.into();
        Self {
            id: NodeId::slug(&canonical_name),
            canonical_name,
            aliases,
            definition: String::new(),
            tags: BTreeSet::new(),
            former_names: BTreeSet::new(),
        }
    }

    pub fn with_definition(mut self, definition: impl Into<String>) -> Self {
        self.definition = definition.into();
        self
    }

    pub fn with_tags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tags = tags.into_iter().map(Into::into).collect();
        self
    }

    /// Canonical name followed by every alias name.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.canonical_name.as_str())
            .chain(self.aliases.iter().map(|a| a.original_name.as_str()))
    }

    pub fn citation_keys(&self) -> BTreeSet<&str> {
        self.aliases.iter().map(|a| a.citation_key.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyNode {
    pub id: NodeId,
    /// First author and year, e.g. `Brignull 2010`.
    pub label: String,
    pub citation_key: String,
    #[serde(default)]
    pub domain: String,
}

impl TaxonomyNode {
    pub fn new(
        label: impl Into<String>,
        citation_key: impl Into<String>,
        domain: impl Into<String>,
    ) -> Self {
        let label = label.into();
        Self {
            id: NodeId::slug(&label),
            label,
            citation_key: citation_key.into(),
            domain: domain.into(),
        }
    }
}

/// A taxonomy known to the graph, kept after taxonomy nodes are stripped so
/// pattern aliases still resolve to their provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceInfo {
    pub citation_key: String,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// Taxonomy → pattern it defines.
    BelongsTo,
    /// Pattern → pattern it implements or utilizes.
    Employs,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::BelongsTo => "belongs_to",
            EdgeKind::Employs => "employs",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "belongs_to" => Some(EdgeKind::BelongsTo),
            "employs" => Some(EdgeKind::Employs),
            _ => None,
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub kind: EdgeKind,
    pub src: NodeId,
    pub dst: NodeId,
    pub rationale: String,
}

impl Edge {
    pub fn triple(&self) -> (EdgeKind, &NodeId, &NodeId) {
        (self.kind, &self.src, &self.dst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Version {
    pub major: u32,
    pub minor: u32,
}

impl Version {
    pub const INITIAL: Version = Version { major: 1, minor: 0 };

    pub fn new(major: u32, minor: u32) -> Self {
        Self { major, minor }
    }

    pub fn next_minor(self) -> Self {
        Self {
            major: self.major,
            minor: self.minor + 1,
        }
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.major, self.minor)
    }
}

/// Node to insert with [`TaxonomyGraph::add_node`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NewNode {
    Pattern(PatternNode),
    Taxonomy(TaxonomyNode),
}

impl From<PatternNode> for NewNode {
    fn from(value: PatternNode) -> Self {
        NewNode::Pattern(value)
    }
}

impl From<TaxonomyNode> for NewNode {
    fn from(value: TaxonomyNode) -> Self {
        NewNode::Taxonomy(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    Pattern,
    Taxonomy,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("node id `{0}` already exists or was used before")]
    DuplicateId(NodeId),
    #[error("name `{0}` clashes with an existing node (case-insensitive)")]
    DuplicateName(String),
    #[error("edge {kind} {src} -> {dst} already exists")]
    DuplicateEdge {
        kind: EdgeKind,
        src: NodeId,
        dst: NodeId,
    },
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("edge policy violation: {0}")]
    PolicyViolation(String),
    #[error("taxonomy nodes were already stripped (version {0})")]
    AlreadyStripped(Version),
    #[error("graph has no pattern nodes")]
    EmptyGraph,
    #[error("pattern `{0}` needs at least one attribution")]
    MissingAttribution(String),
    #[error("source `{source_taxonomy}` is registered with citation `{existing}`, not `{given}`")]
    CitationMismatch {
        source_taxonomy: NodeId,
        existing: String,
        given: String,
    },
}

pub type Result<T, E = GraphError> = std::result::Result<T, E>;

/// Raw graph contents, used to build graphs without the checks performed by
/// the mutating operations. Call [`TaxonomyGraph::validate`] afterwards.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphParts {
    pub patterns: BTreeMap<NodeId, PatternNode>,
    pub taxonomies: BTreeMap<NodeId, TaxonomyNode>,
    pub edges: Vec<Edge>,
    pub sources: BTreeMap<NodeId, SourceInfo>,
    pub version: Option<Version>,
    pub lineage: Vec<String>,
    pub retired: BTreeSet<NodeId>,
    pub next_edge: u64,
}

/// Versioned container of taxonomy and pattern nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyGraph {
    patterns: BTreeMap<NodeId, PatternNode>,
    taxonomies: BTreeMap<NodeId, TaxonomyNode>,
    edges: Vec<Edge>,
    sources: BTreeMap<NodeId, SourceInfo>,
    version: Version,
    lineage: Vec<String>,
    retired: BTreeSet<NodeId>,
    next_edge: u64,
}

impl Default for TaxonomyGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl TaxonomyGraph {
    /// Empty graph at version 1.0.
    pub fn new() -> Self {
        Self {
            patterns: BTreeMap::new(),
            taxonomies: BTreeMap::new(),
            edges: Vec::new(),
            sources: BTreeMap::new(),
            version: Version::INITIAL,
            lineage: Vec::new(),
            retired: BTreeSet::new(),
            next_edge: 0,
        }
    }

    pub fn from_parts(parts: GraphParts) -> Self {
        Self {
            patterns: parts.patterns,
            taxonomies: parts.taxonomies,
            edges: parts.edges,
            sources: parts.sources,
            version: parts.version.unwrap_or(Version::INITIAL),
            lineage: parts.lineage,
            retired: parts.retired,
            next_edge: parts.next_edge,
        }
    }

    pub fn into_parts(self) -> GraphParts {
        GraphParts {
            patterns: self.patterns,
            taxonomies: self.taxonomies,
            edges: self.edges,
            sources: self.sources,
            version: Some(self.version),
            lineage: self.lineage,
            retired: self.retired,
            next_edge: self.next_edge,
        }
    }

    pub fn version(&self) -> Version {
        self.version
    }

    pub fn lineage(&self) -> &[String] {
        &self.lineage
    }

    pub fn patterns(&self) -> impl ExactSizeIterator<Item = &PatternNode> {
        self.patterns.values()
    }

    pub fn taxonomies(&self) -> impl ExactSizeIterator<Item = &TaxonomyNode> {
        self.taxonomies.values()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn sources(&self) -> &BTreeMap<NodeId, SourceInfo> {
        &self.sources
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns.len()
    }

    pub fn taxonomy_count(&self) -> usize {
        self.taxonomies.len()
    }

    pub fn node_count(&self) -> usize {
        self.patterns.len() + self.taxonomies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_count() == 0
    }

    pub fn pattern(&self, id: &NodeId) -> Option<&PatternNode> {
        self.patterns.get(id)
    }

    pub fn taxonomy(&self, id: &NodeId) -> Option<&TaxonomyNode> {
        self.taxonomies.get(id)
    }

    pub fn role(&self, id: &NodeId) -> Option<NodeRole> {
        if self.patterns.contains_key(id) {
            Some(NodeRole::Pattern)
        } else if self.taxonomies.contains_key(id) {
            Some(NodeRole::Taxonomy)
        } else {
            None
        }
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.role(id).is_some()
    }

    /// All node ids, patterns and taxonomies, in ascending order.
    pub fn node_ids(&self) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self
            .patterns
            .keys()
            .chain(self.taxonomies.keys())
            .cloned()
            .collect();
        ids.sort();
        ids
    }

    /// Display name of either node role.
    pub fn display_name(&self, id: &NodeId) -> Option<&str> {
        self.patterns
            .get(id)
            .map(|p| p.canonical_name.as_str())
            .or_else(|| self.taxonomies.get(id).map(|t| t.label.as_str()))
    }

    /// Pattern whose canonical name matches case-insensitively.
    pub fn find_pattern_by_name(&self, name: &str) -> Option<&PatternNode> {
        let wanted = name.to_lowercase();
        self.patterns
            .values()
            .find(|p| p.canonical_name.to_lowercase() == wanted)
    }

    /// Pattern whose canonical name, alias name or former canonical name
    /// matches case-insensitively. Canonical matches win over the others.
    pub fn resolve_pattern_name(&self, name: &str) -> Option<&PatternNode> {
        self.find_pattern_by_name(name).or_else(|| {
            let wanted = name.to_lowercase();
            self.patterns.values().find(|p| {
                p.aliases
                    .iter()
                    .map(|a| a.original_name.as_str())
                    .chain(p.former_names.iter().map(String::as_str))
                    .any(|n| n.to_lowercase() == wanted)
            })
        })
    }

    pub fn has_edge(&self, kind: EdgeKind, src: &NodeId, dst: &NodeId) -> bool {
        self.edges
            .iter()
            .any(|e| e.kind == kind && &e.src == src && &e.dst == dst)
    }

    pub fn add_node(&self, node: impl Into<NewNode>) -> Result<Self> {
        let mut next = self.clone();
        next.insert_node(node.into())?;
        Ok(next)
    }

    fn name_taken(&self, name: &str) -> bool {
        let wanted = name.to_lowercase();
        self.patterns
            .values()
            .any(|p| p.canonical_name.to_lowercase() == wanted)
            || self
                .taxonomies
                .values()
                .any(|t| t.label.to_lowercase() == wanted)
    }

    fn id_taken(&self, id: &NodeId) -> bool {
        self.contains(id) || self.retired.contains(id)
    }

    fn insert_node(&mut self, node: NewNode) -> Result<()> {
        match node {
            NewNode::Pattern(pattern) => {
                if self.id_taken(&pattern.id) {
                    return Err(GraphError::DuplicateId(pattern.id));
                }
                if self.name_taken(&pattern.canonical_name) {
                    return Err(GraphError::DuplicateName(pattern.canonical_name));
                }
                if pattern.aliases.is_empty() {
                    return Err(GraphError::MissingAttribution(pattern.canonical_name));
                }
                for alias in &pattern.aliases {
                    self.register_source(alias)?;
                }
                self.patterns.insert(pattern.id.clone(), pattern);
            }
            NewNode::Taxonomy(taxonomy) => {
                if self.id_taken(&taxonomy.id) {
                    return Err(GraphError::DuplicateId(taxonomy.id));
                }
                if self.name_taken(&taxonomy.label) {
                    return Err(GraphError::DuplicateName(taxonomy.label));
                }
                match self.sources.get(&taxonomy.id) {
                    Some(existing) if existing.citation_key != taxonomy.citation_key => {
                        return Err(GraphError::CitationMismatch {
                            source_taxonomy: taxonomy.id,
                            existing: existing.citation_key.clone(),
                            given: taxonomy.citation_key,
                        });
                    }
                    _ => {}
                }
                self.sources.insert(
                    taxonomy.id.clone(),
                    SourceInfo {
                        citation_key: taxonomy.citation_key.clone(),
                        label: taxonomy.label.clone(),
                    },
                );
                self.taxonomies.insert(taxonomy.id.clone(), taxonomy);
            }
        }
        Ok(())
    }

    // Aliases may name a source before its taxonomy node is added; the
    // registry remembers it so provenance survives stripping.
    fn register_source(&mut self, alias: &Attribution) -> Result<()> {
        match self.sources.get(&alias.source_taxonomy) {
            Some(existing) if existing.citation_key != alias.citation_key => {
                Err(GraphError::CitationMismatch {
                    source_taxonomy: alias.source_taxonomy.clone(),
                    existing: existing.citation_key.clone(),
                    given: alias.citation_key.clone(),
                })
            }
            Some(_) => Ok(()),
            None => {
                self.sources.insert(
                    alias.source_taxonomy.clone(),
                    SourceInfo {
                        citation_key: alias.citation_key.clone(),
                        label: alias.citation_key.clone(),
                    },
                );
                Ok(())
            }
        }
    }

    pub fn add_edge(
        &self,
        kind: EdgeKind,
        src: &NodeId,
        dst: &NodeId,
        rationale: impl Into<String>,
    ) -> Result<Self> {
        let mut next = self.clone();
        next.insert_edge(kind, src, dst, rationale.into())?;
        Ok(next)
    }

    pub(crate) fn insert_edge(
        &mut self,
        kind: EdgeKind,
        src: &NodeId,
        dst: &NodeId,
        rationale: String,
    ) -> Result<EdgeId> {
        let src_role = self
            .role(src)
            .ok_or_else(|| GraphError::UnknownNode(src.clone()))?;
        let dst_role = self
            .role(dst)
            .ok_or_else(|| GraphError::UnknownNode(dst.clone()))?;
        check_policy(kind, src, src_role, dst, dst_role)?;
        if self.has_edge(kind, src, dst) {
            return Err(GraphError::DuplicateEdge {
                kind,
                src: src.clone(),
                dst: dst.clone(),
            });
        }
        let id = self.fresh_edge_id();
        self.edges.push(Edge {
            id: id.clone(),
            kind,
            src: src.clone(),
            dst: dst.clone(),
            rationale,
        });
        Ok(id)
    }

    fn fresh_edge_id(&mut self) -> EdgeId {
        let id = EdgeId(format!("e{}", self.next_edge));
        self.next_edge += 1;
        id
    }

    /// Number of incoming edges of every kind.
    pub fn in_degree(&self, id: &NodeId) -> Result<usize> {
        if !self.contains(id) {
            return Err(GraphError::UnknownNode(id.clone()));
        }
        Ok(self.edges.iter().filter(|e| &e.dst == id).count())
    }

    pub fn out_degree(&self, id: &NodeId) -> Result<usize> {
        if !self.contains(id) {
            return Err(GraphError::UnknownNode(id.clone()));
        }
        Ok(self.edges.iter().filter(|e| &e.src == id).count())
    }

    fn in_degrees(&self) -> BTreeMap<&NodeId, usize> {
        let mut counts: BTreeMap<&NodeId, usize> = BTreeMap::new();
        for edge in &self.edges {
            *counts.entry(&edge.dst).or_default() += 1;
        }
        counts
    }

    /// Patterns by in-degree, highest first, ties by name.
    ///
    /// On graphs that still carry taxonomy nodes the counts include
    /// `BelongsTo` edges.
    pub fn prominence_ranking(&self) -> Result<Vec<(NodeId, usize)>> {
        if self.patterns.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let counts = self.in_degrees();
        let mut ranked: Vec<(&PatternNode, usize)> = self
            .patterns
            .values()
            .map(|p| (p, counts.get(&p.id).copied().unwrap_or(0)))
            .collect();
        ranked.sort_by(|(a, da), (b, db)| {
            db.cmp(da).then_with(|| compare_names(&a.canonical_name, &b.canonical_name))
        });
        Ok(ranked.into_iter().map(|(p, d)| (p.id.clone(), d)).collect())
    }

    /// Remove every taxonomy node and `BelongsTo` edge, promoting the graph
    /// to major version 3. Pattern aliases keep their citations.
    pub fn strip_taxonomy_nodes(&self) -> Result<Self> {
        if self.version.major >= 3 {
            return Err(GraphError::AlreadyStripped(self.version));
        }
        let mut next = self.clone();
        let removed_nodes = next.taxonomies.len();
        for id in std::mem::take(&mut next.taxonomies).into_keys() {
            next.retired.insert(id);
        }
        let before = next.edges.len();
        next.edges.retain(|e| e.kind != EdgeKind::BelongsTo);
        let removed_edges = before - next.edges.len();
        next.version = Version::new(3, 0);
        next.lineage.push(format!(
            "3.0: removed {removed_nodes} taxonomy nodes and {removed_edges} belongs_to edges"
        ));
        Ok(next)
    }

    /// Check every structural invariant; an empty list means the graph is
    /// well formed.
    pub fn validate(&self) -> Vec<Violation> {
        validate::check(self)
    }

    /// Deterministic JSON used to compare snapshots byte for byte.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization cannot fail")
    }

    pub(crate) fn with_version(mut self, version: Version) -> Self {
        self.version = version;
        self
    }

    pub(crate) fn bump_minor(&mut self, note: impl AsRef<str>) {
        self.version = self.version.next_minor();
        self.lineage
            .push(format!("{}: {}", self.version, note.as_ref()));
    }

    /// Fold `absorbed` into `survivor`. Edges of the absorbed node are
    /// re-targeted; duplicates and would-be self-loops are dropped. Returns
    /// the number of re-targeted edges kept and the number of the absorbed
    /// node's edges removed.
    pub(crate) fn merge_patterns(
        &mut self,
        survivor: &NodeId,
        absorbed: &NodeId,
    ) -> Result<(usize, usize)> {
        if survivor == absorbed {
            return Err(GraphError::PolicyViolation(format!(
                "cannot merge `{survivor}` into itself"
            )));
        }
        let absorbed_node = self
            .patterns
            .remove(absorbed)
            .ok_or_else(|| GraphError::UnknownNode(absorbed.clone()))?;
        let Some(survivor_node) = self.patterns.get_mut(survivor) else {
            self.patterns.insert(absorbed.clone(), absorbed_node);
            return Err(GraphError::UnknownNode(survivor.clone()));
        };
        survivor_node.aliases.extend(absorbed_node.aliases);
        if survivor_node.definition.trim().is_empty() {
            survivor_node.definition = absorbed_node.definition;
        }
        survivor_node.tags.extend(absorbed_node.tags);
        survivor_node.former_names.extend(absorbed_node.former_names);
        survivor_node.former_names.insert(absorbed_node.canonical_name);
        self.retired.insert(absorbed.clone());

        let (touching, mut kept): (Vec<Edge>, Vec<Edge>) = std::mem::take(&mut self.edges)
            .into_iter()
            .partition(|e| &e.src == absorbed || &e.dst == absorbed);
        let removed = touching.len();
        let mut added = 0;
        let mut rewired = Vec::new();
        for mut edge in touching {
            if &edge.src == absorbed {
                edge.src = survivor.clone();
            }
            if &edge.dst == absorbed {
                edge.dst = survivor.clone();
            }
            if edge.src == edge.dst {
                continue;
            }
            let clash = |e: &Edge| e.kind == edge.kind && e.src == edge.src && e.dst == edge.dst;
            if kept.iter().any(clash) || rewired.iter().any(clash) {
                continue;
            }
            rewired.push(edge);
            added += 1;
        }
        // Re-targeted edges keep their ids and original position.
        kept.extend(rewired);
        kept.sort_by(|a, b| edge_ordinal(&a.id).cmp(&edge_ordinal(&b.id)));
        self.edges = kept;
        Ok((added, removed))
    }

    /// Drop a pattern with all of its edges. Returns the number of edges
    /// removed.
    pub(crate) fn remove_pattern(&mut self, id: &NodeId) -> Result<usize> {
        if self.patterns.remove(id).is_none() {
            return Err(GraphError::UnknownNode(id.clone()));
        }
        self.retired.insert(id.clone());
        let before = self.edges.len();
        self.edges.retain(|e| &e.src != id && &e.dst != id);
        Ok(before - self.edges.len())
    }
}

fn edge_ordinal(id: &EdgeId) -> (u64, &str) {
    let n = id
        .as_str()
        .strip_prefix('e')
        .and_then(|n| n.parse().ok())
        .unwrap_or(u64::MAX);
    (n, id.as_str())
}

/// Case-insensitive name order with an exact comparison as the final key.
pub fn compare_names(a: &str, b: &str) -> std::cmp::Ordering {
    a.to_lowercase()
        .cmp(&b.to_lowercase())
        .then_with(|| a.cmp(b))
}

fn check_policy(
    kind: EdgeKind,
    src: &NodeId,
    src_role: NodeRole,
    dst: &NodeId,
    dst_role: NodeRole,
) -> Result<()> {
    match kind {
        EdgeKind::BelongsTo => {
            if src_role != NodeRole::Taxonomy || dst_role != NodeRole::Pattern {
                return Err(GraphError::PolicyViolation(format!(
                    "belongs_to must run from a taxonomy to a pattern ({src} -> {dst})"
                )));
            }
        }
        EdgeKind::Employs => {
            if src_role != NodeRole::Pattern || dst_role != NodeRole::Pattern {
                return Err(GraphError::PolicyViolation(format!(
                    "employs must connect two patterns ({src} -> {dst})"
                )));
            }
            if src == dst {
                return Err(GraphError::PolicyViolation(format!(
                    "employs self-loop on {src}"
                )));
            }
        }
    }
    Ok(())
}
