use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{EdgeKind, NodeRole, TaxonomyGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    DanglingEndpoint,
    EdgeRole,
    SelfLoop,
    DuplicateEdge,
    DuplicateEdgeId,
    DuplicateName,
    SharedId,
    MismatchedKey,
    EmptyName,
    MissingAttribution,
    UnknownSource,
    CitationMismatch,
    StrippedGraphHasTaxonomy,
}

/// One broken invariant, naming the node or edge at fault.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub subject: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {}: {}", self.rule, self.subject, self.detail)
    }
}

pub(super) fn check(graph: &TaxonomyGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |rule, subject: String, detail: String| {
        out.push(Violation {
            rule,
            subject,
            detail,
        })
    };

    let mut names: HashMap<String, String> = HashMap::new();
    for (key, pattern) in &graph.patterns {
        if key != &pattern.id {
            push(
                Rule::MismatchedKey,
                key.to_string(),
                format!("stored under a key different from its id `{}`", pattern.id),
            );
        }
        if pattern.canonical_name.trim().is_empty() {
            push(Rule::EmptyName, key.to_string(), "empty canonical name".into());
        }
        if let Some(prev) = names.insert(pattern.canonical_name.to_lowercase(), key.to_string()) {
            push(
                Rule::DuplicateName,
                key.to_string(),
                format!("name `{}` also used by `{prev}`", pattern.canonical_name),
            );
        }
        if pattern.aliases.is_empty() {
            push(Rule::MissingAttribution, key.to_string(), "no aliases".into());
        }
        for alias in &pattern.aliases {
            match graph.sources.get(&alias.source_taxonomy) {
                None => push(
                    Rule::UnknownSource,
                    key.to_string(),
                    format!("alias source `{}` is not a known taxonomy", alias.source_taxonomy),
                ),
                Some(source) if source.citation_key != alias.citation_key => push(
                    Rule::CitationMismatch,
                    key.to_string(),
                    format!(
                        "alias cites `{}` but source `{}` is `{}`",
                        alias.citation_key, alias.source_taxonomy, source.citation_key
                    ),
                ),
                Some(_) => {}
            }
        }
    }
    for (key, taxonomy) in &graph.taxonomies {
        if key != &taxonomy.id {
            push(
                Rule::MismatchedKey,
                key.to_string(),
                format!("stored under a key different from its id `{}`", taxonomy.id),
            );
        }
        if graph.patterns.contains_key(key) {
            push(
                Rule::SharedId,
                key.to_string(),
                "id used by both a pattern and a taxonomy".into(),
            );
        }
        if let Some(prev) = names.insert(taxonomy.label.to_lowercase(), key.to_string()) {
            push(
                Rule::DuplicateName,
                key.to_string(),
                format!("label `{}` also used by `{prev}`", taxonomy.label),
            );
        }
    }
    if graph.version.major >= 3 && !graph.taxonomies.is_empty() {
        push(
            Rule::StrippedGraphHasTaxonomy,
            format!("version {}", graph.version),
            format!("{} taxonomy nodes remain", graph.taxonomies.len()),
        );
    }

    let mut seen_triples = HashSet::new();
    let mut seen_ids = BTreeSet::new();
    for edge in &graph.edges {
        let subject = format!("edge {} ({} {} -> {})", edge.id, edge.kind, edge.src, edge.dst);
        if !seen_ids.insert(&edge.id) {
            push(Rule::DuplicateEdgeId, subject.clone(), "edge id reused".into());
        }
        let src = graph.role(&edge.src);
        let dst = graph.role(&edge.dst);
        let (Some(src), Some(dst)) = (src, dst) else {
            let missing = if src.is_none() { &edge.src } else { &edge.dst };
            push(
                Rule::DanglingEndpoint,
                subject,
                format!("endpoint `{missing}` does not exist"),
            );
            continue;
        };
        match edge.kind {
            EdgeKind::BelongsTo if src != NodeRole::Taxonomy || dst != NodeRole::Pattern => push(
                Rule::EdgeRole,
                subject.clone(),
                "belongs_to must run from a taxonomy to a pattern".into(),
            ),
            EdgeKind::Employs if src != NodeRole::Pattern || dst != NodeRole::Pattern => push(
                Rule::EdgeRole,
                subject.clone(),
                "employs must connect two patterns".into(),
            ),
            EdgeKind::Employs if edge.src == edge.dst => {
                push(Rule::SelfLoop, subject.clone(), "employs self-loop".into())
            }
            _ => {}
        }
        if !seen_triples.insert(edge.triple()) {
            push(Rule::DuplicateEdge, subject, "duplicate (kind, src, dst)".into());
        }
    }
    out
}
