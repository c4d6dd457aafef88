use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::candidate::{CandidateId, CandidateKind, CandidateStatus, ChangeCandidate};
use super::MergeError;
use crate::graph::{compare_names, EdgeKind, GraphError, NodeId, TaxonomyGraph, Version};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EdgeDelta {
    pub added: usize,
    pub removed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EnactedChange {
    Merge {
        survivor: NodeId,
        absorbed: NodeId,
        survivor_name: String,
        absorbed_name: String,
        /// Citation keys of both nodes after the merge.
        citations: Vec<String>,
    },
    NewEdge {
        src: NodeId,
        dst: NodeId,
    },
    Removal {
        node: NodeId,
        name: String,
        citations: Vec<String>,
    },
}

/// One enacted change, as written to the journal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub ordinal: u64,
    pub version_after: Version,
    pub candidate_id: Option<CandidateId>,
    pub change: EnactedChange,
    pub edge_delta: EdgeDelta,
    pub rationale: String,
}

/// Survivor of a merge: higher in-degree, then the smaller canonical name.
pub fn choose_survivor<'a>(
    graph: &TaxonomyGraph,
    a: &'a NodeId,
    b: &'a NodeId,
) -> Result<(&'a NodeId, &'a NodeId), GraphError> {
    let da = graph.in_degree(a)?;
    let db = graph.in_degree(b)?;
    let name = |id: &NodeId| graph.display_name(id).unwrap_or(id.as_str()).to_owned();
    let a_first = da > db || (da == db && compare_names(&name(a), &name(b)).is_le());
    Ok(if a_first { (a, b) } else { (b, a) })
}

fn require_pattern(graph: &TaxonomyGraph, id: &NodeId, candidate: Option<&CandidateId>) -> Result<(), MergeError> {
    if graph.pattern(id).is_some() {
        Ok(())
    } else if graph.taxonomy(id).is_some() {
        Err(MergeError::Graph(GraphError::PolicyViolation(format!(
            "`{id}` is a taxonomy node and cannot be merged or removed"
        ))))
    } else {
        Err(match candidate {
            Some(c) => MergeError::StaleCandidate(c.clone()),
            None => MergeError::Graph(GraphError::UnknownNode(id.clone())),
        })
    }
}

fn citations(graph: &TaxonomyGraph, id: &NodeId) -> Vec<String> {
    graph
        .pattern(id)
        .map(|p| p.citation_keys().into_iter().map(str::to_owned).collect())
        .unwrap_or_default()
}

fn apply_merge(
    graph: &TaxonomyGraph,
    survivor: &NodeId,
    absorbed: &NodeId,
    rationale: &str,
) -> Result<(TaxonomyGraph, EnactedChange, EdgeDelta), MergeError> {
    let survivor_name = graph.display_name(survivor).unwrap_or_default().to_owned();
    let absorbed_name = graph.display_name(absorbed).unwrap_or_default().to_owned();
    let mut next = graph.clone();
    let (added, removed) = next.merge_patterns(survivor, absorbed)?;
    next.bump_minor(format!("merged {absorbed_name} into {survivor_name}: {rationale}"));
    let change = EnactedChange::Merge {
        survivor: survivor.clone(),
        absorbed: absorbed.clone(),
        survivor_name,
        absorbed_name,
        citations: citations(&next, survivor),
    };
    Ok((next, change, EdgeDelta { added, removed }))
}

fn apply_edge(
    graph: &TaxonomyGraph,
    src: &NodeId,
    dst: &NodeId,
    rationale: &str,
) -> Result<(TaxonomyGraph, EnactedChange, EdgeDelta), MergeError> {
    let mut next = graph.clone();
    next.insert_edge(EdgeKind::Employs, src, dst, rationale.to_owned())?;
    let label = |id: &NodeId| graph.display_name(id).unwrap_or(id.as_str()).to_owned();
    next.bump_minor(format!("{} employs {}: {rationale}", label(src), label(dst)));
    let change = EnactedChange::NewEdge {
        src: src.clone(),
        dst: dst.clone(),
    };
    Ok((next, change, EdgeDelta { added: 1, removed: 0 }))
}

fn apply_removal(
    graph: &TaxonomyGraph,
    node: &NodeId,
    rationale: &str,
) -> Result<(TaxonomyGraph, EnactedChange, EdgeDelta), MergeError> {
    let name = graph.display_name(node).unwrap_or_default().to_owned();
    let cites = citations(graph, node);
    let mut next = graph.clone();
    let removed = next.remove_pattern(node)?;
    next.bump_minor(format!("removed {name}: {rationale}"));
    let change = EnactedChange::Removal {
        node: node.clone(),
        name,
        citations: cites,
    };
    Ok((next, change, EdgeDelta { added: 0, removed }))
}

/// Apply an approved candidate. Returns the next snapshot and the record to
/// journal under `ordinal`.
pub fn enact(
    graph: &TaxonomyGraph,
    candidate: &ChangeCandidate,
    ordinal: u64,
) -> Result<(TaxonomyGraph, MergeRecord), MergeError> {
    if candidate.status != CandidateStatus::Approved {
        return Err(MergeError::InvalidTransition {
            id: candidate.id.clone(),
            from: candidate.status,
            to: CandidateStatus::Enacted,
        });
    }
    if candidate.rationale.trim().is_empty() {
        return Err(MergeError::EmptyRationale);
    }
    let (x, y) = candidate.kind.endpoints();
    for id in [x, y] {
        if !graph.contains(id) {
            return Err(MergeError::StaleCandidate(candidate.id.clone()));
        }
    }
    let (next, change, edge_delta) = match &candidate.kind {
        CandidateKind::Merge { a, b } => {
            require_pattern(graph, a, Some(&candidate.id))?;
            require_pattern(graph, b, Some(&candidate.id))?;
            let (survivor, absorbed) = choose_survivor(graph, a, b)?;
            apply_merge(graph, survivor, absorbed, &candidate.rationale)?
        }
        CandidateKind::NewEdge { src, dst } => apply_edge(graph, src, dst, &candidate.rationale)?,
    };
    let record = MergeRecord {
        ordinal,
        version_after: next.version(),
        candidate_id: Some(candidate.id.clone()),
        change,
        edge_delta,
        rationale: candidate.rationale.clone(),
    };
    Ok((next, record))
}

/// Remove a pattern outright (irrelevant singleton).
pub fn remove_node(
    graph: &TaxonomyGraph,
    node: &NodeId,
    rationale: &str,
    ordinal: u64,
) -> Result<(TaxonomyGraph, MergeRecord), MergeError> {
    if rationale.trim().is_empty() {
        return Err(MergeError::EmptyRationale);
    }
    require_pattern(graph, node, None)?;
    let (next, change, edge_delta) = apply_removal(graph, node, rationale)?;
    let record = MergeRecord {
        ordinal,
        version_after: next.version(),
        candidate_id: None,
        change,
        edge_delta,
        rationale: rationale.to_owned(),
    };
    Ok((next, record))
}

/// Re-apply a journaled record and check it lands on the recorded version.
pub fn replay_record(graph: &TaxonomyGraph, record: &MergeRecord) -> Result<TaxonomyGraph, MergeError> {
    let (next, change, delta) = match &record.change {
        EnactedChange::Merge { survivor, absorbed, .. } => {
            require_pattern(graph, survivor, None)?;
            require_pattern(graph, absorbed, None)?;
            apply_merge(graph, survivor, absorbed, &record.rationale)?
        }
        EnactedChange::NewEdge { src, dst } => apply_edge(graph, src, dst, &record.rationale)?,
        EnactedChange::Removal { node, .. } => {
            require_pattern(graph, node, None)?;
            apply_removal(graph, node, &record.rationale)?
        }
    };
    if next.version() != record.version_after || change != record.change || delta != record.edge_delta {
        return Err(MergeError::ReplayMismatch {
            ordinal: record.ordinal,
            detail: format!(
                "recorded version {} / {:?}, replay produced {} / {:?}",
                record.version_after, record.edge_delta, next.version(), delta
            ),
        });
    }
    Ok(next)
}

/// Endpoints a record removes from the graph.
pub(crate) fn vanished_nodes(record: &MergeRecord) -> BTreeSet<NodeId> {
    match &record.change {
        EnactedChange::Merge { absorbed, .. } => BTreeSet::from([absorbed.clone()]),
        EnactedChange::Removal { node, .. } => BTreeSet::from([node.clone()]),
        EnactedChange::NewEdge { .. } => BTreeSet::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Attribution, PatternNode};
    use crate::merge::{review, SimilarityScores, Verdict};

    fn graph(names: &[&str], edges: &[(&str, &str)]) -> TaxonomyGraph {
        let mut g = TaxonomyGraph::new();
        for n in names {
            g = g
                .add_node(PatternNode::new(*n, vec![Attribution::new(format!("src-{n}"), *n, format!("{n}2000"))]))
                .unwrap();
        }
        for (s, d) in edges {
            g = g.add_edge(EdgeKind::Employs, &(*s).into(), &(*d).into(), "").unwrap();
        }
        g
    }

    fn approved(kind: CandidateKind) -> ChangeCandidate {
        let c = ChangeCandidate::human(kind, SimilarityScores::ZERO, 0.0, "proposal").unwrap();
        review(&c, Verdict::Approve, "same thing").unwrap()
    }

    #[test]
    fn survivor_keeps_union_of_in_neighbours() {
        // a has in-degree 3, b has 1; x points at both
        let g = graph(
            &["a", "b", "x", "y", "z"],
            &[("x", "a"), ("y", "a"), ("z", "a"), ("x", "b")],
        );
        let c = approved(CandidateKind::merge("b".into(), "a".into()));
        let (next, record) = enact(&g, &c, 1).unwrap();
        assert_eq!(next.pattern_count(), 4);
        assert_eq!(next.in_degree(&"a".into()).unwrap(), 3);
        assert!(matches!(&record.change, EnactedChange::Merge { survivor, .. } if survivor.as_str() == "a"));
        assert_eq!(record.edge_delta, EdgeDelta { added: 0, removed: 1 });
        assert_eq!(record.version_after, Version::new(1, 1));
        assert!(next.validate().is_empty());
        assert_eq!(next.pattern(&"a".into()).unwrap().aliases.len(), 2);
    }

    #[test]
    fn internal_edge_is_dropped() {
        let g = graph(&["a", "b"], &[("a", "b")]);
        let (next, _) = enact(&g, &approved(CandidateKind::merge("a".into(), "b".into())), 1).unwrap();
        assert!(next.edges().is_empty());
        assert_eq!(next.pattern_count(), 1);
    }

    #[test]
    fn tie_goes_to_smaller_name() {
        let g = graph(&["Beta", "Alpha"], &[]);
        let (a, b) = (NodeId::from("beta"), NodeId::from("alpha"));
        assert_eq!(choose_survivor(&g, &a, &b).unwrap().0.as_str(), "alpha");
    }

    #[test]
    fn unreviewed_and_stale() {
        let g = graph(&["a", "b"], &[]);
        let c = ChangeCandidate::human(CandidateKind::merge("a".into(), "b".into()), SimilarityScores::ZERO, 0.0, "p").unwrap();
        assert!(matches!(enact(&g, &c, 1), Err(MergeError::InvalidTransition { .. })));
        let gone = approved(CandidateKind::merge("a".into(), "q".into()));
        assert!(matches!(enact(&g, &gone, 1), Err(MergeError::StaleCandidate(_))));
    }

    #[test]
    fn new_edge_and_policy() {
        let g = graph(&["a", "b"], &[("a", "b")]);
        let dup = approved(CandidateKind::NewEdge { src: "a".into(), dst: "b".into() });
        assert!(matches!(enact(&g, &dup, 1), Err(MergeError::Graph(GraphError::DuplicateEdge { .. }))));
        let back = approved(CandidateKind::NewEdge { src: "b".into(), dst: "a".into() });
        let (next, record) = enact(&g, &back, 1).unwrap();
        assert_eq!(next.edges().len(), 2);
        assert_eq!(record.edge_delta.added, 1);
        assert_eq!(replay_record(&g, &record).unwrap(), next);
    }

    #[test]
    fn removal_replays() {
        let g = graph(&["a", "b"], &[("a", "b")]);
        let (next, record) = remove_node(&g, &"b".into(), "irrelevant", 1).unwrap();
        assert_eq!(next.pattern_count(), 1);
        assert_eq!(record.edge_delta.removed, 1);
        assert_eq!(replay_record(&g, &record).unwrap().canonical_json(), next.canonical_json());
        let wrong = MergeRecord { version_after: Version::new(1, 5), ..record };
        assert!(matches!(replay_record(&g, &wrong), Err(MergeError::ReplayMismatch { .. })));
    }
}
