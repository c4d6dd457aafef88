use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::candidate::{CandidateKind, ChangeCandidate, SimilarityScores};
use super::journal::Journal;
use super::MergeError;
use crate::community::Partition;
use crate::graph::{EdgeKind, NodeId, PatternNode, TaxonomyGraph};

pub const DEFAULT_THRESHOLD: f64 = 0.45;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityWeights {
    pub name: f64,
    pub definition: f64,
    pub neighbors: f64,
}

impl Default for SimilarityWeights {
    fn default() -> Self {
        Self {
            name: 0.4,
            definition: 0.3,
            neighbors: 0.3,
        }
    }
}

impl SimilarityWeights {
    pub fn total(&self, s: &SimilarityScores) -> f64 {
        self.name * s.name_sim + self.definition * s.def_sim + self.neighbors * s.neighbor_sim
    }
}

/// Lowercased alphanumeric tokens, single characters dropped.
pub fn tokenize(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() > 1)
        .map(str::to_lowercase)
        .collect()
}

/// |a ∩ b| / |a ∪ b|, with two empty sets scoring 0.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

// Best match over every name the pattern has been known by.
fn name_similarity(a: &PatternNode, b: &PatternNode) -> f64 {
    let tokens_b: Vec<_> = b.names().map(tokenize).collect();
    a.names()
        .map(tokenize)
        .flat_map(|ta| tokens_b.iter().map(move |tb| jaccard(&ta, tb)))
        .fold(0.0, f64::max)
}

fn employs_neighbors(graph: &TaxonomyGraph, id: &NodeId) -> BTreeSet<NodeId> {
    graph
        .edges()
        .iter()
        .filter(|e| e.kind == EdgeKind::Employs)
        .filter_map(|e| {
            if &e.src == id {
                Some(e.dst.clone())
            } else if &e.dst == id {
                Some(e.src.clone())
            } else {
                None
            }
        })
        .collect()
}

/// Similarity of two patterns. The pair itself is excluded from the
/// neighbour sets so a direct edge between them does not count.
pub fn score_pair(graph: &TaxonomyGraph, a: &NodeId, b: &NodeId, same_community: bool) -> Option<SimilarityScores> {
    let pa = graph.pattern(a)?;
    let pb = graph.pattern(b)?;
    let mut na = employs_neighbors(graph, a);
    let mut nb = employs_neighbors(graph, b);
    for n in [&mut na, &mut nb] {
        n.remove(a);
        n.remove(b);
    }
    Some(SimilarityScores {
        name_sim: name_similarity(pa, pb),
        def_sim: jaccard(&tokenize(&pa.definition), &tokenize(&pb.definition)),
        neighbor_sim: jaccard(&na, &nb),
        same_community,
    })
}

/// Merge candidates among same-community pattern pairs scoring at least
/// `threshold`, best first. Pairs the journal shows as rejected are skipped.
pub fn propose_candidates(
    graph: &TaxonomyGraph,
    partition: &Partition,
    threshold: f64,
    journal: &Journal,
) -> Result<Vec<ChangeCandidate>, MergeError> {
    propose_candidates_with(graph, partition, threshold, journal, SimilarityWeights::default())
}

pub fn propose_candidates_with(
    graph: &TaxonomyGraph,
    partition: &Partition,
    threshold: f64,
    journal: &Journal,
    weights: SimilarityWeights,
) -> Result<Vec<ChangeCandidate>, MergeError> {
    if !partition.covers(graph) {
        return Err(MergeError::PartitionMismatch);
    }
    let rejected = journal.rejected_kinds();
    let mut out = Vec::new();
    for members in partition.communities() {
        let patterns: Vec<&NodeId> = members.iter().filter(|id| graph.pattern(id).is_some()).collect();
        for (i, a) in patterns.iter().enumerate() {
            for b in &patterns[i + 1..] {
                let kind = CandidateKind::merge((*a).clone(), (*b).clone());
                if rejected.contains(&kind) {
                    continue;
                }
                let scores = score_pair(graph, a, b, true).expect("both endpoints are patterns");
                let total = weights.total(&scores);
                if total >= threshold {
                    let note = format!(
                        "name {:.3}, definition {:.3}, neighbours {:.3}",
                        scores.name_sim, scores.def_sim, scores.neighbor_sim
                    );
                    out.push(ChangeCandidate::auto(kind, scores, total, note));
                }
            }
        }
    }
    out.sort_by(|x, y| y.total.total_cmp(&x.total).then_with(|| x.id.cmp(&y.id)));
    Ok(out)
}

/// No proposals left and nothing approved waiting to be enacted.
pub fn is_saturated(
    graph: &TaxonomyGraph,
    partition: &Partition,
    threshold: f64,
    journal: &Journal,
    pending: &[ChangeCandidate],
) -> bool {
    if pending
        .iter()
        .any(|c| c.status == super::CandidateStatus::Approved)
    {
        return false;
    }
    match propose_candidates(graph, partition, threshold, journal) {
        Ok(found) => found.is_empty(),
        Err(e) => {
            log::debug!("saturation check on a foreign partition: {e}");
            false
        }
    }
}
