//! Modularity and community detection over taxonomy graphs.
//!
//! Directed edges are symmetrized before detection: an edge in either
//! direction links two nodes with weight 1. Resolution scales the null-model
//! term linearly; the default is 1.0.

mod consensus;
mod louvain;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{compare_names, NodeId, TaxonomyGraph};

pub use consensus::{
    consensus_detect, consensus_detect_with, resolve_consensus, ConsensusConfig,
    DetectionConsensus, SeedSchedule,
};
pub use louvain::{louvain, Clustering, UndirectedGraph};
pub use report::community_report;

pub const DEFAULT_RESOLUTION: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommunityError {
    #[error("graph has no edges; modularity is undefined")]
    NoEdges,
    #[error("resolution must be a positive finite number, got {0}")]
    InvalidResolution(f64),
    #[error("membership covers {found} nodes but the graph has {expected}")]
    MembershipLength { expected: usize, found: usize },
    #[error("assignment has no community for node `{0}`")]
    Unassigned(NodeId),
    #[error("assignment names node `{0}` which is not in the graph")]
    ForeignNode(NodeId),
}

/// One detection result over a taxonomy graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub resolution: f64,
    pub seed: u64,
    /// Community index of every node, dense in `0..community_count`.
    pub assignment: BTreeMap<NodeId, usize>,
    pub modularity: f64,
    pub community_count: usize,
}

impl Partition {
    /// Members of each community, indexed by community.
    pub fn communities(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.community_count];
        for (id, &c) in &self.assignment {
            out[c].push(id.clone());
        }
        out
    }

    pub fn community_of(&self, id: &NodeId) -> Option<usize> {
        self.assignment.get(id).copied()
    }

    pub fn same_community(&self, a: &NodeId, b: &NodeId) -> bool {
        matches!((self.community_of(a), self.community_of(b)), (Some(x), Some(y)) if x == y)
    }

    /// True when the assignment covers exactly the nodes of `graph`.
    pub fn covers(&self, graph: &TaxonomyGraph) -> bool {
        self.assignment.len() == graph.node_count()
            && self.assignment.keys().all(|id| graph.contains(id))
    }

    /// Nodes that sit alone in their community.
    pub fn singletons(&self) -> Vec<NodeId> {
        self.communities()
            .into_iter()
            .filter(|members| members.len() == 1)
            .flatten()
            .collect()
    }

    /// Pattern with the highest in-degree in `community`, ties by name.
    pub fn main_pattern(&self, graph: &TaxonomyGraph, community: usize) -> Option<NodeId> {
        self.assignment
            .iter()
            .filter(|(_, &c)| c == community)
            .filter_map(|(id, _)| graph.pattern(id))
            .map(|p| (p, graph.in_degree(&p.id).unwrap_or(0)))
            .min_by(|(a, da), (b, db)| {
                db.cmp(da)
                    .then_with(|| compare_names(&a.canonical_name, &b.canonical_name))
            })
            .map(|(p, _)| p.id.clone())
    }
}

/// Symmetrized view of a taxonomy graph with node indices in ascending id
/// order.
pub fn undirected_view(graph: &TaxonomyGraph) -> (UndirectedGraph, Vec<NodeId>) {
    let ids = graph.node_ids();
    let index: BTreeMap<&NodeId, usize> = ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
    let edges = graph
        .edges()
        .iter()
        .filter_map(|e| Some((*index.get(&e.src)?, *index.get(&e.dst)?)));
    let view = UndirectedGraph::from_edges(ids.len(), edges);
    (view, ids)
}

/// Modularity of a node → community assignment over the symmetrized graph.
pub fn modularity(
    graph: &TaxonomyGraph,
    assignment: &BTreeMap<NodeId, usize>,
    resolution: f64,
) -> Result<f64, CommunityError> {
    let (view, ids) = undirected_view(graph);
    if let Some(foreign) = assignment.keys().find(|id| !graph.contains(id)) {
        return Err(CommunityError::ForeignNode(foreign.clone()));
    }
    let raw = ids
        .iter()
        .map(|id| {
            assignment
                .get(id)
                .copied()
                .ok_or_else(|| CommunityError::Unassigned(id.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (membership, _) = louvain::renumber(&raw);
    view.modularity(&membership, resolution)
}

/// Detect communities with one seeded Fast Unfolding run.
pub fn detect(graph: &TaxonomyGraph, resolution: f64, seed: u64) -> Result<Partition, CommunityError> {
    let (view, ids) = undirected_view(graph);
    let clustering = louvain(&view, resolution, seed)?;
    Ok(Partition {
        resolution,
        seed,
        assignment: ids.into_iter().zip(clustering.membership).collect(),
        modularity: clustering.modularity,
        community_count: clustering.community_count,
    })
}
