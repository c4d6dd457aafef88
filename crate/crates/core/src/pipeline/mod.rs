//! Iterative detect → propose → review → enact loop, plus the staged
//! version transforms built on top of it.

mod script;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::{consensus_detect_with, CommunityError, ConsensusConfig, DetectionConsensus, Partition, SeedSchedule};
use crate::graph::{NodeId, TaxonomyGraph, Version, Violation};
use crate::merge::{
    CandidateKind, CandidateStatus, ChangeCandidate, CurationState, MergeError, MergeRecord,
    SimilarityScores, Verdict, DEFAULT_THRESHOLD,
};

pub use script::{DecisionScript, ScriptError, ScriptedReviewer, ScriptedVerdict};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("graph fails validation with {} violation(s)", .0.len())]
    InvalidGraph(Vec<Violation>),
    #[error(transparent)]
    Community(#[from] CommunityError),
    #[error(transparent)]
    Merge(#[from] MergeError),
    #[error("singleton `{0}` has no decision")]
    MissingDecision(NodeId),
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("invalid decision for `{node}`: {reason}")]
    InvalidDecision { node: NodeId, reason: String },
}

/// Supplies verdicts for proposed candidates. `None` leaves a candidate
/// pending for a later iteration.
pub trait Reviewer {
    fn review(&mut self, graph: &TaxonomyGraph, candidate: &ChangeCandidate) -> Option<(Verdict, String)>;
}

/// Leaves every candidate pending.
#[derive(Debug, Default, Clone, Copy)]
pub struct DeferAll;

impl Reviewer for DeferAll {
    fn review(&mut self, _: &TaxonomyGraph, _: &ChangeCandidate) -> Option<(Verdict, String)> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationConfig {
    pub resolution: f64,
    pub seeds: SeedSchedule,
    pub threshold: f64,
    pub consensus: ConsensusConfig,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            resolution: crate::community::DEFAULT_RESOLUTION,
            seeds: SeedSchedule::from_base(0),
            threshold: DEFAULT_THRESHOLD,
            consensus: ConsensusConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub version_before: Version,
    pub version_after: Version,
    pub consensus: DetectionConsensus,
    /// Candidates above threshold for this iteration's partition, with
    /// their status after review and enactment.
    pub candidates: Vec<ChangeCandidate>,
    pub enacted: Vec<MergeRecord>,
    pub saturated: bool,
}

/// One pass of the curation loop on `state`.
pub fn run_iteration(
    state: &mut CurationState,
    config: &IterationConfig,
    reviewer: &mut dyn Reviewer,
) -> Result<IterationReport, PipelineError> {
    let violations = state.graph().validate();
    if !violations.is_empty() {
        return Err(PipelineError::InvalidGraph(violations));
    }
    let version_before = state.graph().version();
    let consensus = consensus_detect_with(state.graph(), config.resolution, &config.seeds, config.consensus)?;
    let partition = consensus.selected_partition().clone();
    state.record_detection(consensus.clone())?;
    let saturated = state.is_saturated(&partition, config.threshold);

    state.propose(&partition, config.threshold)?;
    let proposed: Vec<ChangeCandidate> = state
        .pending()
        .into_iter()
        .filter(|c| c.status == CandidateStatus::Proposed)
        .cloned()
        .collect();
    for candidate in &proposed {
        if let Some((verdict, rationale)) = reviewer.review(state.graph(), candidate) {
            state.review(&candidate.id, verdict, &rationale)?;
        }
    }

    let approved: Vec<_> = state
        .pending()
        .into_iter()
        .filter(|c| c.status == CandidateStatus::Approved)
        .map(|c| c.id.clone())
        .collect();
    let mut enacted = Vec::new();
    for id in approved {
        // An earlier enactment in this batch may have withdrawn it.
        if state.candidate(&id).is_none_or(|c| !c.is_pending()) {
            log::info!("skipping {id}: withdrawn after an earlier merge");
            continue;
        }
        match state.enact(&id) {
            Ok(record) => enacted.push(record),
            Err(MergeError::StaleCandidate(_)) => log::info!("skipping stale candidate {id}"),
            Err(e) => return Err(e.into()),
        }
    }

    let candidates = proposed
        .iter()
        .map(|c| state.candidate(&c.id).cloned().unwrap_or_else(|| c.clone()))
        .collect();
    Ok(IterationReport {
        version_before,
        version_after: state.graph().version(),
        consensus,
        candidates,
        enacted,
        saturated,
    })
}

/// Iterate until saturation, until an iteration changes nothing, or until
/// `max_iterations` passes have run.
pub fn run_until_saturated(
    state: &mut CurationState,
    config: &IterationConfig,
    reviewer: &mut dyn Reviewer,
    max_iterations: usize,
) -> Result<Vec<IterationReport>, PipelineError> {
    let mut reports = Vec::new();
    for _ in 0..max_iterations {
        if state.graph().edges().is_empty() {
            log::info!("no edges left; nothing to detect");
            break;
        }
        let report = run_iteration(state, config, reviewer)?;
        let done = report.saturated || report.enacted.is_empty();
        reports.push(report);
        if done {
            break;
        }
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", content = "target", rename_all = "snake_case")]
pub enum SingletonAction {
    /// Link into this community through its main pattern.
    Integrate(usize),
    MergeWith(NodeId),
    Remove,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingletonDecision {
    #[serde(flatten)]
    pub action: SingletonAction,
    pub rationale: String,
}

impl SingletonDecision {
    pub fn new(action: SingletonAction, rationale: impl Into<String>) -> Self {
        Self {
            action,
            rationale: rationale.into(),
        }
    }
}

/// Resolve every single-pattern community in `partition`. Taxonomy nodes
/// are left alone; they are handled by stripping.
pub fn eliminate_single_node_communities(
    state: &mut CurationState,
    partition: &Partition,
    decisions: &BTreeMap<NodeId, SingletonDecision>,
) -> Result<Vec<MergeRecord>, PipelineError> {
    if !partition.covers(state.graph()) {
        return Err(MergeError::PartitionMismatch.into());
    }
    let singletons: Vec<NodeId> = partition
        .singletons()
        .into_iter()
        .filter(|id| state.graph().pattern(id).is_some())
        .collect();
    for id in decisions.keys() {
        if !state.graph().contains(id) {
            return Err(PipelineError::UnknownNode(id.clone()));
        }
        if !singletons.contains(id) {
            return Err(PipelineError::InvalidDecision {
                node: id.clone(),
                reason: "not a single-node community".into(),
            });
        }
    }
    let merge_targets: Vec<&NodeId> = decisions
        .values()
        .filter_map(|d| match &d.action {
            SingletonAction::MergeWith(t) => Some(t),
            _ => None,
        })
        .collect();
    if let Some(missing) = singletons
        .iter()
        .find(|id| !decisions.contains_key(*id) && !merge_targets.contains(id))
    {
        return Err(PipelineError::MissingDecision(missing.clone()));
    }

    let mut records = Vec::new();
    for node in singletons.iter().filter(|id| decisions.contains_key(*id)) {
        if !state.graph().contains(node) {
            log::info!("{node} was absorbed by an earlier decision");
            continue;
        }
        let decision = &decisions[node];
        let record = match &decision.action {
            SingletonAction::Remove => state.remove_node(node, &decision.rationale)?,
            SingletonAction::Integrate(community) => {
                let own = partition.community_of(node).expect("covered");
                if *community == own || *community >= partition.community_count {
                    return Err(PipelineError::InvalidDecision {
                        node: node.clone(),
                        reason: format!("community {community} is not another community of the partition"),
                    });
                }
                let main = partition
                    .main_pattern(state.graph(), *community)
                    .ok_or_else(|| PipelineError::InvalidDecision {
                        node: node.clone(),
                        reason: format!("community {community} has no live pattern"),
                    })?;
                let kind = CandidateKind::NewEdge { src: node.clone(), dst: main };
                human_enact(state, kind, &decision.rationale)?
            }
            SingletonAction::MergeWith(target) => {
                if !state.graph().contains(target) {
                    return Err(PipelineError::UnknownNode(target.clone()));
                }
                let kind = CandidateKind::merge(node.clone(), target.clone());
                human_enact(state, kind, &decision.rationale)?
            }
        };
        records.push(record);
    }
    Ok(records)
}

fn human_enact(state: &mut CurationState, kind: CandidateKind, rationale: &str) -> Result<MergeRecord, PipelineError> {
    let candidate = ChangeCandidate::human(kind, SimilarityScores::ZERO, 0.0, rationale)?;
    let id = candidate.id.clone();
    state.submit(candidate)?;
    state.review(&id, Verdict::Approve, rationale)?;
    Ok(state.enact(&id)?)
}
