use std::collections::{BTreeMap, BTreeSet};

use super::candidate::{review, CandidateId, CandidateStatus, ChangeCandidate, Verdict};
use super::enact::{enact, remove_node, replay_record, vanished_nodes, MergeRecord};
use super::journal::{Journal, JournalEvent, JournalRecord};
use super::similarity::{is_saturated, propose_candidates};
use super::MergeError;
use crate::community::{DetectionConsensus, Partition};
use crate::graph::{NodeId, TaxonomyGraph};

/// Graph snapshot, journal and candidate table. Every mutation is expressed
/// as a journal event and applied through one code path, so replaying the
/// journal over the starting graph rebuilds the same state.
#[derive(Debug, Clone, PartialEq)]
pub struct CurationState {
    graph: TaxonomyGraph,
    journal: Journal,
    candidates: BTreeMap<CandidateId, ChangeCandidate>,
    /// Pending candidates dropped because an endpoint disappeared.
    withdrawn: BTreeSet<CandidateId>,
    last_consensus: Option<DetectionConsensus>,
}

impl CurationState {
    pub fn new(graph: TaxonomyGraph) -> Self {
        Self {
            graph,
            journal: Journal::new(),
            candidates: BTreeMap::new(),
            withdrawn: BTreeSet::new(),
            last_consensus: None,
        }
    }

    /// Rebuild state by applying every journal record to `base`.
    pub fn replay(base: TaxonomyGraph, journal: &Journal) -> Result<Self, MergeError> {
        let mut state = Self::new(base);
        for record in journal.records() {
            state.apply(record.clone())?;
        }
        Ok(state)
    }

    pub fn graph(&self) -> &TaxonomyGraph {
        &self.graph
    }

    pub fn journal(&self) -> &Journal {
        &self.journal
    }

    pub fn last_consensus(&self) -> Option<&DetectionConsensus> {
        self.last_consensus.as_ref()
    }

    pub fn candidate(&self, id: &CandidateId) -> Option<&ChangeCandidate> {
        self.candidates.get(id)
    }

    pub fn is_withdrawn(&self, id: &CandidateId) -> bool {
        self.withdrawn.contains(id)
    }

    fn lookup(&self, id: &CandidateId) -> Result<&ChangeCandidate, MergeError> {
        if self.withdrawn.contains(id) {
            return Err(MergeError::StaleCandidate(id.clone()));
        }
        self.candidates
            .get(id)
            .ok_or_else(|| MergeError::UnknownCandidate(id.clone()))
    }

    /// Every known candidate, best score first.
    pub fn candidates(&self) -> Vec<&ChangeCandidate> {
        let mut all: Vec<_> = self.candidates.values().collect();
        all.sort_by(|a, b| b.total.total_cmp(&a.total).then_with(|| a.id.cmp(&b.id)));
        all
    }

    /// Proposed or approved candidates.
    pub fn pending(&self) -> Vec<&ChangeCandidate> {
        self.candidates().into_iter().filter(|c| c.is_pending()).collect()
    }

    pub fn is_saturated(&self, partition: &Partition, threshold: f64) -> bool {
        let pending: Vec<ChangeCandidate> = self.pending().into_iter().cloned().collect();
        is_saturated(&self.graph, partition, threshold, &self.journal, &pending)
    }

    fn apply(&mut self, record: JournalRecord) -> Result<(), MergeError> {
        if record.seq != self.journal.next_seq() {
            return Err(MergeError::ReplayMismatch {
                ordinal: record.seq,
                detail: format!("expected sequence {}", self.journal.next_seq()),
            });
        }
        match &record.event {
            JournalEvent::Detected { consensus } => {
                self.last_consensus = Some(consensus.clone());
            }
            JournalEvent::Proposed { candidate } => {
                if self.candidates.contains_key(&candidate.id) || self.withdrawn.contains(&candidate.id) {
                    return Err(MergeError::InvalidCandidate(format!(
                        "candidate {} is already known",
                        candidate.id
                    )));
                }
                if candidate.status != CandidateStatus::Proposed {
                    return Err(MergeError::InvalidCandidate(format!(
                        "candidate {} must enter as proposed",
                        candidate.id
                    )));
                }
                let (x, y) = candidate.kind.endpoints();
                for id in [x, y] {
                    if !self.graph.contains(id) {
                        return Err(MergeError::Graph(crate::graph::GraphError::UnknownNode(id.clone())));
                    }
                }
                self.candidates.insert(candidate.id.clone(), candidate.clone());
            }
            JournalEvent::Reviewed {
                candidate,
                kind,
                verdict,
                rationale,
            } => {
                let current = self
                    .candidates
                    .get(candidate)
                    .ok_or_else(|| MergeError::UnknownCandidate(candidate.clone()))?;
                if &current.kind != kind {
                    return Err(MergeError::InvalidCandidate(format!("kind of {candidate} changed")));
                }
                let next = review(current, *verdict, rationale)?;
                self.candidates.insert(candidate.clone(), next);
            }
            JournalEvent::Enacted { record: m } => {
                if m.ordinal != record.seq {
                    return Err(MergeError::ReplayMismatch {
                        ordinal: m.ordinal,
                        detail: format!("record ordinal differs from sequence {}", record.seq),
                    });
                }
                if let Some(id) = &m.candidate_id {
                    let c = self
                        .candidates
                        .get(id)
                        .ok_or_else(|| MergeError::UnknownCandidate(id.clone()))?;
                    if c.status != CandidateStatus::Approved {
                        return Err(MergeError::InvalidTransition {
                            id: id.clone(),
                            from: c.status,
                            to: CandidateStatus::Enacted,
                        });
                    }
                }
                let next = replay_record(&self.graph, m)?;
                if let Some(id) = &m.candidate_id {
                    self.candidates
                        .get_mut(id)
                        .expect("checked above")
                        .mark_enacted()?;
                }
                self.graph = next;
                self.withdraw_stale(m);
            }
            JournalEvent::Stripped { version_after } => {
                let next = self.graph.strip_taxonomy_nodes()?;
                if next.version() != *version_after {
                    return Err(MergeError::ReplayMismatch {
                        ordinal: record.seq,
                        detail: format!("strip produced {} not {version_after}", next.version()),
                    });
                }
                self.graph = next;
                let graph = &self.graph;
                let withdrawn = &mut self.withdrawn;
                self.candidates.retain(|id, c| {
                    let keep = !c.is_pending() || endpoints_live(graph, c);
                    if !keep {
                        withdrawn.insert(id.clone());
                    }
                    keep
                });
            }
        }
        self.journal.push(record.event);
        Ok(())
    }

    // Pending candidates touching a node that just disappeared can no longer
    // be enacted; they leave the table, while their history stays in the
    // journal.
    fn withdraw_stale(&mut self, record: &MergeRecord) {
        let gone = vanished_nodes(record);
        if gone.is_empty() {
            return;
        }
        let withdrawn = &mut self.withdrawn;
        self.candidates.retain(|id, c| {
            let (x, y) = c.kind.endpoints();
            let keep = !(c.is_pending() && (gone.contains(x) || gone.contains(y)));
            if !keep {
                withdrawn.insert(id.clone());
            }
            keep
        });
    }

    fn commit(&mut self, event: JournalEvent) -> Result<&JournalRecord, MergeError> {
        let record = JournalRecord {
            seq: self.journal.next_seq(),
            event,
        };
        self.apply(record)?;
        Ok(self.journal.records().last().expect("just applied"))
    }

    pub fn record_detection(&mut self, consensus: DetectionConsensus) -> Result<&JournalRecord, MergeError> {
        self.commit(JournalEvent::Detected { consensus })
    }

    /// Add a candidate built elsewhere (human proposals).
    pub fn submit(&mut self, candidate: ChangeCandidate) -> Result<&JournalRecord, MergeError> {
        self.commit(JournalEvent::Proposed { candidate })
    }

    /// Score `partition` and add every new candidate at or above `threshold`.
    /// Returns the ids that were added.
    pub fn propose(&mut self, partition: &Partition, threshold: f64) -> Result<Vec<CandidateId>, MergeError> {
        let found = propose_candidates(&self.graph, partition, threshold, &self.journal)?;
        let mut added = Vec::new();
        for candidate in found {
            if self.candidates.contains_key(&candidate.id) || self.withdrawn.contains(&candidate.id) {
                continue;
            }
            added.push(candidate.id.clone());
            self.commit(JournalEvent::Proposed { candidate })?;
        }
        Ok(added)
    }

    pub fn review(
        &mut self,
        id: &CandidateId,
        verdict: Verdict,
        rationale: &str,
    ) -> Result<&ChangeCandidate, MergeError> {
        let current = self.lookup(id)?;
        // Validate before journaling.
        review(current, verdict, rationale)?;
        let kind = current.kind.clone();
        self.commit(JournalEvent::Reviewed {
            candidate: id.clone(),
            kind,
            verdict,
            rationale: rationale.to_owned(),
        })?;
        Ok(&self.candidates[id])
    }

    pub fn enact(&mut self, id: &CandidateId) -> Result<MergeRecord, MergeError> {
        let candidate = self.lookup(id)?;
        let (_, record) = enact(&self.graph, candidate, self.journal.next_seq())?;
        self.commit(JournalEvent::Enacted { record: record.clone() })?;
        Ok(record)
    }

    pub fn remove_node(&mut self, node: &NodeId, rationale: &str) -> Result<MergeRecord, MergeError> {
        let (_, record) = remove_node(&self.graph, node, rationale, self.journal.next_seq())?;
        self.commit(JournalEvent::Enacted { record: record.clone() })?;
        Ok(record)
    }

    pub fn strip_taxonomy_nodes(&mut self) -> Result<&JournalRecord, MergeError> {
        let version_after = self.graph.strip_taxonomy_nodes()?.version();
        self.commit(JournalEvent::Stripped { version_after })
    }
}

fn endpoints_live(graph: &TaxonomyGraph, c: &ChangeCandidate) -> bool {
    let (x, y) = c.kind.endpoints();
    graph.contains(x) && graph.contains(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::{consensus_detect, SeedSchedule};
    use crate::corpus::seed_graph;
    use crate::merge::{CandidateKind, SimilarityScores};

    #[test]
    fn replay_matches_live_state() {
        let mut s = CurationState::new(seed_graph());
        s.strip_taxonomy_nodes().unwrap();
        let consensus = consensus_detect(s.graph(), 1.0, &SeedSchedule::from_base(11)).unwrap();
        let partition = consensus.selected_partition().clone();
        s.record_detection(consensus).unwrap();
        let ids = s.propose(&partition, 0.3).unwrap();
        assert!(!ids.is_empty());
        s.review(&ids[0], Verdict::Approve, "duplicate").unwrap();
        if ids.len() > 1 {
            s.review(&ids[1], Verdict::Reject, "distinct").unwrap();
        }
        s.enact(&ids[0]).unwrap();
        assert!(s.enact(&ids[0]).is_err());

        let replayed = CurationState::replay(seed_graph(), s.journal()).unwrap();
        assert_eq!(replayed.graph().canonical_json(), s.graph().canonical_json());
        assert_eq!(replayed, s);
        assert!(s.graph().validate().is_empty());
    }

    #[test]
    fn rejected_pairs_stay_rejected() {
        let mut s = CurationState::new(seed_graph().strip_taxonomy_nodes().unwrap());
        let p = consensus_detect(s.graph(), 1.0, &SeedSchedule::from_base(3))
            .unwrap()
            .selected_partition()
            .clone();
        let ids = s.propose(&p, 0.0).unwrap();
        s.review(&ids[0], Verdict::Reject, "no").unwrap();
        let again = propose_candidates(s.graph(), &p, 0.0, s.journal()).unwrap();
        assert!(again.iter().all(|c| c.id != ids[0]));
    }

    #[test]
    fn stale_pending_candidates_are_withdrawn() {
        let mut s = CurationState::new(seed_graph().strip_taxonomy_nodes().unwrap());
        let a = NodeId::from("bait-and-switch");
        let b = NodeId::from("bait-and-change");
        let c = NodeId::from("trick-question");
        for (x, y) in [(&a, &b), (&b, &c)] {
            let cand = ChangeCandidate::human(CandidateKind::merge(x.clone(), y.clone()), SimilarityScores::ZERO, 0.0, "h").unwrap();
            s.submit(cand).unwrap();
        }
        let first = CandidateKind::merge(a.clone(), b.clone()).candidate_id();
        s.review(&first, Verdict::Approve, "same trick").unwrap();
        let record = s.enact(&first).unwrap();
        let absorbed = vanished_nodes(&record);
        let second = CandidateKind::merge(b.clone(), c.clone()).candidate_id();
        assert_eq!(s.is_withdrawn(&second), s.candidate(&second).is_none());
        if s.is_withdrawn(&second) {
            assert!(matches!(s.review(&second, Verdict::Approve, "late"), Err(MergeError::StaleCandidate(_))));
        }
        for p in s.pending() {
            let (x, y) = p.kind.endpoints();
            assert!(!absorbed.contains(x) && !absorbed.contains(y));
        }
        assert_eq!(CurationState::replay(s.graph().clone(), &Journal::new()).unwrap().graph(), s.graph());
    }
}
