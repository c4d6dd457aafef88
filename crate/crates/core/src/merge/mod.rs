//! Change candidates, review, enactment and the change journal.

mod candidate;
mod enact;
mod journal;
mod session;
mod similarity;

use thiserror::Error;

use crate::graph::GraphError;

pub use candidate::{
    review, CandidateId, CandidateKind, CandidateStatus, ChangeCandidate, Origin, SimilarityScores,
    Verdict,
};
pub use enact::{choose_survivor, enact, remove_node, replay_record, EdgeDelta, EnactedChange, MergeRecord};
pub use journal::{changelog, Journal, JournalEvent, JournalRecord, JournalWriter, ParsedJournal};
pub use session::CurationState;
pub use similarity::{
    is_saturated, jaccard, propose_candidates, propose_candidates_with, score_pair, tokenize,
    SimilarityWeights, DEFAULT_THRESHOLD,
};

#[derive(Debug, Error)]
pub enum MergeError {
    #[error("partition does not cover the graph's nodes")]
    PartitionMismatch,
    #[error("candidate {id} cannot move from {from} to {to}")]
    InvalidTransition {
        id: CandidateId,
        from: CandidateStatus,
        to: CandidateStatus,
    },
    #[error("a review needs a non-empty rationale")]
    EmptyRationale,
    #[error("candidate {0} refers to a node that no longer exists")]
    StaleCandidate(CandidateId),
    #[error("unknown candidate {0}")]
    UnknownCandidate(CandidateId),
    #[error("invalid candidate: {0}")]
    InvalidCandidate(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("journal record {ordinal} does not replay: {detail}")]
    ReplayMismatch { ordinal: u64, detail: String },
    #[error("journal line {line} is malformed: {message}")]
    CorruptJournal { line: usize, message: String },
    #[error("journal i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl MergeError {
    /// True for errors caused by acting on out-of-date state.
    pub fn is_conflict(&self) -> bool {
        matches!(
            self,
            MergeError::InvalidTransition { .. }
                | MergeError::StaleCandidate(_)
                | MergeError::Graph(GraphError::AlreadyStripped(_))
        )
    }
}
