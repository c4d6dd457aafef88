use std::fmt;

use serde::{Deserialize, Serialize};

use super::MergeError;
use crate::graph::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CandidateId(String);

impl CandidateId {
    pub fn new(value: impl Into<String>) -> Self {
        Self(value.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CandidateKind {
    /// Merge two patterns; `a` sorts before `b`.
    Merge { a: NodeId, b: NodeId },
    /// Add an `Employs` edge.
    NewEdge { src: NodeId, dst: NodeId },
}

impl CandidateKind {
    /// Merge of an unordered pair, normalized so `a < b`.
    pub fn merge(x: NodeId, y: NodeId) -> Self {
        if x <= y {
            CandidateKind::Merge { a: x, b: y }
        } else {
            CandidateKind::Merge { a: y, b: x }
        }
    }

    // Slugs never contain `--`, so the separator is unambiguous and URL safe.
    pub fn candidate_id(&self) -> CandidateId {
        match self {
            CandidateKind::Merge { a, b } => CandidateId(format!("merge--{a}--{b}")),
            CandidateKind::NewEdge { src, dst } => CandidateId(format!("edge--{src}--{dst}")),
        }
    }

    pub fn endpoints(&self) -> (&NodeId, &NodeId) {
        match self {
            CandidateKind::Merge { a, b } => (a, b),
            CandidateKind::NewEdge { src, dst } => (src, dst),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CandidateKind::Merge { .. } => "merge",
            CandidateKind::NewEdge { .. } => "new_edge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScores {
    pub name_sim: f64,
    pub def_sim: f64,
    pub neighbor_sim: f64,
    pub same_community: bool,
}

impl SimilarityScores {
    pub const ZERO: SimilarityScores = SimilarityScores {
        name_sim: 0.0,
        def_sim: 0.0,
        neighbor_sim: 0.0,
        same_community: false,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStatus {
    Proposed,
    Approved,
    Rejected,
    Enacted,
}

impl fmt::Display for CandidateStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            CandidateStatus::Proposed => "proposed",
            CandidateStatus::Approved => "approved",
            CandidateStatus::Rejected => "rejected",
            CandidateStatus::Enacted => "enacted",
        };
        f.write_str(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Auto,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Approve,
    Reject,
}

/// A proposed merge or new edge awaiting, or past, human review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeCandidate {
    pub id: CandidateId,
    pub kind: CandidateKind,
    pub scores: SimilarityScores,
    pub total: f64,
    pub status: CandidateStatus,
    pub rationale: String,
    pub origin: Origin,
}

impl ChangeCandidate {
    pub(crate) fn auto(kind: CandidateKind, scores: SimilarityScores, total: f64, note: String) -> Self {
        Self {
            id: kind.candidate_id(),
            kind,
            scores,
            total,
            status: CandidateStatus::Proposed,
            rationale: note,
            origin: Origin::Auto,
        }
    }

    /// Human-proposed candidate. Humans may pair nodes across communities.
    pub fn human(
        kind: CandidateKind,
        scores: SimilarityScores,
        total: f64,
        rationale: impl Into<String>,
    ) -> Result<Self, MergeError> {
        let (x, y) = kind.endpoints();
        if x == y {
            return Err(MergeError::InvalidCandidate(format!(
                "{} endpoints must differ ({x})",
                kind.label()
            )));
        }
        let kind = match kind {
            CandidateKind::Merge { a, b } => CandidateKind::merge(a, b),
            edge => edge,
        };
        Ok(Self {
            id: kind.candidate_id(),
            kind,
            scores,
            total,
            status: CandidateStatus::Proposed,
            rationale: rationale.into(),
            origin: Origin::Human,
        })
    }

    pub fn is_pending(&self) -> bool {
        matches!(self.status, CandidateStatus::Proposed | CandidateStatus::Approved)
    }

    pub(crate) fn mark_enacted(&mut self) -> Result<(), MergeError> {
        if self.status != CandidateStatus::Approved {
            return Err(MergeError::InvalidTransition {
                id: self.id.clone(),
                from: self.status,
                to: CandidateStatus::Enacted,
            });
        }
        self.status = CandidateStatus::Enacted;
        Ok(())
    }
}

/// Record a reviewer's verdict. Only proposed candidates can be reviewed and
/// the rationale must say something.
pub fn review(
    candidate: &ChangeCandidate,
    verdict: Verdict,
    rationale: &str,
) -> Result<ChangeCandidate, MergeError> {
    let to = match verdict {
        Verdict::Approve => CandidateStatus::Approved,
        Verdict::Reject => CandidateStatus::Rejected,
    };
    if candidate.status != CandidateStatus::Proposed {
        return Err(MergeError::InvalidTransition {
            id: candidate.id.clone(),
            from: candidate.status,
            to,
        });
    }
    if rationale.trim().is_empty() {
        return Err(MergeError::EmptyRationale);
    }
    let mut next = candidate.clone();
    next.status = to;
    next.rationale = rationale.to_owned();
    Ok(next)
}
