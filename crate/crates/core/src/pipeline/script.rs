//! Decisions file for non-interactive pipeline runs.
//!
//! ```json
//! {
//!   "verdicts": [
//!     {"patterns": ["Bait and Switch", "Bait and Change"], "verdict": "approve", "rationale": "same trick"},
//!     {"candidate": "merge--nagging--interruption", "verdict": "reject", "rationale": "distinct"}
//!   ],
//!   "default": {"verdict": "reject", "rationale": "not a duplicate"},
//!   "singletons": {"Cuteness": {"action": "remove", "rationale": "out of scope"}},
//!   "max_iterations": 3
//! }
//! ```
//!
//! Pattern references are ids, canonical names or alias names.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Reviewer, SingletonAction, SingletonDecision};
use crate::graph::{NodeId, TaxonomyGraph};
use crate::merge::{CandidateId, ChangeCandidate, Verdict};

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("decisions file: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("decisions file names unknown pattern `{0}`")]
    UnknownName(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedVerdict {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<CandidateId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patterns: Option<[String; 2]>,
    pub verdict: Verdict,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefaultVerdict {
    pub verdict: Verdict,
    pub rationale: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionScript {
    #[serde(default)]
    pub verdicts: Vec<ScriptedVerdict>,
    #[serde(default)]
    pub default: Option<DefaultVerdict>,
    #[serde(default)]
    pub singletons: BTreeMap<String, SingletonDecision>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
}

fn resolve(graph: &TaxonomyGraph, reference: &str) -> Option<NodeId> {
    let id = NodeId::from(reference);
    if graph.contains(&id) {
        return Some(id);
    }
    graph.resolve_pattern_name(reference).map(|p| p.id.clone())
}

impl DecisionScript {
    pub fn parse(text: &str) -> Result<Self, ScriptError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Singleton decisions keyed by node id on `graph`.
    pub fn singleton_decisions(&self, graph: &TaxonomyGraph) -> Result<BTreeMap<NodeId, SingletonDecision>, ScriptError> {
        self.singletons
            .iter()
            .map(|(name, d)| {
                let id = resolve(graph, name).ok_or_else(|| ScriptError::UnknownName(name.clone()))?;
                let mut d = d.clone();
                if let SingletonAction::MergeWith(target) = &d.action {
                    let target = resolve(graph, target.as_str()).ok_or_else(|| ScriptError::UnknownName(target.to_string()))?;
                    d.action = SingletonAction::MergeWith(target);
                }
                Ok((id, d))
            })
            .collect()
    }
}

/// Reviewer driven by a [`DecisionScript`].
#[derive(Debug, Clone, Default)]
pub struct ScriptedReviewer {
    script: DecisionScript,
}

impl ScriptedReviewer {
    pub fn new(script: DecisionScript) -> Self {
        Self { script }
    }

    fn matches(graph: &TaxonomyGraph, rule: &ScriptedVerdict, candidate: &ChangeCandidate) -> bool {
        if let Some(id) = &rule.candidate {
            return id == &candidate.id;
        }
        let Some([x, y]) = &rule.patterns else {
            return false;
        };
        let (Some(x), Some(y)) = (resolve(graph, x), resolve(graph, y)) else {
            return false;
        };
        let (a, b) = candidate.kind.endpoints();
        (a, b) == (&x, &y) || (a, b) == (&y, &x)
    }
}

impl Reviewer for ScriptedReviewer {
    fn review(&mut self, graph: &TaxonomyGraph, candidate: &ChangeCandidate) -> Option<(Verdict, String)> {
        self.script
            .verdicts
            .iter()
            .find(|rule| Self::matches(graph, rule, candidate))
            .map(|rule| (rule.verdict, rule.rationale.clone()))
            .or_else(|| self.script.default.as_ref().map(|d| (d.verdict, d.rationale.clone())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::seed_graph;
    use crate::merge::{CandidateKind, SimilarityScores};

    const SCRIPT: &str = r#"{
        "verdicts": [
            {"patterns": ["Bait and Switch", "Bait and Change"], "verdict": "approve", "rationale": "same trick"}
        ],
        "default": {"verdict": "reject", "rationale": "not a duplicate"},
        "singletons": {
            "Cuteness": {"action": "remove", "rationale": "out of scope"},
            "Bait and Change": {"action": "merge_with", "target": "Bait and Switch", "rationale": "same trick"}
        }
    }"#;

    #[test]
    fn parses_and_matches() {
        let g = seed_graph();
        let script = DecisionScript::parse(SCRIPT).unwrap();
        let decisions = script.singleton_decisions(&g).unwrap();
        assert_eq!(decisions[&NodeId::from("cuteness")].action, SingletonAction::Remove);
        assert_eq!(
            decisions[&NodeId::from("bait-and-change")].action,
            SingletonAction::MergeWith("bait-and-switch".into())
        );

        let mut reviewer = ScriptedReviewer::new(script);
        let hit = ChangeCandidate::human(
            CandidateKind::merge("bait-and-change".into(), "bait-and-switch".into()),
            SimilarityScores::ZERO,
            0.5,
            "p",
        )
        .unwrap();
        assert_eq!(reviewer.review(&g, &hit).unwrap().0, Verdict::Approve);
        let miss = ChangeCandidate::human(
            CandidateKind::merge("nagging".into(), "interruption".into()),
            SimilarityScores::ZERO,
            0.5,
            "p",
        )
        .unwrap();
        assert_eq!(reviewer.review(&g, &miss).unwrap().0, Verdict::Reject);
    }

    #[test]
    fn rejects_unknown_fields_and_names() {
        assert!(DecisionScript::parse(r#"{"verdict": []}"#).is_err());
        let script = DecisionScript::parse(r#"{"singletons": {"Nope": {"action": "remove", "rationale": "x"}}}"#).unwrap();
        assert!(matches!(script.singleton_decisions(&seed_graph()), Err(ScriptError::UnknownName(_))));
    }
}
