//! Heuristic rules derived from pattern communities, audit evaluation and
//! glyph manifests.

mod glyph;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{NodeId, TaxonomyGraph};

pub use glyph::{emit_glyph_manifest, render_badge, GlyphEntry, GlyphManifest};

const DEFAULT_RULES: &str = include_str!("../../data/default_rules.json");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeuristicsError {
    #[error("rules document, line {line} column {column}: {message}")]
    SyntaxError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("glyph code `{0}` is used by more than one rule")]
    DuplicateGlyph(String),
    #[error("rule id `{0}` appears more than once")]
    DuplicateRuleId(String),
    #[error("rule `{0}` has no trigger patterns")]
    EmptyTriggers(String),
    #[error("report names rule `{0}` which is not in the rule set")]
    RuleMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicRule {
    pub id: String,
    pub statement: String,
    pub community_label: String,
    pub trigger_patterns: BTreeSet<String>,
    pub glyph_code: String,
}

/// Parse a JSON list of rules and check ids, glyphs and triggers.
pub fn load_rules(text: &str) -> Result<Vec<HeuristicRule>, HeuristicsError> {
    let rules: Vec<HeuristicRule> = serde_json::from_str(text).map_err(|e| HeuristicsError::SyntaxError {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut ids = BTreeSet::new();
    let mut glyphs = BTreeSet::new();
    for rule in &rules {
        if !ids.insert(rule.id.as_str()) {
            return Err(HeuristicsError::DuplicateRuleId(rule.id.clone()));
        }
        if !glyphs.insert(rule.glyph_code.as_str()) {
            return Err(HeuristicsError::DuplicateGlyph(rule.glyph_code.clone()));
        }
        if rule.trigger_patterns.iter().all(|t| t.trim().is_empty()) {
            return Err(HeuristicsError::EmptyTriggers(rule.id.clone()));
        }
    }
    Ok(rules)
}

/// The bundled rule set, one rule per community of the seed corpus.
pub fn default_rules() -> Vec<HeuristicRule> {
    load_rules(DEFAULT_RULES).expect("bundled rules are valid")
}

pub fn default_rules_text() -> &'static str {
    DEFAULT_RULES
}

/// What an auditor found in one application.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Audit {
    #[serde(default)]
    pub subject: String,
    pub detected: BTreeSet<String>,
}

impl Audit {
    pub fn new<I, S>(subject: impl Into<String>, detected: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            subject: subject.into(),
            detected: detected.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleViolation {
    pub rule_id: String,
    /// Detected names that fired the rule.
    pub triggered_by: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub subject: String,
    pub detected: BTreeSet<String>,
    /// In rule-set order.
    pub violations: Vec<RuleViolation>,
    pub unmapped: BTreeSet<String>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

// Names compare case-insensitively; with a graph, two names also match when
// they resolve to the same pattern (canonical, alias or former name).
struct Matcher<'g> {
    graph: Option<&'g TaxonomyGraph>,
}

impl Matcher<'_> {
    fn key(&self, name: &str) -> (String, Option<NodeId>) {
        let node = self
            .graph
            .and_then(|g| g.resolve_pattern_name(name))
            .map(|p| p.id.clone());
        (name.trim().to_lowercase(), node)
    }

    fn same(a: &(String, Option<NodeId>), b: &(String, Option<NodeId>)) -> bool {
        a.0 == b.0 || matches!((&a.1, &b.1), (Some(x), Some(y)) if x == y)
    }
}

/// Evaluate `detected` names against `rules` by plain name comparison.
pub fn evaluate_audit(rules: &[HeuristicRule], detected: &BTreeSet<String>) -> AuditReport {
    evaluate_audit_with(rules, &Audit {
        subject: String::new(),
        detected: detected.clone(),
    }, None)
}

/// Evaluate an audit. When `graph` is given, names resolve through pattern
/// aliases so rules keep firing after merges.
pub fn evaluate_audit_with(rules: &[HeuristicRule], audit: &Audit, graph: Option<&TaxonomyGraph>) -> AuditReport {
    let matcher = Matcher { graph };
    let detected: Vec<(&String, (String, Option<NodeId>))> =
        audit.detected.iter().map(|d| (d, matcher.key(d))).collect();
    let mut mapped = BTreeSet::new();
    let mut violations = Vec::new();
    for rule in rules {
        let triggers: Vec<_> = rule.trigger_patterns.iter().map(|t| matcher.key(t)).collect();
        let fired: BTreeSet<String> = detected
            .iter()
            .filter(|(_, key)| triggers.iter().any(|t| Matcher::same(key, t)))
            .map(|(name, _)| (*name).clone())
            .collect();
        if !fired.is_empty() {
            mapped.extend(fired.iter().cloned());
            violations.push(RuleViolation {
                rule_id: rule.id.clone(),
                triggered_by: fired,
            });
        }
    }
    AuditReport {
        subject: audit.subject.clone(),
        detected: audit.detected.clone(),
        violations,
        unmapped: audit.detected.difference(&mapped).cloned().collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DanglingTrigger {
    pub rule_id: String,
    pub trigger: String,
}

/// Triggers that no longer resolve to a pattern in `graph`.
pub fn lint_rules(rules: &[HeuristicRule], graph: &TaxonomyGraph) -> Vec<DanglingTrigger> {
    rules
        .iter()
        .flat_map(|r| {
            r.trigger_patterns
                .iter()
                .filter(|t| graph.resolve_pattern_name(t).is_none())
                .map(|t| DanglingTrigger {
                    rule_id: r.id.clone(),
                    trigger: t.clone(),
                })
        })
        .collect()
}

/// Rules indexed by id.
pub fn rules_by_id(rules: &[HeuristicRule]) -> BTreeMap<&str, &HeuristicRule> {
    rules.iter().map(|r| (r.id.as_str(), r)).collect()
}
