//! Route table shared by the HTTP transport, tests and the CLI.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{ServiceError, Workspace};
use crate::community::{consensus_detect_with, ConsensusConfig, DetectionConsensus, SeedSchedule, DEFAULT_RESOLUTION};
use crate::graph::TaxonomyGraph;
use crate::heuristics::{emit_glyph_manifest, evaluate_audit_with, Audit};
use crate::merge::{changelog, CandidateId, CandidateKind, ChangeCandidate, CurationState, SimilarityScores, SimilarityWeights, Verdict, DEFAULT_THRESHOLD};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Response {
    pub status: u16,
    pub body: Value,
}

impl Response {
    fn ok(body: Value) -> Self {
        Self { status: 200, body }
    }

    fn error(e: &ServiceError) -> Self {
        Self {
            status: e.status(),
            body: json!({ "error": e.to_string() }),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectBody {
    #[serde(default)]
    resolution: Option<f64>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    runs: Option<usize>,
    #[serde(default)]
    threshold: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerdictBody {
    #[serde(default)]
    verdict: Option<Verdict>,
    #[serde(default)]
    approve: Option<bool>,
    #[serde(default)]
    rationale: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubmitBody {
    kind: CandidateKind,
    rationale: String,
}

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ServiceError> {
    let body = if body.iter().all(u8::is_ascii_whitespace) { b"{}" as &[u8] } else { body };
    serde_json::from_slice(body).map_err(|e| ServiceError::BadRequest(format!("malformed body: {e}")))
}

fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("response payloads serialize")
}

fn graph_document(graph: &TaxonomyGraph) -> Value {
    json!({
        "version": graph.version().to_string(),
        "pattern_count": graph.pattern_count(),
        "taxonomy_count": graph.taxonomy_count(),
        "edge_count": graph.edges().len(),
        "graph": to_value(graph),
    })
}

fn consensus_document(state: &CurationState, consensus: &DetectionConsensus) -> Value {
    let graph = state.graph();
    let partition = consensus.selected_partition();
    // The partition may predate later merges; report live members only.
    let communities: Vec<Value> = partition
        .communities()
        .into_iter()
        .enumerate()
        .map(|(c, members)| {
            let members: Vec<Value> = members
                .iter()
                .filter(|id| graph.contains(id))
                .map(|id| {
                    json!({
                        "id": id,
                        "name": graph.display_name(id),
                        "in_degree": graph.in_degree(id).unwrap_or(0),
                    })
                })
                .collect();
            json!({
                "id": c,
                "size": members.len(),
                "main_pattern": partition.main_pattern(graph, c),
                "members": members,
            })
        })
        .collect();
    json!({
        "graph_version": graph.version().to_string(),
        "current": partition.covers(graph),
        "modularity": partition.modularity,
        "resolution": partition.resolution,
        "seed": partition.seed,
        "community_count": partition.community_count,
        "histogram": consensus.histogram,
        "runs": consensus.runs.iter().map(|r| json!({"seed": r.seed, "community_count": r.community_count, "modularity": r.modularity})).collect::<Vec<_>>(),
        "extensions": consensus.extensions,
        "tie_unresolved": consensus.tie_unresolved,
        "communities": communities,
    })
}

fn candidate_document(state: &CurationState, c: &ChangeCandidate) -> Value {
    let graph = state.graph();
    let describe = |id: &crate::graph::NodeId| match graph.pattern(id) {
        Some(p) => json!({
            "id": p.id,
            "name": p.canonical_name,
            "aliases": p.aliases,
            "definition": p.definition,
            "in_degree": graph.in_degree(id).unwrap_or(0),
        }),
        None => json!({ "id": id, "name": graph.display_name(id) }),
    };
    let (x, y) = c.kind.endpoints();
    let community = state
        .last_consensus()
        .map(|k| k.selected_partition())
        .and_then(|p| p.community_of(x).filter(|_| p.same_community(x, y)));
    let mut doc = to_value(c);
    doc["endpoints"] = json!([describe(x), describe(y)]);
    doc["community"] = json!(community);
    doc
}

impl Workspace {
    /// Dispatch one request. Query strings are accepted on GET /candidates
    /// (`?status=all`) and ignored elsewhere.
    pub fn handle_request(&self, method: &str, path: &str, body: &[u8]) -> Response {
        match self.route(method, path, body) {
            Ok(r) => r,
            Err(e) => {
                if e.status() >= 500 {
                    log::error!("{method} {path}: {e}");
                }
                Response::error(&e)
            }
        }
    }

    fn route(&self, method: &str, path: &str, body: &[u8]) -> Result<Response, ServiceError> {
        let (path, query) = path.split_once('?').unwrap_or((path, ""));
        let segments: Vec<&str> = path.trim_matches('/').split('/').filter(|s| !s.is_empty()).collect();
        let method = method.to_ascii_uppercase();
        if method == "OPTIONS" {
            return Ok(Response { status: 204, body: Value::Null });
        }
        let not_allowed = || ServiceError::MethodNotAllowed {
            method: method.clone(),
            path: path.to_owned(),
        };
        match segments.as_slice() {
            ["graph"] => match method.as_str() {
                "GET" => Ok(Response::ok(graph_document(self.snapshot().graph()))),
                _ => Err(not_allowed()),
            },
            ["communities"] => match method.as_str() {
                "GET" => {
                    let state = self.snapshot();
                    Ok(Response::ok(match state.last_consensus() {
                        Some(c) => consensus_document(&state, c),
                        None => json!({ "graph_version": state.graph().version().to_string(), "communities": null }),
                    }))
                }
                _ => Err(not_allowed()),
            },
            ["detect"] => match method.as_str() {
                "POST" => self.detect(parse_body(body)?),
                _ => Err(not_allowed()),
            },
            ["candidates"] => match method.as_str() {
                "GET" => {
                    let all = query.split('&').any(|kv| kv == "status=all");
                    let state = self.snapshot();
                    let list: Vec<Value> = if all { state.candidates() } else { state.pending() }
                        .into_iter()
                        .map(|c| candidate_document(&state, c))
                        .collect();
                    Ok(Response::ok(json!({ "candidates": list })))
                }
                "POST" => {
                    let req: SubmitBody = parse_body(body)?;
                    let state = self.snapshot();
                    let (x, y) = req.kind.endpoints();
                    let same = state
                        .last_consensus()
                        .is_some_and(|c| c.selected_partition().same_community(x, y));
                    let scores = crate::merge::score_pair(state.graph(), x, y, same).unwrap_or(SimilarityScores {
                        same_community: same,
                        ..SimilarityScores::ZERO
                    });
                    let total = SimilarityWeights::default().total(&scores);
                    let candidate = ChangeCandidate::human(req.kind, scores, total, req.rationale)?;
                    let id = candidate.id.clone();
                    self.mutate(|s| Ok(s.submit(candidate).map(|_| ())?))?;
                    let state = self.snapshot();
                    let c = state.candidate(&id).expect("just submitted");
                    Ok(Response::ok(candidate_document(&state, c)))
                }
                _ => Err(not_allowed()),
            },
            ["candidates", id, "verdict"] => match method.as_str() {
                "POST" => {
                    let req: VerdictBody = parse_body(body)?;
                    let verdict = match (req.verdict, req.approve) {
                        (Some(v), None) => v,
                        (None, Some(true)) => Verdict::Approve,
                        (None, Some(false)) => Verdict::Reject,
                        _ => {
                            return Err(ServiceError::BadRequest(
                                "give exactly one of `verdict` or `approve`".into(),
                            ))
                        }
                    };
                    let id = CandidateId::new(*id);
                    let updated = self.mutate(|s| Ok(s.review(&id, verdict, &req.rationale)?.clone()))?;
                    Ok(Response::ok(candidate_document(&self.snapshot(), &updated)))
                }
                _ => Err(not_allowed()),
            },
            ["enact", id] => match method.as_str() {
                "POST" => {
                    let id = CandidateId::new(*id);
                    let record = self.mutate(|s| Ok(s.enact(&id)?))?;
                    let state = self.snapshot();
                    Ok(Response::ok(json!({
                        "record": record,
                        "version": state.graph().version().to_string(),
                        "pattern_count": state.graph().pattern_count(),
                    })))
                }
                _ => Err(not_allowed()),
            },
            ["strip"] => match method.as_str() {
                "POST" => {
                    let version = self.mutate(|s| {
                        s.strip_taxonomy_nodes()?;
                        Ok(s.graph().version())
                    })?;
                    Ok(Response::ok(json!({ "version": version.to_string() })))
                }
                _ => Err(not_allowed()),
            },
            ["changelog"] => match method.as_str() {
                "GET" => Ok(Response::ok(json!({ "changelog": changelog(self.snapshot().journal()) }))),
                _ => Err(not_allowed()),
            },
            ["audit"] => match method.as_str() {
                "POST" => {
                    let audit: Audit = parse_body(body)?;
                    let state = self.snapshot();
                    let report = evaluate_audit_with(self.rules(), &audit, Some(state.graph()));
                    let manifest = emit_glyph_manifest(&report, self.rules())?;
                    Ok(Response::ok(json!({ "report": report, "manifest": manifest })))
                }
                _ => Err(not_allowed()),
            },
            ["prominence"] => match method.as_str() {
                "GET" => {
                    let state = self.snapshot();
                    let graph = state.graph();
                    let ranking: Vec<Value> = graph
                        .prominence_ranking()?
                        .into_iter()
                        .map(|(id, d)| json!({ "id": id, "name": graph.display_name(&id), "in_degree": d }))
                        .collect();
                    Ok(Response::ok(json!({ "version": graph.version().to_string(), "ranking": ranking })))
                }
                _ => Err(not_allowed()),
            },
            _ => Err(ServiceError::NotFound(format!("no route for {path}"))),
        }
    }

    fn detect(&self, req: DetectBody) -> Result<Response, ServiceError> {
        let resolution = req.resolution.unwrap_or(DEFAULT_RESOLUTION);
        let seeds = SeedSchedule::from_base(req.seed.unwrap_or(0));
        let threshold = req.threshold.unwrap_or(DEFAULT_THRESHOLD);
        if !(0.0..=1.0).contains(&threshold) {
            return Err(ServiceError::BadRequest(format!("threshold {threshold} is outside [0, 1]")));
        }
        let config = ConsensusConfig {
            initial_runs: req.runs.unwrap_or(ConsensusConfig::default().initial_runs).max(1),
            ..ConsensusConfig::default()
        };
        let proposed = self.mutate(|s| {
            let consensus = consensus_detect_with(s.graph(), resolution, &seeds, config)?;
            let partition = consensus.selected_partition().clone();
            s.record_detection(consensus)?;
            Ok(s.propose(&partition, threshold)?)
        })?;
        let state = self.snapshot();
        let mut doc = consensus_document(&state, state.last_consensus().expect("just detected"));
        doc["proposed"] = to_value(&proposed);
        Ok(Response::ok(doc))
    }
}
