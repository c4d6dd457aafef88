//! Local HTTP service over a journaled curation workspace.
//!
//! Readers take the latest immutable snapshot. Mutations queue on one
//! writer lock, run against a private copy, append their journal records
//! (each flushed to disk) and only then publish the new snapshot.

mod http;
mod routes;

use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use thiserror::Error;

use crate::community::CommunityError;
use crate::corpus::{CorpusDocument, CorpusError};
use crate::graph::{GraphError, TaxonomyGraph};
use crate::heuristics::{default_rules, HeuristicRule, HeuristicsError};
use crate::merge::{CurationState, Journal, JournalWriter, MergeError};
use crate::pipeline::PipelineError;

pub use http::{serve, serve_on, ServeOptions, DEFAULT_ADDR};
pub use routes::Response;

pub const CORPUS_FILE: &str = "corpus.json";
pub const JOURNAL_FILE: &str = "journal.jsonl";

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("method {method} not allowed on {path}")]
    MethodNotAllowed { method: String, path: String },
    #[error(transparent)]
    Merge(#[from] MergeError),
    #[error(transparent)]
    Community(#[from] CommunityError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Heuristics(#[from] HeuristicsError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot failed validation: {0}")]
    Invalid(String),
}

fn graph_status(e: &GraphError) -> u16 {
    match e {
        GraphError::UnknownNode(_) => 404,
        GraphError::PolicyViolation(_) | GraphError::MissingAttribution(_) => 400,
        _ => 409,
    }
}

impl ServiceError {
    pub fn status(&self) -> u16 {
        match self {
            ServiceError::BadRequest(_) => 400,
            ServiceError::NotFound(_) => 404,
            ServiceError::Conflict(_) => 409,
            ServiceError::MethodNotAllowed { .. } => 405,
            ServiceError::Merge(m) => ServiceError::status_of_merge(m),
            ServiceError::Community(CommunityError::InvalidResolution(_)) => 400,
            ServiceError::Community(_) => 409,
            ServiceError::Pipeline(PipelineError::Merge(m)) => ServiceError::status_of_merge(m),
            ServiceError::Pipeline(PipelineError::UnknownNode(_)) => 404,
            ServiceError::Pipeline(PipelineError::Community(CommunityError::InvalidResolution(_))) => 400,
            ServiceError::Pipeline(_) => 409,
            ServiceError::Heuristics(_) => 400,
            ServiceError::Corpus(_) => 400,
            ServiceError::Graph(g) => graph_status(g),
            ServiceError::Io(_) | ServiceError::Invalid(_) => 500,
        }
    }

    fn status_of_merge(m: &MergeError) -> u16 {
        match m {
            MergeError::UnknownCandidate(_) => 404,
            MergeError::EmptyRationale | MergeError::InvalidCandidate(_) => 400,
            MergeError::Graph(g) => graph_status(g),
            MergeError::CorruptJournal { .. } | MergeError::Io(_) | MergeError::ReplayMismatch { .. } => 500,
            _ => 409,
        }
    }
}

struct Writer {
    journal: Option<JournalWriter>,
}

/// Shared curation workspace.
pub struct Workspace {
    base: TaxonomyGraph,
    snapshot: RwLock<Arc<CurationState>>,
    writer: Mutex<Writer>,
    rules: Vec<HeuristicRule>,
    dir: Option<PathBuf>,
}

impl std::fmt::Debug for Workspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Workspace")
            .field("version", &self.snapshot().graph().version())
            .field("dir", &self.dir)
            .finish()
    }
}

impl Workspace {
    /// Workspace without a journal file; nothing survives the process.
    pub fn in_memory(base: TaxonomyGraph) -> Self {
        Self::from_parts(base.clone(), CurationState::new(base), None, None)
    }

    fn from_parts(base: TaxonomyGraph, state: CurationState, journal: Option<JournalWriter>, dir: Option<PathBuf>) -> Self {
        Self {
            base,
            snapshot: RwLock::new(Arc::new(state)),
            writer: Mutex::new(Writer { journal }),
            rules: default_rules(),
            dir,
        }
    }

    pub fn with_rules(mut self, rules: Vec<HeuristicRule>) -> Self {
        self.rules = rules;
        self
    }

    pub fn rules(&self) -> &[HeuristicRule] {
        &self.rules
    }

    /// The v1.0 graph the journal replays onto.
    pub fn base(&self) -> &TaxonomyGraph {
        &self.base
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Latest published state.
    pub fn snapshot(&self) -> Arc<CurationState> {
        self.snapshot.read().expect("snapshot lock poisoned").clone()
    }

    /// Run `f` on a copy of the current state. New journal records are
    /// written and flushed before the copy becomes the published snapshot;
    /// on any error nothing is published.
    pub fn mutate<T>(&self, f: impl FnOnce(&mut CurationState) -> Result<T, ServiceError>) -> Result<T, ServiceError> {
        let mut writer = self.writer.lock().expect("writer lock poisoned");
        let current = self.snapshot();
        let mut next = (*current).clone();
        let before = next.journal().len();
        let out = f(&mut next)?;
        let violations = next.graph().validate();
        if !violations.is_empty() {
            return Err(ServiceError::Invalid(format!("{} violation(s)", violations.len())));
        }
        if let Some(journal) = writer.journal.as_mut() {
            for record in &next.journal().records()[before..] {
                journal.append(record).map_err(|e| match e {
                    MergeError::Io(io) => ServiceError::Io(io),
                    other => ServiceError::Merge(other),
                })?;
            }
        }
        *self.snapshot.write().expect("snapshot lock poisoned") = Arc::new(next);
        Ok(out)
    }

    /// Open the workspace in `dir`: `corpus.json` is the v1.0 corpus and
    /// `journal.jsonl` the change journal.
    pub fn open_dir(dir: &Path) -> Result<(Self, Vec<String>), ServiceError> {
        let text = std::fs::read_to_string(dir.join(CORPUS_FILE))?;
        let corpus = CorpusDocument::from_json(&text)?.to_graph()?;
        let (mut ws, warnings) = persist_and_recover(&dir.join(JOURNAL_FILE), corpus)?;
        ws.dir = Some(dir.to_owned());
        Ok((ws, warnings))
    }

    /// Create a workspace directory holding `corpus` and an empty journal.
    pub fn init_dir(dir: &Path, corpus: &CorpusDocument) -> Result<Self, ServiceError> {
        let graph = corpus.to_graph()?;
        std::fs::create_dir_all(dir)?;
        let journal = dir.join(JOURNAL_FILE);
        if journal.exists() && std::fs::metadata(&journal)?.len() > 0 {
            return Err(ServiceError::Conflict(format!(
                "{} already has a journal; refusing to replace its corpus",
                dir.display()
            )));
        }
        std::fs::write(dir.join(CORPUS_FILE), corpus.to_json())?;
        let (mut ws, _) = persist_and_recover(&journal, graph)?;
        ws.dir = Some(dir.to_owned());
        Ok(ws)
    }
}

/// Rebuild a workspace from `corpus` plus every record in the journal at
/// `journal_path`. A truncated tail line is dropped (and cut from the file)
/// with a warning; other malformed lines are `CorruptJournal`.
pub fn persist_and_recover(journal_path: &Path, corpus: TaxonomyGraph) -> Result<(Workspace, Vec<String>), ServiceError> {
    let parsed = Journal::load(journal_path)?;
    let state = CurationState::replay(corpus.clone(), &parsed.journal)?;
    let violations = state.graph().validate();
    if !violations.is_empty() {
        return Err(ServiceError::Invalid(format!("recovered graph has {} violation(s)", violations.len())));
    }
    let writer = JournalWriter::open(journal_path, parsed.valid_len)?;
    let ws = Workspace::from_parts(corpus, state, Some(writer), None);
    Ok((ws, parsed.warnings))
}
