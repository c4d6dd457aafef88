//! Append-only change journal stored as JSON Lines.
//!
//! Every append is written as one complete line and flushed with
//! `sync_data` before the call returns, so an acknowledged record survives a
//! crash. A crash mid-write can leave a partial last line; loading drops it
//! with a warning. A malformed line anywhere else is corruption.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::candidate::{CandidateId, CandidateKind, ChangeCandidate, Verdict};
use super::enact::{EnactedChange, MergeRecord};
use super::MergeError;
use crate::community::DetectionConsensus;
use crate::graph::Version;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum JournalEvent {
    Detected {
        consensus: DetectionConsensus,
    },
    Proposed {
        candidate: ChangeCandidate,
    },
    Reviewed {
        candidate: CandidateId,
        kind: CandidateKind,
        verdict: Verdict,
        rationale: String,
    },
    Enacted {
        record: MergeRecord,
    },
    Stripped {
        version_after: Version,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalRecord {
    pub seq: u64,
    #[serde(flatten)]
    pub event: JournalEvent,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Journal {
    records: Vec<JournalRecord>,
}

/// Result of parsing a journal file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedJournal {
    pub journal: Journal,
    /// Byte length of the valid prefix; anything after it was discarded.
    pub valid_len: usize,
    pub warnings: Vec<String>,
}

impl Journal {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[JournalRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn next_seq(&self) -> u64 {
        self.records.last().map_or(1, |r| r.seq + 1)
    }

    /// Append `event` under the next sequence number.
    pub fn push(&mut self, event: JournalEvent) -> &JournalRecord {
        let seq = self.next_seq();
        self.records.push(JournalRecord { seq, event });
        self.records.last().expect("just pushed")
    }

    /// The first `n` records.
    pub fn prefix(&self, n: usize) -> Journal {
        Journal {
            records: self.records[..n.min(self.records.len())].to_vec(),
        }
    }

    pub fn enacted(&self) -> impl Iterator<Item = &MergeRecord> {
        self.records.iter().filter_map(|r| match &r.event {
            JournalEvent::Enacted { record } => Some(record),
            _ => None,
        })
    }

    /// Candidate kinds that a reviewer rejected at some point.
    pub fn rejected_kinds(&self) -> BTreeSet<CandidateKind> {
        self.records
            .iter()
            .filter_map(|r| match &r.event {
                JournalEvent::Reviewed {
                    kind,
                    verdict: Verdict::Reject,
                    ..
                } => Some(kind.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn to_jsonl(&self) -> String {
        self.records.iter().map(|r| encode_line(r) + "\n").collect()
    }

    pub fn parse_jsonl(text: &str) -> Result<ParsedJournal, MergeError> {
        let mut records: Vec<JournalRecord> = Vec::new();
        let mut warnings = Vec::new();
        let mut offset = 0;
        let mut valid_len = 0;
        let lines: Vec<&str> = text.split_inclusive('\n').collect();
        let last_content = lines.iter().rposition(|l| !l.trim().is_empty());
        for (i, raw) in lines.iter().enumerate() {
            offset += raw.len();
            let line = raw.trim();
            if line.is_empty() {
                valid_len = offset;
                continue;
            }
            let parsed = serde_json::from_str::<JournalRecord>(line)
                .map_err(|e| e.to_string())
                .and_then(|r| match records.last() {
                    Some(prev) if r.seq <= prev.seq => {
                        Err(format!("sequence {} does not follow {}", r.seq, prev.seq))
                    }
                    _ => Ok(r),
                });
            match parsed {
                Ok(record) => {
                    records.push(record);
                    valid_len = offset;
                }
                Err(message) if Some(i) == last_content => {
                    warnings.push(format!("line {}: truncated trailing record discarded ({message})", i + 1));
                }
                Err(message) => return Err(MergeError::CorruptJournal { line: i + 1, message }),
            }
        }
        for w in &warnings {
            log::warn!("journal: {w}");
        }
        Ok(ParsedJournal {
            journal: Journal { records },
            valid_len,
            warnings,
        })
    }

    /// Load a journal file. A missing file is an empty journal.
    pub fn load(path: &Path) -> Result<ParsedJournal, MergeError> {
        match std::fs::read_to_string(path) {
            Ok(text) => Self::parse_jsonl(&text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(ParsedJournal {
                journal: Journal::new(),
                valid_len: 0,
                warnings: Vec::new(),
            }),
            Err(e) => Err(e.into()),
        }
    }
}

fn encode_line(record: &JournalRecord) -> String {
    serde_json::to_string(record).expect("journal records always serialize")
}

/// Durable appender for a journal file.
#[derive(Debug)]
pub struct JournalWriter {
    file: File,
}

impl JournalWriter {
    /// Open `path` for appending, first cutting it back to `valid_len` bytes
    /// so a discarded partial line is not followed by new records.
    pub fn open(path: &Path, valid_len: usize) -> Result<Self, MergeError> {
        let mut file = OpenOptions::new().create(true).read(true).append(true).open(path)?;
        if file.metadata()?.len() > valid_len as u64 {
            file.set_len(valid_len as u64)?;
            file.sync_data()?;
        }
        if valid_len > 0 {
            let mut last = [0u8];
            file.seek(SeekFrom::Start(valid_len as u64 - 1))?;
            file.read_exact(&mut last)?;
            if last[0] != b'\n' {
                file.write_all(b"\n")?;
                file.sync_data()?;
            }
        }
        Ok(Self { file })
    }

    pub fn append(&mut self, record: &JournalRecord) -> Result<(), MergeError> {
        let mut line = encode_line(record);
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        Ok(())
    }
}

/// Human-readable log of every enacted change, in ordinal order.
pub fn changelog(journal: &Journal) -> String {
    let mut out = String::from("# Change log\n");
    let mut entries: Vec<(u64, String)> = Vec::new();
    for record in journal.records() {
        match &record.event {
            JournalEvent::Enacted { record: m } => {
                let (kind, body) = match &m.change {
                    EnactedChange::Merge {
                        survivor_name,
                        absorbed_name,
                        citations,
                        ..
                    } => (
                        "merge",
                        format!("{absorbed_name} -> {survivor_name} [{}]", citations.join(", ")),
                    ),
                    EnactedChange::NewEdge { src, dst } => ("new edge", format!("{src} employs {dst}")),
                    EnactedChange::Removal { name, citations, .. } => {
                        ("removal", format!("{name} [{}]", citations.join(", ")))
                    }
                };
                let mut entry = String::new();
                write!(
                    entry,
                    "\n## {} (#{})  {kind}: {body}\nedges +{} -{}\n{}\n",
                    m.version_after, m.ordinal, m.edge_delta.added, m.edge_delta.removed, m.rationale
                )
                .unwrap();
                entries.push((m.ordinal, entry));
            }
            JournalEvent::Stripped { version_after } => {
                entries.push((
                    record.seq,
                    format!("\n## {version_after} (#{})  strip: taxonomy nodes removed\n", record.seq),
                ));
            }
            _ => {}
        }
    }
    entries.sort_by_key(|(ordinal, _)| *ordinal);
    for (_, entry) in entries {
        out.push_str(&entry);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merge::EdgeDelta;

    fn stripped(major: u32) -> JournalEvent {
        JournalEvent::Stripped {
            version_after: Version::new(major, 0),
        }
    }

    fn merge_event(ordinal: u64, survivor: &str, absorbed: &str, cites: &[&str]) -> JournalEvent {
        JournalEvent::Enacted {
            record: MergeRecord {
                ordinal,
                version_after: Version::new(3, ordinal as u32),
                candidate_id: None,
                change: EnactedChange::Merge {
                    survivor: survivor.into(),
                    absorbed: absorbed.into(),
                    survivor_name: survivor.into(),
                    absorbed_name: absorbed.into(),
                    citations: cites.iter().map(|s| s.to_string()).collect(),
                },
                edge_delta: EdgeDelta::default(),
                rationale: format!("reason {ordinal}"),
            },
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let mut j = Journal::new();
        j.push(stripped(3));
        j.push(merge_event(2, "a", "b", &["A2000"]));
        let parsed = Journal::parse_jsonl(&j.to_jsonl()).unwrap();
        assert_eq!(parsed.journal, j);
        assert!(parsed.warnings.is_empty());
        assert_eq!(parsed.valid_len, j.to_jsonl().len());
    }

    #[test]
    fn detection_round_trip() {
        let graph = crate::corpus::seed_graph();
        let consensus = crate::community::consensus_detect(&graph, 1.0, &crate::community::SeedSchedule::from_base(0)).unwrap();
        let mut j = Journal::new();
        j.push(JournalEvent::Detected { consensus });
        let parsed = Journal::parse_jsonl(&j.to_jsonl()).unwrap();
        assert_eq!(parsed.journal, j);
    }

    #[test]
    fn truncated_tail_is_dropped() {
        let mut j = Journal::new();
        j.push(stripped(3));
        let mut text = j.to_jsonl();
        let full = text.len();
        text.push_str("{\"seq\":2,\"event\":\"str");
        let parsed = Journal::parse_jsonl(&text).unwrap();
        assert_eq!(parsed.journal.len(), 1);
        assert_eq!(parsed.valid_len, full);
        assert_eq!(parsed.warnings.len(), 1);
    }

    #[test]
    fn garbage_in_the_middle_is_corrupt() {
        let mut j = Journal::new();
        j.push(stripped(3));
        j.push(merge_event(2, "a", "b", &[]));
        let lines: Vec<String> = j.to_jsonl().lines().map(String::from).collect();
        let text = format!("{}\nnot json\n{}\n", lines[0], lines[1]);
        match Journal::parse_jsonl(&text) {
            Err(MergeError::CorruptJournal { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn changelog_entries() {
        assert_eq!(changelog(&Journal::new()), "# Change log\n");
        let mut j = Journal::new();
        for (i, (s, a)) in [("a", "b"), ("c", "d"), ("e", "f")].into_iter().enumerate() {
            j.push(merge_event(i as u64 + 1, s, a, &["Brignull2010", "CNIL2020"]));
        }
        let log = changelog(&j);
        let heads: Vec<&str> = log.lines().filter(|l| l.starts_with("## ")).collect();
        assert_eq!(heads.len(), 3);
        assert!(heads[0].contains("#1") && heads[2].contains("#3"));
        assert!(heads[0].contains("Brignull2010") && heads[0].contains("CNIL2020"));
    }

    #[test]
    fn writer_truncates_partial_tail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("journal.jsonl");
        let mut j = Journal::new();
        j.push(stripped(3));
        std::fs::write(&path, j.to_jsonl() + "{\"seq\":").unwrap();
        let parsed = Journal::load(&path).unwrap();
        let mut w = JournalWriter::open(&path, parsed.valid_len).unwrap();
        let mut j2 = parsed.journal.clone();
        let rec = j2.push(merge_event(2, "a", "b", &[])).clone();
        w.append(&rec).unwrap();
        let back = Journal::load(&path).unwrap();
        assert!(back.warnings.is_empty());
        assert_eq!(back.journal, j2);
    }
}
