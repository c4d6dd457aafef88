//! Persist curation steps to a journal file, lose the tail mid-write, and
//! recover the last complete state.
//!
//!     cargo run -p darkgraph --example journal_replay

use std::sync::Arc;

use darkgraph::corpus::seed_graph;
use darkgraph::merge::{CandidateKind, ChangeCandidate, CurationState, Journal, SimilarityScores, Verdict};
use darkgraph::service::persist_and_recover;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("darkgraph-journal-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("journal.jsonl");
    let _ = std::fs::remove_file(&path);

    let (ws, _) = persist_and_recover(&path, seed_graph())?;
    ws.mutate(|s| Ok(s.strip_taxonomy_nodes().map(|_| ())?))?;
    for (a, b, why) in [
        ("bait-and-change", "bait-and-switch", "same swap of the advertised offer"),
        ("trick-question", "trick-question-cnil", "same confusing wording"),
    ] {
        ws.mutate(|s| {
            let c = ChangeCandidate::human(CandidateKind::merge(a.into(), b.into()), SimilarityScores::ZERO, 0.0, why)?;
            let id = c.id.clone();
            s.submit(c)?;
            s.review(&id, Verdict::Approve, why)?;
            s.enact(&id)?;
            Ok(())
        })?;
    }
    let live: Arc<CurationState> = ws.snapshot();
    drop(ws);
    let bytes = std::fs::read(&path)?;
    println!("journal: {} records, {} bytes, graph v{}", live.journal().len(), bytes.len(), live.graph().version());

    // a crash in the middle of the last append
    std::fs::write(&path, &bytes[..bytes.len() - 40])?;
    let (ws, warnings) = persist_and_recover(&path, seed_graph())?;
    for w in &warnings {
        println!("recovery warning: {w}");
    }
    let recovered = ws.snapshot();
    println!(
        "recovered {} records, graph v{} ({} patterns)",
        recovered.journal().len(),
        recovered.graph().version(),
        recovered.graph().pattern_count()
    );

    // replaying the same prefix in memory gives the same graph
    let prefix = Journal::parse_jsonl(&std::fs::read_to_string(&path)?)?.journal;
    let replayed = CurationState::replay(seed_graph(), &prefix)?;
    println!("in-memory replay matches: {}", replayed.graph() == recovered.graph());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
