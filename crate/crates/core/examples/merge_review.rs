//! Propose merge candidates, review them and enact the approved one.
//!
//!     cargo run -p darkgraph --example merge_review [threshold]

use darkgraph::community::{consensus_detect, SeedSchedule};
use darkgraph::corpus::seed_graph;
use darkgraph::merge::{changelog, CurationState, EnactedChange, MergeError, Verdict};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let threshold: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.3);
    let mut state = CurationState::new(seed_graph());
    state.strip_taxonomy_nodes()?;

    let consensus = consensus_detect(state.graph(), 1.0, &SeedSchedule::from_base(0))?;
    let partition = consensus.selected_partition().clone();
    state.record_detection(consensus)?;
    let ids = state.propose(&partition, threshold)?;
    println!("{} candidate(s) at threshold {threshold}:", ids.len());
    for c in state.pending().into_iter().take(6) {
        println!("  {:.3}  {}  ({})", c.total, c.id, c.rationale);
    }

    let Some(best) = ids.first().cloned() else {
        return Ok(());
    };
    // enacting before a review is refused
    match state.enact(&best) {
        Err(MergeError::InvalidTransition { from, .. }) => println!("\nenact before review refused (status {from})"),
        other => println!("\nunexpected: {other:?}"),
    }
    state.review(&best, Verdict::Approve, "one pattern under two names")?;
    let record = state.enact(&best)?;
    if let EnactedChange::Merge { survivor, absorbed_name, survivor_name, .. } = &record.change {
        println!(
            "enacted #{} -> v{}: {absorbed_name} folded into {survivor_name}, in-degree now {}",
            record.ordinal,
            record.version_after,
            state.graph().in_degree(survivor)?
        );
    }

    for id in ids.iter().skip(1).take(2) {
        state.review(id, Verdict::Reject, "different mechanisms")?;
    }
    // the merge made the partition stale; rejected pairs stay rejected
    let consensus = consensus_detect(state.graph(), 1.0, &SeedSchedule::from_base(0))?;
    let partition = consensus.selected_partition().clone();
    state.record_detection(consensus)?;
    let again = state.propose(&partition, threshold)?;
    println!("re-proposal added {} candidate(s)\n", again.len());
    print!("{}", changelog(state.journal()));
    Ok(())
}
