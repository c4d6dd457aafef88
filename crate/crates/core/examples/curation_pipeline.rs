//! Non-interactive curation: iterate detection, candidate review and
//! enactment until saturation, then resolve single-node communities, all
//! driven by a decisions file.
//!
//!     cargo run -p darkgraph --example curation_pipeline [decisions.json]

use darkgraph::community::{consensus_detect_with, community_report};
use darkgraph::corpus::seed_graph;
use darkgraph::merge::{changelog, CurationState};
use darkgraph::pipeline::{eliminate_single_node_communities, run_until_saturated, DecisionScript, IterationConfig, ScriptedReviewer};

const DEMO: &str = include_str!("../data/demo.decisions.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => DEMO.to_owned(),
    };
    let script = DecisionScript::parse(&text)?;
    let config = IterationConfig::default();

    let mut state = CurationState::new(seed_graph());
    state.strip_taxonomy_nodes()?;
    let mut reviewer = ScriptedReviewer::new(script.clone());
    let reports = run_until_saturated(&mut state, &config, &mut reviewer, script.max_iterations.unwrap_or(5))?;
    for (i, r) in reports.iter().enumerate() {
        println!(
            "iteration {}: v{} -> v{}  {} communities  {} candidates  {} enacted  saturated={}",
            i + 1,
            r.version_before,
            r.version_after,
            r.consensus.winning_count(),
            r.candidates.len(),
            r.enacted.len(),
            r.saturated
        );
    }

    let consensus = consensus_detect_with(state.graph(), config.resolution, &config.seeds, config.consensus)?;
    let partition = consensus.selected_partition().clone();
    println!("{} single-node communities before elimination", partition.singletons().len());
    state.record_detection(consensus)?;
    let decisions = script.singleton_decisions(state.graph())?;
    let records = eliminate_single_node_communities(&mut state, &partition, &decisions)?;
    println!("{} resolved, graph now v{}\n", records.len(), state.graph().version());

    let after = consensus_detect_with(state.graph(), config.resolution, &config.seeds, config.consensus)?;
    print!("{}", community_report(state.graph(), after.selected_partition()));
    println!();
    print!("{}", changelog(state.journal()));
    Ok(())
}
