//! Consensus community detection over the stripped seed graph.
//!
//!     cargo run -p darkgraph --example detect_communities [seed] [resolution]

use darkgraph::community::{community_report, consensus_detect, modularity, SeedSchedule};
use darkgraph::corpus::seed_graph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let resolution: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1.0);

    let graph = seed_graph().strip_taxonomy_nodes()?;
    let consensus = consensus_detect(&graph, resolution, &SeedSchedule::from_base(seed))?;
    for (i, run) in consensus.runs.iter().enumerate() {
        let mark = if i == consensus.selected { "*" } else { " " };
        println!("{mark} run {i}: seed {:>20}  {} communities  Q = {:.6}", run.seed, run.community_count, run.modularity);
    }
    println!("histogram {:?}, extension runs {}", consensus.histogram, consensus.extensions);

    let chosen = consensus.selected_partition();
    let recomputed = modularity(&graph, &chosen.assignment, resolution)?;
    println!("recomputed Q = {recomputed:.6}\n");
    print!("{}", community_report(&graph, chosen));
    println!("\nsingle-node communities: {}", chosen.singletons().len());
    Ok(())
}
