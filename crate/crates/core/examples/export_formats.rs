//! Export the seed graph with its communities to GEXF and DOT, then read the
//! GEXF back and compare.
//!
//!     cargo run -p darkgraph --example export_formats [out-dir]

use std::collections::BTreeSet;
use std::path::PathBuf;

use darkgraph::community::detect;
use darkgraph::corpus::{export_graph, import_gexf, seed_graph, ExportFormat};
use darkgraph::graph::TaxonomyGraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().display().to_string()));
    let graph = seed_graph().strip_taxonomy_nodes()?;
    let partition = detect(&graph, 1.0, 7)?;

    let gexf = export_graph(&graph, ExportFormat::Gexf, Some(&partition));
    let dot = export_graph(&graph, ExportFormat::Dot, Some(&partition));
    std::fs::write(out.join("darkgraph.gexf"), &gexf)?;
    std::fs::write(out.join("darkgraph.dot"), &dot)?;
    println!("wrote {} ({} bytes) and {} ({} bytes)", out.join("darkgraph.gexf").display(), gexf.len(), out.join("darkgraph.dot").display(), dot.len());

    let back = import_gexf(&gexf)?;
    for w in &back.warnings {
        println!("warning: {w}");
    }
    let names = |g: &TaxonomyGraph| g.patterns().map(|p| p.canonical_name.clone()).collect::<BTreeSet<_>>();
    let triples = |g: &TaxonomyGraph| {
        g.edges()
            .iter()
            .map(|e| (e.kind, e.src.clone(), e.dst.clone()))
            .collect::<BTreeSet<_>>()
    };
    println!(
        "re-imported: {} patterns, {} edges; names equal: {}, edges equal: {}",
        back.graph.pattern_count(),
        back.graph.edges().len(),
        names(&back.graph) == names(&graph),
        triples(&back.graph) == triples(&graph)
    );
    println!("\nfirst lines of the DOT file:");
    for line in dot.lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
