//! Load the bundled corpus, strip taxonomy nodes and rank patterns by in-degree.
//!
//!     cargo run -p darkgraph --example ingest_prominence [corpus.json]

use darkgraph::corpus::{parse_corpus, seed_corpus_text};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => seed_corpus_text().to_owned(),
    };
    let v1 = parse_corpus(&text)?;
    println!(
        "v{}: {} patterns from {} taxonomies, {} edges",
        v1.version(),
        v1.pattern_count(),
        v1.taxonomy_count(),
        v1.edges().len()
    );
    for t in v1.taxonomies() {
        println!("  {:<14} {}", t.id.as_str(), t.label);
    }

    let v3 = v1.strip_taxonomy_nodes()?;
    println!("\nv{} after stripping, top patterns by in-degree:", v3.version());
    for (id, degree) in v3.prominence_ranking()?.into_iter().take(8) {
        let p = v3.pattern(&id).expect("ranked ids are patterns");
        let aliases: Vec<_> = p.aliases.iter().map(|a| a.citation_key.as_str()).collect();
        println!("  {degree:>2}  {:<28} {}", p.canonical_name, aliases.join(", "));
    }
    Ok(())
}
