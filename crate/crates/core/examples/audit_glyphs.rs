//! Map detected dark patterns to violated heuristics and render glyph badges.
//!
//!     cargo run -p darkgraph --example audit_glyphs [out-dir] [pattern...]

use darkgraph::corpus::seed_graph;
use darkgraph::heuristics::{default_rules, emit_glyph_manifest, evaluate_audit_with, lint_rules, Audit};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = args.next().map(std::path::PathBuf::from);
    let mut detected: Vec<String> = args.collect();
    if detected.is_empty() {
        detected = ["Nagging", "Confirmshaming", "trick question (cnil)", "Infinite Scroll"]
            .map(String::from)
            .to_vec();
    }

    let rules = default_rules();
    let graph = seed_graph();
    println!("{} rules, {} dangling triggers", rules.len(), lint_rules(&rules, &graph).len());

    let audit = Audit::new("example storefront", detected);
    let report = evaluate_audit_with(&rules, &audit, Some(&graph));
    for v in &report.violations {
        let by: Vec<_> = v.triggered_by.iter().map(String::as_str).collect();
        println!("  {} violated by {}", v.rule_id, by.join(", "));
    }
    if !report.unmapped.is_empty() {
        println!("  no rule for: {:?}", report.unmapped);
    }

    let manifest = emit_glyph_manifest(&report, &rules)?;
    print!("\n{}", manifest.summary_table());
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir)?;
        for (name, svg) in manifest.files() {
            std::fs::write(dir.join(&name), svg)?;
        }
        println!("{} badge(s) written to {}", manifest.len(), dir.display());
    }
    Ok(())
}
