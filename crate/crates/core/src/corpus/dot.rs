use std::collections::BTreeMap;
use std::fmt::Write;

use crate::community::Partition;
use crate::graph::{NodeId, TaxonomyGraph};

fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for ch in text.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(ch),
        }
    }
    out.push('"');
    out
}

pub(super) fn export(graph: &TaxonomyGraph, communities: Option<&Partition>) -> String {
    let mut in_degree: BTreeMap<&NodeId, usize> = BTreeMap::new();
    for edge in graph.edges() {
        *in_degree.entry(&edge.dst).or_default() += 1;
    }
    let community = |id: &NodeId| {
        communities
            .and_then(|p| p.assignment.get(id))
            .map(|c| format!(", community={c}"))
            .unwrap_or_default()
    };

    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(&format!("taxonomy {}", graph.version()))).unwrap();
    for taxonomy in graph.taxonomies() {
        writeln!(
            out,
            "  {} [label={}, shape=box, role=taxonomy{}];",
            quote(taxonomy.id.as_str()),
            quote(&taxonomy.label),
            community(&taxonomy.id)
        )
        .unwrap();
    }
    for pattern in graph.patterns() {
        writeln!(
            out,
            "  {} [label={}, shape=ellipse, role=pattern, in_degree={}{}];",
            quote(pattern.id.as_str()),
            quote(&pattern.canonical_name),
            in_degree.get(&pattern.id).copied().unwrap_or(0),
            community(&pattern.id)
        )
        .unwrap();
    }
    for edge in graph.edges() {
        writeln!(
            out,
            "  {} -> {} [kind={}];",
            quote(edge.src.as_str()),
            quote(edge.dst.as_str()),
            edge.kind
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
