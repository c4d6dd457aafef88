use std::fmt::Write;

use super::Partition;
use crate::graph::TaxonomyGraph;

/// Text table of communities, largest first: id, size, the member with the
/// highest in-degree, and all members.
pub fn community_report(graph: &TaxonomyGraph, partition: &Partition) -> String {
    let mut rows: Vec<(usize, Vec<String>, String)> = partition
        .communities()
        .into_iter()
        .enumerate()
        .map(|(c, members)| {
            let top = members
                .iter()
                .map(|id| (id, graph.in_degree(id).unwrap_or(0)))
                .max_by(|(a, da), (b, db)| da.cmp(db).then_with(|| b.cmp(a)))
                .map(|(id, d)| format!("{} ({d})", graph.display_name(id).unwrap_or(id.as_str())))
                .unwrap_or_default();
            let mut names: Vec<String> = members
                .iter()
                .map(|id| graph.display_name(id).unwrap_or(id.as_str()).to_owned())
                .collect();
            names.sort_by(|a, b| crate::graph::compare_names(a, b));
            (c, names, top)
        })
        .collect();
    rows.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));

    let mut out = String::new();
    writeln!(
        out,
        "communities: {}  modularity: {:.6}  resolution: {}  seed: {}",
        partition.community_count, partition.modularity, partition.resolution, partition.seed
    )
    .unwrap();
    writeln!(out, "{:>4}  {:>4}  {:<34}  members", "id", "size", "max in-degree").unwrap();
    for (c, names, top) in rows {
        writeln!(out, "{c:>4}  {:>4}  {top:<34}  {}", names.len(), names.join(", ")).unwrap();
    }
    out
}
