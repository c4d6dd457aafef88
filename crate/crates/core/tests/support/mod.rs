//! Fixtures, generators and oracles shared by the integration tests. The
//! oracles here recompute every quantity from raw edge lists so they do not
//! share code with the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use darkgraph::corpus::{CorpusDocument, EdgeDecl, PatternDecl, SourceDecl, TaxonomyDecl};
use darkgraph::graph::{EdgeKind, NodeId, TaxonomyGraph};
use proptest::prelude::*;

pub const SOURCES: [&str; 4] = ["Alpha2001", "Beta2002", "Gamma2003", "Delta2004"];

const WORDS: [&str; 12] = [
    "hidden", "cost", "forced", "consent", "timer", "nag", "default", "price", "wall", "bait", "shame", "scroll",
];

pub fn node_name(i: usize) -> String {
    format!("N{i:02}")
}

/// Stripped (v3.0) graph of patterns `N00..` with one Employs edge per
/// distinct directed pair; repeats are dropped.
pub fn pattern_graph(n: usize, edges: &[(usize, usize)]) -> TaxonomyGraph {
    let mut seen = BTreeSet::new();
    let mut doc = CorpusDocument::empty();
    doc.taxonomies.push(TaxonomyDecl {
        key: "Fixture2020".into(),
        label: "Fixture 2020".into(),
        domain: String::new(),
    });
    for i in 0..n {
        doc.patterns.push(PatternDecl {
            name: node_name(i),
            sources: vec![SourceDecl {
                taxonomy: "Fixture2020".into(),
                original_name: node_name(i),
            }],
            definition: String::new(),
            tags: Vec::new(),
        });
    }
    for &(a, b) in edges.iter().filter(|&&e| seen.insert(e)) {
        doc.edges.push(EdgeDecl {
            kind: EdgeKind::Employs,
            from: node_name(a),
            to: node_name(b),
            rationale: String::new(),
        });
    }
    doc.to_graph()
        .and_then(|g| Ok(g.strip_taxonomy_nodes()?))
        .expect("fixture graph")
}

pub fn two_triangles() -> Vec<(usize, usize)> {
    vec![(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]
}

pub fn two_k4_bridge() -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for base in [0, 4] {
        for a in 0..4 {
            for b in a + 1..4 {
                e.push((base + a, base + b));
            }
        }
    }
    e.push((3, 4));
    e
}

pub fn k4() -> Vec<(usize, usize)> {
    vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
}

pub fn path(n: usize) -> Vec<(usize, usize)> {
    (0..n - 1).map(|i| (i, i + 1)).collect()
}

/// Symmetric 0/1 adjacency matrix, opposite directions collapsed.
pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for &(x, y) in edges {
        if x != y {
            a[x][y] = 1.0;
            a[y][x] = 1.0;
        }
    }
    a
}

/// Q = 1/(2m) Σ_ij (A_ij − γ k_i k_j / 2m) δ(c_i, c_j), evaluated term by term.
pub fn oracle_modularity(a: &[Vec<f64>], membership: &[usize], gamma: f64) -> f64 {
    let n = a.len();
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if membership[i] == membership[j] {
                q += a[i][j] - gamma * k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Best modularity over every set partition of `0..n`, enumerated as
/// restricted-growth strings.
pub fn brute_force_optimum(a: &[Vec<f64>], gamma: f64) -> (f64, Vec<usize>) {
    let n = a.len();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut rgs = vec![0usize; n];
    fn rec(i: usize, max: usize, rgs: &mut Vec<usize>, a: &[Vec<f64>], gamma: f64, best: &mut (f64, Vec<usize>)) {
        if i == rgs.len() {
            let q = oracle_modularity(a, rgs, gamma);
            if q > best.0 {
                *best = (q, rgs.clone());
            }
            return;
        }
        for c in 0..=max + 1 {
            rgs[i] = c;
            rec(i + 1, max.max(c), rgs, a, gamma, best);
        }
    }
    if n == 0 {
        return (0.0, Vec::new());
    }
    rec(1, 0, &mut rgs, a, gamma, &mut best);
    best
}

/// Membership vector of a library partition in `N00..` order.
pub fn membership_of(graph: &TaxonomyGraph, assignment: &BTreeMap<NodeId, usize>) -> (Vec<Vec<f64>>, Vec<usize>) {
    let ids = graph.node_ids();
    let index: BTreeMap<&NodeId, usize> = ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
    let edges: Vec<(usize, usize)> = graph.edges().iter().map(|e| (index[&e.src], index[&e.dst])).collect();
    let membership = ids.iter().map(|id| assignment[id]).collect();
    (adjacency(ids.len(), &edges), membership)
}

/// Incoming edges of `id` counted by scanning the edge list.
pub fn scan_in_degree(graph: &TaxonomyGraph, id: &NodeId) -> usize {
    graph.edges().iter().filter(|e| &e.dst == id).count()
}

/// (neighbour, outgoing?) pairs of `id`, ignoring `other`.
pub fn external_adjacency(graph: &TaxonomyGraph, id: &NodeId, other: &NodeId) -> BTreeSet<(NodeId, bool)> {
    let mut out = BTreeSet::new();
    for e in graph.edges() {
        if &e.src == id && &e.dst != other {
            out.insert((e.dst.clone(), true));
        }
        if &e.dst == id && &e.src != other {
            out.insert((e.src.clone(), false));
        }
    }
    out
}

pub fn edge_triples(graph: &TaxonomyGraph) -> BTreeSet<(EdgeKind, NodeId, NodeId)> {
    graph.edges().iter().map(|e| (e.kind, e.src.clone(), e.dst.clone())).collect()
}

pub fn pattern_names(graph: &TaxonomyGraph) -> BTreeSet<String> {
    graph.patterns().map(|p| p.canonical_name.clone()).collect()
}

/// Random simple edge list on `n` nodes with at least one edge.
pub fn edge_list(max_nodes: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2..=max_nodes).prop_flat_map(|n| {
        let pair = (0..n, 0..n).prop_filter("no self-loop", |(a, b)| a != b);
        (Just(n), prop::collection::vec(pair, 1..=(n * 3)))
    })
}

/// Random corpus document: taxonomies from [`SOURCES`], patterns with one to
/// three sources and word-salad definitions, random Employs and BelongsTo
/// edges.
pub fn corpus_document() -> impl Strategy<Value = CorpusDocument> {
    (3usize..16).prop_flat_map(|n| {
        let sources = prop::collection::btree_set(0..SOURCES.len(), 1..=3);
        let definition = prop::collection::vec(0..WORDS.len(), 0..6);
        let patterns = prop::collection::vec((sources, definition), n);
        let employs = prop::collection::btree_set((0..n, 0..n), 1..(n * 2));
        let belongs = prop::collection::btree_set((0..SOURCES.len(), 0..n), 0..n);
        (patterns, employs, belongs).prop_map(move |(patterns, employs, belongs)| {
            let mut doc = CorpusDocument::empty();
            for key in SOURCES {
                doc.taxonomies.push(TaxonomyDecl {
                    key: key.into(),
                    label: format!("{} {}", &key[..key.len() - 4], &key[key.len() - 4..]),
                    domain: "test".into(),
                });
            }
            for (i, (srcs, words)) in patterns.iter().enumerate() {
                let name = format!("{} {}", WORDS[i % WORDS.len()].to_uppercase(), node_name(i));
                doc.patterns.push(PatternDecl {
                    name: name.clone(),
                    sources: srcs
                        .iter()
                        .map(|&s| SourceDecl {
                            taxonomy: SOURCES[s].into(),
                            original_name: format!("{name} ({})", SOURCES[s]),
                        })
                        .collect(),
                    definition: words.iter().map(|&w| WORDS[w]).collect::<Vec<_>>().join(" "),
                    tags: Vec::new(),
                });
            }
            let name = |i: usize| doc.patterns[i].name.clone();
            let mut edges = Vec::new();
            let mut employs = employs;
            if employs.iter().all(|(a, b)| a == b) {
                employs.insert((0, 1));
            }
            for &(a, b) in employs.iter().filter(|(a, b)| a != b) {
                edges.push(EdgeDecl {
                    kind: EdgeKind::Employs,
                    from: name(a),
                    to: name(b),
                    rationale: "generated".into(),
                });
            }
            for &(t, p) in &belongs {
                edges.push(EdgeDecl {
                    kind: EdgeKind::BelongsTo,
                    from: SOURCES[t].into(),
                    to: name(p),
                    rationale: String::new(),
                });
            }
            doc.edges = edges;
            doc
        })
    })
}

/// Corpus drawn from `rng`: `n` patterns over [`SOURCES`], random Employs
/// and BelongsTo edges, at least one Employs edge.
pub fn random_corpus(rng: &mut impl rand::Rng, n: usize) -> CorpusDocument {
    let mut doc = CorpusDocument::empty();
    for key in SOURCES {
        doc.taxonomies.push(TaxonomyDecl {
            key: key.into(),
            label: format!("{} {}", &key[..key.len() - 4], &key[key.len() - 4..]),
            domain: String::new(),
        });
    }
    for i in 0..n {
        let name = format!("{} {}", WORDS[rng.gen_range(0..WORDS.len())], node_name(i));
        let mut sources: Vec<usize> = (0..SOURCES.len()).filter(|_| rng.gen_bool(0.4)).collect();
        if sources.is_empty() {
            sources.push(rng.gen_range(0..SOURCES.len()));
        }
        let words: Vec<&str> = (0..rng.gen_range(0..5)).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect();
        doc.patterns.push(PatternDecl {
            name: name.clone(),
            sources: sources
                .iter()
                .map(|&s| SourceDecl {
                    taxonomy: SOURCES[s].into(),
                    original_name: format!("{name} / {}", SOURCES[s]),
                })
                .collect(),
            definition: words.join(" "),
            tags: Vec::new(),
        });
    }
    let mut seen = BTreeSet::new();
    let target = rng.gen_range(1..=2 * n);
    while seen.len() < target {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            seen.insert((a, b));
        }
    }
    for (a, b) in seen {
        doc.edges.push(EdgeDecl {
            kind: EdgeKind::Employs,
            from: doc.patterns[a].name.clone(),
            to: doc.patterns[b].name.clone(),
            rationale: String::new(),
        });
    }
    for (t, key) in SOURCES.iter().enumerate() {
        for p in 0..n {
            if rng.gen_bool(0.15) && t % 2 == p % 2 {
                doc.edges.push(EdgeDecl {
                    kind: EdgeKind::BelongsTo,
                    from: (*key).into(),
                    to: doc.patterns[p].name.clone(),
                    rationale: String::new(),
                });
            }
        }
    }
    doc
}
