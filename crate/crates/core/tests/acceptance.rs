//! Acceptance run: one PASS/FAIL line per criterion; exits 1 on any failure.

mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use darkgraph::community::{
    consensus_detect, detect, modularity, resolve_consensus, ConsensusConfig, Partition, SeedSchedule,
};
use darkgraph::corpus::{export_graph, import_gexf, seed_corpus_text, CorpusDocument, ExportFormat};
use darkgraph::graph::{EdgeKind, NodeId, TaxonomyGraph};
use darkgraph::heuristics::{default_rules, emit_glyph_manifest, evaluate_audit};
use darkgraph::merge::{enact, review, CandidateKind, ChangeCandidate, CurationState, EnactedChange, SimilarityScores, Verdict};
use darkgraph::service::persist_and_recover;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn seed_doc() -> CorpusDocument {
    CorpusDocument::from_json(seed_corpus_text()).expect("seed corpus parses")
}

fn one_community(g: &TaxonomyGraph) -> BTreeMap<NodeId, usize> {
    g.node_ids().into_iter().map(|id| (id, 0)).collect()
}

fn zero_law() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..25 {
        let n = rng.gen_range(2..=30);
        let m = rng.gen_range(1..=3 * n);
        let edges: Vec<(usize, usize)> = (0..m)
            .map(|_| {
                let a = rng.gen_range(0..n);
                (a, (a + rng.gen_range(1..n)) % n)
            })
            .collect();
        let g = pattern_graph(n, &edges);
        let one = modularity(&g, &one_community(&g), 1.0).map_err(|e| e.to_string())?;
        ensure(one.abs() < 1e-12, || format!("graph {i}: single community Q = {one:e}"))?;
        let singles: BTreeMap<_, _> = g.node_ids().into_iter().enumerate().map(|(k, id)| (id, k)).collect();
        let q = modularity(&g, &singles, 1.0).map_err(|e| e.to_string())?;
        ensure(q < 0.0, || format!("graph {i}: singleton Q = {q}"))?;
    }
    within(Duration::from_secs(1), start)?;
    Ok(format!("25 graphs in {:?}", start.elapsed()))
}

fn two_triangles_fixture() -> Outcome {
    let start = Instant::now();
    let g = pattern_graph(6, &two_triangles());
    let id = |i: usize| g.resolve_pattern_name(&node_name(i)).unwrap().id.clone();
    let cliques: BTreeMap<NodeId, usize> = (0..6).map(|i| (id(i), i / 3)).collect();
    let q = modularity(&g, &cliques, 1.0).map_err(|e| e.to_string())?;
    ensure((q - 0.357_142_857_1).abs() < 1e-9, || format!("clique partition Q = {q}"))?;
    let p = detect(&g, 1.0, 0).map_err(|e| e.to_string())?;
    let got: BTreeSet<BTreeSet<String>> = p
        .communities()
        .iter()
        .map(|c| c.iter().map(|n| g.display_name(n).unwrap().to_owned()).collect())
        .collect();
    let want: BTreeSet<BTreeSet<String>> = [(0..3), (3..6)]
        .into_iter()
        .map(|r| r.map(node_name).collect())
        .collect();
    ensure(got == want, || format!("detected {got:?}"))?;
    within(Duration::from_secs(1), start)?;
    Ok(format!("Q = {q:.10}, two triangles recovered"))
}

fn brute_force_equivalence() -> Outcome {
    let start = Instant::now();
    let mut report = Vec::new();
    let mut failed = false;
    for (name, n, edges) in [
        ("two K4 plus bridge", 8, two_k4_bridge()),
        ("K4", 4, k4()),
        ("path of 6", 6, path(6)),
    ] {
        let g = pattern_graph(n, &edges);
        let (a, _) = membership_of(&g, &one_community(&g));
        let (best, _) = brute_force_optimum(&a, 1.0);
        const SEEDS: u64 = 16;
        let mut hits = 0;
        let mut worst = f64::INFINITY;
        for seed in 0..SEEDS {
            let q = detect(&g, 1.0, seed).map_err(|e| e.to_string())?.modularity;
            worst = worst.min(q);
            if (q - best).abs() < 1e-9 {
                hits += 1;
            }
        }
        if hits < SEEDS {
            failed = true;
        }
        report.push(format!("{name}: {hits}/{} seeds at optimum {best:.4} (worst {worst:.4})", SEEDS));
    }
    within(Duration::from_secs(30), start)?;
    let detail = report.join("; ");
    if failed {
        Err(detail)
    } else {
        Ok(detail)
    }
}

fn stub(i: usize, c: usize) -> Partition {
    Partition {
        resolution: 1.0,
        seed: i as u64,
        assignment: BTreeMap::new(),
        modularity: c as f64 / 100.0,
        community_count: c,
    }
}

fn determinism() -> Outcome {
    let g = seed_doc().to_graph().and_then(|g| Ok(g.strip_taxonomy_nodes()?)).map_err(|e| e.to_string())?;
    let a = detect(&g, 1.0, 7).map_err(|e| e.to_string())?;
    let b = detect(&g, 1.0, 7).map_err(|e| e.to_string())?;
    ensure(a == b && a.modularity.to_bits() == b.modularity.to_bits(), || "detect differs".into())?;
    let seeds = SeedSchedule::from_base(11);
    let ca = consensus_detect(&g, 1.0, &seeds).map_err(|e| e.to_string())?;
    let cb = consensus_detect(&g, 1.0, &seeds).map_err(|e| e.to_string())?;
    ensure(ca == cb, || "consensus differs".into())?;
    ensure(
        serde_json::to_string(&ca).unwrap() == serde_json::to_string(&cb).unwrap(),
        || "consensus serialisation differs".into(),
    )?;

    let first: Vec<_> = [10, 10, 10, 9, 11].iter().enumerate().map(|(i, &c)| stub(i, c)).collect();
    let plain = resolve_consensus::<(), _>(first, ConsensusConfig::default(), |_| panic!("no extension expected"))
        .map_err(|_| "resolve failed".to_owned())?;
    let hist: BTreeMap<usize, usize> = [(9, 1), (10, 3), (11, 1)].into();
    ensure(plain.winning_count() == 10, || format!("selected {}", plain.winning_count()))?;
    ensure(plain.histogram == hist, || format!("histogram {:?}", plain.histogram))?;
    ensure(plain.extensions == 0, || format!("{} extensions", plain.extensions))?;

    let tied: Vec<_> = [10, 10, 9, 9, 8].iter().enumerate().map(|(i, &c)| stub(i, c)).collect();
    let ext = resolve_consensus::<(), _>(tied, ConsensusConfig::default(), |i| Ok(stub(i, 9)))
        .map_err(|_| "resolve failed".to_owned())?;
    ensure(ext.winning_count() == 9 && ext.extensions == 1 && !ext.tie_unresolved, || {
        format!("tie case selected {} after {} extension(s)", ext.winning_count(), ext.extensions)
    })?;
    Ok(format!(
        "bit-identical reruns; (10,10,10,9,11) -> 10; (10,10,9,9,8)+9 -> {} after {} extension",
        ext.winning_count(),
        ext.extensions
    ))
}

fn seed_prominence() -> Outcome {
    let g = seed_doc().to_graph().and_then(|g| Ok(g.strip_taxonomy_nodes()?)).map_err(|e| e.to_string())?;
    let ranking = g.prominence_ranking().map_err(|e| e.to_string())?;
    let (top, count) = &ranking[0];
    let top_name = g.display_name(top).unwrap();
    ensure(top_name == "Information Hiding", || format!("first is {top_name}"))?;

    // recount straight from the shipped JSON, outside the library
    let raw: serde_json::Value = serde_json::from_str(seed_corpus_text()).map_err(|e| e.to_string())?;
    let recount = raw["edges"]
        .as_array()
        .ok_or("corpus has no edge array")?
        .iter()
        .filter(|e| e["kind"] == "employs" && e["to"] == "Information Hiding")
        .map(|e| e["from"].as_str().unwrap_or_default())
        .collect::<BTreeSet<_>>()
        .len();
    let scan = scan_in_degree(&g, top);
    ensure(*count == recount && *count == scan, || {
        format!("ranking {count}, raw recount {recount}, scan {scan}")
    })?;
    let runner_up = ranking.get(1).map(|(_, d)| *d).unwrap_or(0);
    ensure(*count > runner_up, || format!("tied with runner-up at {runner_up}"))?;
    Ok(format!("Information Hiding first with in-degree {count} (raw recount {recount}, scan {scan})"))
}

fn merge_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xfeed);
    let mut merges = 0;
    let mut replays = 0;
    while merges < 200 {
        let n = rng.gen_range(12..=24);
        let doc = random_corpus(&mut rng, n);
        let base = doc.to_graph().map_err(|e| e.to_string())?;
        let mut state = CurationState::new(base.clone());
        for _ in 0..10 {
            let before = state.graph().clone();
            let ids: Vec<NodeId> = before.patterns().map(|p| p.id.clone()).collect();
            let a = ids[rng.gen_range(0..ids.len())].clone();
            let b = ids[rng.gen_range(0..ids.len())].clone();
            if a == b {
                continue;
            }
            let candidate = ChangeCandidate::human(CandidateKind::merge(a.clone(), b.clone()), SimilarityScores::ZERO, 0.0, "acceptance")
                .map_err(|e| e.to_string())?;
            let approved = review(&candidate, Verdict::Approve, "same tactic").map_err(|e| e.to_string())?;
            let (direct, _) = enact(&before, &approved, 1).map_err(|e| e.to_string())?;

            let id = candidate.id.clone();
            state.submit(candidate).map_err(|e| e.to_string())?;
            state.review(&id, Verdict::Approve, "same tactic").map_err(|e| e.to_string())?;
            let record = state.enact(&id).map_err(|e| e.to_string())?;
            let after = state.graph();
            ensure(direct.canonical_json() == after.canonical_json(), || "session and direct enact differ".into())?;
            let EnactedChange::Merge { survivor, absorbed, .. } = &record.change else {
                return Err("enacted change is not a merge".into());
            };
            let union: BTreeSet<_> = external_adjacency(&before, &a, &b)
                .union(&external_adjacency(&before, &b, &a))
                .cloned()
                .collect();
            ensure(external_adjacency(after, survivor, absorbed) == union, || format!("adjacency union broken merging {a} and {b}"))?;
            ensure(after.edges().iter().all(|e| e.src != e.dst), || "self-loop created".into())?;
            ensure(edge_triples(after).len() == after.edges().len(), || "duplicate edge created".into())?;
            ensure(after.pattern_count() + 1 == before.pattern_count(), || "pattern count did not drop by one".into())?;
            let problems = after.validate();
            ensure(problems.is_empty(), || format!("validate: {problems:?}"))?;
            merges += 1;
        }
        let replayed = CurationState::replay(base, state.journal()).map_err(|e| e.to_string())?;
        ensure(replayed.graph().canonical_json() == state.graph().canonical_json(), || "replay differs".into())?;
        replays += 1;
    }
    Ok(format!("{merges} merges over {replays} graphs; every replay from 1.0 byte-identical"))
}

fn gexf_round_trip() -> Outcome {
    let g = seed_doc().to_graph().map_err(|e| e.to_string())?;
    let text = export_graph(&g, ExportFormat::Gexf, None);
    let back = import_gexf(&text).map_err(|e| e.to_string())?.graph;
    ensure(pattern_names(&back) == pattern_names(&g), || "pattern names differ".into())?;
    let taxa = |g: &TaxonomyGraph| g.node_ids().into_iter().map(|id| g.display_name(&id).unwrap().to_owned()).collect::<BTreeSet<_>>();
    ensure(taxa(&back) == taxa(&g), || "node names differ".into())?;
    ensure(edge_triples(&back) == edge_triples(&g), || "edge triples differ".into())?;
    let kinds: BTreeSet<EdgeKind> = g.edges().iter().map(|e| e.kind).collect();
    Ok(format!(
        "{} nodes, {} edges ({} kinds) survive the round trip",
        g.node_ids().len(),
        g.edges().len(),
        kinds.len()
    ))
}

fn audit_path() -> Outcome {
    let rules = default_rules();
    let detected: BTreeSet<String> = ["Intermediate Currency".to_owned()].into();
    let report = evaluate_audit(&rules, &detected);
    let fired: Vec<&str> = report.violations.iter().map(|v| v.rule_id.as_str()).collect();
    let rule = rules
        .iter()
        .find(|r| r.glyph_code == "intermediate-currency")
        .ok_or("no rule carries the intermediate-currency glyph")?;
    ensure(rule.statement.to_lowercase().contains("value"), || format!("{} is not the value rule", rule.id))?;
    ensure(fired.contains(&rule.id.as_str()), || format!("violations {fired:?}"))?;
    let manifest = emit_glyph_manifest(&report, &rules).map_err(|e| e.to_string())?;
    ensure(manifest.entries.iter().any(|e| e.glyph_code == "intermediate-currency"), || "glyph missing".into())?;
    let empty = emit_glyph_manifest(&evaluate_audit(&rules, &BTreeSet::new()), &rules).map_err(|e| e.to_string())?;
    ensure(empty.is_empty(), || format!("empty audit gave {} entries", empty.entries.len()))?;
    Ok(format!("{} fired; manifest has {} entr(ies); empty audit clean", rule.id, manifest.entries.len()))
}

fn service_recovery() -> Outcome {
    let base = seed_doc().to_graph().map_err(|e| e.to_string())?;
    let mut state = CurationState::new(base.clone());
    let err = |e: darkgraph::merge::MergeError| e.to_string();
    state.strip_taxonomy_nodes().map_err(err)?;
    let consensus = consensus_detect(state.graph(), 1.0, &SeedSchedule::from_base(0)).map_err(|e| e.to_string())?;
    let partition = consensus.selected_partition().clone();
    state.record_detection(consensus).map_err(err)?;
    let proposed = state.propose(&partition, 0.3).map_err(err)?;
    ensure(proposed.len() >= 3, || format!("only {} candidates proposed", proposed.len()))?;
    state.review(&proposed[0], Verdict::Approve, "same tactic").map_err(err)?;
    state.review(&proposed[1], Verdict::Reject, "different mechanism").map_err(err)?;
    state.enact(&proposed[0]).map_err(err)?;
    while state.journal().len() < 10 {
        let ids: Vec<NodeId> = state.graph().patterns().map(|p| p.id.clone()).collect();
        let c = ChangeCandidate::human(CandidateKind::merge(ids[0].clone(), ids[1].clone()), SimilarityScores::ZERO, 0.0, "curator")
            .map_err(|e| e.to_string())?;
        let id = c.id.clone();
        state.submit(c).map_err(err)?;
        state.review(&id, Verdict::Approve, "duplicate").map_err(err)?;
        state.enact(&id).map_err(err)?;
    }
    let journal = state.journal().prefix(10);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("journal.jsonl");
    for k in 0..=10 {
        let prefix = journal.prefix(k);
        std::fs::write(&path, prefix.to_jsonl()).map_err(|e| e.to_string())?;
        let (ws, warnings) = persist_and_recover(&path, base.clone()).map_err(|e| e.to_string())?;
        ensure(warnings.is_empty(), || format!("prefix {k}: warnings {warnings:?}"))?;
        let recovered = ws.snapshot();
        let problems = recovered.graph().validate();
        ensure(problems.is_empty(), || format!("prefix {k}: validate {problems:?}"))?;
        let expected = CurationState::replay(base.clone(), &prefix).map_err(err)?;
        ensure(recovered.graph().canonical_json() == expected.graph().canonical_json(), || format!("prefix {k}: graph differs"))?;
        ensure(recovered.journal().to_jsonl() == prefix.to_jsonl(), || format!("prefix {k}: journal differs"))?;
    }
    Ok("prefixes 0..=10 recover, validate and match partial replay (library only, no UI build)".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("modularity zero-law", zero_law),
        ("two-triangle fixture", two_triangles_fixture),
        ("brute-force oracle equivalence", brute_force_equivalence),
        ("determinism", determinism),
        ("seed-corpus prominence", seed_prominence),
        ("merge properties", merge_properties),
        ("GEXF round-trip", gexf_round_trip),
        ("audit path", audit_path),
        ("service recovery", service_recovery),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
