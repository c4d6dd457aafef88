use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use darkgraph::community::{community_report, consensus_detect_with, ConsensusConfig, SeedSchedule, DEFAULT_RESOLUTION};
use darkgraph::corpus::{export_graph, seed_corpus_text, CorpusDocument, ExportFormat};
use darkgraph::heuristics::{default_rules, emit_glyph_manifest, evaluate_audit_with, lint_rules, load_rules, Audit, HeuristicRule};
use darkgraph::merge::{changelog, CandidateId, Verdict, DEFAULT_THRESHOLD};
use darkgraph::pipeline::{eliminate_single_node_communities, run_until_saturated, DecisionScript, IterationConfig, ScriptedReviewer};
use darkgraph::service::{serve, ServeOptions, Workspace};

#[derive(Parser)]
#[command(name = "darkgraph", version, about = "Curate dark-pattern taxonomy graphs")]
struct Cli {
    /// Workspace directory holding corpus.json and journal.jsonl.
    #[arg(long, short = 'w', global = true, default_value = "darkgraph-workspace")]
    workspace: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Start a workspace from a corpus file (or the bundled seed corpus).
    Ingest {
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file")]
        seed: bool,
    },
    /// Write the current graph as GEXF or DOT.
    Export {
        #[arg(long, default_value = "gexf")]
        format: ExportFormat,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run consensus community detection and propose merge candidates.
    Detect {
        #[command(flatten)]
        detection: DetectionArgs,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Also write the graph with community ids as GEXF.
        #[arg(long)]
        gexf: Option<PathBuf>,
    },
    /// Propose candidates from the latest detection and list pending ones.
    Candidates {
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Include reviewed and enacted candidates.
        #[arg(long)]
        all: bool,
    },
    /// Approve or reject a candidate.
    Review {
        id: String,
        #[arg(long, conflicts_with = "reject", required_unless_present = "reject")]
        approve: bool,
        #[arg(long)]
        reject: bool,
        #[arg(short = 'm', long = "message")]
        rationale: String,
    },
    /// Enact an approved candidate.
    Enact { id: String },
    /// Print the change log.
    Changelog,
    /// Remove taxonomy nodes and their edges (version 3.0).
    Strip,
    /// Patterns by in-degree.
    Prominence {
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Non-interactive curation loop.
    Pipeline {
        #[command(subcommand)]
        action: PipelineAction,
    },
    /// Evaluate an audit against heuristic rules.
    Audit {
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long, num_args = 0..)]
        detected: Vec<String>,
        #[arg(long, default_value = "")]
        subject: String,
        /// Write one SVG badge per violation here.
        #[arg(long)]
        svg_dir: Option<PathBuf>,
    },
    /// Report rule triggers that no longer resolve in the graph.
    Lint {
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8787)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Built UI assets to serve alongside the API.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        #[arg(long)]
        rules: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PipelineAction {
    Run {
        /// Decisions file with verdicts and singleton decisions.
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        max_iterations: Option<usize>,
        #[command(flatten)]
        detection: DetectionArgs,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
    },
}

#[derive(Args, Clone)]
struct DetectionArgs {
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: f64,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl DetectionArgs {
    fn config(&self) -> ConsensusConfig {
        ConsensusConfig {
            initial_runs: self.runs.max(1),
            ..ConsensusConfig::default()
        }
    }
}

fn open(dir: &Path) -> Result<Workspace> {
    let (ws, warnings) = Workspace::open_dir(dir)
        .with_context(|| format!("opening workspace {} (run `darkgraph ingest` first)", dir.display()))?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(ws)
}

fn rules_from(path: Option<&Path>) -> Result<Vec<HeuristicRule>> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(load_rules(&text)?)
        }
        None => Ok(default_rules()),
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let dir = cli.workspace.as_path();
    match cli.command {
        Command::Ingest { file, seed } => {
            let text = match (&file, seed) {
                (Some(path), _) => std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
                (None, true) => seed_corpus_text().to_owned(),
                (None, false) => bail!("give a corpus file or --seed"),
            };
            let doc = CorpusDocument::from_json(&text)?;
            let ws = Workspace::init_dir(dir, &doc)?;
            let g = ws.snapshot();
            println!(
                "workspace {}: version {}, {} patterns, {} taxonomies, {} edges",
                dir.display(),
                g.graph().version(),
                g.graph().pattern_count(),
                g.graph().taxonomy_count(),
                g.graph().edges().len()
            );
        }
        Command::Export { format, out } => {
            let ws = open(dir)?;
            let state = ws.snapshot();
            let partition = state
                .last_consensus()
                .map(|c| c.selected_partition())
                .filter(|p| p.covers(state.graph()));
            std::fs::write(&out, export_graph(state.graph(), format, partition))?;
            println!("wrote {}", out.display());
        }
        Command::Detect { detection, threshold, gexf } => {
            let ws = open(dir)?;
            let seeds = SeedSchedule::from_base(detection.seed);
            let proposed = ws.mutate(|s| {
                let consensus = consensus_detect_with(s.graph(), detection.resolution, &seeds, detection.config())?;
                let partition = consensus.selected_partition().clone();
                s.record_detection(consensus)?;
                Ok(s.propose(&partition, threshold)?)
            })?;
            let state = ws.snapshot();
            let consensus = state.last_consensus().expect("just detected");
            println!(
                "runs: {}  histogram: {:?}  extensions: {}{}",
                consensus.runs.len(),
                consensus.histogram,
                consensus.extensions,
                if consensus.tie_unresolved { "  (tie unresolved)" } else { "" }
            );
            print!("{}", community_report(state.graph(), consensus.selected_partition()));
            println!("{} new candidate(s) at threshold {threshold}", proposed.len());
            if let Some(path) = gexf {
                std::fs::write(&path, export_graph(state.graph(), ExportFormat::Gexf, Some(consensus.selected_partition())))?;
                println!("wrote {}", path.display());
            }
        }
        Command::Candidates { threshold, all } => {
            let ws = open(dir)?;
            let added = ws.mutate(|s| {
                let Some(partition) = s
                    .last_consensus()
                    .map(|c| c.selected_partition().clone())
                    .filter(|p| p.covers(s.graph()))
                else {
                    return Ok(None);
                };
                Ok(Some(s.propose(&partition, threshold)?))
            })?;
            match added {
                Some(ids) if !ids.is_empty() => println!("{} new candidate(s)", ids.len()),
                Some(_) => {}
                None => eprintln!("note: no detection for the current graph; run `darkgraph detect` to propose"),
            }
            let state = ws.snapshot();
            let list = if all { state.candidates() } else { state.pending() };
            for c in list {
                let (a, b) = c.kind.endpoints();
                let name = |id| state.graph().display_name(id).unwrap_or("(gone)").to_owned();
                println!(
                    "{}  {:<8}  {:.3}  {} | {}  [name {:.2} def {:.2} nbr {:.2}]",
                    c.id,
                    c.status.to_string(),
                    c.total,
                    name(a),
                    name(b),
                    c.scores.name_sim,
                    c.scores.def_sim,
                    c.scores.neighbor_sim
                );
            }
        }
        Command::Review { id, approve, reject: _, rationale } => {
            let ws = open(dir)?;
            let verdict = if approve { Verdict::Approve } else { Verdict::Reject };
            let id = CandidateId::new(id);
            let status = ws.mutate(|s| Ok(s.review(&id, verdict, &rationale)?.status))?;
            println!("{id}: {status}");
        }
        Command::Enact { id } => {
            let ws = open(dir)?;
            let id = CandidateId::new(id);
            let record = ws.mutate(|s| Ok(s.enact(&id)?))?;
            println!(
                "enacted {id} as #{} -> version {} (edges +{} -{})",
                record.ordinal, record.version_after, record.edge_delta.added, record.edge_delta.removed
            );
        }
        Command::Changelog => {
            let ws = open(dir)?;
            print!("{}", changelog(ws.snapshot().journal()));
        }
        Command::Strip => {
            let ws = open(dir)?;
            let version = ws.mutate(|s| {
                s.strip_taxonomy_nodes()?;
                Ok(s.graph().version())
            })?;
            println!("version {version}: {} patterns", ws.snapshot().graph().pattern_count());
        }
        Command::Prominence { top } => {
            let ws = open(dir)?;
            let state = ws.snapshot();
            let graph = state.graph();
            for (rank, (id, degree)) in graph.prominence_ranking()?.into_iter().take(top).enumerate() {
                println!("{:>3}. {:<36} {degree}", rank + 1, graph.display_name(&id).unwrap_or(id.as_str()));
            }
        }
        Command::Pipeline {
            action: PipelineAction::Run { script, max_iterations, detection, threshold },
        } => {
            let ws = open(dir)?;
            let text = std::fs::read_to_string(&script).with_context(|| format!("reading {}", script.display()))?;
            let script = DecisionScript::parse(&text)?;
            let max = max_iterations.or(script.max_iterations).unwrap_or(10);
            let config = IterationConfig {
                resolution: detection.resolution,
                seeds: SeedSchedule::from_base(detection.seed),
                threshold,
                consensus: detection.config(),
            };
            let reports = ws.mutate(|s| {
                let mut reviewer = ScriptedReviewer::new(script.clone());
                Ok(run_until_saturated(s, &config, &mut reviewer, max)?)
            })?;
            for (i, r) in reports.iter().enumerate() {
                println!(
                    "iteration {}: {} -> {}, {} communities, {} candidate(s), {} enacted{}",
                    i + 1,
                    r.version_before,
                    r.version_after,
                    r.consensus.winning_count(),
                    r.candidates.len(),
                    r.enacted.len(),
                    if r.saturated { ", saturated" } else { "" }
                );
            }
            if !script.singletons.is_empty() {
                let records = ws.mutate(|s| {
                    let consensus = consensus_detect_with(s.graph(), config.resolution, &config.seeds, config.consensus)?;
                    let partition = consensus.selected_partition().clone();
                    s.record_detection(consensus)?;
                    let decisions = script
                        .singleton_decisions(s.graph())
                        .map_err(|e| darkgraph::service::ServiceError::BadRequest(e.to_string()))?;
                    Ok(eliminate_single_node_communities(s, &partition, &decisions)?)
                })?;
                println!("resolved {} single-node communities", records.len());
            }
            let state = ws.snapshot();
            println!("version {}: {} patterns", state.graph().version(), state.graph().pattern_count());
        }
        Command::Audit { rules, detected, subject, svg_dir } => {
            let rules = rules_from(rules.as_deref())?;
            // Alias resolution needs a graph; without a workspace, names match literally.
            let ws = Workspace::open_dir(dir).ok().map(|(ws, _)| ws);
            let snapshot = ws.as_ref().map(|w| w.snapshot());
            let audit = Audit::new(subject, detected);
            let report = evaluate_audit_with(&rules, &audit, snapshot.as_ref().map(|s| s.graph()));
            let manifest = emit_glyph_manifest(&report, &rules)?;
            print!("{}", manifest.summary_table());
            if !report.unmapped.is_empty() {
                let unmapped: Vec<_> = report.unmapped.iter().map(String::as_str).collect();
                println!("unmapped: {}", unmapped.join(", "));
            }
            if let Some(out) = svg_dir {
                std::fs::create_dir_all(&out)?;
                for (name, svg) in manifest.files() {
                    std::fs::write(out.join(&name), svg)?;
                }
                println!("wrote {} badge(s) to {}", manifest.len(), out.display());
            }
        }
        Command::Lint { rules } => {
            let rules = rules_from(rules.as_deref())?;
            let ws = open(dir)?;
            let dangling = lint_rules(&rules, ws.snapshot().graph());
            let names: BTreeSet<_> = dangling.iter().map(|d| format!("{}: {}", d.rule_id, d.trigger)).collect();
            for n in &names {
                println!("dangling trigger {n}");
            }
            if !names.is_empty() {
                std::process::exit(1);
            }
            println!("all triggers resolve");
        }
        Command::Serve { port, host, static_dir, rules } => {
            let ws = open(dir)?.with_rules(rules_from(rules.as_deref())?);
            let addr = format!("{host}:{port}").parse().context("bind address")?;
            let runtime = tokio::runtime::Runtime::new()?;
            println!("serving {} on http://{addr}", dir.display());
            runtime.block_on(serve(Arc::new(ws), ServeOptions { addr, static_dir }))?;
        }
    }
    Ok(())
}
