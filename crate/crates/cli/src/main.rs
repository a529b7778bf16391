//! Operator entry point: run campaigns, replay archived findings,
//! import Topology Zoo graphs, and validate configs or topologies.
//!
//! Exit codes: 0 = completed (findings or not — campaigns are
//! measurements), 1 = setup or content error, 2 = invalid invocation,
//! 3 = findings present while `--fail-on-finding` was set.

mod zoo;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use routefuzz_core::campaign::{
    replay_archive, run_campaign, CampaignConfig, CampaignError, ReplayError, SetupError,
};
use routefuzz_core::fuzz::MutatorKind;
use routefuzz_core::parse::parse_config;
use routefuzz_core::topology::Topology;
use routefuzz_core::util::fnv64_hex;

#[derive(Parser)]
#[command(
    name = "routefuzz",
    version,
    about = "Structure-aware, stateful fuzzing of BGP router configurations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a fuzzing campaign described by a campaign file.
    Run {
        /// Campaign file (key value lines; see README).
        #[arg(long)]
        config: PathBuf,
        /// Override the campaign seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the per-trial iteration budget.
        #[arg(long)]
        budget_iters: Option<u64>,
        /// Optional wall-clock cap per trial, checked between iterations.
        #[arg(long)]
        budget_seconds: Option<u64>,
        /// Override the trial count.
        #[arg(long)]
        trials: Option<u32>,
        /// Mutator kind: grammar | random.
        #[arg(long)]
        mutator: Option<MutatorKind>,
        /// Trials to run in parallel.
        #[arg(long)]
        jobs: Option<usize>,
        /// Report directory (manifest, summary, trial records, findings).
        #[arg(long, default_value = "routefuzz-out")]
        out_dir: PathBuf,
        /// Exit 3 if any finding was reported (CI gating).
        #[arg(long)]
        fail_on_finding: bool,
    },
    /// Re-run an archived finding and compare oracle output.
    Replay {
        /// Finding directory written by `run`.
        archive: PathBuf,
    },
    /// Convert a Topology Zoo GraphML file to the native topology format.
    ImportZoo {
        graphml: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// First ASN to assign (sequential by sorted node name).
        #[arg(long, default_value_t = 64512)]
        asn_base: u32,
        /// Supernet carved into per-node /24 owned prefixes.
        #[arg(long, default_value = "10.0.0.0/8")]
        owned_supernet: String,
        /// Supernet carved into per-edge /30 link subnets.
        #[arg(long, default_value = "192.168.0.0/16")]
        link_supernet: String,
    },
    /// Parse a configuration or topology file and exit.
    Validate {
        file: PathBuf,
        /// auto | config | topology
        #[arg(long, default_value = "auto")]
        kind: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            config,
            seed,
            budget_iters,
            budget_seconds,
            trials,
            mutator,
            jobs,
            out_dir,
            fail_on_finding,
        } => cmd_run(
            &config,
            seed,
            budget_iters,
            budget_seconds,
            trials,
            mutator,
            jobs,
            &out_dir,
            fail_on_finding,
        ),
        Command::Replay { archive } => cmd_replay(&archive),
        Command::ImportZoo {
            graphml,
            out,
            asn_base,
            owned_supernet,
            link_supernet,
        } => cmd_import_zoo(&graphml, out.as_deref(), asn_base, &owned_supernet, &link_supernet),
        Command::Validate { file, kind } => cmd_validate(&file, &kind),
    };
    ExitCode::from(code)
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    config_path: &Path,
    seed: Option<u64>,
    budget_iters: Option<u64>,
    budget_seconds: Option<u64>,
    trials: Option<u32>,
    mutator: Option<MutatorKind>,
    jobs: Option<usize>,
    out_dir: &Path,
    fail_on_finding: bool,
) -> u8 {
    let mut cfg = match CampaignConfig::from_file(config_path) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("routefuzz: {err}");
            return 2;
        }
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(budget) = budget_iters {
        cfg.budget_iters = budget;
    }
    if budget_seconds.is_some() {
        cfg.budget_seconds = budget_seconds;
    }
    if let Some(trials) = trials {
        cfg.trials = trials;
    }
    if let Some(mutator) = mutator {
        cfg.mutator = mutator;
    }
    if let Some(jobs) = jobs {
        cfg.jobs = jobs;
    }

    let topology_text = match fs::read_to_string(&cfg.topology_path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!(
                "routefuzz: cannot read topology {}: {err}",
                cfg.topology_path.display()
            );
            return 2;
        }
    };
    match Topology::parse(&topology_text) {
        Ok(topo) => {
            for warning in topo.warnings() {
                eprintln!("routefuzz: warning: {warning}");
            }
        }
        Err(err) => {
            eprintln!("routefuzz: topology rejected: {err}");
            return 1;
        }
    }

    let findings_dir = out_dir.join("findings");
    if let Err(err) = fs::create_dir_all(&findings_dir) {
        eprintln!("routefuzz: cannot create {}: {err}", findings_dir.display());
        return 1;
    }

    // The manifest is written before iteration 0 and never touched again.
    let manifest = serde_json::json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "topology_hash": fnv64_hex(topology_text.as_bytes()),
        "layout": {
            "manifest": "manifest.json",
            "summary": "summary.txt",
            "trials": "trials.jsonl",
            "findings": "findings/"
        }
    });
    let manifest_text = match serde_json::to_string_pretty(&manifest) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("routefuzz: manifest serialization failed: {err}");
            return 1;
        }
    };
    if let Err(err) = fs::write(out_dir.join("manifest.json"), manifest_text) {
        eprintln!("routefuzz: cannot write manifest: {err}");
        return 1;
    }

    let report = match run_campaign(&cfg, Some(&findings_dir)) {
        Ok(report) => report,
        Err(CampaignError::Setup(SetupError::Io(path, err))) => {
            eprintln!("routefuzz: cannot read topology {}: {err}", path.display());
            return 2;
        }
        Err(CampaignError::Setup(err)) => {
            eprintln!("routefuzz: setup failed: {err}");
            return 1;
        }
        Err(CampaignError::Engine(err)) => {
            eprintln!("routefuzz: engine failure: {err}");
            return 1;
        }
    };

    for warning in report.warnings() {
        eprintln!("routefuzz: warning: {warning}");
    }

    let mut trials_jsonl = String::new();
    for trial in &report.trials {
        match serde_json::to_string(trial) {
            Ok(line) => {
                trials_jsonl.push_str(&line);
                trials_jsonl.push('\n');
            }
            Err(err) => eprintln!("routefuzz: warning: trial record serialization failed: {err}"),
        }
    }
    if let Err(err) = fs::write(out_dir.join("trials.jsonl"), trials_jsonl) {
        eprintln!("routefuzz: warning: cannot write trial records: {err}");
    }

    let summary = report.render_summary();
    if let Err(err) = fs::write(out_dir.join("summary.txt"), &summary) {
        eprintln!("routefuzz: warning: cannot write summary: {err}");
    }
    print!("{summary}");

    let any_findings = report
        .trials
        .iter()
        .any(|t| t.findings_by_class.values().any(|count| *count > 0));
    if fail_on_finding && any_findings {
        3
    } else {
        0
    }
}

fn cmd_replay(archive: &Path) -> u8 {
    match replay_archive(archive) {
        Ok(outcome) => {
            println!("archived findings:");
            for (class, key) in &outcome.archived_keys {
                println!("  {} {}", class.label(), key);
            }
            println!("replayed findings:");
            for (class, key) in &outcome.replayed_keys {
                println!("  {} {}", class.label(), key);
            }
            println!("{}", if outcome.matched { "MATCH" } else { "MISMATCH" });
            0
        }
        Err(err @ (ReplayError::Io(_) | ReplayError::Corrupt(_) | ReplayError::Network(_))) => {
            eprintln!("routefuzz: replay failed: {err}");
            1
        }
    }
}

fn cmd_import_zoo(
    graphml_path: &Path,
    out: Option<&Path>,
    asn_base: u32,
    owned_supernet: &str,
    link_supernet: &str,
) -> u8 {
    let text = match fs::read_to_string(graphml_path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!(
                "routefuzz: cannot read {}: {err}",
                graphml_path.display()
            );
            return 2;
        }
    };
    let owned = match owned_supernet.parse() {
        Ok(prefix) => prefix,
        Err(err) => {
            eprintln!("routefuzz: bad --owned-supernet: {err}");
            return 2;
        }
    };
    let link = match link_supernet.parse() {
        Ok(prefix) => prefix,
        Err(err) => {
            eprintln!("routefuzz: bad --link-supernet: {err}");
            return 2;
        }
    };
    let graph = match zoo::parse_graphml(&text) {
        Ok(graph) => graph,
        Err(err) => {
            eprintln!("routefuzz: {err}");
            return 1;
        }
    };
    let options = zoo::ZooOptions {
        asn_base,
        owned_supernet: owned,
        link_supernet: link,
    };
    let (topo, warnings) = match zoo::to_topology(&graph, &options) {
        Ok(result) => result,
        Err(err) => {
            eprintln!("routefuzz: {err}");
            return 1;
        }
    };
    for warning in warnings {
        eprintln!("routefuzz: warning: {warning}");
    }
    let rendered = topo.render();
    match out {
        Some(path) => {
            if let Err(err) = fs::write(path, rendered) {
                eprintln!("routefuzz: cannot write {}: {err}", path.display());
                return 1;
            }
        }
        None => print!("{rendered}"),
    }
    0
}

fn cmd_validate(file: &Path, kind: &str) -> u8 {
    let text = match fs::read_to_string(file) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("routefuzz: cannot read {}: {err}", file.display());
            return 2;
        }
    };
    let kind = match kind {
        "auto" => {
            let first = text
                .lines()
                .map(str::trim)
                .find(|l| !l.is_empty() && !l.starts_with('#'))
                .unwrap_or("");
            if first.starts_with("node ") || first.starts_with("link ") {
                "topology"
            } else {
                "config"
            }
        }
        "config" | "topology" => kind,
        other => {
            eprintln!("routefuzz: unknown --kind '{other}', expected auto|config|topology");
            return 2;
        }
    };
    match kind {
        "topology" => match Topology::parse(&text) {
            Ok(topo) => {
                for warning in topo.warnings() {
                    eprintln!("routefuzz: warning: {warning}");
                }
                println!(
                    "valid topology: {} nodes, {} links",
                    topo.nodes.len(),
                    topo.links.len()
                );
                0
            }
            Err(err) => {
                eprintln!("routefuzz: invalid topology: {err}");
                1
            }
        },
        _ => match parse_config(&text) {
            Ok((cfg, _)) => {
                println!(
                    "valid config: AS {}, {} neighbors, {} networks, {} static routes",
                    cfg.local_asn,
                    cfg.neighbors.len(),
                    cfg.networks.len(),
                    cfg.static_routes.len()
                );
                0
            }
            Err(err) => {
                eprintln!("routefuzz: invalid config: {err}");
                1
            }
        },
    }
}
