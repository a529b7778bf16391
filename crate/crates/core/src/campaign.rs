//! Campaign orchestration: trial scheduling, detection bookkeeping,
//! finding archives, replay, and the summary table.
//!
//! A campaign is a measurement, not a test: it runs a fixed iteration
//! budget per trial, records per-iteration outcomes, and reports which
//! anomaly families each trial detected and when. Reports are a pure
//! function of (topology, campaign config), so identical manifests give
//! byte-identical summary tables regardless of `jobs`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzz::{EngineError, MutatorKind, TrialRunner};
use crate::mutate::MutationSettings;
use crate::oracle::{capture_artifacts, capture_baseline, run_all_oracles, BugClass, Finding};
use crate::sim::{ConvergenceResult, Network};
use crate::util::fnv64_hex;

/// Detection rows of the summary matrix, mirroring the three seeded
/// misconfiguration families.
pub const DETECTION_LABELS: [&str; 3] =
    ["invalid-config", "max-prefix-reset", "sub-prefix-hijack"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub topology_path: PathBuf,
    pub target_node: String,
    /// Peer name selecting the observed link; `None` observes everything.
    pub observe_peer: Option<String>,
    pub budget_iters: u64,
    pub budget_seconds: Option<u64>,
    pub trials: u32,
    pub seed: u64,
    pub settings: MutationSettings,
    pub mutator: MutatorKind,
    pub jobs: usize,
}

impl CampaignConfig {
    pub fn new(topology_path: impl Into<PathBuf>, target: impl Into<String>) -> Self {
        CampaignConfig {
            topology_path: topology_path.into(),
            target_node: target.into(),
            observe_peer: None,
            budget_iters: 100,
            budget_seconds: None,
            trials: 1,
            seed: 0,
            settings: MutationSettings::default(),
            mutator: MutatorKind::Grammar,
            jobs: 1,
        }
    }

    /// Parses the declarative `key value` campaign file. Unknown keys are
    /// errors; relative topology paths resolve against the file's
    /// directory.
    pub fn from_file(path: &Path) -> Result<Self, ConfigFileError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigFileError::Io(path.to_path_buf(), e.to_string()))?;
        let mut topology: Option<PathBuf> = None;
        let mut target: Option<String> = None;
        let mut draft = CampaignConfig::new("", "");
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once(char::is_whitespace).ok_or_else(|| {
                ConfigFileError::Malformed(idx + 1, format!("missing value in '{line}'"))
            })?;
            let value = value.trim();
            let bad = |msg: String| ConfigFileError::Malformed(idx + 1, msg);
            match key {
                "topology" => topology = Some(PathBuf::from(value)),
                "target" => target = Some(value.to_string()),
                "observe" => draft.observe_peer = Some(value.to_string()),
                "budget-iters" => {
                    draft.budget_iters =
                        value.parse().map_err(|_| bad(format!("bad integer '{value}'")))?
                }
                "budget-seconds" => {
                    draft.budget_seconds = Some(
                        value.parse().map_err(|_| bad(format!("bad integer '{value}'")))?,
                    )
                }
                "trials" => {
                    draft.trials =
                        value.parse().map_err(|_| bad(format!("bad integer '{value}'")))?
                }
                "seed" => {
                    draft.seed =
                        value.parse().map_err(|_| bad(format!("bad integer '{value}'")))?
                }
                "jobs" => {
                    draft.jobs =
                        value.parse().map_err(|_| bad(format!("bad integer '{value}'")))?
                }
                "mutator" => {
                    draft.mutator = value.parse().map_err(|e: String| bad(e))?;
                }
                "weight-synthesis" => {
                    draft.settings.weights.subprefix_synthesis =
                        value.parse().map_err(|_| bad(format!("bad weight '{value}'")))?
                }
                "weight-max-prefix" => {
                    draft.settings.weights.max_prefix_insert =
                        value.parse().map_err(|_| bad(format!("bad weight '{value}'")))?
                }
                "weight-field" => {
                    draft.settings.weights.field_mutation =
                        value.parse().map_err(|_| bad(format!("bad weight '{value}'")))?
                }
                "weight-other" => {
                    draft.settings.weights.other_change =
                        value.parse().map_err(|_| bad(format!("bad weight '{value}'")))?
                }
                "subprefix-offsets" => {
                    let offsets: Result<Vec<u8>, _> =
                        value.split(',').map(|t| t.trim().parse()).collect();
                    let offsets =
                        offsets.map_err(|_| bad(format!("bad offsets '{value}'")))?;
                    if offsets.is_empty() || offsets.iter().any(|k| *k == 0 || *k > 8) {
                        return Err(bad("offsets must be in 1..=8".into()));
                    }
                    draft.settings.subprefix_offsets = offsets;
                }
                other => return Err(bad(format!("unknown key '{other}'"))),
            }
        }
        let mut cfg = draft;
        let topology =
            topology.ok_or_else(|| ConfigFileError::Missing("topology".to_string()))?;
        cfg.topology_path = if topology.is_relative() {
            path.parent().unwrap_or(Path::new(".")).join(topology)
        } else {
            topology
        };
        cfg.target_node = target.ok_or_else(|| ConfigFileError::Missing("target".to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, String),
    #[error("campaign file line {0}: {1}")]
    Malformed(usize, String),
    #[error("campaign file is missing required key '{0}'")]
    Missing(String),
}

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("setup: {0}")]
    Setup(#[from] SetupError),
    #[error("engine failure: {0}")]
    Engine(#[from] EngineError),
}

/// The seed topology is broken, not a finding.
#[derive(Debug, Error)]
pub enum SetupError {
    #[error("cannot read topology {0}: {1}")]
    Io(PathBuf, String),
    #[error("topology rejected: {0}")]
    Network(#[from] crate::sim::NetworkError),
    #[error("target node '{0}' is not in the topology")]
    UnknownTarget(String),
    #[error("baseline failed to converge within the round cap")]
    BaselineDiverges,
}

/// Per-trial results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial: u32,
    pub iterations_run: u64,
    /// First iteration index at which each detection label fired.
    pub first_detection: BTreeMap<String, u64>,
    pub findings_by_class: BTreeMap<BugClass, u64>,
    pub emitted: u64,
    pub parse_valid: u64,
    pub records: Vec<crate::fuzz::IterationRecord>,
    pub archived: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignReport {
    pub config: CampaignConfig,
    pub trials: Vec<TrialReport>,
}

impl CampaignReport {
    pub fn trials_detecting(&self, label: &str) -> usize {
        self.trials
            .iter()
            .filter(|t| t.first_detection.contains_key(label))
            .count()
    }

    pub fn total_emitted(&self) -> u64 {
        self.trials.iter().map(|t| t.emitted).sum()
    }

    pub fn total_parse_valid(&self) -> u64 {
        self.trials.iter().map(|t| t.parse_valid).sum()
    }

    pub fn validity_rate(&self) -> f64 {
        let emitted = self.total_emitted();
        if emitted == 0 {
            1.0
        } else {
            self.total_parse_valid() as f64 / emitted as f64
        }
    }

    pub fn warnings(&self) -> Vec<&str> {
        self.trials
            .iter()
            .flat_map(|t| t.warnings.iter().map(String::as_str))
            .collect()
    }

    /// The human-readable summary table. Contains no timing or
    /// environment data: identical manifests render identical bytes.
    pub fn render_summary(&self) -> String {
        let mut out = String::new();
        let cfg = &self.config;
        out.push_str("campaign summary\n");
        out.push_str("================\n");
        let _ = writeln!(out, "topology: {}", cfg.topology_path.display());
        let _ = writeln!(out, "target: {}", cfg.target_node);
        if let Some(peer) = &cfg.observe_peer {
            let _ = writeln!(out, "observe: link to {peer}");
        }
        let _ = writeln!(out, "mutator: {}", cfg.mutator);
        let _ = writeln!(out, "seed: {}", cfg.seed);
        let _ = writeln!(out, "trials: {}", cfg.trials);
        let _ = writeln!(out, "budget: {} iterations", cfg.budget_iters);
        if let Some(secs) = cfg.budget_seconds {
            let _ = writeln!(out, "budget-seconds: {secs}");
        }
        let w = &cfg.settings.weights;
        let _ = writeln!(
            out,
            "weights: synthesis={} max-prefix={} field={} other={}",
            w.subprefix_synthesis, w.max_prefix_insert, w.field_mutation, w.other_change
        );
        let offsets: Vec<String> = cfg
            .settings
            .subprefix_offsets
            .iter()
            .map(|k| k.to_string())
            .collect();
        let _ = writeln!(out, "subprefix-offsets: {}", offsets.join(","));
        out.push('\n');

        let _ = writeln!(out, "detection matrix (trials detected / total):");
        let _ = writeln!(
            out,
            "{:<20} {:<10} first-detection iterations",
            "bug class",
            cfg.mutator.label()
        );
        for label in DETECTION_LABELS {
            let detected = self.trials_detecting(label);
            let firsts: Vec<String> = self
                .trials
                .iter()
                .filter_map(|t| t.first_detection.get(label).map(|i| i.to_string()))
                .collect();
            let firsts = if firsts.is_empty() {
                "-".to_string()
            } else {
                firsts.join(",")
            };
            let _ = writeln!(
                out,
                "{:<20} {:<10} {}",
                label,
                format!("{detected}/{}", self.trials.len()),
                firsts
            );
        }
        out.push('\n');

        let _ = writeln!(
            out,
            "mutator validity: {}/{} ({:.2}%)",
            self.total_parse_valid(),
            self.total_emitted(),
            self.validity_rate() * 100.0
        );
        let mut by_class: BTreeMap<BugClass, u64> = BTreeMap::new();
        for trial in &self.trials {
            for (class, count) in &trial.findings_by_class {
                *by_class.entry(*class).or_default() += count;
            }
        }
        let _ = writeln!(out, "findings by class:");
        if by_class.is_empty() {
            let _ = writeln!(out, "{:<20} 0", "(none)");
        }
        for (class, count) in &by_class {
            let _ = writeln!(out, "{:<20} {}", class.label(), count);
        }
        out
    }
}

/// Independent RNG stream per trial, derived from the campaign seed.
pub fn rng_for_trial(seed: u64, trial: u32) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..12].copy_from_slice(&trial.to_le_bytes());
    key[12] = 0x5e;
    ChaCha8Rng::from_seed(key)
}

/// Runs every trial and aggregates the report. `archive_root`, when
/// given, receives one self-contained directory per finding.
pub fn run_campaign(
    cfg: &CampaignConfig,
    archive_root: Option<&Path>,
) -> Result<CampaignReport, CampaignError> {
    let topology_text = fs::read_to_string(&cfg.topology_path)
        .map_err(|e| SetupError::Io(cfg.topology_path.clone(), e.to_string()))?;
    let base_net = Network::from_text(&topology_text).map_err(SetupError::Network)?;
    if !base_net.has_node(&cfg.target_node) {
        return Err(SetupError::UnknownTarget(cfg.target_node.clone()).into());
    }
    {
        // The baseline must converge before any trial starts.
        let mut probe = base_net.clone();
        let (result, _) = probe.converge();
        if !matches!(result, ConvergenceResult::Converged { .. }) {
            return Err(SetupError::BaselineDiverges.into());
        }
    }

    let jobs = cfg.jobs.max(1).min(cfg.trials.max(1) as usize);
    let trials: Vec<TrialReport> = if jobs <= 1 {
        let mut reports = Vec::new();
        for trial in 0..cfg.trials {
            reports.push(run_trial(cfg, &base_net, &topology_text, trial, archive_root)?);
        }
        reports
    } else {
        let next = AtomicU32::new(0);
        let results: Mutex<Vec<Option<Result<TrialReport, CampaignError>>>> =
            Mutex::new((0..cfg.trials).map(|_| None).collect());
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let trial = next.fetch_add(1, Ordering::SeqCst);
                    if trial >= cfg.trials {
                        break;
                    }
                    let result = run_trial(cfg, &base_net, &topology_text, trial, archive_root);
                    results.lock().unwrap()[trial as usize] = Some(result);
                });
            }
        });
        let mut reports = Vec::new();
        for slot in results.into_inner().unwrap() {
            reports.push(slot.expect("every trial ran")?);
        }
        reports
    };

    Ok(CampaignReport {
        config: cfg.clone(),
        trials,
    })
}

fn run_trial(
    cfg: &CampaignConfig,
    base_net: &Network,
    topology_text: &str,
    trial: u32,
    archive_root: Option<&Path>,
) -> Result<TrialReport, CampaignError> {
    let mut net = base_net.clone();
    let (result, _) = net.converge();
    if !matches!(result, ConvergenceResult::Converged { .. }) {
        return Err(SetupError::BaselineDiverges.into());
    }
    let baseline = capture_baseline(&mut net);
    let baseline_rib_text = render_ribs(&baseline.rib_snapshots);
    let mut runner = TrialRunner::new(
        net,
        &cfg.target_node,
        cfg.observe_peer.clone(),
        baseline,
        cfg.settings.clone(),
        cfg.mutator,
        rng_for_trial(cfg.seed, trial),
    );

    let deadline = cfg
        .budget_seconds
        .map(|secs| Instant::now() + Duration::from_secs(secs));
    let mut report = TrialReport {
        trial,
        iterations_run: 0,
        first_detection: BTreeMap::new(),
        findings_by_class: BTreeMap::new(),
        emitted: 0,
        parse_valid: 0,
        records: Vec::new(),
        archived: Vec::new(),
        warnings: Vec::new(),
    };

    for index in 0..cfg.budget_iters {
        if let Some(deadline) = deadline {
            if Instant::now() >= deadline {
                break;
            }
        }
        let outcome = runner.run_iteration(index)?;
        report.iterations_run += 1;

        let classes = outcome.report.classes();
        if classes.contains(&BugClass::InvalidConfig) {
            report
                .first_detection
                .entry("invalid-config".to_string())
                .or_insert(index);
        }
        if outcome.report.findings.iter().any(Finding::is_max_prefix_reset) {
            report
                .first_detection
                .entry("max-prefix-reset".to_string())
                .or_insert(index);
        }
        if classes.contains(&BugClass::SubPrefixHijack)
            && (classes.contains(&BugClass::Blackhole)
                || classes.contains(&BugClass::PathAnomaly))
        {
            report
                .first_detection
                .entry("sub-prefix-hijack".to_string())
                .or_insert(index);
        }
        for finding in &outcome.report.findings {
            *report.findings_by_class.entry(finding.class).or_default() += 1;
        }

        if let (Some(root), Some(data)) = (archive_root, &outcome.archive) {
            for (fidx, finding) in data.report.findings.iter().enumerate() {
                let ctx = ArchiveContext {
                    cfg,
                    topology_text,
                    baseline_rib_text: &baseline_rib_text,
                    trial,
                    iteration: index,
                    finding_index: fidx,
                };
                match archive_finding(root, &ctx, finding, data) {
                    Ok(path) => report.archived.push(path),
                    Err(err) => report.warnings.push(format!(
                        "trial {trial} iteration {index}: archive failed: {err}"
                    )),
                }
            }
        }
        report.records.push(outcome.record);
    }

    report.emitted = runner.emitted;
    report.parse_valid = runner.parse_valid;
    Ok(report)
}

fn render_ribs(snapshots: &BTreeMap<String, crate::rib::RibSnapshot>) -> String {
    let mut out = String::new();
    for (node, snap) in snapshots {
        let _ = writeln!(out, "== {node}");
        out.push_str(&snap.render_text());
    }
    out
}

struct ArchiveContext<'a> {
    cfg: &'a CampaignConfig,
    topology_text: &'a str,
    baseline_rib_text: &'a str,
    trial: u32,
    iteration: u64,
    finding_index: usize,
}

/// Metadata sidecar stored with each archived finding.
#[derive(Debug, Serialize, Deserialize)]
pub struct ArchiveMeta {
    pub tool_version: String,
    pub seed: u64,
    pub trial: u32,
    pub iteration: u64,
    pub finding_index: usize,
    pub target: String,
    pub mutator: MutatorKind,
    pub observe_peer: Option<String>,
    pub topology_hash: String,
    pub finding: Finding,
    /// Every (class, key) pair the iteration reported, the replay
    /// comparison target.
    pub iteration_keys: Vec<(BugClass, String)>,
}

/// Writes one self-contained finding directory: enough to replay the
/// iteration deterministically.
fn archive_finding(
    root: &Path,
    ctx: &ArchiveContext<'_>,
    finding: &Finding,
    data: &crate::fuzz::ArchiveData,
) -> io::Result<PathBuf> {
    let dir = root.join(format!(
        "trial{:03}_iter{:05}_f{}_{}",
        ctx.trial,
        ctx.iteration,
        ctx.finding_index,
        finding.class.label()
    ));
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.txt"), &data.config_text)?;
    fs::write(dir.join("topology.txt"), ctx.topology_text)?;
    fs::write(dir.join("baseline_ribs.txt"), ctx.baseline_rib_text)?;
    fs::write(dir.join("current_ribs.txt"), render_ribs(&data.current_ribs))?;
    let mut events = String::new();
    for event in &data.events {
        events.push_str(&serde_json::to_string(event).map_err(io::Error::other)?);
        events.push('\n');
    }
    fs::write(dir.join("events.jsonl"), events)?;
    let meta = ArchiveMeta {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: ctx.cfg.seed,
        trial: ctx.trial,
        iteration: ctx.iteration,
        finding_index: ctx.finding_index,
        target: ctx.cfg.target_node.clone(),
        mutator: ctx.cfg.mutator,
        observe_peer: ctx.cfg.observe_peer.clone(),
        topology_hash: fnv64_hex(ctx.topology_text.as_bytes()),
        finding: finding.clone(),
        iteration_keys: data
            .report
            .findings
            .iter()
            .map(|f| (f.class, f.dedup_key.clone()))
            .collect(),
    };
    fs::write(
        dir.join("finding.json"),
        serde_json::to_string_pretty(&meta).map_err(io::Error::other)?,
    )?;
    Ok(dir)
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("cannot read archive: {0}")]
    Io(String),
    #[error("corrupt archive: {0}")]
    Corrupt(String),
    #[error("replay setup failed: {0}")]
    Network(#[from] crate::sim::NetworkError),
}

#[derive(Debug)]
pub struct ReplayOutcome {
    pub matched: bool,
    pub archived_keys: Vec<(BugClass, String)>,
    pub replayed_keys: Vec<(BugClass, String)>,
    pub report: crate::oracle::OracleReport,
}

/// Reconstructs the topology and baseline from an archive, re-applies the
/// archived configuration, reruns the oracles and compares the finding
/// keys against the archived iteration.
pub fn replay_archive(dir: &Path) -> Result<ReplayOutcome, ReplayError> {
    let read = |name: &str| {
        fs::read_to_string(dir.join(name))
            .map_err(|e| ReplayError::Io(format!("{}: {e}", dir.join(name).display())))
    };
    let meta_text = read("finding.json")?;
    let meta: ArchiveMeta = serde_json::from_str(&meta_text)
        .map_err(|e| ReplayError::Corrupt(format!("finding.json: {e}")))?;
    let topology_text = read("topology.txt")?;
    let config_text = read("config.txt")?;

    let mut net = Network::from_text(&topology_text)?;
    if !net.has_node(&meta.target) {
        return Err(ReplayError::Corrupt(format!(
            "target '{}' not in archived topology",
            meta.target
        )));
    }
    net.converge();
    let baseline = capture_baseline(&mut net);
    let mark = net.log_len();
    let apply_events = net.apply_config(&meta.target, &config_text)?;
    let accepted = apply_events.iter().all(|e| !e.is_config_rejected());
    let (convergence, _) = net.converge();
    let artifacts = capture_artifacts(
        &mut net,
        mark,
        convergence,
        config_text,
        accepted,
        &meta.target,
        meta.observe_peer.as_deref(),
    );
    let report = run_all_oracles(&baseline, &artifacts);

    let mut replayed_keys: Vec<(BugClass, String)> = report
        .findings
        .iter()
        .map(|f| (f.class, f.dedup_key.clone()))
        .collect();
    replayed_keys.sort();
    let mut archived_keys = meta.iteration_keys.clone();
    archived_keys.sort();
    Ok(ReplayOutcome {
        matched: replayed_keys == archived_keys,
        archived_keys,
        replayed_keys,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let topo = dir.path().join("net.txt");
        fs::write(&topo, "node a asn 1 router-id 1.1.1.1\n").unwrap();
        let cfg_path = dir.path().join("campaign.cfg");
        fs::write(
            &cfg_path,
            "# demo\ntopology net.txt\ntarget a\nbudget-iters 42\ntrials 3\nseed 7\nmutator random\nsubprefix-offsets 1,2\n",
        )
        .unwrap();
        let cfg = CampaignConfig::from_file(&cfg_path).unwrap();
        assert_eq!(cfg.topology_path, topo);
        assert_eq!(cfg.target_node, "a");
        assert_eq!(cfg.budget_iters, 42);
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.mutator, MutatorKind::RandomBaseline);
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("campaign.cfg");
        fs::write(&cfg_path, "topology net.txt\ntarget a\nbanana 1\n").unwrap();
        assert!(matches!(
            CampaignConfig::from_file(&cfg_path),
            Err(ConfigFileError::Malformed(3, _))
        ));
    }

    #[test]
    fn missing_topology_is_setup_error() {
        let cfg = CampaignConfig::new("/does/not/exist.txt", "a");
        match run_campaign(&cfg, None) {
            Err(CampaignError::Setup(SetupError::Io(..))) => {}
            other => panic!("expected setup error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_target_is_setup_error() {
        let dir = tempfile::tempdir().unwrap();
        let topo = dir.path().join("net.txt");
        fs::write(&topo, "node a asn 1 router-id 1.1.1.1\n").unwrap();
        let cfg = CampaignConfig::new(&topo, "ghost");
        assert!(matches!(
            run_campaign(&cfg, None),
            Err(CampaignError::Setup(SetupError::UnknownTarget(_)))
        ));
    }

    #[test]
    fn zero_budget_gives_empty_report() {
        let dir = tempfile::tempdir().unwrap();
        let topo = dir.path().join("net.txt");
        fs::write(
            &topo,
            "node a asn 1 router-id 1.1.1.1 owns 10.1.0.0/24\nnode b asn 2 router-id 2.2.2.2 owns 10.2.0.0/24\nlink a b subnet 192.168.0.0/30\n",
        )
        .unwrap();
        let mut cfg = CampaignConfig::new(&topo, "a");
        cfg.budget_iters = 0;
        cfg.trials = 2;
        let report = run_campaign(&cfg, None).unwrap();
        assert_eq!(report.trials.len(), 2);
        assert!(report.trials.iter().all(|t| t.records.is_empty()));
        assert_eq!(report.total_emitted(), 0);
    }

    #[test]
    fn expired_wall_clock_budget_stops_before_iterating() {
        let dir = tempfile::tempdir().unwrap();
        let topo = dir.path().join("net.txt");
        fs::write(
            &topo,
            "node a asn 1 router-id 1.1.1.1 owns 10.1.0.0/24\nnode b asn 2 router-id 2.2.2.2 owns 10.2.0.0/24\nlink a b subnet 192.168.0.0/30\n",
        )
        .unwrap();
        let mut cfg = CampaignConfig::new(&topo, "a");
        cfg.budget_iters = 50;
        cfg.budget_seconds = Some(0);
        let report = run_campaign(&cfg, None).unwrap();
        assert_eq!(report.trials[0].iterations_run, 0);
    }

    #[test]
    fn rng_streams_differ_per_trial() {
        use rand::RngCore;
        let mut a = rng_for_trial(7, 0);
        let mut b = rng_for_trial(7, 1);
        assert_ne!(a.next_u64(), b.next_u64());
        let mut a2 = rng_for_trial(7, 0);
        let mut fresh = rng_for_trial(7, 0);
        assert_eq!(a2.next_u64(), fresh.next_u64());
    }
}
