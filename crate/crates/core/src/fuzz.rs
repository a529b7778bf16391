//! The fuzzing state machine and per-iteration driver.
//!
//! A trial walks a three-state machine: normal operation, mutated with no
//! error observed, and error detected. Configuration changes move the
//! machine into the mutated state, an oracle finding moves it to the
//! error state, and recovery (simulator reset plus reconvergence to the
//! golden baseline) returns it to normal. Any transition outside the
//! table is an engine bug and aborts the trial.

use std::collections::BTreeMap;
use std::fmt;
use std::net::Ipv4Addr;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::NetworkEvent;
use crate::mutate::{
    delete_statement, insert_statement, mutate_field, random_mutate, select_mutation, Feedback,
    MutationPlan, MutationSettings, PlanKind,
};
use crate::oracle::{
    capture_artifacts, run_all_oracles, BaselineProfile, BugClass, OracleReport,
};
use crate::parse::parse_config;
use crate::rib::RibSnapshot;
use crate::sim::{Network, NetworkError, SessionState};
use crate::tree::DerivationTree;
use crate::util::fnv64_hex;

/// Fuzzer runtime states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FuzzState {
    /// Baseline running, nothing mutated since the last recovery.
    Normal,
    /// One or more mutations deployed, no error observed.
    MutatedClean,
    /// An oracle reported findings; recovery is pending.
    ErrorDetected,
}

impl FuzzState {
    pub const ALL: [FuzzState; 3] = [
        FuzzState::Normal,
        FuzzState::MutatedClean,
        FuzzState::ErrorDetected,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FuzzState::Normal => "normal",
            FuzzState::MutatedClean => "mutated-clean",
            FuzzState::ErrorDetected => "error-detected",
        }
    }
}

/// Events driving the state machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FuzzEvent {
    /// A configuration field changed.
    FieldChange,
    /// A statement was inserted.
    StatementInsertion,
    /// A statement was deleted.
    StatementDeletion,
    /// A synthesized prefix announcement went out.
    PrefixAnnouncement,
    /// An oracle reported at least one finding.
    OracleError,
    /// The simulator was restored to the baseline.
    Recovery,
}

impl FuzzEvent {
    pub const ALL: [FuzzEvent; 6] = [
        FuzzEvent::FieldChange,
        FuzzEvent::StatementInsertion,
        FuzzEvent::StatementDeletion,
        FuzzEvent::PrefixAnnouncement,
        FuzzEvent::OracleError,
        FuzzEvent::Recovery,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FuzzEvent::FieldChange => "field-change",
            FuzzEvent::StatementInsertion => "statement-insertion",
            FuzzEvent::StatementDeletion => "statement-deletion",
            FuzzEvent::PrefixAnnouncement => "prefix-announcement",
            FuzzEvent::OracleError => "oracle-error",
            FuzzEvent::Recovery => "recovery",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("illegal transition: {event:?} in state {state:?}")]
pub struct IllegalTransition {
    pub state: FuzzState,
    pub event: FuzzEvent,
}

/// The transition table. Configuration changes from normal or
/// mutated-clean land in mutated-clean; prefix announcements only extend
/// a mutated run; an oracle error enters error-detected from either
/// running state; only recovery leaves error-detected.
pub fn transition(state: FuzzState, event: FuzzEvent) -> Result<FuzzState, IllegalTransition> {
    use FuzzEvent::*;
    use FuzzState::*;
    match (state, event) {
        (Normal, FieldChange | StatementInsertion | StatementDeletion) => Ok(MutatedClean),
        (MutatedClean, FieldChange | StatementInsertion | StatementDeletion) => Ok(MutatedClean),
        (MutatedClean, PrefixAnnouncement) => Ok(MutatedClean),
        (Normal | MutatedClean, OracleError) => Ok(ErrorDetected),
        (ErrorDetected, Recovery) => Ok(Normal),
        _ => Err(IllegalTransition { state, event }),
    }
}

/// Which mutator a campaign runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutatorKind {
    Grammar,
    RandomBaseline,
}

impl MutatorKind {
    pub fn label(self) -> &'static str {
        match self {
            MutatorKind::Grammar => "grammar",
            MutatorKind::RandomBaseline => "random",
        }
    }
}

impl fmt::Display for MutatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for MutatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grammar" => Ok(MutatorKind::Grammar),
            "random" | "random-baseline" => Ok(MutatorKind::RandomBaseline),
            other => Err(format!("unknown mutator '{other}', expected grammar|random")),
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Illegal(#[from] IllegalTransition),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("recovery did not reproduce the golden baseline snapshot")]
    RecoveryDivergence,
}

/// Compact per-iteration log entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: u64,
    pub state_before: FuzzState,
    pub state_after: FuzzState,
    /// Machine events observed this iteration, in order.
    pub events_observed: Vec<FuzzEvent>,
    /// The mutation was rejected before deployment (duplicate statement
    /// or no viable target); the network was not touched.
    pub rejected_pre_deploy: bool,
    /// The deployed text parsed and replaced the node's config.
    pub deploy_accepted: bool,
    pub config_hash: String,
    pub finding_keys: Vec<(BugClass, String)>,
    pub duration_micros: u64,
}

/// Everything the campaign layer needs to archive an iteration's findings
/// after the network has already been recovered.
#[derive(Debug, Clone)]
pub struct ArchiveData {
    pub config_text: String,
    pub events: Vec<NetworkEvent>,
    pub current_ribs: BTreeMap<String, RibSnapshot>,
    pub report: OracleReport,
}

#[derive(Debug)]
pub struct IterationOutcome {
    pub record: IterationRecord,
    pub report: OracleReport,
    pub archive: Option<ArchiveData>,
}

/// Builds the target's feedback from its RIB snapshot, per-neighbor
/// session states and the previous iteration's event slice.
pub fn collect_feedback(net: &Network, target: &str, last_events: &[NetworkEvent]) -> Feedback {
    let rib = net.snapshot_rib(target);
    let announced_prefixes = rib.best_prefixes().collect();
    let mut session_states: BTreeMap<Ipv4Addr, SessionState> = BTreeMap::new();
    let mut addr_state: BTreeMap<Ipv4Addr, SessionState> = BTreeMap::new();
    for (_, link) in net.topology().links_of(target) {
        if let Some(peer) = link.other_end(target) {
            if let (Some(addr), Some(session)) = (link.addr_of(peer), net.session(target, peer)) {
                addr_state.insert(addr, session.state);
            }
        }
    }
    if let Some(cfg) = net.config_of(target) {
        for neighbor in &cfg.neighbors {
            let state = addr_state
                .get(&neighbor.peer_address)
                .copied()
                .unwrap_or(SessionState::Idle);
            session_states.insert(neighbor.peer_address, state);
        }
    }
    Feedback {
        rib,
        announced_prefixes,
        session_states,
        last_events: last_events.to_vec(),
    }
}

/// One trial's mutable state: the network, the target's current
/// derivation tree, the state machine, and the RNG stream.
pub struct TrialRunner {
    pub net: Network,
    target: String,
    observe_peer: Option<String>,
    baseline: BaselineProfile,
    golden: BTreeMap<String, String>,
    settings: MutationSettings,
    mutator: MutatorKind,
    state: FuzzState,
    rng: ChaCha8Rng,
    tree: DerivationTree,
    current_text: String,
    last_events: Vec<NetworkEvent>,
    /// Mutated configs emitted / of those, parse-valid.
    pub emitted: u64,
    pub parse_valid: u64,
}

impl TrialRunner {
    /// Takes a converged network plus its captured baseline.
    pub fn new(
        net: Network,
        target: &str,
        observe_peer: Option<String>,
        baseline: BaselineProfile,
        settings: MutationSettings,
        mutator: MutatorKind,
        rng: ChaCha8Rng,
    ) -> Self {
        let golden = baseline
            .rib_snapshots
            .iter()
            .map(|(n, s)| (n.clone(), s.render_text()))
            .collect();
        let current_text = net
            .config_text(target)
            .expect("target exists in the network")
            .to_string();
        let (_, tree) = parse_config(&current_text).expect("deployed config parses");
        TrialRunner {
            net,
            target: target.to_string(),
            observe_peer,
            baseline,
            golden,
            settings,
            mutator,
            state: FuzzState::Normal,
            rng,
            tree,
            current_text,
            last_events: Vec::new(),
            emitted: 0,
            parse_valid: 0,
        }
    }

    pub fn state(&self) -> FuzzState {
        self.state
    }

    pub fn baseline(&self) -> &BaselineProfile {
        &self.baseline
    }

    pub fn run_iteration(&mut self, index: u64) -> Result<IterationOutcome, EngineError> {
        match self.mutator {
            MutatorKind::Grammar => self.run_grammar_iteration(index),
            MutatorKind::RandomBaseline => self.run_random_iteration(index),
        }
    }

    fn run_grammar_iteration(&mut self, index: u64) -> Result<IterationOutcome, EngineError> {
        let started = Instant::now();
        let state_before = self.state;
        let feedback = collect_feedback(&self.net, &self.target, &self.last_events);
        let config = self
            .net
            .config_of(&self.target)
            .expect("target exists")
            .clone();
        let plan = select_mutation(&feedback, &config, &self.settings, &mut self.rng);
        let announced = plan.announced_prefix();

        let mutated = match &plan {
            MutationPlan::MutateField => mutate_field(&self.tree, &mut self.rng),
            MutationPlan::Insert { stmts, .. } => {
                let mut acc = Err(crate::mutate::MutationError::NoMutableField);
                let mut tree = self.tree.clone();
                for stmt in stmts {
                    acc = insert_statement(&tree, stmt, &mut self.rng);
                    match &acc {
                        Ok((_, t)) => tree = t.clone(),
                        Err(_) => break,
                    }
                }
                acc
            }
            MutationPlan::Delete => delete_statement(&self.tree, &mut self.rng),
        };

        let (_, new_tree) = match mutated {
            Ok(result) => result,
            Err(_) => {
                // Rejected before deployment: the network stays untouched
                // and the machine does not move.
                let record = IterationRecord {
                    index,
                    state_before,
                    state_after: self.state,
                    events_observed: Vec::new(),
                    rejected_pre_deploy: true,
                    deploy_accepted: false,
                    config_hash: fnv64_hex(self.current_text.as_bytes()),
                    finding_keys: Vec::new(),
                    duration_micros: started.elapsed().as_micros() as u64,
                };
                return Ok(IterationOutcome {
                    record,
                    report: OracleReport {
                        findings: Vec::new(),
                        notes: Vec::new(),
                    },
                    archive: None,
                });
            }
        };

        let text = new_tree.text();
        self.emitted += 1;
        let mark = self.net.log_len();
        let apply_events = self.net.apply_config(&self.target, &text)?;
        debug_assert!(
            apply_events.iter().all(|e| !e.is_config_rejected()),
            "grammar mutation produced rejected config"
        );
        self.parse_valid += 1;

        let mut observed = Vec::new();
        let change_event = match plan.kind() {
            PlanKind::FieldMutation => FuzzEvent::FieldChange,
            PlanKind::StatementInsertion => FuzzEvent::StatementInsertion,
            PlanKind::StatementDeletion => FuzzEvent::StatementDeletion,
        };
        self.step(change_event, &mut observed)?;

        let (convergence, _) = self.net.converge();
        if announced.is_some() {
            self.step(FuzzEvent::PrefixAnnouncement, &mut observed)?;
        }

        let artifacts = capture_artifacts(
            &mut self.net,
            mark,
            convergence,
            text.clone(),
            true,
            &self.target,
            self.observe_peer.as_deref(),
        );
        let report = run_all_oracles(&self.baseline, &artifacts);

        let archive;
        if report.is_clean() {
            self.tree = new_tree;
            self.current_text = text;
            self.last_events = artifacts.events;
            archive = None;
        } else {
            archive = Some(ArchiveData {
                config_text: text,
                events: artifacts.events.clone(),
                current_ribs: artifacts.rib_snapshots.clone(),
                report: report.clone(),
            });
            self.step(FuzzEvent::OracleError, &mut observed)?;
            self.recover(&mut observed)?;
        }

        let record = IterationRecord {
            index,
            state_before,
            state_after: self.state,
            events_observed: observed,
            rejected_pre_deploy: false,
            deploy_accepted: true,
            config_hash: fnv64_hex(self.current_hash_input().as_bytes()),
            finding_keys: report
                .findings
                .iter()
                .map(|f| (f.class, f.dedup_key.clone()))
                .collect(),
            duration_micros: started.elapsed().as_micros() as u64,
        };
        Ok(IterationOutcome {
            record,
            report,
            archive,
        })
    }

    fn run_random_iteration(&mut self, index: u64) -> Result<IterationOutcome, EngineError> {
        let started = Instant::now();
        let state_before = self.state;
        let budget = self.rng.random_range(1..=4usize);
        let text = random_mutate(&self.current_text, budget, &mut self.rng);
        self.emitted += 1;

        let mark = self.net.log_len();
        let apply_events = self.net.apply_config(&self.target, &text)?;
        let accepted = apply_events.iter().all(|e| !e.is_config_rejected());
        let mut observed = Vec::new();
        if accepted {
            self.parse_valid += 1;
            // A byte-level change that still parses is a config change.
            self.step(FuzzEvent::FieldChange, &mut observed)?;
        }

        let (convergence, _) = self.net.converge();
        let artifacts = capture_artifacts(
            &mut self.net,
            mark,
            convergence,
            text.clone(),
            accepted,
            &self.target,
            self.observe_peer.as_deref(),
        );
        let report = run_all_oracles(&self.baseline, &artifacts);

        let archive;
        if report.is_clean() {
            if accepted {
                self.current_text = text;
            }
            self.last_events = artifacts.events;
            archive = None;
        } else {
            archive = Some(ArchiveData {
                config_text: text,
                events: artifacts.events.clone(),
                current_ribs: artifacts.rib_snapshots.clone(),
                report: report.clone(),
            });
            self.step(FuzzEvent::OracleError, &mut observed)?;
            self.recover(&mut observed)?;
        }

        let record = IterationRecord {
            index,
            state_before,
            state_after: self.state,
            events_observed: observed,
            rejected_pre_deploy: false,
            deploy_accepted: accepted,
            config_hash: fnv64_hex(self.current_hash_input().as_bytes()),
            finding_keys: report
                .findings
                .iter()
                .map(|f| (f.class, f.dedup_key.clone()))
                .collect(),
            duration_micros: started.elapsed().as_micros() as u64,
        };
        Ok(IterationOutcome {
            record,
            report,
            archive,
        })
    }

    fn step(&mut self, event: FuzzEvent, observed: &mut Vec<FuzzEvent>) -> Result<(), EngineError> {
        self.state = transition(self.state, event)?;
        observed.push(event);
        Ok(())
    }

    /// Recovery: restore Step-0 state, reconverge, and verify the golden
    /// snapshot byte for byte.
    fn recover(&mut self, observed: &mut Vec<FuzzEvent>) -> Result<(), EngineError> {
        self.net.reset();
        self.net.converge();
        for (node, golden) in &self.golden {
            if self.net.snapshot_rib(node).render_text() != *golden {
                return Err(EngineError::RecoveryDivergence);
            }
        }
        let baseline_text = self
            .net
            .config_text(&self.target)
            .expect("target exists")
            .to_string();
        let (_, tree) = parse_config(&baseline_text).expect("baseline parses");
        self.tree = tree;
        self.current_text = baseline_text;
        self.last_events = Vec::new();
        self.step(FuzzEvent::Recovery, observed)
    }

    fn current_hash_input(&self) -> &str {
        &self.current_text
    }
}
