//! Runtime anomaly oracles.
//!
//! Every oracle is a pure function of the iteration's observations and
//! the baseline captured at trial start, so the set of findings is a
//! deterministic function of (topology, config sequence). Metamorphic
//! relations do the heavy lifting: an unchanged network yields zero
//! findings, and every finding carries the evidence that justified it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use crate::event::{EventKind, NetworkEvent, NotificationSubcode};
use crate::forward::PathResult;
use crate::parse::parse_config;
use crate::prefix::Prefix;
use crate::rib::RibSnapshot;
use crate::sim::{ConvergenceResult, Network};
use crate::topology::Topology;

/// Anomaly families the oracles can report.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum BugClass {
    InvalidConfig,
    SessionReset,
    Blackhole,
    SubPrefixHijack,
    PathAnomaly,
    Oscillation,
}

impl BugClass {
    pub fn label(self) -> &'static str {
        match self {
            BugClass::InvalidConfig => "invalid-config",
            BugClass::SessionReset => "session-reset",
            BugClass::Blackhole => "blackhole",
            BugClass::SubPrefixHijack => "sub-prefix-hijack",
            BugClass::PathAnomaly => "path-anomaly",
            BugClass::Oscillation => "oscillation",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            BugClass::InvalidConfig => Severity::Low,
            BugClass::SessionReset => Severity::High,
            BugClass::Blackhole => Severity::High,
            BugClass::SubPrefixHijack => Severity::Critical,
            BugClass::PathAnomaly => Severity::Medium,
            BugClass::Oscillation => Severity::Medium,
        }
    }
}

impl fmt::Display for BugClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Fixed severity tag per bug class; no further ranking.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum Severity {
    Low,
    Medium,
    High,
    Critical,
}

/// One piece of supporting observation attached to a finding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Evidence {
    Event(NetworkEvent),
    RibDiff {
        node: String,
        before: String,
        after: String,
    },
    PathChange {
        src: String,
        dst: Ipv4Addr,
        before: String,
        after: String,
    },
    OriginChange {
        prefix: Prefix,
        before_asn: u32,
        after_asn: u32,
    },
    Overlap {
        parent: Prefix,
        parent_origin: u32,
        child: Prefix,
        child_origin: u32,
    },
    /// Longer forwarding path with an unchanged terminal. Recorded as a
    /// low-severity note, never a standalone finding.
    PathLengthIncrease {
        src: String,
        dst: Ipv4Addr,
        before: usize,
        after: usize,
    },
}

/// A detected anomaly with its justification and the configuration that
/// triggered it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub oracle: String,
    pub severity: Severity,
    pub class: BugClass,
    pub evidence: Vec<Evidence>,
    pub config_text: String,
    /// `(class, dedup_key)` identifies a root cause: one finding per pair.
    pub dedup_key: String,
}

impl Finding {
    fn new(
        oracle: &str,
        class: BugClass,
        dedup_key: String,
        evidence: Vec<Evidence>,
        config_text: &str,
    ) -> Self {
        Finding {
            oracle: oracle.to_string(),
            severity: class.severity(),
            class,
            evidence,
            config_text: config_text.to_string(),
            dedup_key,
        }
    }

    /// Structural soundness: evidence present, and the triggering config
    /// parses exactly when the class is not InvalidConfig.
    pub fn is_well_formed(&self) -> bool {
        let parses = parse_config(&self.config_text).is_ok();
        !self.evidence.is_empty()
            && if self.class == BugClass::InvalidConfig {
                !parses
            } else {
                parses
            }
    }

    /// True for session resets caused by a maximum-prefix NOTIFICATION.
    pub fn is_max_prefix_reset(&self) -> bool {
        self.class == BugClass::SessionReset
            && self.evidence.iter().any(|e| {
                matches!(
                    e,
                    Evidence::Event(NetworkEvent {
                        kind: EventKind::Notification {
                            subcode: NotificationSubcode::MaxPrefixesReached,
                            ..
                        },
                        ..
                    })
                )
            })
    }
}

/// Summary of one forwarding query, comparable across iterations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSummary {
    pub outcome: String,
    pub terminal: String,
    pub terminal_asn: Option<u32>,
    pub hops: Vec<String>,
}

impl PathSummary {
    fn from_result(result: &PathResult, net: &Network) -> Self {
        PathSummary {
            outcome: result.label().to_string(),
            terminal: result.terminal().to_string(),
            terminal_asn: net.local_asn(result.terminal()),
            hops: result.hops().to_vec(),
        }
    }

    pub fn is_delivered(&self) -> bool {
        self.outcome == "path"
    }

    fn describe(&self) -> String {
        format!("{} via {}", self.outcome, self.hops.join(">"))
    }
}

pub type ReachabilityMatrix = BTreeMap<(String, Ipv4Addr), PathSummary>;

/// Reference state captured once per trial from the converged baseline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineProfile {
    pub rib_snapshots: BTreeMap<String, RibSnapshot>,
    pub reachability: ReachabilityMatrix,
    /// Origin AS of every announced prefix at baseline.
    pub origin_map: BTreeMap<Prefix, u32>,
    pub node_asns: BTreeMap<String, u32>,
}

/// Everything one iteration hands to the oracles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationArtifacts {
    pub events: Vec<NetworkEvent>,
    pub rib_snapshots: BTreeMap<String, RibSnapshot>,
    pub reachability: ReachabilityMatrix,
    pub convergence: ConvergenceResult,
    pub config_text: String,
    pub config_parses: bool,
    pub node_asns: BTreeMap<String, u32>,
}

/// Aggregated oracle output for one iteration: deduplicated findings in
/// deterministic order plus low-severity notes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub findings: Vec<Finding>,
    pub notes: Vec<Evidence>,
}

impl OracleReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has_class(&self, class: BugClass) -> bool {
        self.findings.iter().any(|f| f.class == class)
    }

    pub fn classes(&self) -> BTreeSet<BugClass> {
        self.findings.iter().map(|f| f.class).collect()
    }
}

/// The (source, destination) probe set for a topology: every node probes
/// quarter-granularity representatives of every owned prefix, so any
/// sub-prefix up to two bits more specific covers at least one key.
pub fn probe_keys(topo: &Topology) -> Vec<(String, Ipv4Addr)> {
    let mut dsts = BTreeSet::new();
    for node in &topo.nodes {
        for prefix in &node.owned {
            dsts.extend(prefix.probe_addresses());
        }
    }
    let mut keys = Vec::new();
    let mut names: Vec<&str> = topo.nodes.iter().map(|n| n.name.as_str()).collect();
    names.sort();
    for name in names {
        for dst in &dsts {
            keys.push((name.to_string(), *dst));
        }
    }
    keys
}

/// Probes every key and summarizes the walks.
pub fn reachability_matrix(net: &mut Network) -> ReachabilityMatrix {
    let keys = probe_keys(net.topology());
    let mut matrix = BTreeMap::new();
    for (src, dst) in keys {
        let result = net.forwarding_path(&src, dst);
        let summary = PathSummary::from_result(&result, net);
        matrix.insert((src, dst), summary);
    }
    matrix
}

fn node_asns(net: &Network) -> BTreeMap<String, u32> {
    net.node_names()
        .into_iter()
        .filter_map(|n| net.local_asn(&n).map(|asn| (n, asn)))
        .collect()
}

/// Origin ASNs of every best route across the network.
fn origin_sets(
    snapshots: &BTreeMap<String, RibSnapshot>,
    asns: &BTreeMap<String, u32>,
) -> BTreeMap<Prefix, BTreeSet<u32>> {
    let mut map: BTreeMap<Prefix, BTreeSet<u32>> = BTreeMap::new();
    for (node, snap) in snapshots {
        let local_asn = asns.get(node).copied().unwrap_or(0);
        for entry in snap.entries.iter().filter(|e| e.best) {
            map.entry(entry.prefix)
                .or_default()
                .insert(entry.origin_asn(local_asn));
        }
    }
    map
}

/// Captures the reference profile from a converged baseline network.
pub fn capture_baseline(net: &mut Network) -> BaselineProfile {
    let rib_snapshots = net.snapshot_all();
    let reachability = reachability_matrix(net);
    let asns = node_asns(net);
    let origin_map = origin_sets(&rib_snapshots, &asns)
        .into_iter()
        .filter_map(|(p, set)| set.into_iter().min().map(|asn| (p, asn)))
        .collect();
    BaselineProfile {
        rib_snapshots,
        reachability,
        origin_map,
        node_asns: asns,
    }
}

/// Captures the current iteration's artifacts: RIB snapshots, a fresh
/// probe matrix, and the event slice from `mark` onward filtered to the
/// observed interface. Probing runs first so its ICMP events land inside
/// the slice.
pub fn capture_artifacts(
    net: &mut Network,
    mark: usize,
    convergence: ConvergenceResult,
    config_text: String,
    config_parses: bool,
    target: &str,
    observe_peer: Option<&str>,
) -> IterationArtifacts {
    let rib_snapshots = net.snapshot_all();
    let reachability = reachability_matrix(net);
    let events = crate::event::observe_filter(net.events_since(mark), target, observe_peer);
    IterationArtifacts {
        events,
        rib_snapshots,
        reachability,
        convergence,
        config_text,
        config_parses,
        node_asns: node_asns(net),
    }
}

/// Packet-level oracle: NOTIFICATION messages mean session resets,
/// rejected deployments mean invalid configurations.
pub fn notification_oracle(events: &[NetworkEvent], config_text: &str) -> Vec<Finding> {
    let mut findings = Vec::new();
    for event in events {
        match &event.kind {
            EventKind::Notification { peer, .. } => findings.push(Finding::new(
                "notification",
                BugClass::SessionReset,
                format!("session:{}:{}", event.node, peer),
                vec![Evidence::Event(event.clone())],
                config_text,
            )),
            EventKind::ConfigRejected { .. } => findings.push(Finding::new(
                "notification",
                BugClass::InvalidConfig,
                format!("config:{}", event.node),
                vec![Evidence::Event(event.clone())],
                config_text,
            )),
            _ => {}
        }
    }
    findings
}

/// Metamorphic reachability oracle: destinations that were deliverable at
/// baseline and are now blackholed or unreachable. Pre-existing failures
/// are not findings.
pub fn blackhole_oracle(
    baseline: &BaselineProfile,
    artifacts: &IterationArtifacts,
) -> Vec<Finding> {
    let mut findings = Vec::new();
    let current_origin = origin_sets(&artifacts.rib_snapshots, &artifacts.node_asns);
    for (key, before) in &baseline.reachability {
        let Some(after) = artifacts.reachability.get(key) else {
            continue;
        };
        if !before.is_delivered() {
            continue;
        }
        if after.outcome == "blackholed" || after.outcome == "unreachable" {
            let (src, dst) = key;
            let mut evidence = vec![Evidence::PathChange {
                src: src.clone(),
                dst: *dst,
                before: before.describe(),
                after: after.describe(),
            }];
            evidence.extend(
                artifacts
                    .events
                    .iter()
                    .filter(|e| {
                        matches!(&e.kind, EventKind::IcmpUnreachable { dst: d, .. } if d == dst)
                    })
                    .map(|e| Evidence::Event(e.clone()))
                    .take(1),
            );
            findings.push(Finding::new(
                "blackhole",
                BugClass::Blackhole,
                format!("reach:{}", covering_key(*dst, baseline, &current_origin)),
                evidence,
                &artifacts.config_text,
            ));
        }
    }
    findings
}

/// Metamorphic routing oracle: new more-specific announcements under a
/// foreign origin are sub-prefix hijacks; changed origins and shifted
/// path terminals are path anomalies. Same-origin de-aggregation is
/// legitimate and exempt. Path-length growth alone becomes a note.
pub fn hijack_oracle(
    baseline: &BaselineProfile,
    artifacts: &IterationArtifacts,
) -> (Vec<Finding>, Vec<Evidence>) {
    let mut findings = Vec::new();
    let mut notes = Vec::new();
    let current_origin = origin_sets(&artifacts.rib_snapshots, &artifacts.node_asns);

    for (prefix, origins) in &current_origin {
        for origin in origins {
            if baseline.origin_map.get(prefix) == Some(origin) {
                continue;
            }
            if let Some(baseline_origin) = baseline.origin_map.get(prefix) {
                // A prefix the baseline knew now shows a different origin.
                findings.push(Finding::new(
                    "hijack",
                    BugClass::PathAnomaly,
                    format!("origin:{prefix}"),
                    vec![Evidence::OriginChange {
                        prefix: *prefix,
                        before_asn: *baseline_origin,
                        after_asn: *origin,
                    }],
                    &artifacts.config_text,
                ));
                continue;
            }
            // A new announcement: hijack if it sits strictly inside a
            // baseline prefix owned by someone else.
            let parent = baseline
                .origin_map
                .iter()
                .filter(|(p, _)| *p != prefix && p.contains(prefix))
                .max_by_key(|(p, _)| p.masklen());
            if let Some((parent, parent_origin)) = parent {
                if parent_origin != origin {
                    findings.push(Finding::new(
                        "hijack",
                        BugClass::SubPrefixHijack,
                        format!("hijack:{prefix}"),
                        vec![Evidence::Overlap {
                            parent: *parent,
                            parent_origin: *parent_origin,
                            child: *prefix,
                            child_origin: *origin,
                        }],
                        &artifacts.config_text,
                    ));
                }
            }
        }
    }

    for (key, before) in &baseline.reachability {
        let Some(after) = artifacts.reachability.get(key) else {
            continue;
        };
        if !before.is_delivered() {
            continue;
        }
        let (src, dst) = key;
        let terminal_shift =
            after.is_delivered() && after.terminal_asn != before.terminal_asn;
        let looped = after.outcome == "forwarding-loop";
        if terminal_shift || looped {
            findings.push(Finding::new(
                "hijack",
                BugClass::PathAnomaly,
                format!("path:{}", covering_key(*dst, baseline, &current_origin)),
                vec![Evidence::PathChange {
                    src: src.clone(),
                    dst: *dst,
                    before: before.describe(),
                    after: after.describe(),
                }],
                &artifacts.config_text,
            ));
        } else if after.is_delivered() && after.hops.len() > before.hops.len() {
            notes.push(Evidence::PathLengthIncrease {
                src: src.clone(),
                dst: *dst,
                before: before.hops.len(),
                after: after.hops.len(),
            });
        }
    }

    (findings, notes)
}

/// Runs every oracle, folds in convergence trouble, deduplicates by
/// (class, key) and orders the report deterministically.
pub fn run_all_oracles(baseline: &BaselineProfile, artifacts: &IterationArtifacts) -> OracleReport {
    let mut all = Vec::new();
    let mut notes = Vec::new();
    all.extend(notification_oracle(&artifacts.events, &artifacts.config_text));
    // A rejected deployment leaves the network untouched; the metamorphic
    // oracles would only re-observe the baseline.
    if artifacts.config_parses {
        all.extend(blackhole_oracle(baseline, artifacts));
        let (hijack_findings, hijack_notes) = hijack_oracle(baseline, artifacts);
        all.extend(hijack_findings);
        notes = hijack_notes;
        if let ConvergenceResult::RoundCapExceeded { .. } = artifacts.convergence {
            let tail: Vec<Evidence> = artifacts
                .events
                .iter()
                .rev()
                .take(8)
                .rev()
                .cloned()
                .map(Evidence::Event)
                .collect();
            all.push(Finding::new(
                "convergence",
                BugClass::Oscillation,
                "oscillation".to_string(),
                tail,
                &artifacts.config_text,
            ));
        }
    }
    let mut deduped: BTreeMap<(BugClass, String), Finding> = BTreeMap::new();
    for finding in all {
        deduped
            .entry((finding.class, finding.dedup_key.clone()))
            .or_insert(finding);
    }
    OracleReport {
        findings: deduped.into_values().collect(),
        notes,
    }
}

/// Root-cause identifier for a destination address: the most specific
/// currently announced prefix covering it, falling back to the baseline
/// covering prefix, then to the address itself.
fn covering_key(
    dst: Ipv4Addr,
    baseline: &BaselineProfile,
    current_origin: &BTreeMap<Prefix, BTreeSet<u32>>,
) -> String {
    let current = current_origin
        .keys()
        .filter(|p| p.contains_address(dst))
        .max_by_key(|p| p.masklen());
    if let Some(p) = current {
        return p.to_string();
    }
    baseline
        .origin_map
        .keys()
        .filter(|p| p.contains_address(dst))
        .max_by_key(|p| p.masklen())
        .map(|p| p.to_string())
        .unwrap_or_else(|| dst.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{NetworkStmt, StaticRouteStmt, StaticTarget};

    const FIVE: &str = "\
node cust asn 65001 router-id 10.0.1.1 owns 10.1.0.0/24
node prov1 asn 65002 router-id 10.0.2.1 owns 10.2.0.0/24
node prov2 asn 65003 router-id 10.0.3.1 owns 10.3.0.0/24
node dc1 asn 65004 router-id 10.0.4.1 owns 208.65.152.0/22
node dc2 asn 65005 router-id 10.0.5.1 owns 10.5.0.0/24
link cust prov1 subnet 192.168.0.0/30
link cust prov2 subnet 192.168.0.4/30
link prov1 prov2 subnet 192.168.0.8/30
link prov1 dc1 subnet 192.168.0.12/30
link prov2 dc2 subnet 192.168.0.16/30
";

    fn converged() -> Network {
        let mut net = Network::from_text(FIVE).unwrap();
        let (result, _) = net.converge();
        assert!(matches!(result, ConvergenceResult::Converged { .. }));
        net
    }

    fn artifacts_of(net: &mut Network, events: Vec<NetworkEvent>, text: &str) -> IterationArtifacts {
        let mark = net.log_len();
        let mut artifacts = capture_artifacts(
            net,
            mark,
            ConvergenceResult::Converged { rounds: 0 },
            text.to_string(),
            true,
            "dc2",
            None,
        );
        // Tests drive the event slice explicitly.
        artifacts.events = events;
        artifacts
    }

    #[test]
    fn metamorphic_identity_no_findings() {
        let mut net = converged();
        let baseline = capture_baseline(&mut net);
        let text = net.config_text("dc2").unwrap().to_string();
        let artifacts = artifacts_of(&mut net, Vec::new(), &text);
        let report = run_all_oracles(&baseline, &artifacts);
        assert!(report.is_clean(), "findings on identity: {:?}", report.findings);
    }

    #[test]
    fn hijack_with_null_sink_raises_hijack_and_blackhole() {
        let mut net = converged();
        let baseline = capture_baseline(&mut net);
        let mut cfg = net.config_of("dc2").unwrap().clone();
        cfg.networks.push(NetworkStmt {
            prefix: Prefix::parse("208.65.153.0/24").unwrap(),
        });
        cfg.static_routes.push(StaticRouteStmt {
            prefix: Prefix::parse("208.65.153.0/24").unwrap(),
            target: StaticTarget::NullSink,
        });
        let text = cfg.render();
        let mark = net.log_len();
        net.apply_config("dc2", &text).unwrap();
        net.converge();
        let events = net.events_since(mark).to_vec();
        let artifacts = artifacts_of(&mut net, events, &text);
        let report = run_all_oracles(&baseline, &artifacts);
        assert!(report.has_class(BugClass::SubPrefixHijack));
        assert!(report.has_class(BugClass::Blackhole));
        for finding in &report.findings {
            assert!(finding.is_well_formed(), "malformed: {finding:?}");
        }
        // Hijack evidence pairs satisfy strict containment.
        let hijack = report
            .findings
            .iter()
            .find(|f| f.class == BugClass::SubPrefixHijack)
            .unwrap();
        match &hijack.evidence[0] {
            Evidence::Overlap { parent, child, .. } => {
                assert!(parent.contains(child));
                assert_ne!(parent, child);
            }
            other => panic!("unexpected evidence {other:?}"),
        }
    }

    #[test]
    fn same_origin_deaggregation_is_exempt() {
        let mut net = converged();
        let baseline = capture_baseline(&mut net);
        // dc1 splits its own /22: legitimate.
        let mut cfg = net.config_of("dc1").unwrap().clone();
        cfg.networks.push(NetworkStmt {
            prefix: Prefix::parse("208.65.153.0/24").unwrap(),
        });
        let text = cfg.render();
        net.apply_config("dc1", &text).unwrap();
        net.converge();
        let artifacts = artifacts_of(&mut net, Vec::new(), &text);
        let (findings, _) = hijack_oracle(&baseline, &artifacts);
        assert!(
            findings.iter().all(|f| f.class != BugClass::SubPrefixHijack),
            "legitimate de-aggregation flagged: {findings:?}"
        );
    }

    #[test]
    fn notification_oracle_maps_events() {
        let notification = NetworkEvent {
            tick: 1,
            seq: 1,
            node: "cust".into(),
            kind: EventKind::Notification {
                peer: "prov1".into(),
                code: crate::event::NotificationCode::Cease,
                subcode: NotificationSubcode::MaxPrefixesReached,
            },
        };
        let valid = "router bgp 1\n router-id 1.1.1.1\n";
        let findings = notification_oracle(&[notification], valid);
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].class, BugClass::SessionReset);
        assert!(findings[0].is_max_prefix_reset());
        assert!(findings[0].is_well_formed());

        let rejected = NetworkEvent {
            tick: 1,
            seq: 1,
            node: "cust".into(),
            kind: EventKind::ConfigRejected {
                reason: "nope".into(),
            },
        };
        let findings = notification_oracle(&[rejected], "garbage");
        assert_eq!(findings[0].class, BugClass::InvalidConfig);
        assert!(findings[0].is_well_formed());

        assert!(notification_oracle(&[], valid).is_empty());
    }

    #[test]
    fn preexisting_unreachability_is_not_a_finding() {
        // dc2 withdraws its own prefix at baseline-capture time, then the
        // same unreachable state persists: no blackhole findings.
        let mut net = converged();
        let mut cfg = net.config_of("dc2").unwrap().clone();
        cfg.networks.clear();
        let text = cfg.render();
        net.apply_config("dc2", &text).unwrap();
        net.converge();
        let baseline = capture_baseline(&mut net);
        let artifacts = artifacts_of(&mut net, Vec::new(), &text);
        let findings = blackhole_oracle(&baseline, &artifacts);
        assert!(findings.is_empty(), "{findings:?}");
    }

    #[test]
    fn withdrawing_a_prefix_flips_reachability() {
        let mut net = converged();
        let baseline = capture_baseline(&mut net);
        let mut cfg = net.config_of("dc2").unwrap().clone();
        cfg.networks.clear();
        let text = cfg.render();
        net.apply_config("dc2", &text).unwrap();
        net.converge();
        let artifacts = artifacts_of(&mut net, Vec::new(), &text);
        let findings = blackhole_oracle(&baseline, &artifacts);
        assert!(!findings.is_empty());
        assert!(findings.iter().all(|f| f.class == BugClass::Blackhole));
    }

    #[test]
    fn origin_change_is_a_path_anomaly() {
        let mut net = converged();
        let baseline = capture_baseline(&mut net);
        // dc2 announces dc1's exact /22 with a covering static route.
        let mut cfg = net.config_of("dc2").unwrap().clone();
        cfg.networks.push(NetworkStmt {
            prefix: Prefix::parse("208.65.152.0/22").unwrap(),
        });
        cfg.static_routes.push(StaticRouteStmt {
            prefix: Prefix::parse("208.65.152.0/22").unwrap(),
            target: StaticTarget::NullSink,
        });
        let text = cfg.render();
        net.apply_config("dc2", &text).unwrap();
        net.converge();
        let artifacts = artifacts_of(&mut net, Vec::new(), &text);
        let (findings, _) = hijack_oracle(&baseline, &artifacts);
        assert!(findings
            .iter()
            .any(|f| f.class == BugClass::PathAnomaly
                && f.dedup_key.starts_with("origin:")));
    }

    #[test]
    fn interception_style_detour_is_a_path_anomaly() {
        // dc2 announces the sub-prefix but detours traffic to its
        // provider instead of discarding it; the walk loops and the
        // destination no longer terminates where the baseline did.
        let mut net = converged();
        let baseline = capture_baseline(&mut net);
        let mut cfg = net.config_of("dc2").unwrap().clone();
        let provider_addr = cfg.neighbors[0].peer_address;
        cfg.networks.push(NetworkStmt {
            prefix: Prefix::parse("208.65.153.0/24").unwrap(),
        });
        cfg.static_routes.push(StaticRouteStmt {
            prefix: Prefix::parse("208.65.153.0/24").unwrap(),
            target: StaticTarget::NextHop(provider_addr),
        });
        let text = cfg.render();
        net.apply_config("dc2", &text).unwrap();
        net.converge();
        let mark = net.log_len();
        let artifacts = capture_artifacts(
            &mut net,
            mark,
            ConvergenceResult::Converged { rounds: 0 },
            text,
            true,
            "dc2",
            None,
        );
        let report = run_all_oracles(&baseline, &artifacts);
        assert!(report.has_class(BugClass::SubPrefixHijack));
        let anomalies: Vec<_> = report
            .findings
            .iter()
            .filter(|f| f.class == BugClass::PathAnomaly && f.dedup_key.starts_with("path:"))
            .collect();
        assert!(!anomalies.is_empty(), "no path anomaly: {:?}", report.findings);
        assert!(anomalies.iter().any(|f| f
            .evidence
            .iter()
            .any(|e| matches!(e, Evidence::PathChange { .. }))));
    }

    #[test]
    fn oscillation_report_from_round_cap() {
        let mut net = converged();
        let baseline = capture_baseline(&mut net);
        let text = net.config_text("dc2").unwrap().to_string();
        let event = NetworkEvent {
            tick: 1,
            seq: 1,
            node: "dc2".into(),
            kind: EventKind::PrefixAnnounced {
                prefix: Prefix::parse("10.5.0.0/24").unwrap(),
                from: "prov2".into(),
            },
        };
        let mut artifacts = artifacts_of(&mut net, vec![event], &text);
        artifacts.convergence = ConvergenceResult::RoundCapExceeded { cap: 100 };
        let report = run_all_oracles(&baseline, &artifacts);
        assert!(report.has_class(BugClass::Oscillation));
    }

    #[test]
    fn findings_deduplicate_by_class_and_key() {
        let event = |seq| NetworkEvent {
            tick: 1,
            seq,
            node: "cust".into(),
            kind: EventKind::Notification {
                peer: "prov1".into(),
                code: crate::event::NotificationCode::Cease,
                subcode: NotificationSubcode::MaxPrefixesReached,
            },
        };
        let mut net = converged();
        let baseline = capture_baseline(&mut net);
        let text = net.config_text("cust").unwrap().to_string();
        let artifacts = artifacts_of(&mut net, vec![event(1), event(2)], &text);
        let report = run_all_oracles(&baseline, &artifacts);
        let resets = report
            .findings
            .iter()
            .filter(|f| f.class == BugClass::SessionReset)
            .count();
        assert_eq!(resets, 1, "same session reset reported twice");
    }

    #[test]
    fn monotone_detection_under_added_hijack() {
        // Scenario A: withdraw dc2's prefix. Scenario B: same plus a
        // hijack announcement. B's findings must be a superset of A's.
        let run = |hijack: bool| {
            let mut net = converged();
            let baseline = capture_baseline(&mut net);
            let mut cfg = net.config_of("dc2").unwrap().clone();
            cfg.networks.clear();
            if hijack {
                cfg.networks.push(NetworkStmt {
                    prefix: Prefix::parse("208.65.153.0/24").unwrap(),
                });
                cfg.static_routes.push(StaticRouteStmt {
                    prefix: Prefix::parse("208.65.153.0/24").unwrap(),
                    target: StaticTarget::NullSink,
                });
            }
            let text = cfg.render();
            net.apply_config("dc2", &text).unwrap();
            net.converge();
            let artifacts = artifacts_of(&mut net, Vec::new(), &text);
            run_all_oracles(&baseline, &artifacts)
        };
        let plain = run(false);
        let with_hijack = run(true);
        let plain_keys: BTreeSet<(BugClass, String)> = plain
            .findings
            .iter()
            .map(|f| (f.class, f.dedup_key.clone()))
            .collect();
        let hijack_keys: BTreeSet<(BugClass, String)> = with_hijack
            .findings
            .iter()
            .map(|f| (f.class, f.dedup_key.clone()))
            .collect();
        assert!(
            plain_keys.is_subset(&hijack_keys),
            "adding the hijack removed findings: {:?} vs {:?}",
            plain_keys,
            hijack_keys
        );
        assert!(with_hijack.has_class(BugClass::SubPrefixHijack));
    }
}
