//! Cross-module scenarios: topology loading, feedback collection after a
//! session teardown, archive round-trips through replay, and campaign
//! determinism.

use std::fs;
use std::net::Ipv4Addr;
use std::path::PathBuf;

use routefuzz_core::campaign::{
    replay_archive, run_campaign, CampaignConfig,
};
use routefuzz_core::fuzz::{collect_feedback, MutatorKind};
use routefuzz_core::oracle::BugClass;
use routefuzz_core::sim::{Network, SessionState};
use routefuzz_core::Prefix;

fn topology_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../topologies/{name}"))
}

fn load(name: &str) -> Network {
    let text = fs::read_to_string(topology_path(name)).unwrap();
    Network::from_text(&text).unwrap()
}

#[test]
fn provider_customer_topology_loads_idle() {
    let net = load("tiny5.txt");
    assert_eq!(net.node_names().len(), 5);
    let asns: Vec<u32> = net
        .node_names()
        .iter()
        .map(|n| net.local_asn(n).unwrap())
        .collect();
    assert_eq!(asns.len(), 5);
    for node in net.node_names() {
        for session in net.sessions_of(&node) {
            assert_eq!(session.state, SessionState::Idle);
        }
    }
    // Sessions per the figure's edges: cust is multihomed.
    assert_eq!(net.sessions_of("cust").len(), 2);
    assert_eq!(net.sessions_of("dc2").len(), 1);
}

#[test]
fn chain_topology_has_line_of_sessions() {
    let mut net = load("chain5.txt");
    assert_eq!(net.sessions_of("r1").len(), 1);
    assert_eq!(net.sessions_of("r3").len(), 2);
    net.converge();
    // End-to-end reachability along the chain.
    let result = net.forwarding_path("r1", Ipv4Addr::new(10, 15, 0, 1));
    assert_eq!(result.hops(), ["r1", "r2", "r3", "r4", "r5"]);
}

#[test]
fn feedback_reflects_max_prefix_teardown() {
    let mut net = load("pair2.txt");
    net.converge();
    // Baseline: session up, right's two prefixes learned.
    let feedback = collect_feedback(&net, "left", &[]);
    let peer_addr = Ipv4Addr::new(192, 168, 30, 2);
    assert_eq!(
        feedback.session_states.get(&peer_addr),
        Some(&SessionState::Established)
    );
    assert_eq!(feedback.remote_prefixes().len(), 2);
    assert!(feedback
        .announced_prefixes
        .contains(&Prefix::parse("10.31.0.0/24").unwrap()));

    // Trip the limit: the torn session reports down and its learned
    // prefixes vanish from the feedback.
    let mut cfg = net.config_of("left").unwrap().clone();
    cfg.set_max_prefix(peer_addr, 1).unwrap();
    net.apply_config("left", &cfg.render()).unwrap();
    net.converge();
    let feedback = collect_feedback(&net, "left", &[]);
    assert_eq!(
        feedback.session_states.get(&peer_addr),
        Some(&SessionState::Idle)
    );
    assert!(feedback.remote_prefixes().is_empty());

    // Pure snapshot: two reads without intervening mutation are equal.
    let again = collect_feedback(&net, "left", &[]);
    assert_eq!(feedback, again);
}

#[test]
fn archived_findings_replay_to_match() {
    let out = tempfile::tempdir().unwrap();
    let mut cfg = CampaignConfig::new(topology_path("tiny5.txt"), "dc2");
    cfg.budget_iters = 40;
    cfg.trials = 1;
    cfg.seed = 11;
    let report = run_campaign(&cfg, Some(out.path())).unwrap();
    let archived: Vec<PathBuf> = report
        .trials
        .iter()
        .flat_map(|t| t.archived.iter().cloned())
        .collect();
    assert!(!archived.is_empty(), "campaign produced no archives");
    for dir in archived.iter().take(12) {
        let outcome = replay_archive(dir)
            .unwrap_or_else(|e| panic!("replay of {} failed: {e}", dir.display()));
        assert!(
            outcome.matched,
            "replay mismatch for {}: archived {:?} vs replayed {:?}",
            dir.display(),
            outcome.archived_keys,
            outcome.replayed_keys
        );
    }
}

#[test]
fn replaying_bug02_archive_reproduces_the_notification() {
    let out = tempfile::tempdir().unwrap();
    let mut cfg = CampaignConfig::new(topology_path("tiny5.txt"), "dc2");
    cfg.budget_iters = 120;
    cfg.trials = 1;
    cfg.seed = 3;
    let report = run_campaign(&cfg, Some(out.path())).unwrap();
    let reset_dir = report.trials[0]
        .archived
        .iter()
        .find(|p| p.to_string_lossy().contains("session-reset"))
        .expect("a session-reset finding was archived");
    let outcome = replay_archive(reset_dir).unwrap();
    assert!(outcome.matched);
    assert!(outcome
        .report
        .findings
        .iter()
        .any(|f| f.is_max_prefix_reset()));
}

#[test]
fn perturbed_archive_replays_to_mismatch() {
    let out = tempfile::tempdir().unwrap();
    let mut cfg = CampaignConfig::new(topology_path("tiny5.txt"), "dc2");
    cfg.budget_iters = 120;
    cfg.trials = 1;
    cfg.seed = 3;
    let report = run_campaign(&cfg, Some(out.path())).unwrap();
    let reset_dir = report.trials[0]
        .archived
        .iter()
        .find(|p| p.to_string_lossy().contains("session-reset"))
        .expect("a session-reset finding was archived");
    // Hand-edit the config: drop the maximum-prefix line.
    let config_path = reset_dir.join("config.txt");
    let original = fs::read_to_string(&config_path).unwrap();
    let edited: String = original
        .lines()
        .filter(|l| !l.contains("maximum-prefix"))
        .map(|l| format!("{l}\n"))
        .collect();
    assert_ne!(original, edited);
    fs::write(&config_path, edited).unwrap();
    let outcome = replay_archive(reset_dir).unwrap();
    assert!(!outcome.matched, "perturbed archive still matched");
}

#[test]
fn campaign_reports_are_deterministic() {
    let mut cfg = CampaignConfig::new(topology_path("ring3.txt"), "a");
    cfg.budget_iters = 30;
    cfg.trials = 2;
    cfg.seed = 5;
    let first = run_campaign(&cfg, None).unwrap();
    let second = run_campaign(&cfg, None).unwrap();
    assert_eq!(first.render_summary(), second.render_summary());
    // Full per-iteration records agree, not just the summary.
    for (a, b) in first.trials.iter().zip(&second.trials) {
        assert_eq!(a.records.len(), b.records.len());
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.config_hash, rb.config_hash);
            assert_eq!(ra.finding_keys, rb.finding_keys);
            assert_eq!(ra.events_observed, rb.events_observed);
        }
    }
}

#[test]
fn parallel_jobs_do_not_change_the_report() {
    let mut cfg = CampaignConfig::new(topology_path("tiny5.txt"), "dc2");
    cfg.budget_iters = 25;
    cfg.trials = 4;
    cfg.seed = 9;
    let serial = run_campaign(&cfg, None).unwrap();
    cfg.jobs = 4;
    let parallel = run_campaign(&cfg, None).unwrap();
    assert_eq!(serial.render_summary(), parallel.render_summary());
}

#[test]
fn observed_interface_campaigns_still_detect_target_anomalies() {
    // Restricting observation to the dc2-prov2 link keeps the
    // NOTIFICATION (it fires at the target) in the oracle's view.
    let mut cfg = CampaignConfig::new(topology_path("tiny5.txt"), "dc2");
    cfg.budget_iters = 100;
    cfg.trials = 1;
    cfg.seed = 42;
    cfg.observe_peer = Some("prov2".to_string());
    let report = run_campaign(&cfg, None).unwrap();
    assert!(report.trials[0].first_detection.contains_key("max-prefix-reset"));
    assert!(report.trials[0]
        .first_detection
        .contains_key("sub-prefix-hijack"));
}

#[test]
fn any_limit_below_announced_count_trips() {
    // Brute force: the peer announces four prefixes; every limit below
    // four tears the session, four and above keep it up.
    let announced = 4u32;
    for limit in 1..=6u32 {
        let text = "node tgt asn 65001 router-id 10.91.0.1 owns 10.91.1.0/24\nnode peer asn 65002 router-id 10.91.0.2 owns 10.121.0.0/24 10.122.0.0/24 10.123.0.0/24 10.124.0.0/24\nlink tgt peer subnet 192.168.91.0/30\n";
        let mut net = Network::from_text(text).unwrap();
        let mut cfg = net.config_of("tgt").unwrap().clone();
        let peer_addr = cfg.neighbors[0].peer_address;
        cfg.set_max_prefix(peer_addr, limit).unwrap();
        net.apply_config("tgt", &cfg.render()).unwrap();
        let (_, events) = net.converge();
        let tripped = events.iter().any(|e| e.is_notification());
        assert_eq!(
            tripped,
            limit < announced,
            "limit {limit} against {announced} announcements"
        );
    }
}

#[test]
fn converged_ribs_have_exactly_one_best_per_prefix() {
    for name in ["tiny5.txt", "chain5.txt", "ring3.txt", "pair2.txt"] {
        let mut net = load(name);
        net.converge();
        for node in net.node_names() {
            let snap = net.snapshot_rib(&node);
            let mut by_prefix: std::collections::BTreeMap<Prefix, usize> =
                std::collections::BTreeMap::new();
            for entry in &snap.entries {
                if entry.best {
                    *by_prefix.entry(entry.prefix).or_default() += 1;
                }
            }
            let prefixes: std::collections::BTreeSet<Prefix> =
                snap.entries.iter().map(|e| e.prefix).collect();
            for prefix in prefixes {
                assert_eq!(
                    by_prefix.get(&prefix),
                    Some(&1),
                    "{name}/{node}: {prefix} best-count wrong"
                );
            }
        }
    }
}

#[test]
fn iteration_event_sequences_follow_the_machine() {
    use routefuzz_core::fuzz::FuzzEvent;
    let mut cfg = CampaignConfig::new(topology_path("tiny5.txt"), "dc2");
    cfg.budget_iters = 150;
    cfg.trials = 2;
    cfg.seed = 8;
    let report = run_campaign(&cfg, None).unwrap();
    let records: Vec<_> = report
        .trials
        .iter()
        .flat_map(|t| t.records.iter())
        .collect();

    // An insertion that trips an oracle recovers in the same iteration.
    assert!(
        records.iter().any(|r| r.events_observed
            == vec![
                FuzzEvent::StatementInsertion,
                FuzzEvent::OracleError,
                FuzzEvent::Recovery
            ]),
        "no insertion->error->recovery iteration observed"
    );
    // Synthesized announcements fire the announcement event after the
    // insertion and before any oracle evaluation.
    assert!(
        records.iter().any(|r| {
            r.events_observed.first() == Some(&FuzzEvent::StatementInsertion)
                && r.events_observed.get(1) == Some(&FuzzEvent::PrefixAnnouncement)
        }),
        "no synthesis iteration observed"
    );
}

#[test]
fn hijack_archive_contains_the_announcement_line() {
    let out = tempfile::tempdir().unwrap();
    let mut cfg = CampaignConfig::new(topology_path("tiny5.txt"), "dc2");
    cfg.budget_iters = 80;
    cfg.trials = 1;
    cfg.seed = 5;
    let report = run_campaign(&cfg, Some(out.path())).unwrap();
    let hijack_dir = report.trials[0]
        .archived
        .iter()
        .find(|p| p.to_string_lossy().contains("sub-prefix-hijack"))
        .expect("a hijack finding was archived");
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(hijack_dir.join("finding.json")).unwrap())
            .unwrap();
    let child: Prefix = meta["finding"]["evidence"][0]["Overlap"]["child"]
        .as_str()
        .unwrap()
        .parse()
        .unwrap();
    let parent: Prefix = meta["finding"]["evidence"][0]["Overlap"]["parent"]
        .as_str()
        .unwrap()
        .parse()
        .unwrap();
    assert!(parent.contains(&child) && parent != child);
    let config_text = fs::read_to_string(hijack_dir.join("config.txt")).unwrap();
    assert!(
        config_text.contains(&format!(" network {}\n", child.to_mask_notation())),
        "archived config misses the announcement for {child}"
    );
}

#[test]
fn random_campaign_finds_invalid_configs_only() {
    let mut cfg = CampaignConfig::new(topology_path("tiny5.txt"), "dc2");
    cfg.budget_iters = 60;
    cfg.trials = 1;
    cfg.seed = 21;
    cfg.mutator = MutatorKind::RandomBaseline;
    let report = run_campaign(&cfg, None).unwrap();
    let trial = &report.trials[0];
    assert!(trial.first_detection.contains_key("invalid-config"));
    assert!(!trial.first_detection.contains_key("max-prefix-reset"));
    assert!(!trial.first_detection.contains_key("sub-prefix-hijack"));
    assert!(trial.findings_by_class.contains_key(&BugClass::InvalidConfig));
    // Validity rate strictly below the grammar mutator's 100%.
    assert!(report.validity_rate() < 1.0);
}
