//! Deterministic eBGP network model.
//!
//! One [`Network`] holds the topology, per-node configurations, session
//! state, per-session Adj-RIB-In tables and per-node RIBs. Route exchange
//! runs in synchronous rounds: establish sessions, advertise best routes
//! with AS-path prepending, receive with own-ASN loop rejection and
//! maximum-prefix enforcement, then re-select best paths. Convergence is
//! the fixpoint; a round cap stands in for persistent oscillation.
//!
//! Identical (topology, config sequence) inputs produce identical event
//! logs and RIBs: iteration follows sorted structures only, and no clock
//! or randomness enters the model.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use std::net::Ipv4Addr;
use thiserror::Error;

use crate::config::RouterConfig;
use crate::event::{EventKind, NetworkEvent, NotificationCode, NotificationSubcode};
use crate::parse::parse_config;
use crate::prefix::Prefix;
use crate::rib::{best_path_select, RibEntry, RibSnapshot};
use crate::topology::{Topology, TopologyError};

/// Rounds before `converge` gives up and reports possible oscillation.
pub const DEFAULT_ROUND_CAP: u32 = 100;

/// eBGP session lifecycle. `Idle` covers everything that is not an
/// established session, including hold-down after a NOTIFICATION.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SessionState {
    Idle,
    Established,
}

/// Outcome of a convergence run. `RoundCapExceeded` is a result, not an
/// error: the fuzzing loop treats it as an oracle-relevant observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvergenceResult {
    Converged { rounds: u32 },
    RoundCapExceeded { cap: u32 },
}

/// View of one directed session (local side's perspective).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub local: String,
    pub peer: String,
    pub state: SessionState,
    pub received_prefix_count: usize,
    pub limit: Option<u32>,
}

/// The maximum-prefix trigger: strictly more accepted prefixes than the
/// configured limit. A count equal to the limit keeps the session up.
pub fn max_prefix_exceeded(limit: Option<u32>, incoming: usize) -> bool {
    matches!(limit, Some(l) if incoming > l as usize)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("unknown node '{0}'")]
    UnknownNode(String),
}

/// A route accepted from a peer, stored in the receiving side's
/// Adj-RIB-In.
#[derive(Debug, Clone, PartialEq, Eq)]
struct ReceivedRoute {
    as_path: Vec<u32>,
    next_hop: Ipv4Addr,
    peer_router_id: Ipv4Addr,
}

/// Per-link session runtime: flags plus the Adj-RIB-In of each side.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct LinkRuntime {
    established: bool,
    /// Set by a NOTIFICATION; cleared by reset or by refreshing an
    /// endpoint. A held-down session cannot re-establish.
    held_down: bool,
    /// Routes side A accepted from side B, and vice versa.
    adj_in_a: BTreeMap<Prefix, ReceivedRoute>,
    adj_in_b: BTreeMap<Prefix, ReceivedRoute>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct NodeConfig {
    text: String,
    config: RouterConfig,
    /// Network statements with a covering local route (owned prefix or
    /// static route); only these enter BGP.
    originated: BTreeSet<Prefix>,
}

#[derive(Debug, Clone)]
pub struct Network {
    topo: Topology,
    configs: BTreeMap<String, NodeConfig>,
    baselines: BTreeMap<String, NodeConfig>,
    links: Vec<LinkRuntime>,
    ribs: BTreeMap<String, BTreeMap<Prefix, Vec<RibEntry>>>,
    log: Vec<NetworkEvent>,
    clock: u64,
    seq: u64,
    round_cap: u32,
}

impl Network {
    /// Builds a network from a validated topology with every session Idle
    /// and per-node baseline configurations synthesized from links and
    /// owned prefixes.
    pub fn load(topo: Topology) -> Result<Self, NetworkError> {
        topo.validate()?;
        let mut baselines = BTreeMap::new();
        for (name, text) in topo.baseline_configs() {
            let (config, _) = parse_config(&text)
                .expect("synthesized baseline configuration always parses");
            let originated = originated_set(&topo, &name, &config);
            baselines.insert(
                name,
                NodeConfig {
                    text,
                    config,
                    originated,
                },
            );
        }
        let links = vec![LinkRuntime::default(); topo.links.len()];
        let mut net = Network {
            configs: baselines.clone(),
            baselines,
            links,
            ribs: BTreeMap::new(),
            log: Vec::new(),
            clock: 0,
            seq: 0,
            round_cap: DEFAULT_ROUND_CAP,
            topo,
        };
        net.rebuild_all_ribs();
        Ok(net)
    }

    /// Parses a topology description and loads it.
    pub fn from_text(text: &str) -> Result<Self, NetworkError> {
        Network::load(Topology::parse(text)?)
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn node_names(&self) -> Vec<String> {
        self.configs.keys().cloned().collect()
    }

    pub fn has_node(&self, node: &str) -> bool {
        self.configs.contains_key(node)
    }

    pub fn config_of(&self, node: &str) -> Option<&RouterConfig> {
        self.configs.get(node).map(|c| &c.config)
    }

    pub fn config_text(&self, node: &str) -> Option<&str> {
        self.configs.get(node).map(|c| c.text.as_str())
    }

    pub fn baseline_text(&self, node: &str) -> Option<&str> {
        self.baselines.get(node).map(|c| c.text.as_str())
    }

    pub fn local_asn(&self, node: &str) -> Option<u32> {
        self.config_of(node).map(|c| c.local_asn)
    }

    pub fn events(&self) -> &[NetworkEvent] {
        &self.log
    }

    /// Events emitted at or after a previously observed log length.
    pub fn events_since(&self, mark: usize) -> &[NetworkEvent] {
        &self.log[mark.min(self.log.len())..]
    }

    pub fn log_len(&self) -> usize {
        self.log.len()
    }

    /// Deploys configuration text to a node, modeling the node refresh:
    /// on success the node's sessions drop to Idle and `ConfigApplied` is
    /// emitted; on parse failure the old configuration stays in place and
    /// `ConfigRejected` is emitted. Rejection is an event, not an error,
    /// because the fuzzing loop must continue.
    pub fn apply_config(
        &mut self,
        node: &str,
        text: &str,
    ) -> Result<Vec<NetworkEvent>, NetworkError> {
        if !self.configs.contains_key(node) {
            return Err(NetworkError::UnknownNode(node.to_string()));
        }
        self.clock += 1;
        let mark = self.log.len();
        match parse_config(text) {
            Err(err) => {
                self.emit(node, EventKind::ConfigRejected {
                    reason: err.to_string(),
                });
            }
            Ok((config, _tree)) => {
                let originated = originated_set(&self.topo, node, &config);
                self.configs.insert(
                    node.to_string(),
                    NodeConfig {
                        text: text.to_string(),
                        config,
                        originated,
                    },
                );
                self.emit(node, EventKind::ConfigApplied);
                // Refresh: every session of this node drops and its
                // hold-down clears.
                let incident: Vec<usize> = self
                    .topo
                    .links_of(node)
                    .map(|(idx, _)| idx)
                    .collect();
                for idx in incident {
                    self.links[idx].held_down = false;
                    if self.links[idx].established {
                        self.tear_down(idx);
                    }
                }
                self.rebuild_rib(node);
            }
        }
        Ok(self.log[mark..].to_vec())
    }

    /// Runs synchronous rounds to the RIB fixpoint or the round cap.
    pub fn converge(&mut self) -> (ConvergenceResult, Vec<NetworkEvent>) {
        let mark = self.log.len();
        let mut effective = 0;
        for round in 1..=self.round_cap {
            self.clock += 1;
            if !self.run_round() {
                return (
                    ConvergenceResult::Converged { rounds: effective },
                    self.log[mark..].to_vec(),
                );
            }
            effective = round;
        }
        (
            ConvergenceResult::RoundCapExceeded { cap: self.round_cap },
            self.log[mark..].to_vec(),
        )
    }

    /// Restores Step-0 state: baseline configs, cleared RIBs and log,
    /// all sessions Idle. A subsequent `converge` reproduces the baseline
    /// RIBs exactly.
    pub fn reset(&mut self) {
        self.configs = self.baselines.clone();
        for link in &mut self.links {
            *link = LinkRuntime::default();
        }
        self.log.clear();
        self.clock = 0;
        self.seq = 0;
        self.rebuild_all_ribs();
    }

    /// The node's table, entries sorted by prefix and ranking order with
    /// the best entry first.
    pub fn snapshot_rib(&self, node: &str) -> RibSnapshot {
        let mut entries = Vec::new();
        if let Some(rib) = self.ribs.get(node) {
            for candidates in rib.values() {
                entries.extend(candidates.iter().cloned());
            }
        }
        RibSnapshot {
            node: node.to_string(),
            entries,
        }
    }

    pub fn snapshot_all(&self) -> BTreeMap<String, RibSnapshot> {
        self.configs
            .keys()
            .map(|n| (n.clone(), self.snapshot_rib(n)))
            .collect()
    }

    /// Best entries of a node, for forwarding and oracles.
    pub fn best_entries(&self, node: &str) -> Vec<RibEntry> {
        self.ribs
            .get(node)
            .map(|rib| {
                rib.values()
                    .flat_map(|c| c.iter().filter(|e| e.best).cloned())
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Session views for every link incident to `node`.
    pub fn sessions_of(&self, node: &str) -> Vec<Session> {
        let mut out = Vec::new();
        for (idx, link) in self.topo.links_of(node) {
            let peer = link.other_end(node).unwrap_or_default().to_string();
            let runtime = &self.links[idx];
            let adj = if node == link.a {
                &runtime.adj_in_a
            } else {
                &runtime.adj_in_b
            };
            let peer_addr = link.addr_of(&peer);
            let limit = peer_addr.and_then(|addr| {
                self.config_of(node).and_then(|c| c.max_prefix_limit(addr))
            });
            out.push(Session {
                local: node.to_string(),
                peer,
                state: if runtime.established {
                    SessionState::Established
                } else {
                    SessionState::Idle
                },
                received_prefix_count: adj.len(),
                limit,
            });
        }
        out.sort_by(|a, b| a.peer.cmp(&b.peer));
        out
    }

    /// The session between two adjacent nodes, if a link joins them.
    pub fn session(&self, local: &str, peer: &str) -> Option<Session> {
        self.sessions_of(local).into_iter().find(|s| s.peer == peer)
    }

    /// Owned prefixes of a node per the topology.
    pub fn owned_prefixes(&self, node: &str) -> Vec<Prefix> {
        self.topo
            .node(node)
            .map(|n| n.owned.clone())
            .unwrap_or_default()
    }

    pub(crate) fn node_config(&self, node: &str) -> Option<&RouterConfig> {
        self.configs.get(node).map(|c| &c.config)
    }

    fn emit(&mut self, node: &str, kind: EventKind) {
        self.seq += 1;
        self.log.push(NetworkEvent {
            tick: self.clock,
            seq: self.seq,
            node: node.to_string(),
            kind,
        });
    }

    pub(crate) fn emit_event(&mut self, node: &str, kind: EventKind) {
        self.emit(node, kind);
    }

    /// Mutual configuration check for the eBGP session on link `idx`:
    /// both sides must point a neighbor statement at the other's link
    /// address with the other's operating ASN, and the ASNs must differ.
    fn eligible(&self, idx: usize) -> bool {
        let link = &self.topo.links[idx];
        let (Some(cfg_a), Some(cfg_b)) = (self.node_config(&link.a), self.node_config(&link.b))
        else {
            return false;
        };
        let (addr_a, addr_b) = link.endpoint_addrs();
        cfg_a.local_asn != cfg_b.local_asn
            && cfg_a
                .neighbors
                .iter()
                .any(|n| n.peer_address == addr_b && n.remote_asn == cfg_b.local_asn)
            && cfg_b
                .neighbors
                .iter()
                .any(|n| n.peer_address == addr_a && n.remote_asn == cfg_a.local_asn)
    }

    /// Tears the session on link `idx`: SessionDown at both ends and
    /// withdrawal of everything learned over it.
    fn tear_down(&mut self, idx: usize) {
        let link = self.topo.links[idx].clone();
        self.links[idx].established = false;
        let adj_a = std::mem::take(&mut self.links[idx].adj_in_a);
        let adj_b = std::mem::take(&mut self.links[idx].adj_in_b);
        self.emit(&link.a, EventKind::SessionDown {
            peer: link.b.clone(),
        });
        self.emit(&link.b, EventKind::SessionDown {
            peer: link.a.clone(),
        });
        for prefix in adj_a.keys() {
            self.emit(&link.a, EventKind::PrefixWithdrawn {
                prefix: *prefix,
                from: link.b.clone(),
            });
        }
        for prefix in adj_b.keys() {
            self.emit(&link.b, EventKind::PrefixWithdrawn {
                prefix: *prefix,
                from: link.a.clone(),
            });
        }
    }

    /// One synchronous round. Returns whether anything changed.
    fn run_round(&mut self) -> bool {
        let mut changed = false;

        // Session management.
        for idx in 0..self.links.len() {
            let desired = self.eligible(idx) && !self.links[idx].held_down;
            if desired != self.links[idx].established {
                changed = true;
                if desired {
                    self.links[idx].established = true;
                    let link = self.topo.links[idx].clone();
                    self.emit(&link.a, EventKind::SessionUp {
                        peer: link.b.clone(),
                    });
                    self.emit(&link.b, EventKind::SessionUp { peer: link.a });
                } else {
                    self.tear_down(idx);
                }
            }
        }

        // Advertisement: every node offers its best routes, prepending its
        // operating ASN.
        let mut adv: BTreeMap<String, Vec<(Prefix, Vec<u32>)>> = BTreeMap::new();
        for (name, node_cfg) in &self.configs {
            let mut routes = Vec::new();
            if let Some(rib) = self.ribs.get(name) {
                for candidates in rib.values() {
                    if let Some(best) = candidates.iter().find(|e| e.best) {
                        let mut path = Vec::with_capacity(best.as_path.len() + 1);
                        path.push(node_cfg.config.local_asn);
                        path.extend_from_slice(&best.as_path);
                        routes.push((best.prefix, path));
                    }
                }
            }
            adv.insert(name.clone(), routes);
        }

        // Receipt, with loop rejection and maximum-prefix enforcement.
        for idx in 0..self.links.len() {
            if !self.links[idx].established {
                continue;
            }
            let link = self.topo.links[idx].clone();
            let (addr_a, addr_b) = link.endpoint_addrs();
            for (receiver, sender, sender_addr) in [
                (link.a.clone(), link.b.clone(), addr_b),
                (link.b.clone(), link.a.clone(), addr_a),
            ] {
                if !self.links[idx].established {
                    break; // torn by the first direction's enforcement
                }
                let receiver_asn = self.configs[&receiver].config.local_asn;
                let sender_rid = self.configs[&sender].config.router_id;
                let mut new_adj = BTreeMap::new();
                for (prefix, path) in &adv[&sender] {
                    if path.contains(&receiver_asn) {
                        continue; // eBGP loop rejection
                    }
                    new_adj.insert(*prefix, ReceivedRoute {
                        as_path: path.clone(),
                        next_hop: sender_addr,
                        peer_router_id: sender_rid,
                    });
                }
                let limit = self.configs[&receiver].config.max_prefix_limit(sender_addr);
                if max_prefix_exceeded(limit, new_adj.len()) {
                    changed = true;
                    self.emit(&receiver, EventKind::Notification {
                        peer: sender.clone(),
                        code: NotificationCode::Cease,
                        subcode: NotificationSubcode::MaxPrefixesReached,
                    });
                    self.links[idx].held_down = true;
                    self.tear_down(idx);
                    continue;
                }
                let old_adj = if receiver == link.a {
                    &self.links[idx].adj_in_a
                } else {
                    &self.links[idx].adj_in_b
                };
                if *old_adj != new_adj {
                    changed = true;
                    let announced: Vec<Prefix> = new_adj
                        .keys()
                        .filter(|p| !old_adj.contains_key(p))
                        .copied()
                        .collect();
                    let withdrawn: Vec<Prefix> = old_adj
                        .keys()
                        .filter(|p| !new_adj.contains_key(p))
                        .copied()
                        .collect();
                    for prefix in announced {
                        self.emit(&receiver, EventKind::PrefixAnnounced {
                            prefix,
                            from: sender.clone(),
                        });
                    }
                    for prefix in withdrawn {
                        self.emit(&receiver, EventKind::PrefixWithdrawn {
                            prefix,
                            from: sender.clone(),
                        });
                    }
                    let slot = if receiver == link.a {
                        &mut self.links[idx].adj_in_a
                    } else {
                        &mut self.links[idx].adj_in_b
                    };
                    *slot = new_adj;
                }
            }
        }

        // Best-path selection.
        let names: Vec<String> = self.configs.keys().cloned().collect();
        for name in names {
            let new_rib = self.compute_rib(&name);
            if self.ribs.get(&name) != Some(&new_rib) {
                changed = true;
                self.ribs.insert(name, new_rib);
            }
        }

        changed
    }

    fn rebuild_all_ribs(&mut self) {
        let names: Vec<String> = self.configs.keys().cloned().collect();
        for name in names {
            self.rebuild_rib(&name);
        }
    }

    fn rebuild_rib(&mut self, node: &str) {
        let rib = self.compute_rib(node);
        self.ribs.insert(node.to_string(), rib);
    }

    /// Candidate table of a node: local originations plus everything in
    /// the Adj-RIB-Ins of its established sessions, ranked per prefix.
    fn compute_rib(&self, node: &str) -> BTreeMap<Prefix, Vec<RibEntry>> {
        let node_cfg = &self.configs[node];
        let mut rib: BTreeMap<Prefix, Vec<RibEntry>> = BTreeMap::new();
        for prefix in &node_cfg.originated {
            rib.entry(*prefix)
                .or_default()
                .push(RibEntry::local(*prefix, node_cfg.config.router_id));
        }
        for (idx, link) in self.topo.links_of(node) {
            if !self.links[idx].established {
                continue;
            }
            let adj = if node == link.a {
                &self.links[idx].adj_in_a
            } else {
                &self.links[idx].adj_in_b
            };
            for (prefix, route) in adj {
                rib.entry(*prefix).or_default().push(RibEntry {
                    prefix: *prefix,
                    next_hop: route.next_hop,
                    as_path: route.as_path.clone(),
                    origin: crate::rib::Origin::Igp,
                    weight: 0,
                    best: false,
                    peer_router_id: route.peer_router_id,
                });
            }
        }
        for candidates in rib.values_mut() {
            candidates.sort_by(|a, b| a.compare_rank(b));
            let best = best_path_select(candidates);
            for (i, entry) in candidates.iter_mut().enumerate() {
                entry.best = i == best;
            }
        }
        rib
    }
}

/// Network statements with a covering local route. A covering route is an
/// owned prefix or a static-route prefix whose range contains the
/// announced block; without one the statement originates nothing.
fn originated_set(topo: &Topology, node: &str, config: &RouterConfig) -> BTreeSet<Prefix> {
    let owned = topo.node(node).map(|n| n.owned.clone()).unwrap_or_default();
    config
        .networks
        .iter()
        .map(|n| n.prefix)
        .filter(|p| {
            owned.iter().any(|o| o.contains(p))
                || config.static_routes.iter().any(|s| s.prefix.contains(p))
        })
        .collect()
}
