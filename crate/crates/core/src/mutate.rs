//! Mutation operators over configuration derivation trees.
//!
//! Two families: grammar-aware operators (field mutation, statement
//! insertion/deletion, sub-prefix synthesis from runtime feedback) whose
//! outputs always re-parse, and a byte-level random baseline with no
//! grammar knowledge. Every operator is a pure function of its inputs and
//! the RNG stream, so identical seeds reproduce identical mutations.

use std::collections::BTreeSet;
use std::net::Ipv4Addr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{
    MaxPrefixStmt, NetworkStmt, RouterConfig, StaticRouteStmt, StaticTarget,
};
use crate::event::NetworkEvent;
use crate::parse::{parse_config, ParseError};
use crate::prefix::Prefix;
use crate::rib::RibSnapshot;
use crate::sim::SessionState;
use crate::tree::{DerivationTree, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutationError {
    #[error("tree has no mutatable field")]
    NoMutableField,
    #[error("statement already present: {0}")]
    DuplicateStatement(String),
    #[error("no remotely originated prefix available for sub-prefix synthesis")]
    NoCandidatePrefix,
    #[error("maximum-prefix insertion targets unknown neighbor {0}")]
    UnboundNeighbor(Ipv4Addr),
    #[error("tree has no deletable statement")]
    NoDeletableStatement,
    #[error("seed tree does not parse: {0}")]
    InvalidSeed(ParseError),
}

/// Runtime observations of the target node, collected after convergence.
/// This is the greybox feedback that steers mutation selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feedback {
    pub rib: RibSnapshot,
    /// Prefixes the target currently announces (its best routes).
    pub announced_prefixes: BTreeSet<Prefix>,
    /// Session state per configured neighbor address.
    pub session_states: std::collections::BTreeMap<Ipv4Addr, SessionState>,
    /// Event slice from the last iteration, observation-filtered.
    pub last_events: Vec<NetworkEvent>,
}

impl Feedback {
    /// Feedback for the first iteration, before anything was observed.
    pub fn empty(node: impl Into<String>) -> Self {
        Feedback {
            rib: RibSnapshot {
                node: node.into(),
                entries: Vec::new(),
            },
            announced_prefixes: BTreeSet::new(),
            session_states: std::collections::BTreeMap::new(),
            last_events: Vec::new(),
        }
    }

    /// Distinct prefixes learned from other routers, the raw material for
    /// sub-prefix synthesis.
    pub fn remote_prefixes(&self) -> BTreeSet<Prefix> {
        self.rib
            .entries
            .iter()
            .filter(|e| !e.is_local())
            .map(|e| e.prefix)
            .collect()
    }
}

/// Relative selection weights for the mutation categories. The defaults
/// are reported in every campaign record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutationWeights {
    pub subprefix_synthesis: f64,
    pub max_prefix_insert: f64,
    pub field_mutation: f64,
    pub other_change: f64,
}

impl Default for MutationWeights {
    fn default() -> Self {
        MutationWeights {
            subprefix_synthesis: 0.35,
            max_prefix_insert: 0.25,
            field_mutation: 0.25,
            other_change: 0.15,
        }
    }
}

/// Tunables for the grammar mutator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationSettings {
    pub weights: MutationWeights,
    /// Mask-length offsets for synthesized sub-prefixes.
    pub subprefix_offsets: Vec<u8>,
}

impl Default for MutationSettings {
    fn default() -> Self {
        MutationSettings {
            weights: MutationWeights::default(),
            subprefix_offsets: vec![1, 2],
        }
    }
}

/// A statement a plan wants inserted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InsertStmt {
    Network(NetworkStmt),
    StaticRoute(StaticRouteStmt),
    MaxPrefix(MaxPrefixStmt),
}

/// The three grammar change kinds the state machine distinguishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlanKind {
    FieldMutation,
    StatementInsertion,
    StatementDeletion,
}

/// A mutation decision. Field and deletion targets are resolved against
/// the tree when the plan is applied, consuming the same RNG stream, so a
/// plan plus a seed fully determines the outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum MutationPlan {
    MutateField,
    Insert {
        stmts: Vec<InsertStmt>,
        /// For synthesized announcements: the covering RIB prefix the
        /// sub-prefix was carved from.
        synthesized_parent: Option<Prefix>,
    },
    Delete,
}

impl MutationPlan {
    pub fn kind(&self) -> PlanKind {
        match self {
            MutationPlan::MutateField => PlanKind::FieldMutation,
            MutationPlan::Insert { .. } => PlanKind::StatementInsertion,
            MutationPlan::Delete => PlanKind::StatementDeletion,
        }
    }

    /// The synthesized sub-prefix this plan announces, if any.
    pub fn announced_prefix(&self) -> Option<Prefix> {
        match self {
            MutationPlan::Insert {
                stmts,
                synthesized_parent: Some(_),
            } => stmts.iter().find_map(|s| match s {
                InsertStmt::Network(n) => Some(n.prefix),
                _ => None,
            }),
            _ => None,
        }
    }
}

/// The kinds of terminal fields the field mutator may rewrite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum FieldKind {
    RouterId,
    NeighborAddress,
    RemoteAsn,
    NetworkPrefix,
    MaxPrefixLimit,
}

/// Replaces exactly one mutatable field with a grammar-valid alternative.
/// The field kind is drawn uniformly from the kinds present, then an
/// instance of that kind uniformly. A neighbor address counts as one
/// field even when it appears in both a `remote-as` and a
/// `maximum-prefix` line; both occurrences are rewritten together so the
/// result still parses.
pub fn mutate_field<R: Rng>(
    tree: &DerivationTree,
    rng: &mut R,
) -> Result<(RouterConfig, DerivationTree), MutationError> {
    let source = tree.text();
    let (config, tree) = parse_config(&source).map_err(MutationError::InvalidSeed)?;

    let mut kinds = vec![FieldKind::RouterId];
    if !config.neighbors.is_empty() {
        kinds.push(FieldKind::NeighborAddress);
        kinds.push(FieldKind::RemoteAsn);
    }
    if !config.networks.is_empty() {
        kinds.push(FieldKind::NetworkPrefix);
    }
    if !config.max_prefix.is_empty() {
        kinds.push(FieldKind::MaxPrefixLimit);
    }
    if kinds.is_empty() {
        return Err(MutationError::NoMutableField);
    }
    let kind = kinds[rng.random_range(0..kinds.len())];

    let mutated = match kind {
        FieldKind::RouterId => {
            let new_id = fresh_address(rng, &config, &[config.router_id]);
            replace_value_node(&tree, Symbol::RouterIdValue, 0, &new_id.to_string())
        }
        FieldKind::NeighborAddress => {
            let idx = rng.random_range(0..config.neighbors.len());
            let old = config.neighbors[idx].peer_address;
            let taken: Vec<Ipv4Addr> = config.neighbors.iter().map(|n| n.peer_address).collect();
            let new_addr = fresh_address(rng, &config, &taken);
            replace_peer_address(&tree, old, new_addr)
        }
        FieldKind::RemoteAsn => {
            let idx = rng.random_range(0..config.neighbors.len());
            let old = config.neighbors[idx].remote_asn;
            let new_asn = fresh_asn(rng, &config, old);
            replace_value_node(&tree, Symbol::RemoteAsn, idx, &new_asn.to_string())
        }
        FieldKind::NetworkPrefix => {
            let idx = rng.random_range(0..config.networks.len());
            let old = config.networks[idx].prefix;
            let taken: BTreeSet<Prefix> = config.networks.iter().map(|n| n.prefix).collect();
            let new_prefix = fresh_prefix(rng, &config, old, &taken);
            let node = network_prefix_node(new_prefix);
            let paths = tree.find(Symbol::NetworkPrefix);
            tree.replace(&paths[idx], node)
        }
        FieldKind::MaxPrefixLimit => {
            let idx = rng.random_range(0..config.max_prefix.len());
            let old = config.max_prefix[idx].limit;
            let new_limit = fresh_limit(rng, old);
            replace_value_node(&tree, Symbol::MaxPrefixLimit, idx, &new_limit.to_string())
        }
    };

    reparse(mutated)
}

/// Inserts one statement at a grammar-legal position. Inserting a
/// statement that already exists (same network line, same static prefix,
/// or a second limit for a peer) is rejected.
pub fn insert_statement<R: Rng>(
    tree: &DerivationTree,
    stmt: &InsertStmt,
    rng: &mut R,
) -> Result<(RouterConfig, DerivationTree), MutationError> {
    let source = tree.text();
    let (config, _) = parse_config(&source).map_err(MutationError::InvalidSeed)?;

    let (line, in_router_block) = match stmt {
        InsertStmt::Network(n) => {
            if config.networks.iter().any(|x| x.prefix == n.prefix) {
                return Err(MutationError::DuplicateStatement(format!(
                    "network {}",
                    n.prefix.to_mask_notation()
                )));
            }
            (format!(" network {}", n.prefix.to_mask_notation()), true)
        }
        InsertStmt::StaticRoute(s) => {
            if config.static_routes.iter().any(|x| x.prefix == s.prefix) {
                return Err(MutationError::DuplicateStatement(format!(
                    "ip route {}",
                    s.prefix
                )));
            }
            let target = match s.target {
                StaticTarget::NullSink => "null0".to_string(),
                StaticTarget::NextHop(ip) => ip.to_string(),
            };
            (
                format!(
                    "ip route {} {} {}",
                    s.prefix.address(),
                    s.prefix.dotted_mask(),
                    target
                ),
                false,
            )
        }
        InsertStmt::MaxPrefix(m) => {
            if !config
                .neighbors
                .iter()
                .any(|n| n.peer_address == m.peer_address)
            {
                return Err(MutationError::UnboundNeighbor(m.peer_address));
            }
            if config
                .max_prefix
                .iter()
                .any(|x| x.peer_address == m.peer_address)
            {
                return Err(MutationError::DuplicateStatement(format!(
                    "neighbor {} maximum-prefix",
                    m.peer_address
                )));
            }
            (
                format!(" neighbor {} maximum-prefix {}", m.peer_address, m.limit),
                true,
            )
        }
    };

    let mut lines: Vec<&str> = source.lines().collect();
    let block_end = 1 + lines[1..].iter().take_while(|l| l.starts_with(' ')).count();
    let at = if in_router_block {
        // Any slot after the `router bgp` header keeps the grammar happy.
        rng.random_range(1..=block_end)
    } else {
        rng.random_range(block_end..=lines.len())
    };
    lines.insert(at, &line);
    let new_source = lines.join("\n") + "\n";
    parse_config(&new_source)
        .map_err(MutationError::InvalidSeed)
}

/// Deletes one non-scaffolding statement (a network, static route or
/// maximum-prefix line). Neighbor and router-id lines are the session
/// substrate and are never deleted.
pub fn delete_statement<R: Rng>(
    tree: &DerivationTree,
    rng: &mut R,
) -> Result<(RouterConfig, DerivationTree), MutationError> {
    let source = tree.text();
    let (_, tree) = parse_config(&source).map_err(MutationError::InvalidSeed)?;
    let mut candidates = Vec::new();
    for symbol in [Symbol::NetworkStmt, Symbol::IpRouteStmt, Symbol::MaxPrefixStmt] {
        candidates.extend(tree.find(symbol));
    }
    if candidates.is_empty() {
        return Err(MutationError::NoDeletableStatement);
    }
    candidates.sort();
    let path = &candidates[rng.random_range(0..candidates.len())];
    reparse(tree.remove(path))
}

/// Carves a strictly more-specific block out of a remotely originated RIB
/// prefix and pairs it with the null-sink static route that makes the
/// announcement originable. This is the hijack reproduction step.
pub fn synthesize_subprefix<R: Rng>(
    feedback: &Feedback,
    offsets: &[u8],
    rng: &mut R,
) -> Result<(Prefix, NetworkStmt, StaticRouteStmt), MutationError> {
    let candidates: Vec<Prefix> = feedback
        .remote_prefixes()
        .into_iter()
        .filter(|p| offsets.iter().any(|k| p.masklen() + k <= 32) && p.masklen() < 32)
        .collect();
    if candidates.is_empty() {
        return Err(MutationError::NoCandidatePrefix);
    }
    let parent = candidates[rng.random_range(0..candidates.len())];
    let feasible: Vec<u8> = offsets
        .iter()
        .copied()
        .filter(|k| parent.masklen() + k <= 32)
        .collect();
    let k = feasible[rng.random_range(0..feasible.len())];
    let child_len = parent.masklen() + k;
    let block = rng.random_range(0..(1u32 << k));
    let child_addr = u32::from(parent.address()) + (block << (32 - child_len));
    let child = Prefix::new(Ipv4Addr::from(child_addr), child_len)
        .expect("carved sub-block is canonical by construction");
    Ok((
        parent,
        NetworkStmt { prefix: child },
        StaticRouteStmt {
            prefix: child,
            target: StaticTarget::NullSink,
        },
    ))
}

/// Byte-level baseline with no grammar knowledge: bit flips, byte
/// insertions and deletions, and line duplication. `budget` is the number
/// of operations; zero is the identity.
pub fn random_mutate<R: Rng>(text: &str, budget: usize, rng: &mut R) -> String {
    let mut bytes: Vec<u8> = text.as_bytes().to_vec();
    for _ in 0..budget {
        match rng.random_range(0..4u8) {
            0 => {
                // bit flip
                if !bytes.is_empty() {
                    let pos = rng.random_range(0..bytes.len());
                    bytes[pos] ^= 1 << rng.random_range(0..8u8);
                }
            }
            1 => {
                // insert
                let pos = rng.random_range(0..=bytes.len());
                bytes.insert(pos, rng.random_range(0..=255u8));
            }
            2 => {
                // delete
                if !bytes.is_empty() {
                    let pos = rng.random_range(0..bytes.len());
                    bytes.remove(pos);
                }
            }
            _ => {
                // duplicate a line
                let ends: Vec<usize> = bytes
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| **b == b'\n')
                    .map(|(i, _)| i)
                    .collect();
                if !ends.is_empty() {
                    let pick = rng.random_range(0..ends.len());
                    let end = ends[pick] + 1;
                    let start = if pick == 0 { 0 } else { ends[pick - 1] + 1 };
                    let line: Vec<u8> = bytes[start..end].to_vec();
                    bytes.splice(end..end, line);
                }
            }
        }
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

/// Picks the next mutation plan from the current feedback and config.
/// Sub-prefix synthesis is weighted up when the RIB shows remotely
/// originated prefixes; limit insertion when a neighbor has no
/// maximum-prefix; otherwise field mutation carries the probability mass.
pub fn select_mutation<R: Rng>(
    feedback: &Feedback,
    config: &RouterConfig,
    settings: &MutationSettings,
    rng: &mut R,
) -> MutationPlan {
    #[derive(Clone, Copy, PartialEq)]
    enum Category {
        Synthesis,
        MaxPrefixInsert,
        Field,
        Other,
    }

    let has_remote = feedback
        .remote_prefixes()
        .iter()
        .any(|p| settings.subprefix_offsets.iter().any(|k| p.masklen() + k <= 32));
    let unlimited: Vec<Ipv4Addr> = config
        .neighbors
        .iter()
        .filter(|n| n.max_prefix_limit.is_none())
        .map(|n| n.peer_address)
        .collect();

    let w = &settings.weights;
    let mut table: Vec<(Category, f64)> = Vec::new();
    if has_remote {
        table.push((Category::Synthesis, w.subprefix_synthesis));
    }
    if !unlimited.is_empty() {
        table.push((Category::MaxPrefixInsert, w.max_prefix_insert));
    }
    table.push((Category::Field, w.field_mutation));
    table.push((Category::Other, w.other_change));

    let total: f64 = table.iter().map(|(_, w)| w).sum();
    let mut draw = rng.random_range(0.0..total);
    let mut picked = Category::Field;
    for (cat, weight) in &table {
        if draw < *weight {
            picked = *cat;
            break;
        }
        draw -= weight;
    }

    match picked {
        Category::Synthesis => {
            match synthesize_subprefix(feedback, &settings.subprefix_offsets, rng) {
                Ok((parent, network, static_route)) => MutationPlan::Insert {
                    stmts: vec![
                        InsertStmt::Network(network),
                        InsertStmt::StaticRoute(static_route),
                    ],
                    synthesized_parent: Some(parent),
                },
                Err(_) => MutationPlan::MutateField,
            }
        }
        Category::MaxPrefixInsert => {
            let peer = unlimited[rng.random_range(0..unlimited.len())];
            let limit = rng.random_range(1..=4u32);
            MutationPlan::Insert {
                stmts: vec![InsertStmt::MaxPrefix(MaxPrefixStmt {
                    peer_address: peer,
                    limit,
                })],
                synthesized_parent: None,
            }
        }
        Category::Field => MutationPlan::MutateField,
        Category::Other => {
            // Deletion only once runtime state exists; with nothing
            // observed yet there is no substrate worth removing.
            let deletable = !feedback.rib.entries.is_empty()
                && (!config.networks.is_empty()
                    || !config.static_routes.is_empty()
                    || !config.max_prefix.is_empty());
            if deletable && rng.random_range(0..2u8) == 0 {
                MutationPlan::Delete
            } else if rng.random_range(0..2u8) == 0 {
                let taken: BTreeSet<Prefix> = config.networks.iter().map(|n| n.prefix).collect();
                let prefix = random_prefix(rng, &taken);
                MutationPlan::Insert {
                    stmts: vec![InsertStmt::Network(NetworkStmt { prefix })],
                    synthesized_parent: None,
                }
            } else {
                let taken: BTreeSet<Prefix> =
                    config.static_routes.iter().map(|s| s.prefix).collect();
                let prefix = random_prefix(rng, &taken);
                MutationPlan::Insert {
                    stmts: vec![InsertStmt::StaticRoute(StaticRouteStmt {
                        prefix,
                        target: StaticTarget::NullSink,
                    })],
                    synthesized_parent: None,
                }
            }
        }
    }
}

fn reparse(tree: DerivationTree) -> Result<(RouterConfig, DerivationTree), MutationError> {
    let text = tree.text();
    parse_config(&text).map_err(MutationError::InvalidSeed)
}

fn replace_value_node(
    tree: &DerivationTree,
    symbol: Symbol,
    index: usize,
    new_text: &str,
) -> DerivationTree {
    let paths = tree.find(symbol);
    let node = DerivationTree::nonterminal(symbol, vec![DerivationTree::terminal(new_text, 0)]);
    tree.replace(&paths[index], node)
}

/// Rewrites every PeerAddr occurrence of `old` (remote-as and
/// maximum-prefix lines) to `new`.
fn replace_peer_address(tree: &DerivationTree, old: Ipv4Addr, new: Ipv4Addr) -> DerivationTree {
    let old_text = old.to_string();
    let mut result = tree.clone();
    loop {
        let next = result.find(Symbol::PeerAddr).into_iter().find(|path| {
            result
                .node(path)
                .map(|n| n.text() == old_text)
                .unwrap_or(false)
        });
        match next {
            Some(path) => {
                let node = DerivationTree::nonterminal(
                    Symbol::PeerAddr,
                    vec![DerivationTree::terminal(new.to_string(), 0)],
                );
                result = result.replace(&path, node);
            }
            None => return result,
        }
    }
}

fn network_prefix_node(prefix: Prefix) -> DerivationTree {
    DerivationTree::nonterminal(
        Symbol::NetworkPrefix,
        vec![
            DerivationTree::terminal(prefix.address().to_string(), 0),
            DerivationTree::terminal(" ", 0),
            DerivationTree::terminal("mask", 0),
            DerivationTree::terminal(" ", 0),
            DerivationTree::terminal(prefix.dotted_mask().to_string(), 0),
        ],
    )
}

/// A plausible unicast address not in `taken`: half the time a host
/// inside a subnet the config already references, otherwise random.
fn fresh_address<R: Rng>(rng: &mut R, config: &RouterConfig, taken: &[Ipv4Addr]) -> Ipv4Addr {
    let known: Vec<Ipv4Addr> = config
        .neighbors
        .iter()
        .map(|n| n.peer_address)
        .chain(std::iter::once(config.router_id))
        .collect();
    for _ in 0..64 {
        let candidate = if !known.is_empty() && rng.random_range(0..2u8) == 0 {
            let base = known[rng.random_range(0..known.len())];
            let octets = base.octets();
            Ipv4Addr::new(
                octets[0],
                octets[1],
                octets[2],
                rng.random_range(1..=254u8),
            )
        } else {
            random_unicast(rng)
        };
        if !taken.contains(&candidate) {
            return candidate;
        }
    }
    // Deterministic fallback: scan forward from a fixed base.
    let mut bits = u32::from(Ipv4Addr::new(10, 91, 0, 1));
    loop {
        let candidate = Ipv4Addr::from(bits);
        if !taken.contains(&candidate) {
            return candidate;
        }
        bits += 1;
    }
}

fn random_unicast<R: Rng>(rng: &mut R) -> Ipv4Addr {
    loop {
        let first = rng.random_range(1..=223u8);
        if first == 127 {
            continue;
        }
        return Ipv4Addr::new(
            first,
            rng.random_range(0..=255u8),
            rng.random_range(0..=255u8),
            rng.random_range(1..=254u8),
        );
    }
}

/// An AS number drawn from the private range, the public range, or the
/// ASNs the config already references; always different from `old`.
fn fresh_asn<R: Rng>(rng: &mut R, config: &RouterConfig, old: u32) -> u32 {
    let known: Vec<u32> = config
        .neighbors
        .iter()
        .map(|n| n.remote_asn)
        .chain(std::iter::once(config.local_asn))
        .filter(|a| *a != old)
        .collect();
    for _ in 0..64 {
        let candidate = match rng.random_range(0..3u8) {
            0 => rng.random_range(64512..=65534u32),
            1 => rng.random_range(1..=64511u32),
            _ if !known.is_empty() => known[rng.random_range(0..known.len())],
            _ => rng.random_range(1..=64511u32),
        };
        if candidate != old {
            return candidate;
        }
    }
    if old == u32::MAX {
        1
    } else {
        old + 1
    }
}

fn fresh_limit<R: Rng>(rng: &mut R, old: u32) -> u32 {
    for _ in 0..64 {
        let candidate = rng.random_range(1..=8u32);
        if candidate != old {
            return candidate;
        }
    }
    old.saturating_add(1).max(1)
}

/// A canonical prefix different from the current one and from everything
/// in `taken`; biased toward neighbors of prefixes the config already
/// announces.
fn fresh_prefix<R: Rng>(
    rng: &mut R,
    config: &RouterConfig,
    old: Prefix,
    taken: &BTreeSet<Prefix>,
) -> Prefix {
    let pool: Vec<Prefix> = config
        .networks
        .iter()
        .map(|n| n.prefix)
        .chain(config.static_routes.iter().map(|s| s.prefix))
        .collect();
    for _ in 0..64 {
        let candidate = if !pool.is_empty() && rng.random_range(0..2u8) == 0 {
            let base = pool[rng.random_range(0..pool.len())];
            sibling_or_child(rng, base)
        } else {
            random_prefix_raw(rng)
        };
        if candidate != old && !taken.contains(&candidate) {
            return candidate;
        }
    }
    // Deterministic fallback.
    let mut bits = u32::from(Ipv4Addr::new(10, 92, 0, 0));
    loop {
        let candidate = Prefix::new(Ipv4Addr::from(bits), 24).unwrap();
        if candidate != old && !taken.contains(&candidate) {
            return candidate;
        }
        bits += 256;
    }
}

/// A nearby block: the adjacent sibling, the first half, or the covering
/// block of `base`.
fn sibling_or_child<R: Rng>(rng: &mut R, base: Prefix) -> Prefix {
    let len = base.masklen();
    match rng.random_range(0..3u8) {
        0 if len >= 1 => {
            let flipped = u32::from(base.address()) ^ (1 << (32 - len));
            Prefix::new(Ipv4Addr::from(flipped), len).unwrap()
        }
        1 if len < 32 => Prefix::new(base.address(), len + 1).unwrap(),
        _ if len >= 1 => Prefix::canonicalize(base.address(), len - 1).unwrap(),
        _ => base,
    }
}

fn random_prefix_raw<R: Rng>(rng: &mut R) -> Prefix {
    let len = rng.random_range(8..=28u8);
    let addr = u32::from(random_unicast(rng));
    Prefix::canonicalize(Ipv4Addr::from(addr), len).unwrap()
}

fn random_prefix<R: Rng>(rng: &mut R, taken: &BTreeSet<Prefix>) -> Prefix {
    for _ in 0..64 {
        let candidate = random_prefix_raw(rng);
        if !taken.contains(&candidate) {
            return candidate;
        }
    }
    let mut bits = u32::from(Ipv4Addr::new(10, 93, 0, 0));
    loop {
        let candidate = Prefix::new(Ipv4Addr::from(bits), 24).unwrap();
        if !taken.contains(&candidate) {
            return candidate;
        }
        bits += 256;
    }
}
