//! Semantic model of a Cisco-style BGP router configuration.
//!
//! [`RouterConfig`] is the parsed view; [`render`](RouterConfig::render)
//! produces the canonical text form: one `router bgp` block with
//! single-space indented directives, followed by global `ip route` lines.
//! `parse(render(cfg)) == cfg` holds for every valid config.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prefix::Prefix;

/// A `neighbor <ip> remote-as <asn>` directive, plus the limit contributed
/// by a matching `maximum-prefix` directive if one exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborStmt {
    pub peer_address: Ipv4Addr,
    pub remote_asn: u32,
    pub max_prefix_limit: Option<u32>,
}

/// A `network <addr> mask <dotted-mask>` directive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkStmt {
    pub prefix: Prefix,
}

/// Where a static route points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StaticTarget {
    /// `null0`: a discard interface. Traffic matching the route is dropped.
    NullSink,
    /// An IPv4 next hop.
    NextHop(Ipv4Addr),
}

/// An `ip route <addr> <dotted-mask> <null0|next-hop>` directive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticRouteStmt {
    pub prefix: Prefix,
    pub target: StaticTarget,
}

/// A `neighbor <ip> maximum-prefix <limit>` directive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxPrefixStmt {
    pub peer_address: Ipv4Addr,
    pub limit: u32,
}

/// Parsed BGP configuration for one router.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouterConfig {
    pub local_asn: u32,
    pub router_id: Ipv4Addr,
    pub log_neighbor_changes: bool,
    pub neighbors: Vec<NeighborStmt>,
    pub networks: Vec<NetworkStmt>,
    pub static_routes: Vec<StaticRouteStmt>,
    pub max_prefix: Vec<MaxPrefixStmt>,
}

/// Violations of [`RouterConfig`] invariants, reported by [`RouterConfig::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("AS number must be in 1..=4294967295")]
    ZeroAsn,
    #[error("duplicate neighbor address {0}")]
    DuplicateNeighbor(Ipv4Addr),
    #[error("maximum-prefix references unknown neighbor {0}")]
    UnboundMaxPrefix(Ipv4Addr),
    #[error("duplicate maximum-prefix for neighbor {0}")]
    DuplicateMaxPrefix(Ipv4Addr),
    #[error("maximum-prefix limit must be >= 1")]
    ZeroLimit,
    #[error("neighbor {0} limit field does not mirror its maximum-prefix statement")]
    LimitMirror(Ipv4Addr),
}

impl RouterConfig {
    /// A minimal config: `router bgp <asn>` plus `router-id`.
    pub fn minimal(local_asn: u32, router_id: Ipv4Addr) -> Self {
        RouterConfig {
            local_asn,
            router_id,
            log_neighbor_changes: false,
            neighbors: Vec::new(),
            networks: Vec::new(),
            static_routes: Vec::new(),
            max_prefix: Vec::new(),
        }
    }

    /// Attaches a maximum-prefix statement and mirrors it onto the neighbor.
    pub fn set_max_prefix(&mut self, peer: Ipv4Addr, limit: u32) -> Result<(), ConfigError> {
        if limit == 0 {
            return Err(ConfigError::ZeroLimit);
        }
        if self.max_prefix.iter().any(|m| m.peer_address == peer) {
            return Err(ConfigError::DuplicateMaxPrefix(peer));
        }
        let neighbor = self
            .neighbors
            .iter_mut()
            .find(|n| n.peer_address == peer)
            .ok_or(ConfigError::UnboundMaxPrefix(peer))?;
        neighbor.max_prefix_limit = Some(limit);
        self.max_prefix.push(MaxPrefixStmt {
            peer_address: peer,
            limit,
        });
        Ok(())
    }

    /// The limit configured for a peer, if any.
    pub fn max_prefix_limit(&self, peer: Ipv4Addr) -> Option<u32> {
        self.neighbors
            .iter()
            .find(|n| n.peer_address == peer)
            .and_then(|n| n.max_prefix_limit)
    }

    /// Checks the structural invariants. The parser enforces these with
    /// positions; this is the position-free check for built configs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.local_asn == 0 {
            return Err(ConfigError::ZeroAsn);
        }
        let mut seen = BTreeSet::new();
        for n in &self.neighbors {
            if n.remote_asn == 0 {
                return Err(ConfigError::ZeroAsn);
            }
            if !seen.insert(n.peer_address) {
                return Err(ConfigError::DuplicateNeighbor(n.peer_address));
            }
        }
        let mut limited = BTreeSet::new();
        for m in &self.max_prefix {
            if m.limit == 0 {
                return Err(ConfigError::ZeroLimit);
            }
            if !seen.contains(&m.peer_address) {
                return Err(ConfigError::UnboundMaxPrefix(m.peer_address));
            }
            if !limited.insert(m.peer_address) {
                return Err(ConfigError::DuplicateMaxPrefix(m.peer_address));
            }
        }
        for n in &self.neighbors {
            let stated = self
                .max_prefix
                .iter()
                .find(|m| m.peer_address == n.peer_address)
                .map(|m| m.limit);
            if stated != n.max_prefix_limit {
                return Err(ConfigError::LimitMirror(n.peer_address));
            }
        }
        Ok(())
    }

    /// Renders the canonical text form. Deterministic: directives appear
    /// grouped by kind in their stored order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "router bgp {}", self.local_asn);
        let _ = writeln!(out, " router-id {}", self.router_id);
        if self.log_neighbor_changes {
            out.push_str(" bgp log-neighbor-changes\n");
        }
        for n in &self.neighbors {
            let _ = writeln!(out, " neighbor {} remote-as {}", n.peer_address, n.remote_asn);
        }
        for m in &self.max_prefix {
            let _ = writeln!(out, " neighbor {} maximum-prefix {}", m.peer_address, m.limit);
        }
        for n in &self.networks {
            let _ = writeln!(out, " network {}", n.prefix.to_mask_notation());
        }
        for s in &self.static_routes {
            let target = match s.target {
                StaticTarget::NullSink => "null0".to_string(),
                StaticTarget::NextHop(ip) => ip.to_string(),
            };
            let _ = writeln!(
                out,
                "ip route {} {} {}",
                s.prefix.address(),
                s.prefix.dotted_mask(),
                target
            );
        }
        out
    }
}
