//! Routing Information Base entries, best-path selection, and the
//! textual snapshot format `*> <prefix> <next_hop> 0 <weight> <origin>`.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use crate::prefix::Prefix;

/// Route origin attribute, rendered as `i`, `e` or `?`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Origin {
    Igp,
    Egp,
    Incomplete,
}

impl Origin {
    pub fn letter(self) -> char {
        match self {
            Origin::Igp => 'i',
            Origin::Egp => 'e',
            Origin::Incomplete => '?',
        }
    }
}

/// Weight assigned to locally originated routes.
pub const LOCAL_WEIGHT: u32 = 32768;

/// One candidate route for a prefix at one router.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RibEntry {
    pub prefix: Prefix,
    /// 0.0.0.0 for locally originated routes.
    pub next_hop: Ipv4Addr,
    /// ASNs toward the origin; empty for local routes.
    pub as_path: Vec<u32>,
    pub origin: Origin,
    /// 32768 for local origin, 0 for learned routes.
    pub weight: u32,
    pub best: bool,
    /// Router-id of the advertising peer; the router's own id for local
    /// routes. Decision-process tiebreaker.
    pub peer_router_id: Ipv4Addr,
}

impl RibEntry {
    pub fn local(prefix: Prefix, own_router_id: Ipv4Addr) -> Self {
        RibEntry {
            prefix,
            next_hop: Ipv4Addr::UNSPECIFIED,
            as_path: Vec::new(),
            origin: Origin::Igp,
            weight: LOCAL_WEIGHT,
            best: false,
            peer_router_id: own_router_id,
        }
    }

    pub fn is_local(&self) -> bool {
        self.next_hop == Ipv4Addr::UNSPECIFIED
    }

    /// The AS that originated this route: last ASN on the path, or `local_asn`
    /// for locally originated entries.
    pub fn origin_asn(&self, local_asn: u32) -> u32 {
        self.as_path.last().copied().unwrap_or(local_asn)
    }

    /// Decision-process ranking key: better routes sort first.
    /// Ordered by highest weight, shortest AS path, lowest origin,
    /// lowest peer router-id, with next hop as a final guard so the
    /// order is total even if router-ids collide.
    fn rank_key(&self) -> (u32, usize, Origin, u32, u32) {
        (
            u32::MAX - self.weight,
            self.as_path.len(),
            self.origin,
            u32::from(self.peer_router_id),
            u32::from(self.next_hop),
        )
    }

    pub fn compare_rank(&self, other: &Self) -> Ordering {
        self.rank_key().cmp(&other.rank_key())
    }
}

/// Index of the best entry among candidates for one prefix.
///
/// Candidates must be non-empty and share a prefix; the winner is unique
/// because no two candidates share a next hop.
pub fn best_path_select(candidates: &[RibEntry]) -> usize {
    debug_assert!(!candidates.is_empty());
    debug_assert!(candidates.windows(2).all(|w| w[0].prefix == w[1].prefix));
    let mut best = 0;
    for (idx, entry) in candidates.iter().enumerate().skip(1) {
        if entry.compare_rank(&candidates[best]) == Ordering::Less {
            best = idx;
        }
    }
    best
}

/// A router's full table at one instant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RibSnapshot {
    pub node: String,
    /// Sorted by prefix; within a prefix the best entry first, then
    /// ranking order.
    pub entries: Vec<RibEntry>,
}

impl RibSnapshot {
    /// Renders the table in show-ip-bgp style, one line per entry:
    /// `*> 208.65.152.0/22 0.0.0.0 0 32768 i` for best entries and
    /// `* ...` for alternates. Empty table renders as the empty string.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            let status = if entry.best { "*>" } else { "*" };
            let _ = writeln!(
                out,
                "{} {} {} 0 {} {}",
                status,
                entry.prefix,
                entry.next_hop,
                entry.weight,
                entry.origin.letter()
            );
        }
        out
    }

    /// Prefixes that currently have a best entry.
    pub fn best_prefixes(&self) -> impl Iterator<Item = Prefix> + '_ {
        self.entries.iter().filter(|e| e.best).map(|e| e.prefix)
    }
}
