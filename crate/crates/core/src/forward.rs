//! Hop-by-hop forwarding queries over converged RIBs.
//!
//! At each router the walk takes the longest-prefix-match over best RIB
//! entries. A local-origin match terminates successfully when the router
//! actually owns a covering prefix; when the origination came from a
//! null-sink static route the packet is blackholed and an ICMP
//! unreachable event fires. Every walk terminates within node-count hops.

use std::collections::BTreeSet;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use crate::config::StaticTarget;
use crate::event::EventKind;
use crate::rib::RibEntry;
use crate::sim::Network;

/// Outcome of one forwarding query. `hops` always starts at the source
/// router and ends at the router where the walk stopped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathResult {
    /// Delivered: the final router owns a prefix covering the destination.
    Path { hops: Vec<String> },
    /// Dropped at a null-sink static route.
    Blackholed { hops: Vec<String> },
    /// No covering route somewhere along the walk.
    Unreachable { hops: Vec<String> },
    /// The walk revisited a router.
    ForwardingLoop { hops: Vec<String> },
}

impl PathResult {
    pub fn hops(&self) -> &[String] {
        match self {
            PathResult::Path { hops }
            | PathResult::Blackholed { hops }
            | PathResult::Unreachable { hops }
            | PathResult::ForwardingLoop { hops } => hops,
        }
    }

    pub fn terminal(&self) -> &str {
        self.hops().last().map(String::as_str).unwrap_or("")
    }

    pub fn is_delivered(&self) -> bool {
        matches!(self, PathResult::Path { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            PathResult::Path { .. } => "path",
            PathResult::Blackholed { .. } => "blackholed",
            PathResult::Unreachable { .. } => "unreachable",
            PathResult::ForwardingLoop { .. } => "forwarding-loop",
        }
    }
}

impl Network {
    /// Walks a packet for `dst` from `src` across best routes.
    pub fn forwarding_path(&mut self, src: &str, dst: Ipv4Addr) -> PathResult {
        let mut hops = vec![src.to_string()];
        let mut visited: BTreeSet<String> = BTreeSet::new();
        visited.insert(src.to_string());
        let mut current = src.to_string();

        loop {
            let Some(entry) = best_covering(self, &current, dst) else {
                return PathResult::Unreachable { hops };
            };
            if entry.is_local() {
                if self
                    .owned_prefixes(&current)
                    .iter()
                    .any(|p| p.contains_address(dst))
                {
                    return PathResult::Path { hops };
                }
                // Originated through a static route: find the most
                // specific one covering the destination.
                let static_route = self
                    .config_of(&current)
                    .map(|cfg| {
                        let mut routes: Vec<_> = cfg
                            .static_routes
                            .iter()
                            .filter(|s| s.prefix.contains_address(dst))
                            .collect();
                        routes.sort_by_key(|s| std::cmp::Reverse(s.prefix.masklen()));
                        routes.first().map(|s| (s.prefix, s.target))
                    })
                    .unwrap_or(None);
                match static_route {
                    Some((_, StaticTarget::NullSink)) => {
                        let node = current.clone();
                        self.emit_event(&node, EventKind::IcmpUnreachable {
                            src: src.to_string(),
                            dst,
                        });
                        return PathResult::Blackholed { hops };
                    }
                    Some((_, StaticTarget::NextHop(next_addr))) => {
                        let Some(next) = self
                            .topology()
                            .owner_of_link_addr(next_addr)
                            .map(str::to_string)
                        else {
                            return PathResult::Unreachable { hops };
                        };
                        if !visited.insert(next.clone()) {
                            return PathResult::ForwardingLoop { hops };
                        }
                        hops.push(next.clone());
                        current = next;
                    }
                    None => return PathResult::Unreachable { hops },
                }
            } else {
                let Some(next) = self
                    .topology()
                    .owner_of_link_addr(entry.next_hop)
                    .map(str::to_string)
                else {
                    return PathResult::Unreachable { hops };
                };
                if !visited.insert(next.clone()) {
                    return PathResult::ForwardingLoop { hops };
                }
                hops.push(next.clone());
                current = next;
            }
        }
    }
}

/// Longest-prefix-match over a node's best entries.
fn best_covering(net: &Network, node: &str, dst: Ipv4Addr) -> Option<RibEntry> {
    net.best_entries(node)
        .into_iter()
        .filter(|e| e.prefix.contains_address(dst))
        .max_by_key(|e| e.prefix.masklen())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{NetworkStmt, StaticRouteStmt};
    use crate::prefix::Prefix;

    const CHAIN3: &str = "node a asn 65001 router-id 10.0.0.1 owns 10.1.0.0/24\nnode b asn 65002 router-id 10.0.0.2 owns 10.2.0.0/24\nnode c asn 65003 router-id 10.0.0.3 owns 208.65.152.0/22\nlink a b subnet 192.168.0.0/30\nlink b c subnet 192.168.0.4/30\n";

    fn hijacked_net() -> Network {
        // Node `a` steals 208.65.152.0/24 from `c` with a null-sink route.
        let mut net = Network::from_text(CHAIN3).unwrap();
        net.converge();
        let mut cfg = net.config_of("a").unwrap().clone();
        cfg.networks.push(NetworkStmt {
            prefix: Prefix::parse("208.65.152.0/24").unwrap(),
        });
        cfg.static_routes.push(StaticRouteStmt {
            prefix: Prefix::parse("208.65.152.0/24").unwrap(),
            target: StaticTarget::NullSink,
        });
        net.apply_config("a", &cfg.render()).unwrap();
        net.converge();
        net
    }

    #[test]
    fn healthy_network_delivers_to_owner() {
        let mut net = Network::from_text(CHAIN3).unwrap();
        net.converge();
        let result = net.forwarding_path("a", Ipv4Addr::new(208, 65, 152, 1));
        assert_eq!(result, PathResult::Path {
            hops: vec!["a".into(), "b".into(), "c".into()]
        });
    }

    #[test]
    fn local_delivery_is_single_hop() {
        let mut net = Network::from_text(CHAIN3).unwrap();
        net.converge();
        let result = net.forwarding_path("c", Ipv4Addr::new(208, 65, 152, 9));
        assert_eq!(result, PathResult::Path { hops: vec!["c".into()] });
    }

    #[test]
    fn unknown_destination_is_unreachable() {
        let mut net = Network::from_text(CHAIN3).unwrap();
        net.converge();
        let result = net.forwarding_path("a", Ipv4Addr::new(203, 0, 113, 1));
        assert!(matches!(result, PathResult::Unreachable { .. }));
    }

    #[test]
    fn hijacked_subprefix_blackholes_at_hijacker() {
        let mut net = hijacked_net();
        let mark = net.log_len();
        // Inside the stolen /24: longest-prefix match pulls traffic to `a`.
        let result = net.forwarding_path("b", Ipv4Addr::new(208, 65, 152, 7));
        assert_eq!(result, PathResult::Blackholed {
            hops: vec!["b".into(), "a".into()]
        });
        assert!(net
            .events_since(mark)
            .iter()
            .any(|e| matches!(e.kind, EventKind::IcmpUnreachable { .. })));
    }

    #[test]
    fn addresses_outside_stolen_block_still_deliver() {
        let mut net = hijacked_net();
        // Inside the /22 but outside the /24: still reaches the owner.
        let result = net.forwarding_path("b", Ipv4Addr::new(208, 65, 153, 7));
        assert_eq!(result, PathResult::Path {
            hops: vec!["b".into(), "c".into()]
        });
    }

    #[test]
    fn victim_traffic_is_pulled_to_hijacker_too() {
        let mut net = hijacked_net();
        let result = net.forwarding_path("c", Ipv4Addr::new(208, 65, 152, 7));
        assert!(matches!(result, PathResult::Blackholed { .. }));
    }

    #[test]
    fn walks_terminate_within_node_count() {
        let mut net = hijacked_net();
        for node in ["a", "b", "c"] {
            for dst in [
                Ipv4Addr::new(208, 65, 152, 1),
                Ipv4Addr::new(10, 2, 0, 1),
                Ipv4Addr::new(1, 2, 3, 4),
            ] {
                let result = net.forwarding_path(node, dst);
                assert!(result.hops().len() <= 3);
            }
        }
    }
}
