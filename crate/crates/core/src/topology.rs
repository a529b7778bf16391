//! Topology descriptions: the plain-text, line-oriented format
//!
//! ```text
//! node <name> asn <n> router-id <ip> [owns <prefix>...]
//! link <a> <b> subnet <prefix>
//! ```
//!
//! Link subnets need a mask length of 30 or 31 so both endpoints get a
//! deterministic address: the lower address goes to the lexicographically
//! smaller node name.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::net::Ipv4Addr;

use thiserror::Error;

use crate::prefix::{parse_addr, Prefix};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSpec {
    pub name: String,
    pub asn: u32,
    pub router_id: Ipv4Addr,
    /// Prefixes this AS legitimately originates.
    pub owned: Vec<Prefix>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkSpec {
    pub a: String,
    pub b: String,
    pub subnet: Prefix,
}

impl LinkSpec {
    /// Endpoint addresses: lower address to the lexicographically smaller
    /// node name. /30 subnets use the two host addresses, /31 both
    /// addresses.
    pub fn endpoint_addrs(&self) -> (Ipv4Addr, Ipv4Addr) {
        let base = u32::from(self.subnet.address());
        let (lo, hi) = match self.subnet.masklen() {
            31 => (base, base + 1),
            _ => (base + 1, base + 2),
        };
        if self.a <= self.b {
            (Ipv4Addr::from(lo), Ipv4Addr::from(hi))
        } else {
            (Ipv4Addr::from(hi), Ipv4Addr::from(lo))
        }
    }

    /// The address of `node` on this link, if it is an endpoint.
    pub fn addr_of(&self, node: &str) -> Option<Ipv4Addr> {
        let (addr_a, addr_b) = self.endpoint_addrs();
        if node == self.a {
            Some(addr_a)
        } else if node == self.b {
            Some(addr_b)
        } else {
            None
        }
    }

    pub fn other_end<'a>(&'a self, node: &str) -> Option<&'a str> {
        if node == self.a {
            Some(&self.b)
        } else if node == self.b {
            Some(&self.a)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("line {line}: {message}")]
    BadLine { line: usize, message: String },
    #[error("duplicate node name '{0}'")]
    DuplicateNodeName(String),
    #[error("duplicate router-id {0}")]
    DuplicateRouterId(Ipv4Addr),
    #[error("link references unknown node '{0}'")]
    DanglingEndpoint(String),
    #[error("link {a}-{b} connects a node to itself")]
    SelfLink { a: String, b: String },
    #[error("link subnets {0} and {1} overlap")]
    OverlappingSubnets(Prefix, Prefix),
    #[error("link subnet {0} cannot host two endpoints (mask length must be 30 or 31)")]
    SubnetTooSmall(Prefix),
    #[error("topology has no nodes")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    pub nodes: Vec<NodeSpec>,
    pub links: Vec<LinkSpec>,
}

impl Topology {
    pub fn parse(text: &str) -> Result<Self, TopologyError> {
        let mut nodes = Vec::new();
        let mut links = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0] {
                "node" => nodes.push(parse_node(line_no, &tokens)?),
                "link" => links.push(parse_link(line_no, &tokens)?),
                other => {
                    return Err(TopologyError::BadLine {
                        line: line_no,
                        message: format!("unknown keyword '{other}'"),
                    })
                }
            }
        }
        let topo = Topology { nodes, links };
        topo.validate()?;
        Ok(topo)
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        if self.nodes.is_empty() {
            return Err(TopologyError::Empty);
        }
        let mut names = BTreeSet::new();
        let mut router_ids = BTreeSet::new();
        for node in &self.nodes {
            if !names.insert(node.name.as_str()) {
                return Err(TopologyError::DuplicateNodeName(node.name.clone()));
            }
            if !router_ids.insert(node.router_id) {
                return Err(TopologyError::DuplicateRouterId(node.router_id));
            }
        }
        for link in &self.links {
            if link.a == link.b {
                return Err(TopologyError::SelfLink {
                    a: link.a.clone(),
                    b: link.b.clone(),
                });
            }
            for end in [&link.a, &link.b] {
                if !names.contains(end.as_str()) {
                    return Err(TopologyError::DanglingEndpoint(end.clone()));
                }
            }
            if !matches!(link.subnet.masklen(), 30 | 31) {
                return Err(TopologyError::SubnetTooSmall(link.subnet));
            }
        }
        for (i, x) in self.links.iter().enumerate() {
            for y in &self.links[i + 1..] {
                if x.subnet.contains(&y.subnet) || y.subnet.contains(&x.subnet) {
                    return Err(TopologyError::OverlappingSubnets(x.subnet, y.subnet));
                }
            }
        }
        Ok(())
    }

    /// Non-fatal observations: isolated nodes and same-ASN links (those
    /// sessions can never establish as eBGP).
    pub fn warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        for node in &self.nodes {
            let connected = self
                .links
                .iter()
                .any(|l| l.a == node.name || l.b == node.name);
            if !connected {
                warnings.push(format!("node '{}' is not on any link", node.name));
            }
        }
        for link in &self.links {
            let asn_a = self.node(&link.a).map(|n| n.asn);
            let asn_b = self.node(&link.b).map(|n| n.asn);
            if let Some(asn) = asn_a {
                if asn_a == asn_b {
                    warnings.push(format!(
                        "link {}-{} joins two routers in AS {asn}; the eBGP session will stay idle",
                        link.a, link.b
                    ));
                }
            }
        }
        warnings
    }

    pub fn node(&self, name: &str) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn links_of<'a>(&'a self, name: &str) -> impl Iterator<Item = (usize, &'a LinkSpec)> {
        let name = name.to_string();
        self.links
            .iter()
            .enumerate()
            .filter(move |(_, l)| l.a == name || l.b == name)
    }

    /// The node owning a link-endpoint address, for next-hop resolution.
    pub fn owner_of_link_addr(&self, addr: Ipv4Addr) -> Option<&str> {
        for link in &self.links {
            let (addr_a, addr_b) = link.endpoint_addrs();
            if addr == addr_a {
                return Some(&link.a);
            }
            if addr == addr_b {
                return Some(&link.b);
            }
        }
        None
    }

    /// Renders back to the line-oriented format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for node in &self.nodes {
            let _ = write!(
                out,
                "node {} asn {} router-id {}",
                node.name, node.asn, node.router_id
            );
            if !node.owned.is_empty() {
                let _ = write!(out, " owns");
                for prefix in &node.owned {
                    let _ = write!(out, " {prefix}");
                }
            }
            out.push('\n');
        }
        for link in &self.links {
            let _ = writeln!(out, "link {} {} subnet {}", link.a, link.b, link.subnet);
        }
        out
    }

    /// Synthesizes the Step-0 baseline configuration of each node:
    /// neighbors from links, networks from owned prefixes.
    pub fn baseline_configs(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for node in &self.nodes {
            let mut cfg = crate::config::RouterConfig::minimal(node.asn, node.router_id);
            cfg.log_neighbor_changes = true;
            let mut neighbors: Vec<(Ipv4Addr, u32)> = self
                .links_of(&node.name)
                .filter_map(|(_, link)| {
                    let peer = link.other_end(&node.name)?;
                    let peer_asn = self.node(peer)?.asn;
                    let peer_addr = link.addr_of(peer)?;
                    Some((peer_addr, peer_asn))
                })
                .collect();
            neighbors.sort();
            for (addr, asn) in neighbors {
                cfg.neighbors.push(crate::config::NeighborStmt {
                    peer_address: addr,
                    remote_asn: asn,
                    max_prefix_limit: None,
                });
            }
            let mut owned = node.owned.clone();
            owned.sort();
            for prefix in owned {
                cfg.networks.push(crate::config::NetworkStmt { prefix });
            }
            out.insert(node.name.clone(), cfg.render());
        }
        out
    }
}

fn parse_node(line: usize, tokens: &[&str]) -> Result<NodeSpec, TopologyError> {
    let bad = |message: String| TopologyError::BadLine { line, message };
    if tokens.len() < 6 || tokens[1].is_empty() || tokens[2] != "asn" || tokens[4] != "router-id" {
        return Err(bad(
            "expected 'node <name> asn <n> router-id <ip> [owns <prefix>...]'".into(),
        ));
    }
    let asn: u32 = tokens[3]
        .parse()
        .ok()
        .filter(|a| *a >= 1)
        .ok_or_else(|| bad(format!("invalid ASN '{}'", tokens[3])))?;
    let router_id =
        parse_addr(tokens[5]).map_err(|e| bad(format!("invalid router-id: {e}")))?;
    let mut owned = Vec::new();
    if tokens.len() > 6 {
        if tokens[6] != "owns" {
            return Err(bad(format!("expected 'owns', found '{}'", tokens[6])));
        }
        if tokens.len() == 7 {
            return Err(bad("'owns' requires at least one prefix".into()));
        }
        for token in &tokens[7..] {
            owned.push(Prefix::parse(token).map_err(|e| bad(format!("invalid prefix: {e}")))?);
        }
    }
    Ok(NodeSpec {
        name: tokens[1].to_string(),
        asn,
        router_id,
        owned,
    })
}

fn parse_link(line: usize, tokens: &[&str]) -> Result<LinkSpec, TopologyError> {
    let bad = |message: String| TopologyError::BadLine { line, message };
    if tokens.len() != 5 || tokens[3] != "subnet" {
        return Err(bad("expected 'link <a> <b> subnet <prefix>'".into()));
    }
    let subnet =
        Prefix::parse(tokens[4]).map_err(|e| bad(format!("invalid subnet: {e}")))?;
    Ok(LinkSpec {
        a: tokens[1].to_string(),
        b: tokens[2].to_string(),
        subnet,
    })
}
