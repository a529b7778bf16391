//! Topology Zoo GraphML import.
//!
//! Only the graph structure is used: node ids become router names, each
//! node gets a sequential private-range ASN, a router-id and one /24
//! owned prefix carved from a configurable supernet, and each edge
//! becomes a /30 link subnet carved from a second supernet. Geographic
//! and label metadata is ignored. Assignment is keyed by sorted node id,
//! so importing the same file twice yields identical output.

use std::fmt;
use std::net::Ipv4Addr;

use routefuzz_core::prefix::Prefix;
use routefuzz_core::topology::{LinkSpec, NodeSpec, Topology};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZooError {
    Malformed(String),
    NoNodes,
    DuplicateNode(String),
    UnknownEndpoint(String),
    CapacityExceeded(String),
    BadSupernet(String),
}

impl fmt::Display for ZooError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZooError::Malformed(msg) => write!(f, "malformed GraphML: {msg}"),
            ZooError::NoNodes => write!(f, "graph has no nodes"),
            ZooError::DuplicateNode(name) => write!(f, "duplicate node id '{name}'"),
            ZooError::UnknownEndpoint(name) => {
                write!(f, "edge references unknown node '{name}'")
            }
            ZooError::CapacityExceeded(msg) => write!(f, "address pool exhausted: {msg}"),
            ZooError::BadSupernet(msg) => write!(f, "bad supernet: {msg}"),
        }
    }
}

impl std::error::Error for ZooError {}

/// Node ids and edges extracted from a GraphML document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZooGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
}

/// Minimal GraphML scan: `<node id="...">` and
/// `<edge source="..." target="...">` elements; everything else
/// (keys, data, geography) is skipped.
pub fn parse_graphml(text: &str) -> Result<ZooGraph, ZooError> {
    if !text.contains("<graphml") {
        return Err(ZooError::Malformed("missing <graphml> element".into()));
    }
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for chunk in text.split('<').skip(1) {
        let Some(end) = chunk.find('>') else {
            return Err(ZooError::Malformed("unterminated tag".into()));
        };
        let tag = &chunk[..end];
        if let Some(rest) = tag.strip_prefix("node") {
            if rest.starts_with(|c: char| c.is_whitespace() || c == '/') || rest.is_empty() {
                let id = attribute(rest, "id")
                    .ok_or_else(|| ZooError::Malformed("node without id".into()))?;
                if nodes.contains(&id) {
                    return Err(ZooError::DuplicateNode(id));
                }
                nodes.push(id);
            }
        } else if let Some(rest) = tag.strip_prefix("edge") {
            if rest.starts_with(|c: char| c.is_whitespace() || c == '/') || rest.is_empty() {
                let source = attribute(rest, "source")
                    .ok_or_else(|| ZooError::Malformed("edge without source".into()))?;
                let target = attribute(rest, "target")
                    .ok_or_else(|| ZooError::Malformed("edge without target".into()))?;
                edges.push((source, target));
            }
        }
    }
    if nodes.is_empty() {
        return Err(ZooError::NoNodes);
    }
    for (a, b) in &edges {
        for end in [a, b] {
            if !nodes.contains(end) {
                return Err(ZooError::UnknownEndpoint(end.clone()));
            }
        }
    }
    Ok(ZooGraph { nodes, edges })
}

fn attribute(tag: &str, name: &str) -> Option<String> {
    for quote in ['"', '\''] {
        let needle = format!("{name}={quote}");
        if let Some(start) = tag.find(&needle) {
            let rest = &tag[start + needle.len()..];
            if let Some(end) = rest.find(quote) {
                return Some(rest[..end].to_string());
            }
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct ZooOptions {
    pub asn_base: u32,
    pub owned_supernet: Prefix,
    pub link_supernet: Prefix,
}

impl Default for ZooOptions {
    fn default() -> Self {
        ZooOptions {
            asn_base: 64512,
            owned_supernet: Prefix::parse("10.0.0.0/8").unwrap(),
            link_supernet: Prefix::parse("192.168.0.0/16").unwrap(),
        }
    }
}

/// Synthesizes a loadable topology. Returns the topology plus non-fatal
/// warnings (size outside the 5-15 node band, skipped self-loops).
pub fn to_topology(graph: &ZooGraph, opts: &ZooOptions) -> Result<(Topology, Vec<String>), ZooError> {
    if opts.owned_supernet.masklen() > 24 {
        return Err(ZooError::BadSupernet(
            "owned supernet must be /24 or wider".into(),
        ));
    }
    if opts.link_supernet.masklen() > 30 {
        return Err(ZooError::BadSupernet(
            "link supernet must be /30 or wider".into(),
        ));
    }
    if opts.owned_supernet.contains(&opts.link_supernet)
        || opts.link_supernet.contains(&opts.owned_supernet)
    {
        return Err(ZooError::BadSupernet(
            "owned and link supernets overlap".into(),
        ));
    }

    let mut warnings = Vec::new();
    let mut names: Vec<String> = graph.nodes.iter().map(|n| sanitize(n)).collect();
    names.sort();
    for pair in names.windows(2) {
        if pair[0] == pair[1] {
            return Err(ZooError::DuplicateNode(pair[0].clone()));
        }
    }
    if !(5..=15).contains(&names.len()) {
        warnings.push(format!(
            "{} nodes is outside the 5-15 Tiny band",
            names.len()
        ));
    }

    let owned_blocks = 1u64 << (24 - opts.owned_supernet.masklen());
    if names.len() as u64 > owned_blocks {
        return Err(ZooError::CapacityExceeded(format!(
            "{} nodes need {} /24 blocks but {} provides {}",
            names.len(),
            names.len(),
            opts.owned_supernet,
            owned_blocks
        )));
    }
    if opts.asn_base.checked_add(names.len() as u32).is_none() {
        return Err(ZooError::CapacityExceeded("ASN range overflow".into()));
    }

    let owned_base = u32::from(opts.owned_supernet.address());
    let mut nodes = Vec::new();
    for (idx, name) in names.iter().enumerate() {
        let block = Ipv4Addr::from(owned_base + (idx as u32) * 256);
        let owned = Prefix::new(block, 24).expect("carved /24 is canonical");
        nodes.push(NodeSpec {
            name: name.clone(),
            asn: opts.asn_base + idx as u32,
            router_id: owned.representative(),
            owned: vec![owned],
        });
    }

    let mut edge_pairs: Vec<(String, String)> = Vec::new();
    for (a, b) in &graph.edges {
        let (a, b) = (sanitize(a), sanitize(b));
        if a == b {
            warnings.push(format!("skipping self-loop on '{a}'"));
            continue;
        }
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        edge_pairs.push((lo, hi));
    }
    edge_pairs.sort();

    let link_blocks = 1u64 << (30 - opts.link_supernet.masklen());
    if edge_pairs.len() as u64 > link_blocks {
        return Err(ZooError::CapacityExceeded(format!(
            "{} edges need {} /30 blocks but {} provides {}",
            edge_pairs.len(),
            edge_pairs.len(),
            opts.link_supernet,
            link_blocks
        )));
    }
    let link_base = u32::from(opts.link_supernet.address());
    let mut links = Vec::new();
    for (idx, (a, b)) in edge_pairs.iter().enumerate() {
        let subnet = Prefix::new(Ipv4Addr::from(link_base + (idx as u32) * 4), 30)
            .expect("carved /30 is canonical");
        links.push(LinkSpec {
            a: a.clone(),
            b: b.clone(),
            subnet,
        });
    }

    let topo = Topology { nodes, links };
    topo.validate()
        .map_err(|e| ZooError::Malformed(format!("synthesized topology invalid: {e}")))?;
    Ok((topo, warnings))
}

fn sanitize(raw: &str) -> String {
    let cleaned: String = raw
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if cleaned.is_empty() {
        "_".to_string()
    } else {
        cleaned
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"<?xml version="1.0"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <key id="d0" for="node" attr.name="label" attr.type="string"/>
  <graph edgedefault="undirected">
    <node id="A"><data key="d0">Alpha</data></node>
    <node id="B"/>
    <node id="C"/>
    <node id="D"/>
    <node id="E"/>
    <edge source="A" target="B"/>
    <edge source="B" target="C"/>
    <edge source="C" target="D"/>
    <edge source="D" target="E"/>
  </graph>
</graphml>
"#;

    #[test]
    fn parses_nodes_and_edges() {
        let graph = parse_graphml(SAMPLE).unwrap();
        assert_eq!(graph.nodes.len(), 5);
        assert_eq!(graph.edges.len(), 4);
    }

    #[test]
    fn empty_graph_is_an_error() {
        let doc = "<graphml><graph></graph></graphml>";
        assert_eq!(parse_graphml(doc), Err(ZooError::NoNodes));
    }

    #[test]
    fn unknown_edge_endpoint_is_an_error() {
        let doc = r#"<graphml><graph><node id="A"/><edge source="A" target="ghost"/></graph></graphml>"#;
        assert!(matches!(
            parse_graphml(doc),
            Err(ZooError::UnknownEndpoint(_))
        ));
    }

    #[test]
    fn synthesis_is_deterministic_and_loadable() {
        let graph = parse_graphml(SAMPLE).unwrap();
        let opts = ZooOptions::default();
        let (topo_a, warnings) = to_topology(&graph, &opts).unwrap();
        let (topo_b, _) = to_topology(&graph, &opts).unwrap();
        assert_eq!(topo_a.render(), topo_b.render());
        assert!(warnings.is_empty(), "{warnings:?}");
        assert_eq!(topo_a.nodes.len(), 5);
        assert_eq!(topo_a.links.len(), 4);
        assert_eq!(topo_a.nodes[0].asn, 64512);
        assert_eq!(topo_a.nodes[1].asn, 64513);
        routefuzz_core::sim::Network::load(topo_a).unwrap();
    }

    #[test]
    fn warns_outside_tiny_band() {
        let doc = r#"<graphml><graph><node id="A"/><node id="B"/></graph></graphml>"#;
        let graph = parse_graphml(doc).unwrap();
        let (_, warnings) = to_topology(&graph, &ZooOptions::default()).unwrap();
        assert!(warnings.iter().any(|w| w.contains("5-15")));
    }

    #[test]
    fn rejects_exhausted_address_pools() {
        let graph = parse_graphml(SAMPLE).unwrap();
        let narrow_owned = ZooOptions {
            owned_supernet: Prefix::parse("10.0.0.0/24").unwrap(),
            ..ZooOptions::default()
        };
        assert!(matches!(
            to_topology(&graph, &narrow_owned),
            Err(ZooError::CapacityExceeded(_))
        ));
        let narrow_links = ZooOptions {
            link_supernet: Prefix::parse("192.168.0.0/30").unwrap(),
            ..ZooOptions::default()
        };
        assert!(matches!(
            to_topology(&graph, &narrow_links),
            Err(ZooError::CapacityExceeded(_))
        ));
    }

    #[test]
    fn rejects_malformed_documents() {
        assert!(matches!(
            parse_graphml("<graph><node id=\"A\"/></graph>"),
            Err(ZooError::Malformed(_))
        ));
        assert!(matches!(
            parse_graphml("<graphml><node "),
            Err(ZooError::Malformed(_))
        ));
        assert!(matches!(
            parse_graphml("<graphml><graph><node/></graph></graphml>"),
            Err(ZooError::Malformed(_))
        ));
    }

    #[test]
    fn sanitizes_spacey_labels() {
        let doc = r#"<graphml><graph><node id="New York"/><node id="St. Louis"/></graph></graphml>"#;
        let graph = parse_graphml(doc).unwrap();
        let (topo, _) = to_topology(&graph, &ZooOptions::default()).unwrap();
        assert!(topo.nodes.iter().any(|n| n.name == "New_York"));
        assert!(topo.nodes.iter().any(|n| n.name == "St__Louis"));
    }
}
