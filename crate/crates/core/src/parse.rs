//! Parser for the Cisco-style configuration grammar.
//!
//! Recognized directives: `router bgp`, `router-id`,
//! `bgp log-neighbor-changes`, `neighbor ... remote-as`,
//! `neighbor ... maximum-prefix`, `network ... mask ...`, `ip route ...`,
//! and `address-family` markers (accepted, no semantics). Anything else is
//! a [`ParseError`]: the fuzzer must never deploy text it cannot reason
//! about, and a deployment-time parse failure is itself an observable.
//!
//! The grammar is strict about shape: single-space separators, one-space
//! indentation inside the `router bgp` block, no blank lines. Prefixes
//! with host bits set are rejected, never repaired.

use std::net::Ipv4Addr;

use thiserror::Error;

use crate::config::{
    MaxPrefixStmt, NeighborStmt, NetworkStmt, RouterConfig, StaticRouteStmt, StaticTarget,
};
use crate::prefix::{parse_addr, Prefix};
use crate::tree::{DerivationTree, Symbol};

/// A parse failure with the position and token that caused it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message} (at '{token}')")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub token: String,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, token: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            token: token.into(),
            message: message.into(),
        }
    }
}

/// Parses configuration text into its semantic form and derivation tree.
pub fn parse_config(text: &str) -> Result<(RouterConfig, DerivationTree), ParseError> {
    Parser::new(text).run()
}

/// One whitespace-delimited token with its position.
struct Token<'a> {
    text: &'a str,
    /// 1-based column of the first character.
    column: usize,
    /// Byte offset in the whole source.
    offset: usize,
}

struct Line<'a> {
    /// 1-based line number.
    number: usize,
    /// Content without the trailing newline.
    content: &'a str,
    /// Byte offset of the line start.
    offset: usize,
    /// Whether the line ended with a newline character.
    has_newline: bool,
}

struct Parser<'a> {
    text: &'a str,
    config: RouterConfig,
    saw_router_id: bool,
    saw_log: bool,
    /// (line, column, peer) of each maximum-prefix statement, for binding checks.
    max_prefix_sites: Vec<(usize, usize, Ipv4Addr)>,
    router_stmts: Vec<DerivationTree>,
    global_stmts: Vec<DerivationTree>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            text,
            config: RouterConfig::minimal(0, Ipv4Addr::UNSPECIFIED),
            saw_router_id: false,
            saw_log: false,
            max_prefix_sites: Vec::new(),
            router_stmts: Vec::new(),
            global_stmts: Vec::new(),
        }
    }

    fn run(mut self) -> Result<(RouterConfig, DerivationTree), ParseError> {
        let lines = split_lines(self.text);
        if lines.is_empty() {
            return Err(ParseError::new(1, 1, "", "missing 'router bgp' stanza"));
        }

        let header = self.parse_header(&lines[0])?;
        let mut in_globals = false;
        let mut last_line = lines[0].number;

        for line in &lines[1..] {
            last_line = line.number;
            if line.content.is_empty() {
                return Err(ParseError::new(line.number, 1, "", "empty line"));
            }
            if let Some(rest) = line.content.strip_prefix(' ') {
                if rest.starts_with(' ') {
                    return Err(ParseError::new(
                        line.number,
                        2,
                        "",
                        "expected single-space indentation",
                    ));
                }
                if in_globals {
                    return Err(ParseError::new(
                        line.number,
                        1,
                        rest.split(' ').next().unwrap_or(""),
                        "indented directive after the global 'ip route' section",
                    ));
                }
                let stmt = self.parse_router_stmt(line)?;
                self.router_stmts.push(stmt);
            } else {
                in_globals = true;
                let stmt = self.parse_global_stmt(line)?;
                self.global_stmts.push(stmt);
            }
        }

        if !self.saw_router_id {
            return Err(ParseError::new(last_line + 1, 1, "", "missing router-id"));
        }
        self.bind_max_prefix()?;

        let mut block_children = header;
        block_children.append(&mut self.router_stmts);
        let block = DerivationTree::nonterminal(Symbol::RouterBlock, block_children);
        let mut config_children = vec![block];
        config_children.append(&mut self.global_stmts);
        let tree = DerivationTree::nonterminal(Symbol::Config, config_children);

        debug_assert!(tree.check_against_source(self.text));
        debug_assert!(self.config.validate().is_ok());
        Ok((self.config, tree))
    }

    /// `router bgp <asn>` — returns the header terminals of the block node.
    fn parse_header(&mut self, line: &Line<'a>) -> Result<Vec<DerivationTree>, ParseError> {
        if line.content.starts_with(' ') {
            return Err(ParseError::new(
                line.number,
                1,
                "",
                "missing 'router bgp' stanza",
            ));
        }
        let tokens = tokenize(line)?;
        match tokens.as_slice() {
            [a, b, asn] if a.text == "router" && b.text == "bgp" => {
                self.config.local_asn = parse_asn(line.number, asn)?;
                let mut children = vec![
                    DerivationTree::terminal("router", a.offset),
                    DerivationTree::terminal(" ", a.offset + 6),
                    DerivationTree::terminal("bgp", b.offset),
                    DerivationTree::terminal(" ", b.offset + 3),
                    DerivationTree::nonterminal(
                        Symbol::LocalAsn,
                        vec![DerivationTree::terminal(asn.text, asn.offset)],
                    ),
                ];
                push_newline(&mut children, line);
                Ok(children)
            }
            _ => Err(ParseError::new(
                line.number,
                1,
                tokens.first().map(|t| t.text).unwrap_or(""),
                "missing 'router bgp' stanza",
            )),
        }
    }

    fn parse_router_stmt(&mut self, line: &Line<'a>) -> Result<DerivationTree, ParseError> {
        let tokens = tokenize(line)?;
        let first = &tokens[0];
        match first.text {
            "router-id" => self.parse_router_id(line, &tokens),
            "bgp" => self.parse_log_neighbor(line, &tokens),
            "neighbor" => self.parse_neighbor(line, &tokens),
            "network" => self.parse_network(line, &tokens),
            "address-family" | "exit-address-family" => Ok(af_marker(line)),
            other => Err(ParseError::new(
                line.number,
                first.column,
                other,
                "unknown directive",
            )),
        }
    }

    fn parse_router_id(
        &mut self,
        line: &Line<'a>,
        tokens: &[Token<'a>],
    ) -> Result<DerivationTree, ParseError> {
        let [kw, value] = expect_tokens::<2>(line, tokens, "expected 'router-id <address>'")?;
        if self.saw_router_id {
            return Err(ParseError::new(
                line.number,
                kw.column,
                kw.text,
                "duplicate router-id",
            ));
        }
        self.config.router_id = addr_at(line.number, value)?;
        self.saw_router_id = true;
        let mut children = vec![
            DerivationTree::terminal(" ", line.offset),
            DerivationTree::terminal(kw.text, kw.offset),
            DerivationTree::terminal(" ", kw.offset + kw.text.len()),
            DerivationTree::nonterminal(
                Symbol::RouterIdValue,
                vec![DerivationTree::terminal(value.text, value.offset)],
            ),
        ];
        push_newline(&mut children, line);
        Ok(DerivationTree::nonterminal(Symbol::RouterIdStmt, children))
    }

    fn parse_log_neighbor(
        &mut self,
        line: &Line<'a>,
        tokens: &[Token<'a>],
    ) -> Result<DerivationTree, ParseError> {
        let [kw, arg] = expect_tokens::<2>(line, tokens, "expected 'bgp log-neighbor-changes'")?;
        if arg.text != "log-neighbor-changes" {
            return Err(ParseError::new(
                line.number,
                arg.column,
                arg.text,
                "unknown directive",
            ));
        }
        if self.saw_log {
            return Err(ParseError::new(
                line.number,
                kw.column,
                kw.text,
                "duplicate bgp log-neighbor-changes",
            ));
        }
        self.saw_log = true;
        self.config.log_neighbor_changes = true;
        let mut children = vec![
            DerivationTree::terminal(" ", line.offset),
            DerivationTree::terminal(kw.text, kw.offset),
            DerivationTree::terminal(" ", kw.offset + kw.text.len()),
            DerivationTree::terminal(arg.text, arg.offset),
        ];
        push_newline(&mut children, line);
        Ok(DerivationTree::nonterminal(Symbol::LogNeighborStmt, children))
    }

    fn parse_neighbor(
        &mut self,
        line: &Line<'a>,
        tokens: &[Token<'a>],
    ) -> Result<DerivationTree, ParseError> {
        let [kw, addr, verb, value] = expect_tokens::<4>(
            line,
            tokens,
            "expected 'neighbor <address> remote-as|maximum-prefix <value>'",
        )?;
        let peer = addr_at(line.number, addr)?;
        let common = |line: &Line<'a>| {
            vec![
                DerivationTree::terminal(" ", line.offset),
                DerivationTree::terminal(kw.text, kw.offset),
                DerivationTree::terminal(" ", kw.offset + kw.text.len()),
                DerivationTree::nonterminal(
                    Symbol::PeerAddr,
                    vec![DerivationTree::terminal(addr.text, addr.offset)],
                ),
                DerivationTree::terminal(" ", addr.offset + addr.text.len()),
                DerivationTree::terminal(verb.text, verb.offset),
                DerivationTree::terminal(" ", verb.offset + verb.text.len()),
            ]
        };
        match verb.text {
            "remote-as" => {
                let asn = parse_asn(line.number, value)?;
                if self.config.neighbors.iter().any(|n| n.peer_address == peer) {
                    return Err(ParseError::new(
                        line.number,
                        addr.column,
                        addr.text,
                        "duplicate neighbor address",
                    ));
                }
                self.config.neighbors.push(NeighborStmt {
                    peer_address: peer,
                    remote_asn: asn,
                    max_prefix_limit: None,
                });
                let mut children = common(line);
                children.push(DerivationTree::nonterminal(
                    Symbol::RemoteAsn,
                    vec![DerivationTree::terminal(value.text, value.offset)],
                ));
                push_newline(&mut children, line);
                Ok(DerivationTree::nonterminal(Symbol::NeighborStmt, children))
            }
            "maximum-prefix" => {
                let limit: u32 = value.text.parse().map_err(|_| {
                    ParseError::new(
                        line.number,
                        value.column,
                        value.text,
                        "invalid maximum-prefix limit",
                    )
                })?;
                if limit == 0 {
                    return Err(ParseError::new(
                        line.number,
                        value.column,
                        value.text,
                        "maximum-prefix limit must be >= 1",
                    ));
                }
                self.max_prefix_sites.push((line.number, addr.column, peer));
                self.config.max_prefix.push(MaxPrefixStmt {
                    peer_address: peer,
                    limit,
                });
                let mut children = common(line);
                children.push(DerivationTree::nonterminal(
                    Symbol::MaxPrefixLimit,
                    vec![DerivationTree::terminal(value.text, value.offset)],
                ));
                push_newline(&mut children, line);
                Ok(DerivationTree::nonterminal(Symbol::MaxPrefixStmt, children))
            }
            other => Err(ParseError::new(
                line.number,
                verb.column,
                other,
                "expected 'remote-as' or 'maximum-prefix'",
            )),
        }
    }

    fn parse_network(
        &mut self,
        line: &Line<'a>,
        tokens: &[Token<'a>],
    ) -> Result<DerivationTree, ParseError> {
        let [kw, addr, mask_kw, mask] =
            expect_tokens::<4>(line, tokens, "expected 'network <address> mask <dotted-mask>'")?;
        if mask_kw.text != "mask" {
            return Err(ParseError::new(
                line.number,
                mask_kw.column,
                mask_kw.text,
                "expected 'mask'",
            ));
        }
        let prefix = prefix_at(line.number, addr, mask)?;
        self.config.networks.push(NetworkStmt { prefix });
        let prefix_node = DerivationTree::nonterminal(
            Symbol::NetworkPrefix,
            vec![
                DerivationTree::terminal(addr.text, addr.offset),
                DerivationTree::terminal(" ", addr.offset + addr.text.len()),
                DerivationTree::terminal(mask_kw.text, mask_kw.offset),
                DerivationTree::terminal(" ", mask_kw.offset + mask_kw.text.len()),
                DerivationTree::terminal(mask.text, mask.offset),
            ],
        );
        let mut children = vec![
            DerivationTree::terminal(" ", line.offset),
            DerivationTree::terminal(kw.text, kw.offset),
            DerivationTree::terminal(" ", kw.offset + kw.text.len()),
            prefix_node,
        ];
        push_newline(&mut children, line);
        Ok(DerivationTree::nonterminal(Symbol::NetworkStmt, children))
    }

    fn parse_global_stmt(&mut self, line: &Line<'a>) -> Result<DerivationTree, ParseError> {
        let tokens = tokenize(line)?;
        if tokens[0].text != "ip" {
            return Err(ParseError::new(
                line.number,
                tokens[0].column,
                tokens[0].text,
                "unknown directive",
            ));
        }
        let [ip_kw, route_kw, addr, mask, target] = expect_tokens::<5>(
            line,
            tokens.as_slice(),
            "expected 'ip route <address> <dotted-mask> <null0|next-hop>'",
        )?;
        if route_kw.text != "route" {
            return Err(ParseError::new(
                line.number,
                route_kw.column,
                route_kw.text,
                "expected 'route'",
            ));
        }
        let prefix = prefix_at(line.number, addr, mask)?;
        let target_value = if target.text == "null0" {
            StaticTarget::NullSink
        } else {
            StaticTarget::NextHop(addr_at(line.number, target)?)
        };
        self.config.static_routes.push(StaticRouteStmt {
            prefix,
            target: target_value,
        });
        let prefix_node = DerivationTree::nonterminal(
            Symbol::StaticPrefix,
            vec![
                DerivationTree::terminal(addr.text, addr.offset),
                DerivationTree::terminal(" ", addr.offset + addr.text.len()),
                DerivationTree::terminal(mask.text, mask.offset),
            ],
        );
        let target_node = DerivationTree::nonterminal(
            Symbol::StaticTarget,
            vec![DerivationTree::terminal(target.text, target.offset)],
        );
        let mut children = vec![
            DerivationTree::terminal(ip_kw.text, ip_kw.offset),
            DerivationTree::terminal(" ", ip_kw.offset + ip_kw.text.len()),
            DerivationTree::terminal(route_kw.text, route_kw.offset),
            DerivationTree::terminal(" ", route_kw.offset + route_kw.text.len()),
            prefix_node,
            DerivationTree::terminal(" ", mask.offset + mask.text.len()),
            target_node,
        ];
        push_newline(&mut children, line);
        Ok(DerivationTree::nonterminal(Symbol::IpRouteStmt, children))
    }

    /// Mirrors maximum-prefix statements onto their neighbors; each must
    /// bind to exactly one configured neighbor.
    fn bind_max_prefix(&mut self) -> Result<(), ParseError> {
        for (idx, (line, column, peer)) in self.max_prefix_sites.iter().enumerate() {
            let limit = self.config.max_prefix[idx].limit;
            let dup = self.max_prefix_sites[..idx].iter().any(|(_, _, p)| p == peer);
            if dup {
                return Err(ParseError::new(
                    *line,
                    *column,
                    peer.to_string(),
                    "duplicate maximum-prefix for neighbor",
                ));
            }
            match self
                .config
                .neighbors
                .iter_mut()
                .find(|n| n.peer_address == *peer)
            {
                Some(neighbor) => neighbor.max_prefix_limit = Some(limit),
                None => {
                    return Err(ParseError::new(
                        *line,
                        *column,
                        peer.to_string(),
                        "maximum-prefix references unknown neighbor",
                    ))
                }
            }
        }
        Ok(())
    }
}

fn split_lines(text: &str) -> Vec<Line<'_>> {
    let mut lines = Vec::new();
    let mut offset = 0;
    for (number, raw) in text.split_inclusive('\n').enumerate() {
        let has_newline = raw.ends_with('\n');
        let content = if has_newline { &raw[..raw.len() - 1] } else { raw };
        lines.push(Line {
            number: number + 1,
            content,
            offset,
            has_newline,
        });
        offset += raw.len();
    }
    lines
}

/// Splits a line into single-space separated tokens. Double spaces,
/// trailing spaces and empty statements are shape errors.
fn tokenize<'a>(line: &Line<'a>) -> Result<Vec<Token<'a>>, ParseError> {
    let body = line.content.strip_prefix(' ').unwrap_or(line.content);
    let indent = line.content.len() - body.len();
    let mut tokens = Vec::new();
    let mut column = indent + 1;
    for part in body.split(' ') {
        if part.is_empty() {
            return Err(ParseError::new(
                line.number,
                column,
                "",
                "unexpected extra space",
            ));
        }
        tokens.push(Token {
            text: part,
            column,
            offset: line.offset + column - 1,
        });
        column += part.len() + 1;
    }
    if tokens.is_empty() {
        return Err(ParseError::new(line.number, 1, "", "empty statement"));
    }
    Ok(tokens)
}

fn expect_tokens<'t, 'a, const N: usize>(
    line: &Line<'a>,
    tokens: &'t [Token<'a>],
    message: &str,
) -> Result<&'t [Token<'a>; N], ParseError> {
    match <&[Token<'a>; N]>::try_from(tokens) {
        Ok(array) => Ok(array),
        Err(_) => {
            let at = tokens.get(N).or(tokens.last());
            Err(ParseError::new(
                line.number,
                at.map(|t| t.column).unwrap_or(1),
                at.map(|t| t.text).unwrap_or(""),
                message,
            ))
        }
    }
}

fn push_newline(children: &mut Vec<DerivationTree>, line: &Line<'_>) {
    if line.has_newline {
        children.push(DerivationTree::terminal(
            "\n",
            line.offset + line.content.len(),
        ));
    }
}

fn af_marker(line: &Line<'_>) -> DerivationTree {
    let body = &line.content[1..];
    let mut children = vec![
        DerivationTree::terminal(" ", line.offset),
        DerivationTree::terminal(body, line.offset + 1),
    ];
    push_newline(&mut children, line);
    DerivationTree::nonterminal(Symbol::AddressFamilyStmt, children)
}

fn parse_asn(line: usize, token: &Token<'_>) -> Result<u32, ParseError> {
    match token.text.parse::<u32>() {
        Ok(asn) if asn >= 1 => Ok(asn),
        _ => Err(ParseError::new(
            line,
            token.column,
            token.text,
            "invalid AS number, must be in 1..=4294967295",
        )),
    }
}

fn addr_at(line: usize, token: &Token<'_>) -> Result<Ipv4Addr, ParseError> {
    parse_addr(token.text)
        .map_err(|e| ParseError::new(line, token.column, token.text, e.to_string()))
}

fn prefix_at(line: usize, addr: &Token<'_>, mask: &Token<'_>) -> Result<Prefix, ParseError> {
    let address = addr_at(line, addr)?;
    let mask_addr = addr_at(line, mask)?;
    let masklen = Prefix::mask_to_len(mask_addr)
        .map_err(|e| ParseError::new(line, mask.column, mask.text, e.to_string()))?;
    Prefix::new(address, masklen)
        .map_err(|e| ParseError::new(line, addr.column, addr.text, e.to_string()))
}
