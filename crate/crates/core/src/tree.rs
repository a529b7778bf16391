//! Grammar derivation trees for configuration text.
//!
//! Every parse produces a tree whose leaves are terminal tokens;
//! concatenating the leaves left to right reproduces the source text
//! exactly. Mutation operators locate nonterminals by [`Symbol`], splice
//! replacement subtrees, and re-parse the rendered text so the returned
//! tree always carries fresh spans and a validated structure.

/// Nonterminals of the configuration grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Symbol {
    Config,
    RouterBlock,
    RouterIdStmt,
    LogNeighborStmt,
    NeighborStmt,
    MaxPrefixStmt,
    NetworkStmt,
    AddressFamilyStmt,
    IpRouteStmt,
    LocalAsn,
    RouterIdValue,
    PeerAddr,
    RemoteAsn,
    MaxPrefixLimit,
    NetworkPrefix,
    StaticPrefix,
    StaticTarget,
}

/// A tree node is either an expansion of a grammar nonterminal or a
/// terminal token carrying source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Nonterminal(Symbol),
    Terminal(String),
}

/// Path from the root to a node, as child indices.
pub type TreePath = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationTree {
    kind: NodeKind,
    children: Vec<DerivationTree>,
    /// Byte range in the source text this node was parsed from.
    span: (usize, usize),
}

impl DerivationTree {
    pub fn terminal(text: impl Into<String>, start: usize) -> Self {
        let text = text.into();
        let span = (start, start + text.len());
        DerivationTree {
            kind: NodeKind::Terminal(text),
            children: Vec::new(),
            span,
        }
    }

    pub fn nonterminal(symbol: Symbol, children: Vec<DerivationTree>) -> Self {
        let span = match (children.first(), children.last()) {
            (Some(first), Some(last)) => (first.span.0, last.span.1),
            _ => (0, 0),
        };
        DerivationTree {
            kind: NodeKind::Nonterminal(symbol),
            children,
            span,
        }
    }

    pub fn kind(&self) -> &NodeKind {
        &self.kind
    }

    pub fn symbol(&self) -> Option<Symbol> {
        match self.kind {
            NodeKind::Nonterminal(s) => Some(s),
            NodeKind::Terminal(_) => None,
        }
    }

    pub fn children(&self) -> &[DerivationTree] {
        &self.children
    }

    pub fn span(&self) -> (usize, usize) {
        self.span
    }

    /// Concatenates the terminal leaves left to right.
    pub fn text(&self) -> String {
        let mut out = String::new();
        self.collect_text(&mut out);
        out
    }

    fn collect_text(&self, out: &mut String) {
        match &self.kind {
            NodeKind::Terminal(t) => out.push_str(t),
            NodeKind::Nonterminal(_) => {
                for child in &self.children {
                    child.collect_text(out);
                }
            }
        }
    }

    /// The node at `path`, if the path exists.
    pub fn node(&self, path: &[usize]) -> Option<&DerivationTree> {
        let mut cur = self;
        for &idx in path {
            cur = cur.children.get(idx)?;
        }
        Some(cur)
    }

    /// Paths to every nonterminal expanding `symbol`, in source order.
    pub fn find(&self, symbol: Symbol) -> Vec<TreePath> {
        let mut paths = Vec::new();
        self.find_into(symbol, &mut Vec::new(), &mut paths);
        paths
    }

    fn find_into(&self, symbol: Symbol, prefix: &mut TreePath, out: &mut Vec<TreePath>) {
        if self.symbol() == Some(symbol) {
            out.push(prefix.clone());
        }
        for (idx, child) in self.children.iter().enumerate() {
            prefix.push(idx);
            child.find_into(symbol, prefix, out);
            prefix.pop();
        }
    }

    /// A copy of the tree with the node at `path` replaced. Spans of the
    /// copy are stale; callers re-parse the rendered text.
    pub fn replace(&self, path: &[usize], replacement: DerivationTree) -> DerivationTree {
        match path.split_first() {
            None => replacement,
            Some((&idx, rest)) => {
                let mut copy = self.clone();
                copy.children[idx] = copy.children[idx].replace(rest, replacement);
                copy
            }
        }
    }

    /// A copy of the tree with the child at `path` removed from its parent.
    pub fn remove(&self, path: &[usize]) -> DerivationTree {
        let mut copy = self.clone();
        match path.split_first() {
            None => copy,
            Some((&idx, [])) => {
                copy.children.remove(idx);
                copy
            }
            Some((&idx, rest)) => {
                copy.children[idx] = copy.children[idx].remove(rest);
                copy
            }
        }
    }

    /// Checks that every leaf is a terminal and that spans tile the source
    /// exactly. Test support for the leaf-concatenation invariant.
    pub fn check_against_source(&self, source: &str) -> bool {
        self.text() == source && self.spans_consistent()
    }

    fn spans_consistent(&self) -> bool {
        if self.children.is_empty() {
            return match &self.kind {
                NodeKind::Terminal(t) => self.span.1 - self.span.0 == t.len(),
                // A nonterminal with no children never comes out of the parser.
                NodeKind::Nonterminal(_) => false,
            };
        }
        let mut cursor = self.span.0;
        for child in &self.children {
            if child.span.0 != cursor || !child.spans_consistent() {
                return false;
            }
            cursor = child.span.1;
        }
        cursor == self.span.1
    }
}
