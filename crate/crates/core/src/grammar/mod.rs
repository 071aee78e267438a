//! Phrase-structure grammar over part-of-speech tags, a chart parser for it
//! and a random derivation sampler.
//!
//! Grammar text has one rule per line, `LHS -> alt | alt | ...`, with
//! symbols separated by whitespace. The left-hand side of the first rule is
//! the start symbol; symbols that never appear on a left-hand side are
//! terminals.

mod chart;
mod generate;

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

pub use chart::{parse, parse_symbols, select_parse, ParseError, ParseForest, MAX_TOKENS};
pub use generate::{generate, GenerateError, Generated};

/// Text of the grammar compiled into the crate, exactly as distributed.
pub const BUILTIN_GRAMMAR: &str = include_str!("../../data/grammar.cfg");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(usize);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Production {
    pub lhs: SymbolId,
    pub rhs: Vec<SymbolId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("grammar has no rules")]
    Empty,
    #[error("grammar uses {0} symbols; at most 64 are supported")]
    TooManySymbols(usize),
}

#[derive(Debug, Clone)]
pub struct Grammar {
    text: String,
    names: Vec<String>,
    ids: HashMap<String, SymbolId>,
    terminal: Vec<bool>,
    productions: Vec<Production>,
    by_lhs: Vec<Vec<usize>>,
    start: SymbolId,
}

impl Grammar {
    /// The built-in twelve-rule grammar.
    pub fn builtin() -> &'static Grammar {
        static GRAMMAR: OnceLock<Grammar> = OnceLock::new();
        GRAMMAR.get_or_init(|| Grammar::from_text(BUILTIN_GRAMMAR).expect("built-in grammar is valid"))
    }

    pub fn from_text(text: &str) -> Result<Grammar, GrammarError> {
        let mut names: Vec<String> = Vec::new();
        let mut ids: HashMap<String, SymbolId> = HashMap::new();
        let mut intern = |name: &str| -> SymbolId {
            if let Some(id) = ids.get(name) {
                return *id;
            }
            let id = SymbolId(names.len());
            names.push(name.to_string());
            ids.insert(name.to_string(), id);
            id
        };
        let mut productions = Vec::new();
        let mut lhs_seen = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |reason: &str| GrammarError::Syntax {
                line: idx + 1,
                reason: reason.to_string(),
            };
            let (lhs, rhs) = line.split_once("->").ok_or_else(|| syntax("missing `->`"))?;
            let lhs_words: Vec<&str> = lhs.split_whitespace().collect();
            if lhs_words.len() != 1 {
                return Err(syntax("left-hand side must be a single symbol"));
            }
            let lhs = intern(lhs_words[0]);
            lhs_seen.push(lhs);
            for alt in rhs.split('|') {
                let symbols: Vec<SymbolId> = alt.split_whitespace().map(&mut intern).collect();
                if symbols.is_empty() {
                    return Err(syntax("empty alternative"));
                }
                productions.push(Production { lhs, rhs: symbols });
            }
        }
        let start = *lhs_seen.first().ok_or(GrammarError::Empty)?;
        if names.len() > 64 {
            return Err(GrammarError::TooManySymbols(names.len()));
        }
        let mut terminal = vec![true; names.len()];
        for id in &lhs_seen {
            terminal[id.0] = false;
        }
        let mut by_lhs = vec![Vec::new(); names.len()];
        for (i, p) in productions.iter().enumerate() {
            by_lhs[p.lhs.0].push(i);
        }
        Ok(Grammar {
            text: text.to_string(),
            names,
            ids,
            terminal,
            productions,
            by_lhs,
            start,
        })
    }

    /// The grammar text this grammar was built from.
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn start(&self) -> SymbolId {
        self.start
    }

    pub fn symbol_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.names[id.0]
    }

    pub fn id(&self, name: &str) -> Option<SymbolId> {
        self.ids.get(name).copied()
    }

    pub fn is_terminal(&self, id: SymbolId) -> bool {
        self.terminal[id.0]
    }

    pub fn terminals(&self) -> impl Iterator<Item = SymbolId> + '_ {
        (0..self.names.len()).map(SymbolId).filter(|id| self.terminal[id.0])
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = SymbolId> + '_ {
        (0..self.names.len()).map(SymbolId).filter(|id| !self.terminal[id.0])
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    /// Productions whose left-hand side is `lhs`, in file order.
    pub fn productions_of(&self, lhs: SymbolId) -> impl Iterator<Item = &Production> {
        self.by_lhs[lhs.0].iter().map(|&i| &self.productions[i])
    }

    /// Number of distinct left-hand sides, i.e. rule lines.
    pub fn rule_count(&self) -> usize {
        self.nonterminals().count()
    }

    /// True when some nonterminal can rewrite to itself through unary
    /// productions alone.
    pub fn has_unary_cycle(&self) -> bool {
        let n = self.names.len();
        let mut reach = vec![vec![false; n]; n];
        for p in &self.productions {
            if p.rhs.len() == 1 {
                reach[p.lhs.0][p.rhs[0].0] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        (0..n).any(|i| reach[i][i])
    }
}

/// A parse or derivation tree. Leaves are terminals covering one token.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tree {
    pub label: String,
    /// Token range `[start, end)` covered by this node.
    pub start: usize,
    pub end: usize,
    pub children: Vec<Tree>,
}

impl Tree {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Tree::node_count).sum::<usize>()
    }

    /// Labels of the leaves, left to right.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.is_leaf() {
            out.push(&self.label);
        }
        for c in &self.children {
            c.collect_leaves(out);
        }
    }

    /// Longest path, in edges, from this node down to a node whose children
    /// are all leaves. Terminal leaves themselves do not count.
    pub fn depth(&self) -> usize {
        if self.children.iter().all(Tree::is_leaf) {
            0
        } else {
            1 + self.children.iter().filter(|c| !c.is_leaf()).map(Tree::depth).max().unwrap_or(0)
        }
    }

    /// Labels of the children, in order.
    pub fn child_labels(&self) -> Vec<&str> {
        self.children.iter().map(|c| c.label.as_str()).collect()
    }

    /// Follows single-child links down from this node.
    pub fn skip_unary(&self) -> &Tree {
        let mut node = self;
        while node.children.len() == 1 {
            node = &node.children[0];
        }
        node
    }

    /// Pre-order search for the first node labelled `label`.
    pub fn find(&self, label: &str) -> Option<&Tree> {
        if self.label == label {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(label))
    }

    pub fn bracketed(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_leaf() {
            return f.write_str(&self.label);
        }
        write!(f, "({}", self.label)?;
        for c in &self.children {
            write!(f, " {c}")?;
        }
        f.write_str(")")
    }
}
