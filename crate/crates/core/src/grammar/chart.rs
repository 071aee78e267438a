use std::cell::RefCell;
use std::cmp::Reverse;
use std::collections::HashMap;

use thiserror::Error;

use super::{Grammar, SymbolId, Tree};
use crate::lexres::Tag;

/// Longest accepted input, in tokens.
pub const MAX_TOKENS: usize = 64;

/// Cap on the number of minimum-size trees compared by [`ParseForest::best`].
const BEST_CANDIDATE_LIMIT: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("cannot parse an empty tag sequence")]
    Empty,
    #[error("{len} tokens exceed the limit of {max}")]
    TooLong { len: usize, max: usize },
    #[error("`{0}` is not a terminal of the grammar")]
    UnknownTag(String),
}

/// Parses a tag sequence with `grammar`.
pub fn parse<'g>(grammar: &'g Grammar, tags: &[Tag]) -> Result<ParseForest<'g>, ParseError> {
    let symbols = tags
        .iter()
        .map(|t| match grammar.id(t.as_str()) {
            Some(id) if grammar.is_terminal(id) => Ok(id),
            _ => Err(ParseError::UnknownTag(t.as_str().to_string())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    parse_symbols(grammar, &symbols)
}

/// Parses a sequence of terminal symbols.
pub fn parse_symbols<'g>(
    grammar: &'g Grammar,
    tokens: &[SymbolId],
) -> Result<ParseForest<'g>, ParseError> {
    let n = tokens.len();
    if n == 0 {
        return Err(ParseError::Empty);
    }
    if n > MAX_TOKENS {
        return Err(ParseError::TooLong { len: n, max: MAX_TOKENS });
    }
    if let Some(t) = tokens.iter().find(|t| !grammar.is_terminal(**t)) {
        return Err(ParseError::UnknownTag(grammar.name(*t).to_string()));
    }
    let chart = Chart::fill(grammar, tokens);
    Ok(ParseForest {
        grammar,
        tokens: tokens.to_vec(),
        complete: chart.complete,
        min_size: RefCell::new(HashMap::new()),
    })
}

/// Bottom-up chart over dotted rule prefixes.
struct Chart {
    /// `complete[i * (n + 1) + j]`: bitset of symbols deriving tokens `i..j`.
    complete: Vec<u64>,
}

impl Chart {
    fn fill(g: &Grammar, tokens: &[SymbolId]) -> Chart {
        let n = tokens.len();
        let width = n + 1;
        let mut complete = vec![0u64; width * width];
        // Dotted items (production, dot) for 1 <= dot < rhs.len().
        let mut item_of = Vec::with_capacity(g.productions.len());
        let mut items = 0usize;
        for p in &g.productions {
            item_of.push(items);
            items += p.rhs.len().saturating_sub(1);
        }
        let mut partial = vec![false; items * width * width];
        let at = |item: usize, i: usize, j: usize| (item * width + i) * width + j;
        let bit = |s: SymbolId| 1u64 << s.0;

        for len in 1..=n {
            for i in 0..=n - len {
                let j = i + len;
                let mut set = if len == 1 { bit(tokens[i]) } else { 0 };
                for (pi, p) in g.productions.iter().enumerate() {
                    let k_len = p.rhs.len();
                    if k_len < 2 {
                        continue;
                    }
                    // extend prefixes of length d - 1 ending before j
                    for d in 2..=k_len.min(len) {
                        let sym = bit(p.rhs[d - 1]);
                        let prev = item_of[pi] + d - 2;
                        let found = (i + d - 1..j).any(|k| {
                            partial[at(prev, i, k)] && complete[k * width + j] & sym != 0
                        });
                        if found {
                            if d == k_len {
                                set |= bit(p.lhs);
                            } else {
                                partial[at(item_of[pi] + d - 1, i, j)] = true;
                            }
                        }
                    }
                }
                // unary closure
                loop {
                    let before = set;
                    for p in &g.productions {
                        if p.rhs.len() == 1 && set & bit(p.rhs[0]) != 0 {
                            set |= bit(p.lhs);
                        }
                    }
                    if set == before {
                        break;
                    }
                }
                complete[i * width + j] = set;
                for (pi, p) in g.productions.iter().enumerate() {
                    if p.rhs.len() >= 2 && set & bit(p.rhs[0]) != 0 {
                        partial[at(item_of[pi], i, j)] = true;
                    }
                }
            }
        }
        Chart { complete }
    }
}

/// Everything the chart knows about one input: which symbols derive which
/// spans. Trees are read out on demand.
#[derive(Debug)]
pub struct ParseForest<'g> {
    grammar: &'g Grammar,
    tokens: Vec<SymbolId>,
    complete: Vec<u64>,
    min_size: RefCell<HashMap<(SymbolId, usize, usize), Option<usize>>>,
}

impl<'g> ParseForest<'g> {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// True when `symbol` derives tokens `i..j`.
    pub fn derives(&self, symbol: SymbolId, i: usize, j: usize) -> bool {
        let width = self.tokens.len() + 1;
        i < j && j <= self.tokens.len() && self.complete[i * width + j] & (1u64 << symbol.0) != 0
    }

    /// True when the start symbol derives the whole input.
    pub fn recognize(&self) -> bool {
        self.derives(self.grammar.start, 0, self.tokens.len())
    }

    /// Number of distinct complete trees, saturating at `u128::MAX`.
    pub fn count(&self) -> u128 {
        if !self.recognize() {
            return 0;
        }
        let mut memo = HashMap::new();
        self.count_sym(self.grammar.start, 0, self.tokens.len(), &mut memo, &mut Vec::new())
    }

    fn count_sym(
        &self,
        sym: SymbolId,
        i: usize,
        j: usize,
        memo: &mut HashMap<(SymbolId, usize, usize), u128>,
        active: &mut Vec<(SymbolId, usize, usize)>,
    ) -> u128 {
        if self.grammar.is_terminal(sym) {
            return u128::from(j == i + 1 && self.tokens[i] == sym);
        }
        if !self.derives(sym, i, j) || active.contains(&(sym, i, j)) {
            return 0;
        }
        if let Some(c) = memo.get(&(sym, i, j)) {
            return *c;
        }
        active.push((sym, i, j));
        let mut total: u128 = 0;
        for p in self.grammar.productions_of(sym) {
            total = total.saturating_add(self.count_seq(&p.rhs, i, j, memo, active));
        }
        active.pop();
        memo.insert((sym, i, j), total);
        total
    }

    fn count_seq(
        &self,
        rhs: &[SymbolId],
        i: usize,
        j: usize,
        memo: &mut HashMap<(SymbolId, usize, usize), u128>,
        active: &mut Vec<(SymbolId, usize, usize)>,
    ) -> u128 {
        if rhs.len() == 1 {
            return self.count_sym(rhs[0], i, j, memo, active);
        }
        let rest = rhs.len() - 1;
        let mut total: u128 = 0;
        for k in i + 1..=j.saturating_sub(rest) {
            if !self.covers(rhs[0], i, k) {
                continue;
            }
            let head = self.count_sym(rhs[0], i, k, memo, active);
            if head == 0 {
                continue;
            }
            let tail = self.count_seq(&rhs[1..], k, j, memo, active);
            total = total.saturating_add(head.saturating_mul(tail));
        }
        total
    }

    fn covers(&self, sym: SymbolId, i: usize, j: usize) -> bool {
        if self.grammar.is_terminal(sym) {
            j == i + 1 && self.tokens[i] == sym
        } else {
            self.derives(sym, i, j)
        }
    }

    /// Every complete tree, up to `limit` of them, in a fixed order.
    pub fn trees_limited(&self, limit: usize) -> Vec<Tree> {
        if !self.recognize() {
            return Vec::new();
        }
        let mut out = self.trees_of(self.grammar.start, 0, self.tokens.len(), limit, &mut Vec::new());
        out.truncate(limit);
        out
    }

    /// Every complete tree. Use [`ParseForest::count`] first on long or
    /// highly ambiguous inputs.
    pub fn trees(&self) -> Vec<Tree> {
        self.trees_limited(usize::MAX)
    }

    fn leaf(&self, i: usize) -> Tree {
        Tree {
            label: self.grammar.name(self.tokens[i]).to_string(),
            start: i,
            end: i + 1,
            children: Vec::new(),
        }
    }

    fn trees_of(
        &self,
        sym: SymbolId,
        i: usize,
        j: usize,
        limit: usize,
        active: &mut Vec<(SymbolId, usize, usize)>,
    ) -> Vec<Tree> {
        if self.grammar.is_terminal(sym) {
            return if self.covers(sym, i, j) { vec![self.leaf(i)] } else { Vec::new() };
        }
        if !self.derives(sym, i, j) || active.contains(&(sym, i, j)) {
            return Vec::new();
        }
        active.push((sym, i, j));
        let mut out = Vec::new();
        for p in self.grammar.productions_of(sym) {
            for children in self.seq_trees(&p.rhs, i, j, limit, active, None) {
                out.push(Tree {
                    label: self.grammar.name(sym).to_string(),
                    start: i,
                    end: j,
                    children,
                });
                if out.len() >= limit {
                    active.pop();
                    return out;
                }
            }
        }
        active.pop();
        out
    }

    /// Child sequences for `rhs` over `i..j`. With `budget` set, only
    /// sequences whose total node count equals it are produced, built from
    /// minimum-size subtrees.
    fn seq_trees(
        &self,
        rhs: &[SymbolId],
        i: usize,
        j: usize,
        limit: usize,
        active: &mut Vec<(SymbolId, usize, usize)>,
        budget: Option<usize>,
    ) -> Vec<Vec<Tree>> {
        let sub = |this: &Self, sym, a, b, active: &mut Vec<_>| match budget {
            Some(_) => this.min_trees(sym, a, b, limit, active),
            None => this.trees_of(sym, a, b, limit, active),
        };
        if rhs.len() == 1 {
            if let Some(b) = budget {
                if self.min_size_of(rhs[0], i, j) != Some(b) {
                    return Vec::new();
                }
            }
            return sub(self, rhs[0], i, j, active).into_iter().map(|t| vec![t]).collect();
        }
        let rest = rhs.len() - 1;
        let mut out = Vec::new();
        for k in i + 1..=j.saturating_sub(rest) {
            if !self.covers(rhs[0], i, k) {
                continue;
            }
            let tail_budget = match budget {
                Some(b) => match self.min_size_of(rhs[0], i, k) {
                    Some(h) if h < b => Some(b - h),
                    _ => continue,
                },
                None => None,
            };
            if let Some(tb) = tail_budget {
                if self.min_seq(&rhs[1..], k, j) != Some(tb) {
                    continue;
                }
            }
            let heads = sub(self, rhs[0], i, k, active);
            if heads.is_empty() {
                continue;
            }
            let tails = self.seq_trees(&rhs[1..], k, j, limit, active, tail_budget);
            for h in &heads {
                for t in &tails {
                    let mut seq = Vec::with_capacity(rhs.len());
                    seq.push(h.clone());
                    seq.extend(t.iter().cloned());
                    out.push(seq);
                    if out.len() >= limit {
                        return out;
                    }
                }
            }
        }
        out
    }

    /// Fewest nodes of any tree for `sym` over `i..j`.
    fn min_size_of(&self, sym: SymbolId, i: usize, j: usize) -> Option<usize> {
        if self.grammar.is_terminal(sym) {
            return self.covers(sym, i, j).then_some(1);
        }
        if !self.derives(sym, i, j) {
            return None;
        }
        if let Some(v) = self.min_size.borrow().get(&(sym, i, j)) {
            return *v;
        }
        // provisional entry breaks unary cycles
        self.min_size.borrow_mut().insert((sym, i, j), None);
        let best = self
            .grammar
            .productions_of(sym)
            .filter_map(|p| self.min_seq(&p.rhs, i, j))
            .min()
            .map(|s| s + 1);
        self.min_size.borrow_mut().insert((sym, i, j), best);
        best
    }

    fn min_seq(&self, rhs: &[SymbolId], i: usize, j: usize) -> Option<usize> {
        if rhs.len() == 1 {
            return self.min_size_of(rhs[0], i, j);
        }
        let rest = rhs.len() - 1;
        (i + 1..=j.saturating_sub(rest))
            .filter_map(|k| Some(self.min_size_of(rhs[0], i, k)? + self.min_seq(&rhs[1..], k, j)?))
            .min()
    }

    fn min_trees(
        &self,
        sym: SymbolId,
        i: usize,
        j: usize,
        limit: usize,
        active: &mut Vec<(SymbolId, usize, usize)>,
    ) -> Vec<Tree> {
        if self.grammar.is_terminal(sym) {
            return if self.covers(sym, i, j) { vec![self.leaf(i)] } else { Vec::new() };
        }
        let Some(size) = self.min_size_of(sym, i, j) else {
            return Vec::new();
        };
        if active.contains(&(sym, i, j)) {
            return Vec::new();
        }
        active.push((sym, i, j));
        let mut out = Vec::new();
        for p in self.grammar.productions_of(sym) {
            if self.min_seq(&p.rhs, i, j) != Some(size - 1) {
                continue;
            }
            for children in self.seq_trees(&p.rhs, i, j, limit, active, Some(size - 1)) {
                out.push(Tree {
                    label: self.grammar.name(sym).to_string(),
                    start: i,
                    end: j,
                    children,
                });
                if out.len() >= limit {
                    active.pop();
                    return out;
                }
            }
        }
        active.pop();
        out
    }

    /// The preferred tree: [`select_parse`] applied to the trees with the
    /// fewest nodes. `None` when the input is not in the language.
    pub fn best(&self) -> Option<Tree> {
        if !self.recognize() {
            return None;
        }
        let candidates = self.min_trees(
            self.grammar.start,
            0,
            self.tokens.len(),
            BEST_CANDIDATE_LIMIT,
            &mut Vec::new(),
        );
        select_parse(candidates)
    }
}

/// Length of the first child of the first branching node reached from the
/// root through single-child links.
fn first_constituent_len(tree: &Tree) -> usize {
    let node = tree.skip_unary();
    node.children.first().map_or(0, Tree::len)
}

/// Deterministic choice among alternative trees: fewest nodes, then the
/// longest first constituent, then the smallest bracketed rendering.
pub fn select_parse(trees: Vec<Tree>) -> Option<Tree> {
    trees
        .into_iter()
        .map(|t| ((t.node_count(), Reverse(first_constituent_len(&t)), t.bracketed()), t))
        .min_by(|a, b| a.0.cmp(&b.0))
        .map(|(_, t)| t)
}
