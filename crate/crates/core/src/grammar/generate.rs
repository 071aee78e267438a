use rand::seq::IndexedRandom;
use rand::Rng;
use thiserror::Error;

use super::{Grammar, SymbolId, Tree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("max depth {requested} is below the shallowest derivation ({needed})")]
    TooShallow { requested: usize, needed: usize },
    #[error("start symbol derives no finite string")]
    Unproductive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub terminals: Vec<SymbolId>,
    pub tree: Tree,
}

impl Generated {
    pub fn terminal_names<'g>(&self, grammar: &'g Grammar) -> Vec<&'g str> {
        self.terminals.iter().map(|t| grammar.name(*t)).collect()
    }
}

/// Height of the shallowest derivation of every symbol, measured like
/// [`Tree::depth`]: terminals are -1, a node over terminals only is 0.
fn min_heights(g: &Grammar) -> Vec<Option<i64>> {
    let mut h: Vec<Option<i64>> = (0..g.symbol_count())
        .map(|i| g.terminal[i].then_some(-1))
        .collect();
    loop {
        let mut changed = false;
        for p in &g.productions {
            let Some(child_max) = p
                .rhs
                .iter()
                .map(|s| h[s.0])
                .try_fold(-1i64, |acc, v| v.map(|v| acc.max(v)))
            else {
                continue;
            };
            let cand = child_max + 1;
            if h[p.lhs.0].is_none_or(|cur| cand < cur) {
                h[p.lhs.0] = Some(cand);
                changed = true;
            }
        }
        if !changed {
            return h;
        }
    }
}

/// Samples a derivation from the start symbol whose depth (see
/// [`Tree::depth`]) is at most `max_depth`. At each node a production is
/// drawn uniformly among those that can still finish within the remaining
/// depth.
pub fn generate<R: Rng + ?Sized>(
    grammar: &Grammar,
    max_depth: usize,
    rng: &mut R,
) -> Result<Generated, GenerateError> {
    let heights = min_heights(grammar);
    let needed = heights[grammar.start.0].ok_or(GenerateError::Unproductive)?;
    if (max_depth as i64) < needed {
        return Err(GenerateError::TooShallow {
            requested: max_depth,
            needed: needed as usize,
        });
    }
    let mut terminals = Vec::new();
    let tree = expand(grammar, &heights, grammar.start, max_depth as i64, rng, &mut terminals);
    Ok(Generated { terminals, tree })
}

fn expand<R: Rng + ?Sized>(
    g: &Grammar,
    heights: &[Option<i64>],
    sym: SymbolId,
    budget: i64,
    rng: &mut R,
    out: &mut Vec<SymbolId>,
) -> Tree {
    let start = out.len();
    if g.is_terminal(sym) {
        out.push(sym);
        return Tree {
            label: g.name(sym).to_string(),
            start,
            end: start + 1,
            children: Vec::new(),
        };
    }
    let fits: Vec<_> = g
        .productions_of(sym)
        .filter(|p| {
            p.rhs
                .iter()
                .all(|s| heights[s.0].is_some_and(|h| h < budget))
        })
        .collect();
    let production = fits
        .choose(rng)
        .expect("a production within budget exists whenever the symbol's minimum height fits");
    let children: Vec<Tree> = production
        .rhs
        .iter()
        .map(|s| expand(g, heights, *s, budget - 1, rng, out))
        .collect();
    Tree {
        label: g.name(sym).to_string(),
        start,
        end: out.len(),
        children,
    }
}
