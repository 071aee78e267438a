//! Independent reference computations for the grammar and agreement checks.

use std::collections::HashSet;

use convtriple::eval::{Annotations, IaaLevel};
use convtriple::grammar::{parse_symbols, Grammar, SymbolId};
use convtriple::Triple;
use rand::rngs::StdRng;
use rand::Rng;

pub const MAX_LEN: usize = 6;
pub const ALPHABET: [&str; 10] = ["PRP", "VBZ", "VB", "MD", "DT", "NN", "JJ", "IN", "WP", "RB"];

/// `lang[symbol][len]`: every string of exactly `len` alphabet indices the
/// symbol derives, for `len <= MAX_LEN`. Computed as a least fixpoint of the
/// productions read as set equations.
pub fn bounded_languages(g: &Grammar) -> Vec<Vec<HashSet<Vec<u8>>>> {
    let mut lang: Vec<Vec<HashSet<Vec<u8>>>> = vec![vec![HashSet::new(); MAX_LEN + 1]; g.symbol_count()];
    for (k, name) in ALPHABET.iter().enumerate() {
        let id = g.id(name).expect("alphabet tag is a grammar terminal");
        lang[id.index()][1].insert(vec![k as u8]);
    }
    loop {
        let mut changed = false;
        for p in g.productions() {
            let mut current: Vec<Vec<u8>> = vec![Vec::new()];
            for sym in &p.rhs {
                let mut next = Vec::new();
                for prefix in &current {
                    for len in 1..=MAX_LEN - prefix.len() {
                        for s in &lang[sym.index()][len] {
                            let mut joined = prefix.clone();
                            joined.extend_from_slice(s);
                            next.push(joined);
                        }
                    }
                }
                current = next;
                if current.is_empty() {
                    break;
                }
            }
            for s in current {
                let len = s.len();
                if lang[p.lhs.index()][len].insert(s) {
                    changed = true;
                }
            }
        }
        if !changed {
            return lang;
        }
    }
}

/// Compares the chart recognizer with the bounded languages on every
/// alphabet sequence of length 1..=MAX_LEN. Returns the number of sequences
/// checked and a description of each disagreement.
pub fn short_sequence_mismatches(g: &Grammar) -> (usize, Vec<String>) {
    let lang = bounded_languages(g);
    let start = &lang[g.start().index()];
    let symbols: Vec<SymbolId> = ALPHABET.iter().map(|n| g.id(n).unwrap()).collect();
    let results: Vec<(usize, Vec<String>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..ALPHABET.len())
            .map(|first| {
                let (symbols, start) = (&symbols, start);
                scope.spawn(move || {
                    let mut bad = Vec::new();
                    let mut checked = 0;
                    for len in 1..=MAX_LEN {
                        for code in 0..ALPHABET.len().pow(len as u32 - 1) {
                            let mut seq = vec![first as u8];
                            let mut c = code;
                            for _ in 1..len {
                                seq.push((c % ALPHABET.len()) as u8);
                                c /= ALPHABET.len();
                            }
                            let tokens: Vec<SymbolId> = seq.iter().map(|&k| symbols[k as usize]).collect();
                            let chart = parse_symbols(g, &tokens).unwrap().recognize();
                            let oracle = start[len].contains(&seq);
                            checked += 1;
                            if chart != oracle {
                                let names: Vec<&str> = seq.iter().map(|&k| ALPHABET[k as usize]).collect();
                                bad.push(format!("{names:?}: chart={chart} oracle={oracle}"));
                            }
                        }
                    }
                    (checked, bad)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let checked = results.iter().map(|r| r.0).sum();
    (checked, results.into_iter().flat_map(|r| r.1).collect())
}

/// Random annotations: 2..=4 annotators over 1..=5 items, each with up to
/// four triples drawn from a small vocabulary so that overlaps are common.
pub fn random_annotations(rng: &mut StdRng) -> Vec<Annotations> {
    let words = ["speaker1", "speaker2", "cats", "New_York", "new york", "dogs"];
    let preds = ["like", "have", "live-in", "be"];
    let n_annotators = rng.random_range(2..=4);
    let n_items = rng.random_range(1..=5);
    (0..n_annotators)
        .map(|a| Annotations {
            annotator: format!("a{a}"),
            items: (0..n_items)
                .map(|i| {
                    let triples = (0..rng.random_range(0..=4))
                        .map(|_| {
                            Triple::new(
                                words[rng.random_range(0..words.len())],
                                preds[rng.random_range(0..preds.len())],
                                words[rng.random_range(0..words.len())],
                            )
                        })
                        .collect();
                    (format!("d{i}"), triples)
                })
                .collect(),
        })
        .collect()
}

fn key(t: &Triple, level: IaaLevel) -> String {
    let norm = |s: &str| {
        s.to_lowercase()
            .replace(['_', ' '], "-")
            .split('-')
            .filter(|w| !w.is_empty())
            .collect::<Vec<_>>()
            .join("-")
    };
    match level {
        IaaLevel::Subject => norm(&t.subject),
        IaaLevel::Predicate => norm(&t.predicate),
        IaaLevel::Object => norm(&t.object),
        IaaLevel::Triple => format!("{}|{}|{}", norm(&t.subject), norm(&t.predicate), norm(&t.object)),
    }
}

/// Brute-force agreement: every ordered annotator pair on every item, sets
/// built as deduplicated vectors, counts by linear search. Returns
/// (mean Jaccard, mean pairwise F, per-pair (J, F) values).
pub fn brute_force_iaa(anns: &[Annotations], level: IaaLevel) -> (f64, f64, Vec<(f64, f64)>) {
    let mut pairs = Vec::new();
    for id in anns[0].items.keys() {
        for i in 0..anns.len() {
            for j in 0..anns.len() {
                if i == j {
                    continue;
                }
                let set = |a: &Annotations| {
                    let mut v: Vec<String> = Vec::new();
                    for t in &a.items[id] {
                        let k = key(t, level);
                        if !v.contains(&k) {
                            v.push(k);
                        }
                    }
                    v
                };
                let (a, b) = (set(&anns[i]), set(&anns[j]));
                let inter = a.iter().filter(|x| b.contains(x)).count();
                let union = a.len() + b.len() - inter;
                let jac = if union == 0 { 1.0 } else { inter as f64 / union as f64 };
                let f = if a.len() + b.len() == 0 { 1.0 } else { 2.0 * inter as f64 / (a.len() + b.len()) as f64 };
                pairs.push((jac, f));
            }
        }
    }
    let n = pairs.len() as f64;
    let mj = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mf = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    (mj, mf, pairs)
}
