use serde::Serialize;

use super::Dialogue;

/// Corpus overview: counts plus per-dialogue and per-utterance means.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CorpusStats {
    pub dialogues: usize,
    pub utterances: usize,
    pub tokens: usize,
    pub triples: usize,
    pub tokens_per_dialogue: f64,
    pub tokens_per_utterance: f64,
    pub triples_per_dialogue: f64,
    pub triples_per_utterance: f64,
    /// Set when the corpus held no dialogues and every figure is zero.
    pub empty: bool,
}

/// Tokens are whitespace-separated words of each turn; `<eos>` markers are
/// turn boundaries and never count.
pub fn corpus_stats(dialogues: &[Dialogue]) -> CorpusStats {
    if dialogues.is_empty() {
        return CorpusStats {
            empty: true,
            ..CorpusStats::default()
        };
    }
    let utterances: usize = dialogues.iter().map(|d| d.turns.len()).sum();
    let tokens: usize = dialogues
        .iter()
        .flat_map(|d| &d.turns)
        .map(|t| t.text.split_whitespace().count())
        .sum();
    let triples: usize = dialogues.iter().map(|d| d.gold.len()).sum();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    CorpusStats {
        dialogues: dialogues.len(),
        utterances,
        tokens,
        triples,
        tokens_per_dialogue: ratio(tokens, dialogues.len()),
        tokens_per_utterance: ratio(tokens, utterances),
        triples_per_dialogue: ratio(triples, dialogues.len()),
        triples_per_utterance: ratio(triples, utterances),
        empty: false,
    }
}
