//! Triple extraction over three-turn windows.
//!
//! Every turn is tagged independently; noun chunks and verb chunks become
//! span candidates, the cross product of subject, predicate and object spans
//! forms the triple candidates, and a [`Scorer`] ranks them. The winners get
//! their pronouns mapped to speaker labels and their perspective taken from
//! the answer in the final turn.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Dialogue, Perspective, Triple};
use crate::extraction::{perspective_labels, Extraction, SlotSpan, Source, UtteranceType};
use crate::lexres::{Lexicon, Tag, TaggedToken};
use crate::pipeline::prepare;
use crate::preprocess::NormalizedUtterance;

/// Upper bound on generated triple candidates per dialogue.
pub const CANDIDATE_CAP: usize = 5000;

/// Number of turns in a conversational window.
pub const WINDOW: usize = 3;

const YES_CUES: [&str; 5] = ["yes", "yeah", "yep", "yup", "sure"];
const NO_CUES: [&str; 3] = ["no", "nope", "nah"];
const FILLERS: [&str; 8] = ["ok", "okay", "well", "oh", "ow", "wow", "hmm", "alot"];
const FIRST_PERSON: [&str; 4] = ["i", "me", "my", "myself"];
const SECOND_PERSON: [&str; 2] = ["you", "yourself"];
/// Certainty assigned when the answer hedges.
pub const HEDGE_CERTAINTY: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvError {
    #[error("dialogue `{id}` has {found} turns; exactly {WINDOW} are required")]
    TurnCount { id: String, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Subject,
    Predicate,
    Object,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanCandidate {
    pub role: Role,
    pub turn: usize,
    /// Token range within the turn.
    pub start: usize,
    pub end: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleCandidate {
    pub subject: SpanCandidate,
    pub predicate: SpanCandidate,
    pub object: SpanCandidate,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct ProcessedTurn {
    pub speaker: String,
    pub normalized: NormalizedUtterance,
    pub tokens: Vec<TaggedToken>,
}

impl ProcessedTurn {
    fn first_word(&self) -> Option<String> {
        self.tokens.first().map(TaggedToken::lower)
    }
}

/// A dialogue with every turn normalized and tagged.
#[derive(Debug, Clone)]
pub struct ProcessedDialogue<'a> {
    pub dialogue: &'a Dialogue,
    pub turns: Vec<ProcessedTurn>,
}

impl<'a> ProcessedDialogue<'a> {
    pub fn new(dialogue: &'a Dialogue, lex: &Lexicon) -> Result<Self, ConvError> {
        if dialogue.turns.len() != WINDOW {
            return Err(ConvError::TurnCount {
                id: dialogue.id.clone(),
                found: dialogue.turns.len(),
            });
        }
        let turns = dialogue
            .turns
            .iter()
            .map(|t| {
                let (normalized, tokens) = prepare(lex, &t.text);
                ProcessedTurn {
                    speaker: t.speaker.clone(),
                    normalized,
                    tokens,
                }
            })
            .collect();
        Ok(Self { dialogue, turns })
    }

    pub fn final_turn(&self) -> &ProcessedTurn {
        self.turns.last().expect("window has three turns")
    }

    /// True when the final turn opens with a yes or no cue.
    pub fn final_is_yes_no(&self) -> bool {
        self.final_turn()
            .first_word()
            .is_some_and(|w| YES_CUES.contains(&w.as_str()) || NO_CUES.contains(&w.as_str()))
    }

    /// Speaker label a pronoun in `turn` refers to, if `text` is a first- or
    /// second-person pronoun.
    pub fn speaker_for(&self, text: &str, turn: usize) -> Option<String> {
        let lower = text.to_lowercase();
        if FIRST_PERSON.contains(&lower.as_str()) {
            return self.dialogue.turns.get(turn).map(|t| t.speaker.clone());
        }
        if SECOND_PERSON.contains(&lower.as_str()) {
            return self.dialogue.other_speaker(turn).map(str::to_string);
        }
        None
    }
}

fn is_chunk_tag(tag: Tag) -> bool {
    matches!(tag, Tag::Dt | Tag::Cd | Tag::PrpPos) || tag.is_noun() || tag.is_adjective()
}

fn is_verb_run_tag(tag: Tag) -> bool {
    tag.is_verb() || tag == Tag::Rb
}

fn is_cue(word: &str) -> bool {
    YES_CUES.contains(&word) || NO_CUES.contains(&word) || FILLERS.contains(&word)
}

/// Surface text of tokens, lowercased, verbs optionally lemmatized.
fn span_text(tokens: &[TaggedToken], lemmas: bool) -> String {
    tokens
        .iter()
        .map(|t| if lemmas && t.tag.is_verb() { t.lemma.clone() } else { t.lower() })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Noun chunks (subject and object candidates), verb chunks (predicate
/// candidates) and infinitival or gerund clauses (extra object candidates).
pub fn propose_spans(d: &ProcessedDialogue) -> Vec<SpanCandidate> {
    let mut spans = Vec::new();
    for (turn, pt) in d.turns.iter().enumerate() {
        let toks = &pt.tokens;
        let n = toks.len();
        let mut push = |role, start, end, text: String| {
            spans.push(SpanCandidate { role, turn, start, end, text });
        };
        // noun chunks; a personal pronoun is always a chunk of its own
        let mut i = 0;
        while i < n {
            if toks[i].tag == Tag::Prp {
                let text = toks[i].lower();
                push(Role::Subject, i, i + 1, text.clone());
                push(Role::Object, i, i + 1, text);
                i += 1;
                continue;
            }
            if !is_chunk_tag(toks[i].tag) {
                i += 1;
                continue;
            }
            let mut j = i;
            while j < n && is_chunk_tag(toks[j].tag) {
                j += 1;
            }
            let text = span_text(&toks[i..j], false);
            if !text.split(' ').all(is_cue) {
                push(Role::Subject, i, j, text.clone());
                push(Role::Object, i, j, text);
            }
            i = j;
        }
        // verb chunks with attached prepositions
        let mut i = 0;
        let mut prev_run_end: Option<usize> = None;
        while i < n {
            if !is_verb_run_tag(toks[i].tag) || !toks[i..].iter().take_while(|t| is_verb_run_tag(t.tag)).any(|t| t.tag.is_verb()) {
                i += 1;
                continue;
            }
            let mut j = i;
            while j < n && is_verb_run_tag(toks[j].tag) {
                j += 1;
            }
            let mut end = j;
            while end < n && toks[end].tag.is_preposition() && toks[end].lower() != "that" {
                end += 1;
            }
            for s in i..j {
                if toks[s].tag.is_verb() {
                    push(Role::Predicate, s, end, span_text(&toks[s..end], true));
                }
            }
            let first_verb = (i..j).find(|&s| toks[s].tag.is_verb()).expect("run holds a verb");
            let after_to = first_verb > 0 && toks[first_verb - 1].tag == Tag::To;
            let gerund_after_verb = toks[first_verb].tag == Tag::Vbg && prev_run_end.is_some_and(|e| e + 1 >= first_verb);
            if after_to || gerund_after_verb {
                let mut o_end = end;
                while o_end < n && is_chunk_tag(toks[o_end].tag) {
                    o_end += 1;
                }
                push(Role::Object, first_verb, o_end, span_text(&toks[first_verb..o_end], false));
            }
            prev_run_end = Some(end);
            i = end.max(i + 1);
        }
    }
    spans.sort_by(|a, b| (a.turn, a.start, a.end, a.role).cmp(&(b.turn, b.start, b.end, b.role)));
    spans.dedup();
    spans
}

/// Cross product of subject, predicate and object spans in span order,
/// truncated to [`CANDIDATE_CAP`].
pub fn generate_candidates(spans: &[SpanCandidate]) -> Vec<TripleCandidate> {
    let of = |role| spans.iter().filter(move |s| s.role == role);
    let mut out = Vec::new();
    'outer: for s in of(Role::Subject) {
        for p in of(Role::Predicate) {
            for o in of(Role::Object) {
                if out.len() == CANDIDATE_CAP {
                    break 'outer;
                }
                out.push(TripleCandidate {
                    subject: s.clone(),
                    predicate: p.clone(),
                    object: o.clone(),
                    score: 0.0,
                });
            }
        }
    }
    out
}

/// Scores a triple candidate in the context of its dialogue. Higher is
/// better; implementations must be deterministic.
pub trait Scorer: Send + Sync {
    fn score(&self, candidate: &TripleCandidate, dialogue: &ProcessedDialogue) -> f64;
}

/// Feature weights of [`HeuristicScorer`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeuristicWeights {
    /// Predicate and object come from the middle turn and the final turn
    /// answers with yes or no.
    pub question_po: f64,
    /// As above, and the answer has fewer than [`HeuristicWeights::short_answer_len`] words.
    pub short_answer: f64,
    pub short_answer_len: usize,
    /// Subject resolves to the speaker of the final turn.
    pub answerer_subject: f64,
    /// Slots come from three different turns.
    pub all_turns: f64,
    pub same_turn: f64,
    /// Subject, predicate and object appear in this order in one turn.
    pub order: f64,
    /// Only modals, adverbs or auxiliaries separate subject and predicate.
    pub adjacent_subject: f64,
    /// The object starts right after the predicate.
    pub adjacent_object: f64,
    /// The predicate holds no verb besides modals and `do`.
    pub aux_only_predicate: f64,
    /// Two slots share a token.
    pub overlap: f64,
    /// Per token between subject, predicate and object in one turn.
    pub gap: f64,
    /// The predicate is in the lexicon's predicate inventory.
    pub known_predicate: f64,
    /// All slots come from the final turn and it is not a yes/no answer.
    pub final_turn: f64,
}

impl Default for HeuristicWeights {
    fn default() -> Self {
        Self {
            question_po: 3.0,
            short_answer: 1.0,
            short_answer_len: 6,
            answerer_subject: 2.0,
            all_turns: -2.0,
            same_turn: 1.0,
            order: 1.0,
            adjacent_subject: 1.0,
            adjacent_object: 1.5,
            aux_only_predicate: -3.0,
            overlap: -5.0,
            gap: -0.1,
            known_predicate: 0.5,
            final_turn: 1.0,
        }
    }
}

/// Hand-weighted ranking features standing in for a learned ranker.
#[derive(Debug, Clone)]
pub struct HeuristicScorer<'a> {
    pub weights: HeuristicWeights,
    lex: &'a Lexicon,
}

impl Default for HeuristicScorer<'static> {
    fn default() -> Self {
        Self::new(HeuristicWeights::default(), Lexicon::builtin())
    }
}

impl<'a> HeuristicScorer<'a> {
    pub fn new(weights: HeuristicWeights, lex: &'a Lexicon) -> Self {
        Self { weights, lex }
    }
}

fn overlaps(a: &SpanCandidate, b: &SpanCandidate) -> bool {
    a.turn == b.turn && a.start < b.end && b.start < a.end
}

impl Scorer for HeuristicScorer<'_> {
    fn score(&self, c: &TripleCandidate, d: &ProcessedDialogue) -> f64 {
        let w = &self.weights;
        let (s, p, o) = (&c.subject, &c.predicate, &c.object);
        let last = d.turns.len() - 1;
        let middle = last.saturating_sub(1);
        let yes_no = d.final_is_yes_no();
        let mut score = 0.0;

        if yes_no && p.turn == middle && o.turn == middle {
            score += w.question_po;
            if d.final_turn().tokens.len() < w.short_answer_len {
                score += w.short_answer;
            }
        }
        if d.speaker_for(&s.text, s.turn).as_deref() == Some(d.final_turn().speaker.as_str()) {
            score += w.answerer_subject;
        }
        if s.turn != p.turn && p.turn != o.turn && s.turn != o.turn {
            score += w.all_turns;
        }
        let same = s.turn == p.turn && p.turn == o.turn;
        if same {
            score += w.same_turn;
            if s.end <= p.start && p.end <= o.start {
                score += w.order;
            }
            if !yes_no && p.turn == last {
                score += w.final_turn;
            }
        }
        let toks = &d.turns[p.turn].tokens;
        if s.turn == p.turn && s.end <= p.start {
            let between = &toks[s.end..p.start];
            if between
                .iter()
                .all(|t| t.tag == Tag::Md || t.tag == Tag::Rb || matches!(t.lemma.as_str(), "do" | "be" | "have"))
            {
                score += w.adjacent_subject;
            }
            score += w.gap * between.len() as f64;
        }
        if o.turn == p.turn && p.end <= o.start {
            if o.start == p.end {
                score += w.adjacent_object;
            }
            score += w.gap * (o.start - p.end) as f64;
        }
        let verbs: Vec<&TaggedToken> = toks[p.start..p.end].iter().filter(|t| t.tag.is_verb()).collect();
        if verbs.iter().all(|t| t.tag == Tag::Md || t.lemma == "do") {
            score += w.aux_only_predicate;
        }
        if overlaps(s, p) || overlaps(p, o) || overlaps(s, o) {
            score += w.overlap;
        }
        if self.lex.is_known_predicate(&p.text) {
            score += w.known_predicate;
        }
        score
    }
}

/// Scores every candidate, keeps the best `k` (earlier candidates win
/// ties) and turns them into extractions.
pub fn rank(candidates: Vec<TripleCandidate>, d: &ProcessedDialogue, scorer: &dyn Scorer, k: usize, lex: &Lexicon) -> Vec<Extraction> {
    let mut scored: Vec<TripleCandidate> = candidates
        .into_iter()
        .map(|mut c| {
            c.score = scorer.score(&c, d);
            c
        })
        .collect();
    scored.sort_by(|a, b| b.score.total_cmp(&a.score));
    scored
        .into_iter()
        .take(k)
        .map(|c| {
            let e = to_extraction(&c, d);
            let e = resolve_speakers(e, d);
            fuse_perspective(e, d, lex)
        })
        .collect()
}

fn slot_span(d: &ProcessedDialogue, s: &SpanCandidate) -> Option<SlotSpan> {
    let norm = &d.turns[s.turn].normalized;
    crate::pipeline::byte_span(norm, &(s.start..s.end), Some(s.turn))
}

fn to_extraction(c: &TripleCandidate, d: &ProcessedDialogue) -> Extraction {
    Extraction {
        triple: Triple::new(c.subject.text.clone(), c.predicate.text.clone(), c.object.text.clone()),
        perspective: Perspective::default(),
        utterance_type: UtteranceType::Statement,
        source: Source {
            id: d.dialogue.id.clone(),
            subject: slot_span(d, &c.subject),
            predicate: slot_span(d, &c.predicate),
            object: slot_span(d, &c.object),
        },
        labels: Vec::new(),
    }
}

/// Replaces first- and second-person pronoun slots by the speaker label
/// they denote in the turn they came from.
pub fn resolve_speakers(mut e: Extraction, d: &ProcessedDialogue) -> Extraction {
    if let Some(turn) = e.source.subject.and_then(|s| s.turn) {
        if let Some(label) = d.speaker_for(&e.triple.subject, turn) {
            e.triple.subject = label;
        }
    }
    if let Some(turn) = e.source.object.and_then(|s| s.turn) {
        if let Some(label) = d.speaker_for(&e.triple.object, turn) {
            e.triple.object = label;
        }
    }
    e
}

/// Perspective of the selected triple, read from the final turn's answer
/// cues and from negation inside the predicate's verb chunk.
pub fn fuse_perspective(mut e: Extraction, d: &ProcessedDialogue, lex: &Lexicon) -> Extraction {
    let last = d.final_turn();
    let words: Vec<String> = last.tokens.iter().map(TaggedToken::lower).collect();
    let first = words.first().map(String::as_str);
    let mut polarity = 1i8;
    let mut explicit_yes = false;
    if first.is_some_and(|w| NO_CUES.contains(&w)) {
        polarity = -1;
    } else if first.is_some_and(|w| YES_CUES.contains(&w)) {
        explicit_yes = true;
    } else if let Some(p) = e.source.predicate.and_then(|s| s.turn).map(|t| &d.turns[t]) {
        let span = e.source.predicate.expect("checked");
        let toks = &p.tokens;
        let idx: Vec<usize> = (0..toks.len())
            .filter(|&i| p.normalized.tokens[i].start >= span.start && p.normalized.tokens[i].end <= span.end)
            .collect();
        if let (Some(&s), Some(&end)) = (idx.first(), idx.last()) {
            let mut from = s;
            while from > 0 && is_verb_run_tag(toks[from - 1].tag) {
                from -= 1;
            }
            let negations = toks[from..=end].iter().filter(|t| lex.is_negation(&t.surface)).count();
            if negations % 2 == 1 {
                polarity = -1;
            }
        }
    }
    let hedged = words.iter().any(|w| matches!(w.as_str(), "maybe" | "perhaps" | "probably"))
        || words.windows(2).any(|p| (p[0] == "i" && p[1] == "think") || (p[0] == "not" && p[1] == "sure"));
    let certainty = if hedged { HEDGE_CERTAINTY } else { 1.0 };
    let mut sentiment = 0.0f64;
    for t in &last.tokens {
        if let Some(v) = lex.sentiment(&t.lemma) {
            if v.abs() > sentiment.abs() {
                sentiment = v;
            }
        }
    }
    e.perspective = Perspective {
        certainty,
        polarity,
        sentiment,
    };
    e.labels = perspective_labels(&e.perspective, explicit_yes);
    e
}

/// Conversational extractor: span proposal, candidate generation and
/// ranking with a pluggable scorer.
pub struct ConvExtractor<'a> {
    lex: &'a Lexicon,
    scorer: Box<dyn Scorer + 'a>,
    k: usize,
}

impl ConvExtractor<'static> {
    pub fn new(k: usize) -> Self {
        Self::with_scorer(Lexicon::builtin(), Box::new(HeuristicScorer::default()), k)
    }
}

impl<'a> ConvExtractor<'a> {
    pub fn with_scorer(lex: &'a Lexicon, scorer: Box<dyn Scorer + 'a>, k: usize) -> Self {
        Self { lex, scorer, k }
    }

    /// Up to `k` extractions; empty when no candidate exists.
    pub fn extract(&self, dialogue: &Dialogue) -> Result<Vec<Extraction>, ConvError> {
        let d = ProcessedDialogue::new(dialogue, self.lex)?;
        let candidates = generate_candidates(&propose_spans(&d));
        Ok(rank(candidates, &d, self.scorer.as_ref(), self.k, self.lex))
    }
}
