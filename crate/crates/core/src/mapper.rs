//! Turns a parse tree over a tagged utterance into a triple, and scores the
//! speaker's perspective from lexical cues.
//!
//! The tree decides the utterance type and the subject constituent; the
//! predicate and object are read off the tag sequence to the right of the
//! subject. Modals and trailing prepositions join the predicate with hyphens
//! (`can-make`, `be-from`), supporting `do`/`be`/`have` before a main verb is
//! dropped, and determiners stay inside arguments (`a-cake`).

use std::ops::Range;

use thiserror::Error;

use crate::corpus::{Perspective, Triple, PLACEHOLDER};
use crate::extraction::{SpeakerContext, UtteranceType};
use crate::grammar::Tree;
use crate::lexres::{Lexicon, Tag, TaggedToken};

/// Verbs that introduce an embedded clause carrying the actual claim.
pub const MATRIX_VERBS: [&str; 6] = ["think", "know", "believe", "guess", "suppose", "doubt"];

const AUXILIARIES: [&str; 3] = ["do", "be", "have"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("no verb found after the subject")]
    NoVerb,
    #[error("expected a {expected} tree, found `{found}`")]
    WrongDispatch { expected: &'static str, found: String },
    #[error("tree covers {tree} tokens but {tokens} were given")]
    LengthMismatch { tree: usize, tokens: usize },
}

/// A mapped triple with the token ranges each slot was read from. Ranges are
/// `None` for the question placeholder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapping {
    pub triple: Triple,
    pub utterance_type: UtteranceType,
    pub subject: Option<Range<usize>>,
    pub predicate: Option<Range<usize>>,
    pub object: Option<Range<usize>>,
}

/// Maps any tree rooted in the start symbol, `S` or `Q`.
pub fn map_tree(tree: &Tree, tokens: &[TaggedToken], ctx: &SpeakerContext) -> Result<Mapping, MapError> {
    if tree.end != tokens.len() || tree.start != 0 {
        return Err(MapError::LengthMismatch {
            tree: tree.len(),
            tokens: tokens.len(),
        });
    }
    let node = clause_root(tree);
    match node.label.as_str() {
        "S" => map_statement(node, tokens, ctx),
        "Q" => match node.children.first().map(|c| c.label.as_str()) {
            Some("W") => map_wh_question(node, tokens, ctx),
            _ => map_verb_question(node, tokens, ctx),
        },
        other => Err(MapError::WrongDispatch {
            expected: "statement or question",
            found: other.to_string(),
        }),
    }
}

fn clause_root(tree: &Tree) -> &Tree {
    let mut node = tree;
    while node.children.len() == 1 && !matches!(node.label.as_str(), "S" | "Q") {
        node = &node.children[0];
    }
    node
}

/// Statement: subject is the first NP; matrix clauses such as "I think ..."
/// are skipped in favour of the embedded clause.
pub fn map_statement(tree: &Tree, tokens: &[TaggedToken], ctx: &SpeakerContext) -> Result<Mapping, MapError> {
    let mut s = clause_root(tree);
    if s.label != "S" {
        return Err(MapError::WrongDispatch {
            expected: "statement",
            found: s.label.clone(),
        });
    }
    while let [np, vp, inner] = s.children.as_slice() {
        if np.label != "NP" || vp.label != "VP" || inner.label != "S" {
            break;
        }
        let a = analyse(tokens, vp.start..vp.end);
        match a.main {
            Some(m) if MATRIX_VERBS.contains(&tokens[m].lemma.as_str()) => s = inner,
            _ => break,
        }
    }
    let np = s.children.first().ok_or(MapError::NoVerb)?;
    let mut subject = np.start..np.end;
    if subject.len() > 1 && tokens[subject.start].tag == Tag::In && tokens[subject.start].lower() == "that" {
        subject.start += 1;
    }
    let a = analyse(tokens, np.end..s.end);
    if a.parts.is_empty() {
        return Err(MapError::NoVerb);
    }
    if a.parts == ["be"] {
        if let Some((possessor, rest)) = possessive_split(tokens, subject.clone(), ctx) {
            let verb = tokens[a.main.expect("be is the main verb")].lower();
            return Ok(Mapping {
                triple: Triple::new(possessor, format!("{}-{verb}", render(tokens, rest.clone())), slot(tokens, a.object.clone(), ctx)),
                utterance_type: UtteranceType::Statement,
                subject: Some(subject.start..rest.start),
                predicate: Some(rest.start..a.span.end),
                object: non_empty(a.object),
            });
        }
    }
    Ok(Mapping {
        triple: Triple::new(slot(tokens, subject.clone(), ctx), a.parts.join("-"), slot(tokens, a.object.clone(), ctx)),
        utterance_type: UtteranceType::Statement,
        subject: Some(subject),
        predicate: Some(a.span),
        object: non_empty(a.object),
    })
}

/// Polar question opened by an auxiliary or modal: `V NP C [C]`.
pub fn map_verb_question(tree: &Tree, tokens: &[TaggedToken], ctx: &SpeakerContext) -> Result<Mapping, MapError> {
    let q = clause_root(tree);
    let (Some(v), Some(np)) = (q.children.first(), q.children.get(1)) else {
        return Err(MapError::WrongDispatch {
            expected: "verb-question",
            found: q.label.clone(),
        });
    };
    if q.label != "Q" || v.label != "V" || np.label != "NP" {
        return Err(MapError::WrongDispatch {
            expected: "verb-question",
            found: format!("{} -> {}", q.label, q.child_labels().join(" ")),
        });
    }
    let aux = &tokens[v.start];
    let a = analyse(tokens, np.end..q.end);
    let (parts, object) = if aux.tag == Tag::Md {
        let mut parts = vec![aux.lemma.clone()];
        parts.extend(a.parts);
        (parts, a.object)
    } else if a.main.is_some() && AUXILIARIES.contains(&aux.lemma.as_str()) {
        (a.parts, a.object)
    } else {
        // the opening verb is the main verb: "are you a human"
        let mut parts = vec![aux.lemma.clone()];
        let mut i = np.end;
        while i < q.end && is_attachable_prep(&tokens[i]) {
            parts.push(tokens[i].lower());
            i += 1;
        }
        (parts, i..q.end)
    };
    Ok(Mapping {
        triple: Triple::new(slot(tokens, np.start..np.end, ctx), parts.join("-"), slot(tokens, object.clone(), ctx)),
        utterance_type: UtteranceType::VerbQuestion,
        subject: Some(np.start..np.end),
        predicate: Some(v.start..a.span.end.max(v.end)),
        object: non_empty(object),
    })
}

/// WH-question. The question word becomes the subject unless an explicit
/// subject follows the first verb group, in which case it is the object.
pub fn map_wh_question(tree: &Tree, tokens: &[TaggedToken], ctx: &SpeakerContext) -> Result<Mapping, MapError> {
    let q = clause_root(tree);
    if q.label != "Q" || q.children.first().map(|c| c.label.as_str()) != Some("W") {
        return Err(MapError::WrongDispatch {
            expected: "wh-question",
            found: format!("{} -> {}", q.label, q.child_labels().join(" ")),
        });
    }
    let end = q.end;
    // "which book do you like": the nominal run belongs to the question word
    let mut j = q.children[0].end;
    let mut w_end = j;
    while w_end < end && tokens[w_end].tag.is_nominal() && tokens[w_end].tag != Tag::Prp {
        w_end += 1;
    }
    if w_end > j && w_end < end && tokens[w_end].tag.is_verb() {
        j = w_end;
    }
    let mut k = j;
    while k < end && (tokens[k].tag.is_verb() || tokens[k].tag == Tag::Rb) {
        k += 1;
    }
    let mut m = k;
    while m < end && tokens[m].tag.is_nominal() {
        m += 1;
    }
    let modals: Vec<String> = tokens[j..k].iter().filter(|t| t.tag == Tag::Md).map(|t| t.lemma.clone()).collect();

    if m > k {
        let verb_follows = tokens[m..end].iter().find(|t| t.tag != Tag::Rb).is_some_and(|t| t.tag.is_verb());
        if verb_follows {
            // inverted: "what do you enjoy", "who have you seen"
            let a = analyse(tokens, m..end);
            let mut parts = modals;
            parts.extend(a.parts);
            if parts.is_empty() {
                return Err(MapError::NoVerb);
            }
            let predicate_start = if j < k { j } else { a.span.start };
            return Ok(wh_object(tokens, ctx, k..m, parts, predicate_start..a.span.end.max(m)));
        }
        let head = analyse(tokens, j..k);
        if head.main.is_some_and(|i| tokens[i].lemma == "be") {
            let be = head.main.expect("checked");
            let mut i = m;
            let mut preps = Vec::new();
            while i < end && is_attachable_prep(&tokens[i]) {
                preps.push(tokens[i].lower());
                i += 1;
            }
            if i == end {
                if preps.is_empty() && modals.is_empty() {
                    if let Some((possessor, rest)) = possessive_split(tokens, k..m, ctx) {
                        // "who is your best friend"
                        let predicate = format!("{}-{}", render(tokens, rest.clone()), tokens[be].lower());
                        return Ok(Mapping {
                            triple: Triple::new(possessor, predicate, PLACEHOLDER),
                            utterance_type: UtteranceType::WhQuestion,
                            subject: Some(k..rest.start),
                            predicate: Some(be..m),
                            object: None,
                        });
                    }
                }
                // "where is selene from"
                let mut parts = modals;
                parts.push("be".into());
                parts.extend(preps);
                return Ok(wh_object(tokens, ctx, k..m, parts, j..end.max(j + 1)));
            }
        }
    } else if k == j {
        // no verb right after the question word: "what you like"
        let mut n = j;
        while n < end && tokens[n].tag.is_nominal() {
            n += 1;
        }
        if n > j && n < end {
            let a = analyse(tokens, n..end);
            if !a.parts.is_empty() {
                return Ok(wh_object(tokens, ctx, j..n, a.parts, a.span));
            }
        }
    }
    // the question word is the subject: "who works at the university"
    let a = analyse(tokens, j..end);
    if a.parts.is_empty() {
        return Err(MapError::NoVerb);
    }
    Ok(Mapping {
        triple: Triple::new(PLACEHOLDER, a.parts.join("-"), slot(tokens, a.object.clone(), ctx)),
        utterance_type: UtteranceType::WhQuestion,
        subject: None,
        predicate: Some(a.span),
        object: non_empty(a.object),
    })
}

fn wh_object(
    tokens: &[TaggedToken],
    ctx: &SpeakerContext,
    subject: Range<usize>,
    parts: Vec<String>,
    predicate: Range<usize>,
) -> Mapping {
    Mapping {
        triple: Triple::new(slot(tokens, subject.clone(), ctx), parts.join("-"), PLACEHOLDER),
        utterance_type: UtteranceType::WhQuestion,
        subject: Some(subject),
        predicate: Some(predicate),
        object: None,
    }
}

/// Predicate reading of a token range.
#[derive(Debug, Clone)]
struct Analysis {
    /// Predicate words: modal lemmas, the main verb lemma, attached
    /// prepositions.
    parts: Vec<String>,
    main: Option<usize>,
    /// Tokens consumed as the predicate.
    span: Range<usize>,
    /// Remaining tokens, read as the object.
    object: Range<usize>,
}

fn next_non_adverb(tokens: &[TaggedToken], from: usize, end: usize) -> Option<&TaggedToken> {
    tokens[from.min(end)..end].iter().find(|t| t.tag != Tag::Rb)
}

fn is_attachable_prep(t: &TaggedToken) -> bool {
    t.tag.is_preposition() && t.lower() != "that"
}

fn analyse(tokens: &[TaggedToken], range: Range<usize>) -> Analysis {
    let end = range.end;
    let mut i = range.start;
    let mut parts = Vec::new();
    let mut main = None;
    let mut first = None;
    let mut last = range.start;
    let mut mark = |idx: usize, first: &mut Option<usize>| {
        first.get_or_insert(idx);
        last = idx + 1;
    };
    while i < end {
        let t = &tokens[i];
        if t.tag == Tag::Rb {
            let continues = tokens.get(i + 1).is_some_and(|n| i + 1 < end && (n.tag.is_verb() || n.tag == Tag::Rb));
            if continues {
                i += 1;
                continue;
            }
            break;
        }
        if t.tag == Tag::Md {
            parts.push(t.lemma.clone());
            mark(i, &mut first);
            i += 1;
            continue;
        }
        if t.tag.is_verb() {
            let supports = AUXILIARIES.contains(&t.lemma.as_str())
                && next_non_adverb(tokens, i + 1, end).is_some_and(|n| n.tag.is_verb() && n.tag != Tag::Md);
            mark(i, &mut first);
            i += 1;
            if !supports {
                parts.push(t.lemma.clone());
                main = Some(i - 1);
                break;
            }
            continue;
        }
        break;
    }
    if main.is_some() || !parts.is_empty() {
        while i < end && tokens[i].tag == Tag::Rb && Lexicon::builtin().is_negation(&tokens[i].surface) {
            i += 1;
        }
        while i < end && is_attachable_prep(&tokens[i]) {
            parts.push(tokens[i].lower());
            mark(i, &mut first);
            i += 1;
        }
    }
    let start = first.unwrap_or(range.start);
    Analysis {
        parts,
        main,
        span: start..last.max(start),
        object: i..end,
    }
}

/// Lowercased words of `range` joined by hyphens.
pub(crate) fn render(tokens: &[TaggedToken], range: Range<usize>) -> String {
    tokens[range].iter().map(TaggedToken::lower).collect::<Vec<_>>().join("-")
}

/// Slot text; a lone first- or second-person pronoun becomes the speaker
/// label it denotes.
pub(crate) fn slot(tokens: &[TaggedToken], range: Range<usize>, ctx: &SpeakerContext) -> String {
    if range.len() == 1 && tokens[range.start].tag == Tag::Prp {
        if let Some(label) = ctx.resolve(&tokens[range.start].surface) {
            return label.to_string();
        }
    }
    render(tokens, range)
}

/// Splits a possessive noun phrase into its possessor and the possessed
/// part: "my best friend" gives (self, "best friend").
fn possessive_split(tokens: &[TaggedToken], np: Range<usize>, ctx: &SpeakerContext) -> Option<(String, Range<usize>)> {
    if np.is_empty() {
        return None;
    }
    let first = &tokens[np.start];
    if first.tag == Tag::PrpPos && first.surface != "'s" {
        let rest = np.start + 1..np.end;
        if rest.is_empty() {
            return None;
        }
        let owner = ctx.resolve(&first.surface).map_or_else(|| first.lower(), str::to_string);
        return Some((owner, rest));
    }
    let p = (np.start + 1..np.end).find(|&i| tokens[i].surface == "'s")?;
    let rest = p + 1..np.end;
    if rest.is_empty() {
        return None;
    }
    Some((slot(tokens, np.start..p, ctx), rest))
}

fn non_empty(r: Range<usize>) -> Option<Range<usize>> {
    (!r.is_empty()).then_some(r)
}

/// Certainty, polarity and sentiment of an utterance from lexical cues.
///
/// Certainty is the lowest value among modal and cognitive cues (1 when
/// there are none). Polarity is -1 when the utterance holds an odd number of
/// negation cues. Sentiment is the strongest sentiment cue, first one on
/// ties; negation does not flip it.
pub fn score_perspective(lex: &Lexicon, tokens: &[TaggedToken]) -> Perspective {
    let certainty = tokens
        .iter()
        .filter_map(|t| lex.modal_certainty(&t.lemma))
        .fold(1.0f64, f64::min);
    let negations = tokens.iter().filter(|t| lex.is_negation(&t.surface)).count();
    let mut sentiment = 0.0f64;
    for t in tokens {
        if let Some(v) = lex.sentiment(&t.lemma) {
            if v.abs() > sentiment.abs() {
                sentiment = v;
            }
        }
    }
    Perspective {
        certainty,
        polarity: if negations % 2 == 1 { -1 } else { 1 },
        sentiment,
    }
}
