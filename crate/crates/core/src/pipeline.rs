//! End-to-end single-utterance extraction: normalize, tag, parse, map and
//! score the perspective.

use std::ops::Range;

use thiserror::Error;

use crate::extraction::{Extraction, SlotSpan, Source, SpeakerContext};
use crate::grammar::{parse, Grammar, ParseError, Tree};
use crate::lexres::{Lexicon, TaggedToken};
use crate::mapper::{map_tree, score_perspective, MapError, Mapping};
use crate::preprocess::{normalize, NormalizedUtterance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("utterance has no words")]
    Empty,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("the grammar does not cover this utterance")]
    NoParse,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("no extraction pattern matched")]
    NoMatch,
}

/// Anything that maps one utterance to one extraction.
pub trait UtteranceExtractor: Send + Sync {
    fn extract(&self, id: &str, text: &str) -> Result<Extraction, ExtractError>;
}

/// Intermediate results of one pipeline run.
#[derive(Debug, Clone)]
pub struct Trace {
    pub normalized: NormalizedUtterance,
    pub tokens: Vec<TaggedToken>,
    pub tree: Option<Tree>,
    pub result: Result<Extraction, ExtractError>,
}

/// Normalized, punctuation-free and tagged form of an utterance.
pub fn prepare(lex: &Lexicon, text: &str) -> (NormalizedUtterance, Vec<TaggedToken>) {
    let normalized = normalize(text, lex).without_punct();
    let tokens = lex.tag(&normalized.words());
    (normalized, tokens)
}

/// Converts a token range into the byte span it covers in the raw text.
pub fn byte_span(norm: &NormalizedUtterance, range: &Range<usize>, turn: Option<usize>) -> Option<SlotSpan> {
    if range.is_empty() {
        return None;
    }
    let first = norm.tokens.get(range.start)?;
    let last = norm.tokens.get(range.end - 1)?;
    Some(SlotSpan {
        turn,
        start: first.start,
        end: last.end,
    })
}

pub(crate) fn source_of(id: &str, norm: &NormalizedUtterance, m: &Mapping) -> Source {
    let span = |r: &Option<Range<usize>>| r.as_ref().and_then(|r| byte_span(norm, r, None));
    Source {
        id: id.to_string(),
        subject: span(&m.subject),
        predicate: span(&m.predicate),
        object: span(&m.object),
    }
}

/// Grammar-based extractor.
#[derive(Debug, Clone)]
pub struct CfgExtractor<'a> {
    lex: &'a Lexicon,
    grammar: &'a Grammar,
    ctx: SpeakerContext,
}

impl CfgExtractor<'static> {
    pub fn new(ctx: SpeakerContext) -> Self {
        Self::with_resources(Lexicon::builtin(), Grammar::builtin(), ctx)
    }
}

impl<'a> CfgExtractor<'a> {
    pub fn with_resources(lex: &'a Lexicon, grammar: &'a Grammar, ctx: SpeakerContext) -> Self {
        Self { lex, grammar, ctx }
    }

    pub fn trace(&self, id: &str, text: &str) -> Trace {
        let (normalized, tokens) = prepare(self.lex, text);
        let mut tree = None;
        let result = (|| {
            if tokens.is_empty() {
                return Err(ExtractError::Empty);
            }
            let tags: Vec<_> = tokens.iter().map(|t| t.tag).collect();
            let forest = parse(self.grammar, &tags)?;
            tree = Some(forest.best().ok_or(ExtractError::NoParse)?);
            let mapping = map_tree(tree.as_ref().expect("just set"), &tokens, &self.ctx)?;
            let perspective = score_perspective(self.lex, &tokens);
            Ok(Extraction {
                source: source_of(id, &normalized, &mapping),
                labels: crate::extraction::perspective_labels(&perspective, false),
                triple: mapping.triple,
                perspective,
                utterance_type: mapping.utterance_type,
            })
        })();
        Trace {
            normalized,
            tokens,
            tree,
            result,
        }
    }
}

impl UtteranceExtractor for CfgExtractor<'_> {
    fn extract(&self, id: &str, text: &str) -> Result<Extraction, ExtractError> {
        self.trace(id, text).result
    }
}
