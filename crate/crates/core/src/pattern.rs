//! Baseline extractor: four tag-sequence templates tried in a fixed order,
//! first match wins.
//!
//! | rule          | template                              | triple                    |
//! |---------------|---------------------------------------|---------------------------|
//! | `svo-active`  | NP V NP                               | (np1, lemma, np2)         |
//! | `s-cop-adj`   | NP be RB* JJ+                         | (np, be, adjectives)      |
//! | `s-v-prepobj` | NP V IN NP                            | (np1, lemma-prep, np2)    |
//! | `svo-passive` | NP be VBN [by NP \| IN NP]            | (agent, lemma, np1) / ... |
//!
//! Modals and auxiliaries are skipped, no perspective is scored and
//! questions get no special treatment.

use std::ops::Range;

use crate::corpus::{Perspective, Triple};
use crate::extraction::{Extraction, SpeakerContext, UtteranceType};
use crate::lexres::{Lexicon, Tag, TaggedToken};
use crate::mapper::{slot, Mapping};
use crate::pipeline::{prepare, source_of, ExtractError, UtteranceExtractor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternRule {
    SvoActive,
    SCopAdj,
    SVPrepObj,
    SvoPassive,
}

impl PatternRule {
    /// Rules in the order they are tried.
    pub const ORDER: [PatternRule; 4] = [
        PatternRule::SvoActive,
        PatternRule::SCopAdj,
        PatternRule::SVPrepObj,
        PatternRule::SvoPassive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PatternRule::SvoActive => "svo-active",
            PatternRule::SCopAdj => "s-cop-adj",
            PatternRule::SVPrepObj => "s-v-prepobj",
            PatternRule::SvoPassive => "svo-passive",
        }
    }
}

/// Subject chunk and verb group shared by all templates.
struct Clause {
    subject: Range<usize>,
    /// Index of the main verb.
    main: usize,
    passive: bool,
}

fn nominal_run(tokens: &[TaggedToken], from: usize) -> Range<usize> {
    let mut end = from;
    while end < tokens.len() && tokens[end].tag.is_nominal() {
        end += 1;
    }
    from..end
}

fn clause(tokens: &[TaggedToken]) -> Option<Clause> {
    let start = tokens.iter().position(|t| t.tag.is_nominal() || t.tag.is_verb())?;
    let subject = nominal_run(tokens, start);
    if subject.is_empty() {
        return None;
    }
    let mut i = subject.end;
    let mut saw_be = false;
    let (main, passive) = loop {
        let t = tokens.get(i)?;
        if t.tag == Tag::Rb || t.tag == Tag::Md {
            i += 1;
            continue;
        }
        if !t.tag.is_verb() {
            return None;
        }
        let next_verb = tokens[i + 1..]
            .iter()
            .find(|n| n.tag != Tag::Rb)
            .is_some_and(|n| n.tag.is_verb() && n.tag != Tag::Md);
        if matches!(t.lemma.as_str(), "be" | "have" | "do") && next_verb {
            saw_be |= t.lemma == "be";
            i += 1;
            continue;
        }
        break (i, saw_be && t.tag == Tag::Vbn);
    };
    Some(Clause { subject, main, passive })
}

fn try_rule(rule: PatternRule, tokens: &[TaggedToken], c: &Clause, ctx: &SpeakerContext) -> Option<Mapping> {
    let main = &tokens[c.main];
    let after = c.main + 1;
    let subject = || slot(tokens, c.subject.clone(), ctx);
    let mapping = |s: String, p: String, o: Range<usize>, subject: Range<usize>| Mapping {
        triple: Triple::new(s, p, slot(tokens, o.clone(), ctx)),
        utterance_type: UtteranceType::Statement,
        subject: Some(subject),
        predicate: Some(c.main..c.main + 1),
        object: (!o.is_empty()).then_some(o),
    };
    match rule {
        PatternRule::SvoActive => {
            if c.passive || main.lemma == "be" {
                return None;
            }
            let obj = nominal_run(tokens, after);
            (!obj.is_empty()).then(|| mapping(subject(), main.lemma.clone(), obj, c.subject.clone()))
        }
        PatternRule::SCopAdj => {
            if main.lemma != "be" {
                return None;
            }
            let mut i = after;
            while i < tokens.len() && tokens[i].tag == Tag::Rb {
                i += 1;
            }
            let mut end = i;
            while end < tokens.len() && tokens[end].tag.is_adjective() {
                end += 1;
            }
            (end > i).then(|| mapping(subject(), "be".into(), i..end, c.subject.clone()))
        }
        PatternRule::SVPrepObj => {
            if c.passive {
                return None;
            }
            let prep = tokens.get(after).filter(|t| t.tag.is_preposition())?;
            let obj = nominal_run(tokens, after + 1);
            (!obj.is_empty()).then(|| {
                mapping(subject(), format!("{}-{}", main.lemma, prep.lower()), obj, c.subject.clone())
            })
        }
        PatternRule::SvoPassive => {
            if !c.passive {
                return None;
            }
            let prep = tokens.get(after).filter(|t| t.tag.is_preposition());
            let obj = prep.map_or(after..after, |_| nominal_run(tokens, after + 1));
            match prep {
                Some(p) if p.lower() == "by" && !obj.is_empty() => {
                    // the by-phrase is the logical subject
                    let agent = slot(tokens, obj.clone(), ctx);
                    Some(mapping(agent, main.lemma.clone(), c.subject.clone(), obj))
                }
                Some(p) if !obj.is_empty() => Some(mapping(
                    subject(),
                    format!("be-{}-{}", main.lemma, p.lower()),
                    obj,
                    c.subject.clone(),
                )),
                _ => Some(mapping(subject(), format!("be-{}", main.lemma), after..after, c.subject.clone())),
            }
        }
    }
}

/// The first matching rule and its mapping, if any.
pub fn match_patterns(tokens: &[TaggedToken], ctx: &SpeakerContext) -> Option<(PatternRule, Mapping)> {
    let c = clause(tokens)?;
    PatternRule::ORDER
        .iter()
        .find_map(|&rule| try_rule(rule, tokens, &c, ctx).map(|m| (rule, m)))
}

/// Zero or one extraction with the default perspective.
pub fn extract_patterns(tokens: &[TaggedToken], ctx: &SpeakerContext) -> Vec<Extraction> {
    match_patterns(tokens, ctx)
        .map(|(_, m)| Extraction {
            triple: m.triple,
            perspective: Perspective::default(),
            utterance_type: m.utterance_type,
            source: Default::default(),
            labels: Vec::new(),
        })
        .into_iter()
        .collect()
}

#[derive(Debug, Clone)]
pub struct PatternExtractor<'a> {
    lex: &'a Lexicon,
    ctx: SpeakerContext,
}

impl PatternExtractor<'static> {
    pub fn new(ctx: SpeakerContext) -> Self {
        Self { lex: Lexicon::builtin(), ctx }
    }
}

impl<'a> PatternExtractor<'a> {
    pub fn with_lexicon(lex: &'a Lexicon, ctx: SpeakerContext) -> Self {
        Self { lex, ctx }
    }
}

impl UtteranceExtractor for PatternExtractor<'_> {
    fn extract(&self, id: &str, text: &str) -> Result<Extraction, ExtractError> {
        let (norm, tokens) = prepare(self.lex, text);
        if tokens.is_empty() {
            return Err(ExtractError::Empty);
        }
        let (_, m) = match_patterns(&tokens, &self.ctx).ok_or(ExtractError::NoMatch)?;
        Ok(Extraction {
            source: source_of(id, &norm, &m),
            triple: m.triple,
            perspective: Perspective::default(),
            utterance_type: UtteranceType::Statement,
            labels: Vec::new(),
        })
    }
}
