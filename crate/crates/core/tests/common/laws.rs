//! Input strategies and per-case checks for the randomized laws, shared by
//! the property tests and the acceptance run.

use convtriple::conv::ConvExtractor;
use convtriple::eval::{aggregate, ItemVerdict};
use convtriple::extraction::UtteranceType;
use convtriple::mapper::score_perspective;
use convtriple::pattern::PatternExtractor;
use convtriple::pipeline::{prepare, CfgExtractor, UtteranceExtractor};
use convtriple::preprocess::{expand_contractions, tokenize};
use convtriple::{Dialogue, Lexicon, SpeakerContext, Tag};
use proptest::prelude::*;
use proptest::sample::select;
use proptest::test_runner::TestCaseError;

pub const CASES: u32 = 512;

const NAMES: [&str; 5] = ["john", "selene", "bob", "mary", "the teacher"];
const VERBS_3SG: [&str; 6] = ["likes", "hates", "knows", "loves", "enjoys", "sees"];
const VERBS: [&str; 6] = ["like", "hate", "know", "love", "enjoy", "see"];
const OBJECTS: [&str; 6] = ["cheese", "cats", "amsterdam", "a book", "three white cats", "music"];
const MODALS: [&str; 4] = ["can", "might", "will", "should"];
const ANSWERS: [&str; 5] = ["no, i'm busy", "yes, sure", "nope", "maybe later", "no i sadly do not"];

pub fn wh_question() -> impl Strategy<Value = String> {
    prop_oneof![
        (select(&VERBS_3SG[..]), select(&OBJECTS[..])).prop_map(|(v, o)| format!("who {v} {o}")),
        (select(&VERBS[..]), prop_oneof![Just("you"), Just("I")]).prop_map(|(v, s)| format!("what do {s} {v}")),
        (select(&VERBS[..]), select(&NAMES[..])).prop_map(|(v, s)| format!("what does {s} {v}")),
        (select(&MODALS[..]), select(&VERBS[..])).prop_map(|(m, v)| format!("who {m} {v}")),
        select(&["Mexico", "Paris", "Amsterdam"][..]).prop_map(|l| format!("who is from {l}")),
    ]
}

pub fn statement() -> impl Strategy<Value = String> {
    prop_oneof![
        (select(&NAMES[..]), select(&VERBS_3SG[..]), select(&OBJECTS[..])).prop_map(|(s, v, o)| format!("{s} {v} {o}")),
        (prop_oneof![Just("I"), Just("you"), Just("we")], select(&VERBS[..]), select(&OBJECTS[..]))
            .prop_map(|(s, v, o)| format!("{s} {v} {o}")),
        (select(&NAMES[..]), select(&MODALS[..]), select(&VERBS[..]), select(&OBJECTS[..]))
            .prop_map(|(s, m, v, o)| format!("{s} {m} {v} {o}")),
    ]
}

/// WH-questions map to exactly one `?`; statements to none, also in the
/// pattern baseline.
pub fn check_placeholders((q, s): (String, String)) -> Result<(), TestCaseError> {
    let x = CfgExtractor::new(SpeakerContext::default());
    let e = x.extract("q", &q).map_err(|e| TestCaseError::fail(format!("{q}: {e}")))?;
    prop_assert_eq!(e.utterance_type, UtteranceType::WhQuestion, "{}", q);
    prop_assert_eq!(e.triple.placeholder_count(), 1, "{}: {:?}", q, e.triple);
    let e = x.extract("s", &s).map_err(|e| TestCaseError::fail(format!("{s}: {e}")))?;
    prop_assert_eq!(e.utterance_type, UtteranceType::Statement);
    prop_assert_eq!(e.triple.placeholder_count(), 0);
    if let Ok(p) = PatternExtractor::new(SpeakerContext::default()).extract("s", &s) {
        prop_assert_eq!(p.triple.placeholder_count(), 0);
    }
    Ok(())
}

pub fn negation_case() -> impl Strategy<Value = (String, String, bool)> {
    (
        select(&NAMES[..]),
        prop::option::of(select(&MODALS[..])),
        select(&VERBS[..]),
        select(&OBJECTS[..]),
        any::<bool>(),
    )
        .prop_map(|(s, m, v, o, negated)| {
            let aux = m.unwrap_or("does");
            let neg = if negated { " not" } else { "" };
            (format!("{s} {aux}{neg} {v} {o}"), format!("{s} {aux}{neg} not not {v} {o}"), negated)
        })
}

/// Two extra `not`s before the main verb leave polarity unchanged.
pub fn check_negation_parity((base, doubled, negated): (String, String, bool)) -> Result<(), TestCaseError> {
    let lex = Lexicon::builtin();
    let p1 = score_perspective(lex, &prepare(lex, &base).1);
    let p2 = score_perspective(lex, &prepare(lex, &doubled).1);
    prop_assert_eq!(p1.polarity, p2.polarity, "{} / {}", base, doubled);
    prop_assert_eq!(p1.polarity, if negated { -1 } else { 1 });
    Ok(())
}

fn swap_labels(x: &str, a: &str, b: &str) -> String {
    if x == a {
        b.to_string()
    } else if x == b {
        a.to_string()
    } else {
        x.to_string()
    }
}

pub fn swap_case() -> impl Strategy<Value = (String, String, String, &'static str)> {
    (statement(), select(&VERBS[..]), select(&OBJECTS[..]), select(&ANSWERS[..]))
        .prop_map(|(s, v, o, a)| (s, v.to_string(), o.to_string(), a))
}

/// Swapping who is speaking swaps exactly the substituted labels, both for
/// single turns and for three-turn windows.
pub fn check_speaker_swap((s, v, o, answer): (String, String, String, &'static str)) -> Result<(), TestCaseError> {
    let ctx = SpeakerContext::default();
    let a = CfgExtractor::new(ctx.clone()).extract("s", &s).map_err(|e| TestCaseError::fail(e.to_string()))?.triple;
    let b = CfgExtractor::new(ctx.swapped()).extract("s", &s).map_err(|e| TestCaseError::fail(e.to_string()))?.triple;
    prop_assert_eq!(swap_labels(&a.subject, "lenka", "agent"), b.subject);
    prop_assert_eq!(a.predicate, b.predicate);
    prop_assert_eq!(swap_labels(&a.object, "lenka", "agent"), b.object);

    let d = Dialogue::from_texts("d", &["hello there", &format!("do you {v} {o} ?"), answer]);
    let x = ConvExtractor::new(3);
    let a = x.extract(&d).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let b = x.extract(&d.with_swapped_speakers()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(a.len(), b.len());
    for (ea, eb) in a.iter().zip(&b) {
        prop_assert_eq!(swap_labels(&ea.triple.subject, "speaker1", "speaker2"), eb.triple.subject.clone());
        prop_assert_eq!(&ea.triple.predicate, &eb.triple.predicate);
        prop_assert_eq!(swap_labels(&ea.triple.object, "speaker1", "speaker2"), eb.triple.object.clone());
        prop_assert_eq!(&ea.perspective, &eb.perspective);
    }
    Ok(())
}

pub fn contraction_text() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![
            select(&["I'm", "don't", "can't", "won't", "it's", "you're", "we'll", "they've", "he'd", "isn't", "John's", "y'all", "o'clock"][..])
                .prop_map(str::to_string),
            "[a-zA-Z]{1,8}('[a-z]{1,3})?",
            select(&[",", ".", "?"][..]).prop_map(str::to_string),
        ],
        0..12,
    )
    .prop_map(|w| w.join(" "))
}

pub fn check_contractions_idempotent(text: String) -> Result<(), TestCaseError> {
    let lex = Lexicon::builtin();
    let once = expand_contractions(&tokenize(&text), lex);
    let twice = expand_contractions(&once, lex);
    prop_assert_eq!(once, twice, "{}", text);
    Ok(())
}

pub fn lemma_case() -> impl Strategy<Value = (String, Tag)> {
    (
        prop_oneof![
            "[a-z]{1,12}",
            select(&["went", "children", "flies", "stopped", "running", "was", "has", "does", "mice", "studies", "made", "taken", "bought"][..])
                .prop_map(str::to_string),
        ],
        select(&[Tag::Vb, Tag::Vbd, Tag::Vbg, Tag::Vbn, Tag::Vbp, Tag::Vbz, Tag::Nn, Tag::Nns, Tag::Nnp, Tag::Md, Tag::Jj][..]),
    )
}

pub fn check_lemmatize_idempotent((word, tag): (String, Tag)) -> Result<(), TestCaseError> {
    let lex = Lexicon::builtin();
    let once = lex.lemmatize(&word, tag);
    prop_assert_eq!(lex.lemmatize(&once, tag), once.clone(), "{} {:?}", word, tag);
    Ok(())
}

pub fn verdict() -> impl Strategy<Value = ItemVerdict> {
    (any::<[bool; 3]>(), any::<bool>(), 0..4usize, 0..4usize).prop_map(|([s, p, o], none, c, extra)| {
        let none = none && !(s || p || o);
        ItemVerdict {
            subject: s,
            predicate: p,
            object: o,
            no_triple: none,
            perspective_correct: c,
            perspective_total: c + extra,
        }
    })
}

pub fn shuffled_verdicts() -> impl Strategy<Value = (Vec<ItemVerdict>, Vec<ItemVerdict>)> {
    prop::collection::vec(verdict(), 1..60).prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle()))
}

pub fn check_aggregate_permutation((a, b): (Vec<ItemVerdict>, Vec<ItemVerdict>)) -> Result<(), TestCaseError> {
    prop_assert_eq!(aggregate(&a).unwrap(), aggregate(&b).unwrap());
    Ok(())
}
