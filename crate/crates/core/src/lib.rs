//! Subject–predicate–object triple and speaker-perspective extraction for
//! social dialogue.
//!
//! The crate covers two granularities:
//!
//! * single turns, handled by a rule-based pipeline (contraction expansion,
//!   lexicon tagging, chart parsing over a small phrase-structure grammar and
//!   tree-to-triple mapping) or by a tag-pattern baseline;
//! * three-turn windows (`speaker1`, `speaker2`, `speaker1`), handled by a
//!   candidate generator with a pluggable ranker.
//!
//! A chat-completion client and an evaluation harness (per-slot precision and
//! inter-annotator agreement) complete the toolkit.

pub mod conv;
pub mod corpus;
pub mod eval;
pub mod extraction;
pub mod grammar;
pub mod lexres;
pub mod llm;
pub mod mapper;
pub mod parallel;
pub mod pattern;
pub mod pipeline;
pub mod preprocess;

pub use corpus::{Dialogue, GoldAnnotation, Perspective, Triple, Turn};
pub use extraction::{Extraction, SpeakerContext, UtteranceType};
pub use lexres::{Lexicon, Tag, TaggedToken};
