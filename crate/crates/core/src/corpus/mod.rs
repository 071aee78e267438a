//! Data model and readers/writers for the two released test-suite formats.
//!
//! Turn suites hold one utterance per line followed by its gold triple and an
//! optional numeric perspective. Dialogue suites hold three-turn windows whose
//! turns are separated by a literal `<eos>` marker, followed by CSV triple
//! lines with optional categorical perspective labels.

mod dialogues;
mod stats;
mod turns;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dialogues::{parse_dialogue_suite, serialize_dialogue_suite, DialogueSuite};
pub use stats::{corpus_stats, CorpusStats};
pub use turns::{parse_turn_suite, PerspectiveText, TurnItem, TurnSuite};

/// Placeholder used for the question variable of a WH-question.
pub const PLACEHOLDER: &str = "?";

/// Literal turn separator of the dialogue-suite format.
pub const EOS: &str = "<eos>";

/// Canonical separator for multiword triple elements.
pub const SEPARATOR: char = '-';

pub const SPEAKER1: &str = "speaker1";
pub const SPEAKER2: &str = "speaker2";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed record `{text}`: {reason}")]
    Malformed {
        line: usize,
        text: String,
        reason: String,
    },
    #[error("line {line}: {source}")]
    Range {
        line: usize,
        #[source]
        source: PerspectiveError,
    },
    #[error("record `{id}` (line {line}): expected 3 turns separated by <eos>, found {found}")]
    TurnCount { id: String, line: usize, found: usize },
    #[error("record `{id}` (line {line}): turn {index} is empty")]
    EmptyTurn { id: String, line: usize, index: usize },
    #[error("record `{id}` (line {line}): empty triple field in `{text}`")]
    EmptyField { id: String, line: usize, text: String },
    #[error("record starting at line {line} is incomplete: {reason}")]
    Incomplete { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerspectiveError {
    #[error("certainty {0} outside [0, 1]")]
    Certainty(f64),
    #[error("polarity {0} is not one of -1, 0, 1")]
    Polarity(f64),
    #[error("sentiment {0} outside [-1, 1]")]
    Sentiment(f64),
}

/// A subject–predicate–object statement. Either argument may be the
/// [`PLACEHOLDER`] when the triple encodes a question.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl Triple {
    pub fn new(
        subject: impl Into<String>,
        predicate: impl Into<String>,
        object: impl Into<String>,
    ) -> Self {
        Self {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }

    pub fn slots(&self) -> [&str; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Number of slots holding the question placeholder.
    pub fn placeholder_count(&self) -> usize {
        self.slots().iter().filter(|s| **s == PLACEHOLDER).count()
    }
}

/// Replaces underscores with the canonical hyphen separator.
pub fn canonical_element(raw: &str) -> String {
    raw.replace('_', "-")
}

/// Speaker stance on a claim: certainty in `[0, 1]`, polarity in
/// `{-1, 0, 1}` and sentiment in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perspective {
    pub certainty: f64,
    pub polarity: i8,
    pub sentiment: f64,
}

impl Default for Perspective {
    fn default() -> Self {
        Self {
            certainty: 1.0,
            polarity: 1,
            sentiment: 0.0,
        }
    }
}

impl Perspective {
    pub fn new(certainty: f64, polarity: i8, sentiment: f64) -> Result<Self, PerspectiveError> {
        if !(0.0..=1.0).contains(&certainty) {
            return Err(PerspectiveError::Certainty(certainty));
        }
        if !(-1..=1).contains(&polarity) {
            return Err(PerspectiveError::Polarity(polarity as f64));
        }
        if !(-1.0..=1.0).contains(&sentiment) {
            return Err(PerspectiveError::Sentiment(sentiment));
        }
        Ok(Self {
            certainty,
            polarity,
            sentiment,
        })
    }

    /// Builds a perspective from three real values; polarity must be integral.
    pub fn from_values(certainty: f64, polarity: f64, sentiment: f64) -> Result<Self, PerspectiveError> {
        if polarity.fract() != 0.0 || !(-1.0..=1.0).contains(&polarity) {
            return Err(PerspectiveError::Polarity(polarity));
        }
        Self::new(certainty, polarity as i8, sentiment)
    }

    pub fn is_valid(&self) -> bool {
        Self::new(self.certainty, self.polarity, self.sentiment).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: String,
    /// Raw turn text as it appears between `<eos>` markers.
    pub text: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GoldAnnotation {
    pub triple: Triple,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perspective: Option<Perspective>,
    /// Categorical labels such as `negative` or `uncertain`, in file order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

impl GoldAnnotation {
    pub fn new(triple: Triple) -> Self {
        Self {
            triple,
            perspective: None,
            labels: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dialogue {
    pub id: String,
    pub turns: Vec<Turn>,
    pub gold: Vec<GoldAnnotation>,
}

impl Dialogue {
    /// Builds a dialogue whose turns alternate between `speaker1` and
    /// `speaker2`, starting with `speaker1`.
    pub fn from_texts<S: AsRef<str>>(id: impl Into<String>, texts: &[S]) -> Self {
        let turns = texts
            .iter()
            .enumerate()
            .map(|(index, text)| Turn {
                speaker: if index % 2 == 0 { SPEAKER1 } else { SPEAKER2 }.to_string(),
                text: text.as_ref().to_string(),
                index,
            })
            .collect();
        Self {
            id: id.into(),
            turns,
            gold: Vec::new(),
        }
    }

    /// Speaker of any turn whose label differs from that of turn `index`.
    pub fn other_speaker(&self, index: usize) -> Option<&str> {
        let own = &self.turns.get(index)?.speaker;
        self.turns
            .iter()
            .map(|t| t.speaker.as_str())
            .find(|s| *s != own)
    }

    pub fn speakers_alternate(&self) -> bool {
        self.turns.windows(2).all(|w| w[0].speaker != w[1].speaker)
    }

    /// Same dialogue with the two speaker labels exchanged everywhere.
    pub fn with_swapped_speakers(&self) -> Self {
        let swap = |s: &str| match s {
            SPEAKER1 => SPEAKER2.to_string(),
            SPEAKER2 => SPEAKER1.to_string(),
            other => other.to_string(),
        };
        let mut out = self.clone();
        for turn in &mut out.turns {
            turn.speaker = swap(&turn.speaker);
        }
        for gold in &mut out.gold {
            gold.triple.subject = swap(&gold.triple.subject);
            gold.triple.object = swap(&gold.triple.object);
        }
        out
    }
}

/// Trims the trailing whitespace of every line; used for "modulo trailing
/// whitespace" comparisons of serialized suites.
pub fn trim_line_ends(text: &str) -> String {
    let mut out: String = text
        .lines()
        .map(str::trim_end)
        .collect::<Vec<_>>()
        .join("\n");
    while out.ends_with('\n') {
        out.pop();
    }
    out
}
