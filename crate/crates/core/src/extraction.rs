//! Extraction results shared by every extractor, and their JSON Lines form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Perspective, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UtteranceType {
    Statement,
    VerbQuestion,
    WhQuestion,
}

/// Byte range of a slot's words in the raw text of one turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotSpan {
    /// Turn index for dialogue input; absent for single utterances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn: Option<usize>,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Source {
    /// Identifier of the input item (turn-suite line or dialogue id).
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<SlotSpan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<SlotSpan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<SlotSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub triple: Triple,
    pub perspective: Perspective,
    pub utterance_type: UtteranceType,
    pub source: Source,
    /// Categorical perspective labels (`negative`, `uncertain`, `positive`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("speaker labels must be non-empty")]
    Empty,
    #[error("speaker labels must differ (both are `{0}`)")]
    Same(String),
}

/// Who first- and second-person pronouns refer to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeakerContext {
    self_label: String,
    addressee_label: String,
}

impl Default for SpeakerContext {
    fn default() -> Self {
        Self {
            self_label: "lenka".into(),
            addressee_label: "agent".into(),
        }
    }
}

impl SpeakerContext {
    pub fn new(self_label: impl Into<String>, addressee_label: impl Into<String>) -> Result<Self, ContextError> {
        let (s, a) = (self_label.into(), addressee_label.into());
        if s.trim().is_empty() || a.trim().is_empty() {
            return Err(ContextError::Empty);
        }
        if s == a {
            return Err(ContextError::Same(s));
        }
        Ok(Self {
            self_label: s,
            addressee_label: a,
        })
    }

    pub fn self_label(&self) -> &str {
        &self.self_label
    }

    pub fn addressee_label(&self) -> &str {
        &self.addressee_label
    }

    pub fn swapped(&self) -> Self {
        Self {
            self_label: self.addressee_label.clone(),
            addressee_label: self.self_label.clone(),
        }
    }

    /// Label for a first- or second-person pronoun (personal or
    /// possessive), if `word` is one.
    pub fn resolve(&self, word: &str) -> Option<&str> {
        match word.to_lowercase().as_str() {
            "i" | "me" | "myself" | "my" | "mine" => Some(&self.self_label),
            "you" | "yourself" | "your" | "yours" => Some(&self.addressee_label),
            _ => None,
        }
    }
}

/// Certainty below this value earns the `uncertain` label.
pub const UNCERTAIN_BELOW: f64 = 0.75;

/// Categorical labels for a numeric perspective: `negative` for polarity -1,
/// `uncertain` for low certainty, and `positive` only when the caller saw an
/// explicit affirmation.
pub fn perspective_labels(p: &Perspective, explicit_yes: bool) -> Vec<String> {
    let mut labels = Vec::new();
    if p.polarity == -1 {
        labels.push("negative".to_string());
    }
    if p.certainty < UNCERTAIN_BELOW {
        labels.push("uncertain".to_string());
    }
    if explicit_yes && p.polarity == 1 {
        labels.push("positive".to_string());
    }
    labels
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// One line of a predictions file: a flat extraction, or a marker that the
/// extractor produced nothing for the item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "is_false")]
    pub no_triple: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certainty: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarity: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment: Option<f64>,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub utterance_type: Option<UtteranceType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Source>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

impl PredictionRecord {
    pub fn from_extraction(id: impl Into<String>, e: &Extraction) -> Self {
        Self {
            id: id.into(),
            no_triple: false,
            subject: Some(e.triple.subject.clone()),
            predicate: Some(e.triple.predicate.clone()),
            object: Some(e.triple.object.clone()),
            certainty: Some(e.perspective.certainty),
            polarity: Some(e.perspective.polarity),
            sentiment: Some(e.perspective.sentiment),
            utterance_type: Some(e.utterance_type),
            source: Some(e.source.clone()),
            labels: e.labels.clone(),
        }
    }

    pub fn no_triple(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            no_triple: true,
            subject: None,
            predicate: None,
            object: None,
            certainty: None,
            polarity: None,
            sentiment: None,
            utterance_type: None,
            source: None,
            labels: Vec::new(),
        }
    }

    /// The predicted triple, unless this is a no-triple record or a slot is
    /// missing.
    pub fn triple(&self) -> Option<Triple> {
        if self.no_triple {
            return None;
        }
        Some(Triple::new(
            self.subject.clone()?,
            self.predicate.clone()?,
            self.object.clone()?,
        ))
    }

    /// Numeric perspective when all three values are present.
    pub fn perspective(&self) -> Option<Perspective> {
        Some(Perspective {
            certainty: self.certainty?,
            polarity: self.polarity?,
            sentiment: self.sentiment?,
        })
    }
}
