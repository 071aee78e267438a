//! Embedded lexicons, the part-of-speech tag set, a deterministic tagger and
//! a rule-based lemmatizer.
//!
//! All resources live as plain-text files under `data/` and are compiled into
//! the binary; [`Lexicon::from_dir`] loads an alternative set with the same
//! file names.

mod lemma;
mod tagger;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Allowed certainty values.
pub const CERTAINTY_SCALE: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

macro_rules! tags {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// Penn-style part-of-speech tags; exactly the terminal alphabet of the
        /// phrase-structure grammar. The possessive pronoun tag is spelled
        /// `PRPPOS`.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum Tag {
            $(#[serde(rename = $name)] $variant,)*
        }

        impl Tag {
            pub const ALL: &'static [Tag] = &[$(Tag::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Tag::$variant => $name,)*
                }
            }
        }

        impl FromStr for Tag {
            type Err = UnknownTag;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(Tag::$variant),)*
                    other => Err(UnknownTag(other.to_string())),
                }
            }
        }
    };
}

tags! {
    Wrb => "WRB", Wp => "WP", Wdt => "WDT",
    Vbd => "VBD", Vbp => "VBP", Vbz => "VBZ", Vbn => "VBN", Vbg => "VBG", Vb => "VB", Md => "MD",
    Dt => "DT", Cd => "CD", PrpPos => "PRPPOS",
    Nn => "NN", Nns => "NNS", Nnp => "NNP", Nnps => "NNPS", Prp => "PRP",
    Jj => "JJ", Jjr => "JJR", Jjs => "JJS",
    Rb => "RB", In => "IN", To => "TO",
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown part-of-speech tag `{0}`")]
pub struct UnknownTag(pub String);

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Tag {
    /// Verbal tags, modals included (the grammar's `V` class).
    pub fn is_verb(self) -> bool {
        matches!(
            self,
            Tag::Vbd | Tag::Vbp | Tag::Vbz | Tag::Vbn | Tag::Vbg | Tag::Vb | Tag::Md
        )
    }

    pub fn is_noun(self) -> bool {
        matches!(self, Tag::Nn | Tag::Nns | Tag::Nnp | Tag::Nnps)
    }

    pub fn is_adjective(self) -> bool {
        matches!(self, Tag::Jj | Tag::Jjr | Tag::Jjs)
    }

    pub fn is_wh(self) -> bool {
        matches!(self, Tag::Wrb | Tag::Wp | Tag::Wdt)
    }

    pub fn is_preposition(self) -> bool {
        matches!(self, Tag::In | Tag::To)
    }

    /// Tags that may occur inside a noun-phrase chunk (determiners,
    /// adjectives, nouns and pronouns).
    pub fn is_nominal(self) -> bool {
        matches!(self, Tag::Dt | Tag::Cd | Tag::PrpPos | Tag::Prp)
            || self.is_noun()
            || self.is_adjective()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemanticCategory {
    Activity,
    Profession,
    Kinship,
    Location,
}

impl FromStr for SemanticCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "activity" => Ok(Self::Activity),
            "profession" => Ok(Self::Profession),
            "kinship" => Ok(Self::Kinship),
            "location" => Ok(Self::Location),
            other => Err(format!("unknown semantic category `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaggedToken {
    pub surface: String,
    pub lemma: String,
    pub tag: Tag,
    /// Set when the token is a merged multiword expression.
    pub mwe: bool,
}

impl TaggedToken {
    pub fn lower(&self) -> String {
        self.surface.to_lowercase()
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{file}:{line}: {reason}")]
    Invalid {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("reading {file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
}

/// Raw text of every lexicon file.
#[derive(Debug, Clone)]
pub struct LexiconSources {
    pub pos: String,
    pub irregular: String,
    pub modals: String,
    pub sentiment: String,
    pub negation: String,
    pub collocations: String,
    pub semantic: String,
    pub predicates: String,
    pub contractions: String,
}

impl LexiconSources {
    pub fn builtin() -> Self {
        Self {
            pos: include_str!("../../data/pos.tsv").into(),
            irregular: include_str!("../../data/irregular.tsv").into(),
            modals: include_str!("../../data/modals.tsv").into(),
            sentiment: include_str!("../../data/sentiment.tsv").into(),
            negation: include_str!("../../data/negation.txt").into(),
            collocations: include_str!("../../data/collocations.txt").into(),
            semantic: include_str!("../../data/semantic.tsv").into(),
            predicates: include_str!("../../data/predicates.txt").into(),
            contractions: include_str!("../../data/contractions.tsv").into(),
        }
    }
}

/// Immutable lexical resources shared by every extractor.
#[derive(Debug, Clone)]
pub struct Lexicon {
    pos: HashMap<String, Vec<Tag>>,
    irregular_verbs: HashMap<String, String>,
    irregular_nouns: HashMap<String, String>,
    modals: HashMap<String, f64>,
    sentiment: HashMap<String, f64>,
    negation: HashSet<String>,
    collocations: HashSet<Vec<String>>,
    collocation_max: usize,
    semantic: HashMap<String, SemanticCategory>,
    predicates: BTreeSet<String>,
    contractions: HashMap<String, String>,
}

impl Lexicon {
    /// The lexicon compiled into the crate.
    pub fn builtin() -> &'static Lexicon {
        static LEXICON: OnceLock<Lexicon> = OnceLock::new();
        LEXICON.get_or_init(|| {
            Lexicon::from_sources(&LexiconSources::builtin())
                .expect("embedded lexicon files are valid")
        })
    }

    /// Loads `pos.tsv`, `irregular.tsv`, `modals.tsv`, `sentiment.tsv`,
    /// `negation.txt`, `collocations.txt`, `semantic.tsv`, `predicates.txt`
    /// and `contractions.tsv` from `dir`.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
        let dir = dir.as_ref();
        let read = |name: &str| {
            std::fs::read_to_string(dir.join(name)).map_err(|source| LexiconError::Io {
                file: name.to_string(),
                source,
            })
        };
        Lexicon::from_sources(&LexiconSources {
            pos: read("pos.tsv")?,
            irregular: read("irregular.tsv")?,
            modals: read("modals.tsv")?,
            sentiment: read("sentiment.tsv")?,
            negation: read("negation.txt")?,
            collocations: read("collocations.txt")?,
            semantic: read("semantic.tsv")?,
            predicates: read("predicates.txt")?,
            contractions: read("contractions.tsv")?,
        })
    }

    pub fn from_sources(src: &LexiconSources) -> Result<Lexicon, LexiconError> {
        let mut pos = HashMap::new();
        for (line, cols) in rows("pos.tsv", &src.pos, 2)? {
            let tags = cols[1]
                .split(',')
                .map(|t| t.trim().parse::<Tag>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| invalid("pos.tsv", line, e.to_string()))?;
            pos.insert(cols[0].to_lowercase(), tags);
        }

        let mut irregular_verbs = HashMap::new();
        let mut irregular_nouns = HashMap::new();
        for (line, cols) in rows("irregular.tsv", &src.irregular, 3)? {
            let table = match cols[2].as_str() {
                "verb" => &mut irregular_verbs,
                "noun" => &mut irregular_nouns,
                other => {
                    return Err(invalid(
                        "irregular.tsv",
                        line,
                        format!("unknown word class `{other}`"),
                    ))
                }
            };
            table.insert(cols[0].to_lowercase(), cols[1].to_lowercase());
        }

        let mut modals = HashMap::new();
        for (line, cols) in rows("modals.tsv", &src.modals, 2)? {
            let value = number("modals.tsv", line, &cols[1])?;
            if !CERTAINTY_SCALE.contains(&value) {
                return Err(invalid(
                    "modals.tsv",
                    line,
                    format!("certainty {value} is not on the scale 0/0.25/0.5/0.75/1"),
                ));
            }
            modals.insert(cols[0].to_lowercase(), value);
        }

        let mut sentiment = HashMap::new();
        for (line, cols) in rows("sentiment.tsv", &src.sentiment, 2)? {
            let value = number("sentiment.tsv", line, &cols[1])?;
            if !(-1.0..=1.0).contains(&value) {
                return Err(invalid(
                    "sentiment.tsv",
                    line,
                    format!("sentiment {value} outside [-1, 1]"),
                ));
            }
            sentiment.insert(cols[0].to_lowercase(), value);
        }

        let negation = words(&src.negation).map(str::to_lowercase).collect();

        let mut collocations = HashSet::new();
        let mut collocation_max = 0;
        for entry in words(&src.collocations) {
            let parts: Vec<String> = entry.split_whitespace().map(str::to_lowercase).collect();
            collocation_max = collocation_max.max(parts.len());
            collocations.insert(parts);
        }

        let mut semantic = HashMap::new();
        for (line, cols) in rows("semantic.tsv", &src.semantic, 2)? {
            let cat = cols[1]
                .parse()
                .map_err(|e: String| invalid("semantic.tsv", line, e))?;
            semantic.insert(cols[0].to_lowercase(), cat);
        }

        let predicates = words(&src.predicates).map(str::to_string).collect();

        let mut contractions = HashMap::new();
        for (_, cols) in rows("contractions.tsv", &src.contractions, 2)? {
            contractions.insert(cols[0].to_lowercase(), cols[1].clone());
        }

        Ok(Lexicon {
            pos,
            irregular_verbs,
            irregular_nouns,
            modals,
            sentiment,
            negation,
            collocations,
            collocation_max,
            semantic,
            predicates,
            contractions,
        })
    }

    pub fn pos_tags(&self, word: &str) -> Option<&[Tag]> {
        self.pos.get(&word.to_lowercase()).map(Vec::as_slice)
    }

    /// True when `word` is listed with a base-form verb reading.
    pub fn is_base_verb(&self, word: &str) -> bool {
        self.pos_tags(word)
            .is_some_and(|tags| tags.iter().any(|t| matches!(t, Tag::Vb | Tag::Vbp)))
    }

    /// True when `word` is listed as a singular common noun.
    pub fn is_noun(&self, word: &str) -> bool {
        self.pos_tags(word)
            .is_some_and(|tags| tags.contains(&Tag::Nn))
    }

    /// Certainty carried by a modal or cognitive cue, if `lemma` is one.
    pub fn modal_certainty(&self, lemma: &str) -> Option<f64> {
        self.modals.get(&lemma.to_lowercase()).copied()
    }

    pub fn sentiment(&self, lemma: &str) -> Option<f64> {
        self.sentiment.get(&lemma.to_lowercase()).copied()
    }

    pub fn is_negation(&self, word: &str) -> bool {
        self.negation.contains(&word.to_lowercase())
    }

    pub fn collocation_max_len(&self) -> usize {
        self.collocation_max
    }

    pub fn is_collocation<S: AsRef<str>>(&self, words: &[S]) -> bool {
        let key: Vec<String> = words.iter().map(|w| w.as_ref().to_lowercase()).collect();
        self.collocations.contains(&key)
    }

    pub fn semantic_category(&self, word: &str) -> Option<SemanticCategory> {
        self.semantic.get(&word.to_lowercase()).copied()
    }

    pub fn predicates(&self) -> &BTreeSet<String> {
        &self.predicates
    }

    /// Membership in the predicate inventory; hyphens and spaces are
    /// interchangeable.
    pub fn is_known_predicate(&self, predicate: &str) -> bool {
        let spaced = predicate.replace(['-', '_'], " ").to_lowercase();
        self.predicates.contains(&spaced)
    }

    pub fn contraction(&self, word: &str) -> Option<&str> {
        self.contractions
            .get(&word.to_lowercase())
            .map(String::as_str)
    }

    fn irregular_verb(&self, word: &str) -> Option<&str> {
        self.irregular_verbs.get(word).map(String::as_str)
    }

    fn irregular_noun(&self, word: &str) -> Option<&str> {
        self.irregular_nouns.get(word).map(String::as_str)
    }
}

/// Non-comment, non-blank lines.
fn words(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn rows(file: &str, text: &str, columns: usize) -> Result<Vec<(usize, Vec<String>)>, LexiconError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<String> = line.split('\t').map(|c| c.trim().to_string()).collect();
        if cols.len() != columns || cols.iter().any(String::is_empty) {
            return Err(invalid(
                file,
                idx + 1,
                format!("expected {columns} tab-separated columns"),
            ));
        }
        out.push((idx + 1, cols));
    }
    Ok(out)
}

fn number(file: &str, line: usize, raw: &str) -> Result<f64, LexiconError> {
    raw.parse()
        .map_err(|_| invalid(file, line, format!("`{raw}` is not a number")))
}

fn invalid(file: &str, line: usize, reason: String) -> LexiconError {
    LexiconError::Invalid {
        file: file.to_string(),
        line,
        reason,
    }
}
