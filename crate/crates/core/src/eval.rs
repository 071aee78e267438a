//! Precision scoring against gold annotations and inter-annotator agreement.
//!
//! Every item has exactly one gold triple. A slot is correct when its
//! normalized string equals the gold one under a [`MatchPolicy`]; a triple is
//! correct when all three slots are. Items without a prediction count as
//! wrong and stay in every denominator.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{GoldAnnotation, Perspective, Triple, PLACEHOLDER};
use crate::extraction::{Extraction, PredictionRecord};
use crate::lexres::{Lexicon, Tag};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("nothing to score")]
    Empty,
    #[error("gold and predictions do not align; missing ids: [{}], unknown ids: [{}]", missing.join(", "), unknown.join(", "))]
    Misaligned { missing: Vec<String>, unknown: Vec<String> },
    #[error("agreement needs at least 2 annotators, got {0}")]
    TooFewAnnotators(usize),
    #[error("annotator `{annotator}` covers a different set of items")]
    IdMismatch { annotator: String },
}

/// How predicted and gold strings are compared. Every step is applied to
/// both sides, so matching is symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchPolicy {
    pub case_fold: bool,
    /// Treat `-`, `_` and whitespace as the same separator.
    pub separator_fold: bool,
    /// Lemmatize each word of a predicate.
    pub lemma_fold: bool,
}

impl Default for MatchPolicy {
    fn default() -> Self {
        Self {
            case_fold: true,
            separator_fold: true,
            lemma_fold: true,
        }
    }
}

impl MatchPolicy {
    pub const EXACT: MatchPolicy = MatchPolicy {
        case_fold: false,
        separator_fold: false,
        lemma_fold: false,
    };

    /// Comparison key of one triple element.
    pub fn normalize(&self, element: &str, predicate: bool) -> String {
        let trimmed = element.trim();
        if trimmed == PLACEHOLDER {
            return PLACEHOLDER.to_string();
        }
        let mut s = if self.case_fold { trimmed.to_lowercase() } else { trimmed.to_string() };
        if self.separator_fold {
            s = s
                .split(|c: char| c == '-' || c == '_' || c.is_whitespace())
                .filter(|w| !w.is_empty())
                .collect::<Vec<_>>()
                .join("-");
        }
        if predicate && self.lemma_fold {
            let lex = Lexicon::builtin();
            let sep = if self.separator_fold { '-' } else { ' ' };
            s = s
                .split(sep)
                .map(|w| lex.lemmatize(w, Tag::Vbz))
                .collect::<Vec<_>>()
                .join(&sep.to_string());
        }
        s
    }

    pub fn matches(&self, a: &str, b: &str, predicate: bool) -> bool {
        self.normalize(a, predicate) == self.normalize(b, predicate)
    }
}

/// Verdicts for one scored item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ItemVerdict {
    pub subject: bool,
    pub predicate: bool,
    pub object: bool,
    pub no_triple: bool,
    /// Correct perspective attributes of this item.
    pub perspective_correct: usize,
    /// Perspective attributes annotated in the gold.
    pub perspective_total: usize,
}

impl ItemVerdict {
    pub fn triple(&self) -> bool {
        self.subject && self.predicate && self.object
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Numeric gold perspectives contribute three attributes compared after
/// rounding to two decimals; each categorical gold label is one attribute.
fn perspective_score(gold: &GoldAnnotation, pred: Option<&Extraction>) -> (usize, usize) {
    let mut total = 0;
    let mut correct = 0;
    if let Some(g) = gold.perspective {
        total += 3;
        if let Some(p) = pred.map(|e| e.perspective) {
            correct += usize::from(round2(g.certainty) == round2(p.certainty));
            correct += usize::from(g.polarity == p.polarity);
            correct += usize::from(round2(g.sentiment) == round2(p.sentiment));
        }
    }
    for label in &gold.labels {
        total += 1;
        if pred.is_some_and(|e| e.labels.iter().any(|l| l.eq_ignore_ascii_case(label))) {
            correct += 1;
        }
    }
    (correct, total)
}

pub fn score_item(gold: &GoldAnnotation, pred: Option<&Extraction>, policy: &MatchPolicy) -> ItemVerdict {
    let (perspective_correct, perspective_total) = perspective_score(gold, pred);
    let Some(e) = pred else {
        return ItemVerdict {
            no_triple: true,
            perspective_correct,
            perspective_total,
            ..ItemVerdict::default()
        };
    };
    let (g, p) = (&gold.triple, &e.triple);
    ItemVerdict {
        subject: policy.matches(&g.subject, &p.subject, false),
        predicate: policy.matches(&g.predicate, &p.predicate, true),
        object: policy.matches(&g.object, &p.object, false),
        no_triple: false,
        perspective_correct,
        perspective_total,
    }
}

/// One row of a results table. Precisions are percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub items: usize,
    pub no_triples: usize,
    pub precision_triples: f64,
    pub precision_elements: f64,
    pub precision_subjects: f64,
    pub precision_objects: f64,
    pub precision_predicates: f64,
    /// Absent when the gold annotates no perspective attribute.
    pub precision_perspective: Option<f64>,
}

pub fn aggregate(verdicts: &[ItemVerdict]) -> Result<EvalReport, EvalError> {
    if verdicts.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = verdicts.len() as f64;
    let pct = |f: fn(&ItemVerdict) -> bool| 100.0 * verdicts.iter().filter(|v| f(v)).count() as f64 / n;
    let subjects = pct(|v| v.subject);
    let predicates = pct(|v| v.predicate);
    let objects = pct(|v| v.object);
    let p_total: usize = verdicts.iter().map(|v| v.perspective_total).sum();
    let p_correct: usize = verdicts.iter().map(|v| v.perspective_correct).sum();
    Ok(EvalReport {
        items: verdicts.len(),
        no_triples: verdicts.iter().filter(|v| v.no_triple).count(),
        precision_triples: pct(ItemVerdict::triple),
        precision_elements: (subjects + predicates + objects) / 3.0,
        precision_subjects: subjects,
        precision_objects: objects,
        precision_predicates: predicates,
        precision_perspective: (p_total > 0).then(|| 100.0 * p_correct as f64 / p_total as f64),
    })
}

/// Reports per category plus an `all` row, in category order.
pub fn aggregate_by_category(verdicts: &[(String, ItemVerdict)]) -> Result<Vec<(String, EvalReport)>, EvalError> {
    let mut groups: BTreeMap<&str, Vec<ItemVerdict>> = BTreeMap::new();
    for (cat, v) in verdicts {
        groups.entry(cat.as_str()).or_default().push(*v);
    }
    let mut rows = Vec::new();
    for (cat, vs) in groups {
        rows.push((cat.to_string(), aggregate(&vs)?));
    }
    let all: Vec<ItemVerdict> = verdicts.iter().map(|(_, v)| *v).collect();
    rows.push(("all".to_string(), aggregate(&all)?));
    Ok(rows)
}

/// Plain-text table with one row per report.
pub fn render_table(rows: &[(String, EvalReport)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<24} {:>6} {:>10} {:>8} {:>9} {:>9} {:>8} {:>11} {:>12}",
        "test", "items", "no-triples", "triples", "elements", "subjects", "objects", "predicates", "perspective"
    );
    for (name, r) in rows {
        let persp = r.precision_perspective.map_or("-".to_string(), |p| format!("{p:.2}"));
        let _ = writeln!(
            out,
            "{:<24} {:>6} {:>10} {:>8.2} {:>9.2} {:>9.2} {:>8.2} {:>11.2} {:>12}",
            name,
            r.items,
            r.no_triples,
            r.precision_triples,
            r.precision_elements,
            r.precision_subjects,
            r.precision_objects,
            r.precision_predicates,
            persp
        );
    }
    out
}

/// Gold item to score: id, category and annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldItem {
    pub id: String,
    pub category: String,
    pub gold: GoldAnnotation,
}

fn record_to_extraction(r: &PredictionRecord) -> Option<Extraction> {
    Some(Extraction {
        triple: r.triple()?,
        perspective: r.perspective().unwrap_or_else(|| Perspective {
            certainty: f64::NAN,
            polarity: 0,
            sentiment: f64::NAN,
        }),
        utterance_type: r.utterance_type.unwrap_or(crate::extraction::UtteranceType::Statement),
        source: r.source.clone().unwrap_or_default(),
        labels: r.labels.clone(),
    })
}

/// Aligns predictions with gold by id and scores each item. When an id has
/// several predictions the first one is scored.
pub fn score_records(
    gold: &[GoldItem],
    predictions: &[PredictionRecord],
    policy: &MatchPolicy,
) -> Result<Vec<(String, ItemVerdict)>, EvalError> {
    let mut by_id: HashMap<&str, &PredictionRecord> = HashMap::new();
    for p in predictions {
        by_id.entry(p.id.as_str()).or_insert(p);
    }
    let gold_ids: BTreeSet<&str> = gold.iter().map(|g| g.id.as_str()).collect();
    let missing: Vec<String> = gold
        .iter()
        .filter(|g| !by_id.contains_key(g.id.as_str()))
        .map(|g| g.id.clone())
        .collect();
    let unknown: BTreeSet<String> = predictions
        .iter()
        .filter(|p| !gold_ids.contains(p.id.as_str()))
        .map(|p| p.id.clone())
        .collect();
    if !missing.is_empty() || !unknown.is_empty() {
        return Err(EvalError::Misaligned {
            missing,
            unknown: unknown.into_iter().collect(),
        });
    }
    Ok(gold
        .iter()
        .map(|g| {
            let pred = record_to_extraction(by_id[g.id.as_str()]);
            (g.category.clone(), score_item(&g.gold, pred.as_ref(), policy))
        })
        .collect())
}

/// Granularity at which agreement is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IaaLevel {
    Subject,
    Predicate,
    Object,
    Triple,
}

impl IaaLevel {
    pub const ALL: [IaaLevel; 4] = [IaaLevel::Subject, IaaLevel::Predicate, IaaLevel::Object, IaaLevel::Triple];

    pub fn name(self) -> &'static str {
        match self {
            IaaLevel::Subject => "Subjects",
            IaaLevel::Predicate => "Predicates",
            IaaLevel::Object => "Objects",
            IaaLevel::Triple => "Triples",
        }
    }

    /// Set of elements an annotator produced for one item at this level,
    /// normalized with case and separator folding.
    pub fn project(self, triples: &[Triple]) -> BTreeSet<String> {
        let policy = MatchPolicy {
            lemma_fold: false,
            ..MatchPolicy::default()
        };
        triples
            .iter()
            .map(|t| {
                let s = || policy.normalize(&t.subject, false);
                let p = || policy.normalize(&t.predicate, true);
                let o = || policy.normalize(&t.object, false);
                match self {
                    IaaLevel::Subject => s(),
                    IaaLevel::Predicate => p(),
                    IaaLevel::Object => o(),
                    IaaLevel::Triple => format!("{}|{}|{}", s(), p(), o()),
                }
            })
            .collect()
    }
}

/// One annotator's triples, keyed by item id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Annotations {
    pub annotator: String,
    pub items: BTreeMap<String, Vec<Triple>>,
}

/// |A ∩ B| / |A ∪ B|, with two empty sets agreeing fully.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// 2|A ∩ B| / (|A| + |B|), with two empty sets agreeing fully.
pub fn pairwise_f<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    2.0 * a.intersection(b).count() as f64 / total as f64
}

fn mean_over_pairs(
    annotations: &[Annotations],
    level: IaaLevel,
    metric: fn(&BTreeSet<String>, &BTreeSet<String>) -> f64,
) -> Result<f64, EvalError> {
    if annotations.len() < 2 {
        return Err(EvalError::TooFewAnnotators(annotations.len()));
    }
    let ids: Vec<&String> = annotations[0].items.keys().collect();
    for a in &annotations[1..] {
        if !a.items.keys().eq(ids.iter().copied()) {
            return Err(EvalError::IdMismatch {
                annotator: a.annotator.clone(),
            });
        }
    }
    if ids.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for id in ids {
        let sets: Vec<BTreeSet<String>> = annotations.iter().map(|a| level.project(&a.items[id])).collect();
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                sum += metric(&sets[i], &sets[j]);
                n += 1;
            }
        }
    }
    Ok(sum / n as f64)
}

/// Mean Jaccard index over annotator pairs and items.
pub fn iaa_jaccard(annotations: &[Annotations], level: IaaLevel) -> Result<f64, EvalError> {
    mean_over_pairs(annotations, level, jaccard)
}

/// Mean pairwise F-measure over annotator pairs and items.
pub fn iaa_pairwise_f(annotations: &[Annotations], level: IaaLevel) -> Result<f64, EvalError> {
    mean_over_pairs(annotations, level, pairwise_f)
}
