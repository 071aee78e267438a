use std::fmt::Write as _;
use std::io::BufRead;
use std::str::FromStr;

use super::{canonical_element, CorpusError, GoldAnnotation, Perspective, Triple};

/// Perspective block exactly as written in the file. Kept verbatim so that
/// values such as `1.` survive a round trip.
#[derive(Debug, Clone, PartialEq)]
pub struct PerspectiveText {
    pub values: [String; 3],
    /// `true` when the block follows the triple after a single space instead
    /// of a `": "` separator.
    pub inline: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurnItem {
    /// 1-based line number in the source file.
    pub line: usize,
    /// Section set by the nearest preceding `# name` line.
    pub category: Option<String>,
    pub utterance: String,
    pub gold: GoldAnnotation,
    pub perspective_text: Option<PerspectiveText>,
}

impl TurnItem {
    /// Item identifier used to align gold and predictions: `file:line`.
    pub fn id(&self, file_label: &str) -> String {
        format!("{file_label}:{}", self.line)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TurnSuite {
    pub items: Vec<TurnItem>,
}

impl TurnSuite {
    pub fn utterances(&self) -> impl Iterator<Item = (&str, &GoldAnnotation)> {
        self.items.iter().map(|i| (i.utterance.as_str(), &i.gold))
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut current: Option<&str> = None;
        for item in &self.items {
            if let Some(cat) = item.category.as_deref() {
                if current != Some(cat) {
                    let _ = writeln!(out, "# {cat}");
                    current = Some(cat);
                }
            }
            let t = &item.gold.triple;
            let _ = write!(
                out,
                "{}: {} {} {}",
                item.utterance, t.subject, t.predicate, t.object
            );
            if let Some(p) = &item.perspective_text {
                let sep = if p.inline { " " } else { ": " };
                let _ = write!(out, "{sep}{}", p.values.join(" "));
            }
            out.push('\n');
        }
        out
    }
}

impl FromStr for TurnSuite {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_turn_suite(s.as_bytes())
    }
}

/// Reads a turn suite: `<utterance>: <subj> <pred> <obj>[: <c> <p> <s>]`,
/// one record per line. Blank lines are skipped and `# name` lines open a
/// named section.
pub fn parse_turn_suite<R: BufRead>(reader: R) -> Result<TurnSuite, CorpusError> {
    let mut items = Vec::new();
    let mut category = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim_end();
        if text.trim().is_empty() {
            continue;
        }
        if let Some(name) = text.strip_prefix('#') {
            category = Some(name.trim().to_string());
            continue;
        }
        items.push(parse_line(text, lineno, category.clone())?);
    }
    Ok(TurnSuite { items })
}

fn parse_line(text: &str, line: usize, category: Option<String>) -> Result<TurnItem, CorpusError> {
    let malformed = |reason: &str| CorpusError::Malformed {
        line,
        text: text.to_string(),
        reason: reason.to_string(),
    };
    let (utterance, rest) = text
        .split_once(": ")
        .ok_or_else(|| malformed("missing `: ` after the utterance"))?;
    if utterance.trim().is_empty() {
        return Err(malformed("empty utterance"));
    }
    let (triple_part, perspective_part) = match rest.split_once(": ") {
        Some((t, p)) => (t, Some((p, false))),
        None => (rest, None),
    };
    let mut fields: Vec<&str> = triple_part.split(' ').collect();
    let mut perspective_part = perspective_part;
    if perspective_part.is_none() && fields.len() == 6 {
        let tail = fields.split_off(3);
        perspective_part = Some((tail_str(triple_part), true));
        debug_assert_eq!(tail.len(), 3);
    }
    if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
        return Err(malformed("triple must have exactly three space-separated elements"));
    }
    let triple = Triple::new(
        canonical_element(fields[0]),
        canonical_element(fields[1]),
        canonical_element(fields[2]),
    );
    let mut gold = GoldAnnotation::new(triple);
    let mut perspective_text = None;
    if let Some((block, inline)) = perspective_part {
        let values: Vec<&str> = block.split(' ').collect();
        if values.len() != 3 {
            return Err(malformed("perspective block must hold three values"));
        }
        let mut nums = [0.0f64; 3];
        for (slot, raw) in nums.iter_mut().zip(&values) {
            *slot = raw
                .parse::<f64>()
                .map_err(|_| malformed("perspective value is not a number"))?;
        }
        let p = Perspective::from_values(nums[0], nums[1], nums[2])
            .map_err(|source| CorpusError::Range { line, source })?;
        gold.perspective = Some(p);
        perspective_text = Some(PerspectiveText {
            values: [
                values[0].to_string(),
                values[1].to_string(),
                values[2].to_string(),
            ],
            inline,
        });
    }
    Ok(TurnItem {
        line,
        category,
        utterance: utterance.to_string(),
        gold,
        perspective_text,
    })
}

/// The part of a six-field triple block after its third space.
fn tail_str(block: &str) -> &str {
    let mut seen = 0;
    for (i, c) in block.char_indices() {
        if c == ' ' {
            seen += 1;
            if seen == 3 {
                return &block[i + 1..];
            }
        }
    }
    ""
}
