use std::io::BufRead;
use std::str::FromStr;

use super::{
    canonical_element, CorpusError, Dialogue, GoldAnnotation, Triple, Turn, EOS, SPEAKER1,
    SPEAKER2,
};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DialogueSuite {
    pub dialogues: Vec<Dialogue>,
}

impl DialogueSuite {
    pub fn serialize(&self) -> String {
        serialize_dialogue_suite(&self.dialogues)
    }
}

impl FromStr for DialogueSuite {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Self {
            dialogues: parse_dialogue_suite(s.as_bytes())?,
        })
    }
}

/// Reads blank-line-separated records: an id line, one text line with the
/// three turns joined by `<eos>`, and one or more CSV triple lines
/// `subject,predicate,object[,label...]`.
pub fn parse_dialogue_suite<R: BufRead>(reader: R) -> Result<Vec<Dialogue>, CorpusError> {
    let mut dialogues = Vec::new();
    let mut block: Vec<(usize, String)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            if !block.is_empty() {
                dialogues.push(parse_record(&block)?);
                block.clear();
            }
        } else {
            block.push((idx + 1, line.trim_end().to_string()));
        }
    }
    if !block.is_empty() {
        dialogues.push(parse_record(&block)?);
    }
    Ok(dialogues)
}

fn parse_record(block: &[(usize, String)]) -> Result<Dialogue, CorpusError> {
    let start = block[0].0;
    if block.len() < 3 {
        return Err(CorpusError::Incomplete {
            line: start,
            reason: "expected an id line, a text line and at least one triple line".into(),
        });
    }
    let id = block[0].1.trim().to_string();
    let (text_line, text) = (&block[1].0, &block[1].1);
    let segments: Vec<&str> = text.split(EOS).collect();
    if segments.len() != 3 {
        return Err(CorpusError::TurnCount {
            id,
            line: *text_line,
            found: segments.len(),
        });
    }
    let mut turns = Vec::with_capacity(3);
    for (index, segment) in segments.iter().enumerate() {
        if segment.trim().is_empty() {
            return Err(CorpusError::EmptyTurn {
                id,
                line: *text_line,
                index,
            });
        }
        turns.push(Turn {
            speaker: if index % 2 == 0 { SPEAKER1 } else { SPEAKER2 }.to_string(),
            text: segment.to_string(),
            index,
        });
    }
    let mut gold = Vec::new();
    for (line, raw) in &block[2..] {
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() < 3 {
            return Err(CorpusError::Malformed {
                line: *line,
                text: raw.clone(),
                reason: "triple line needs subject, predicate and object".into(),
            });
        }
        if fields.iter().any(|f| f.trim().is_empty()) {
            return Err(CorpusError::EmptyField {
                id,
                line: *line,
                text: raw.clone(),
            });
        }
        gold.push(GoldAnnotation {
            triple: Triple::new(
                canonical_element(fields[0]),
                canonical_element(fields[1]),
                canonical_element(fields[2]),
            ),
            perspective: None,
            labels: fields[3..].iter().map(|s| s.to_string()).collect(),
        });
    }
    Ok(Dialogue { id, turns, gold })
}

pub fn serialize_dialogue_suite(dialogues: &[Dialogue]) -> String {
    let records: Vec<String> = dialogues
        .iter()
        .map(|d| {
            let mut lines = vec![d.id.clone()];
            lines.push(
                d.turns
                    .iter()
                    .map(|t| t.text.as_str())
                    .collect::<Vec<_>>()
                    .join(EOS),
            );
            for g in &d.gold {
                let mut fields = vec![
                    g.triple.subject.as_str(),
                    g.triple.predicate.as_str(),
                    g.triple.object.as_str(),
                ];
                fields.extend(g.labels.iter().map(String::as_str));
                lines.push(fields.join(","));
            }
            lines.join("\n") + "\n"
        })
        .collect();
    records.join("\n")
}
