use super::{Lexicon, SemanticCategory, Tag, TaggedToken};

impl Lexicon {
    /// Tags a tokenized utterance (punctuation already removed) left to right.
    ///
    /// Known words take their listed readings and a small set of context
    /// rules picks among them; unknown words are guessed from shape and
    /// suffix. Hyphen-joined collocations become a single noun.
    pub fn tag<S: AsRef<str>>(&self, words: &[S]) -> Vec<TaggedToken> {
        let mut out: Vec<TaggedToken> = Vec::with_capacity(words.len());
        for (i, word) in words.iter().enumerate() {
            let word = word.as_ref();
            let prev = out.last();
            let next = words.get(i + 1).map(|w| w.as_ref());
            let (tag, mwe) = self.choose(word, i, prev, next);
            out.push(TaggedToken {
                surface: word.to_string(),
                lemma: self.lemmatize(word, tag),
                tag,
                mwe,
            });
        }
        out
    }

    fn choose(&self, word: &str, index: usize, prev: Option<&TaggedToken>, next: Option<&str>) -> (Tag, bool) {
        let lower = word.to_lowercase();
        if lower.contains('-') && self.pos_tags(&lower).is_none() {
            let parts: Vec<&str> = lower.split('-').filter(|p| !p.is_empty()).collect();
            let mwe = parts.len() > 1 && self.is_collocation(&parts);
            let proper = self.semantic_category(&lower) == Some(SemanticCategory::Location)
                || word.chars().next().is_some_and(char::is_uppercase);
            return (if proper { Tag::Nnp } else { Tag::Nn }, mwe);
        }
        let readings = match self.pos_tags(&lower) {
            Some(tags) => tags.to_vec(),
            None => self.guess(word, index),
        };
        if readings.len() == 1 {
            return (readings[0], false);
        }
        (self.disambiguate(&lower, &readings, prev, next), false)
    }

    /// Candidate readings for a word missing from the lexicon, most likely
    /// first.
    fn guess(&self, word: &str, index: usize) -> Vec<Tag> {
        let lower = word.to_lowercase();
        if lower.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',') {
            return vec![Tag::Cd];
        }
        if let Some(lemma) = self.irregular_verb(&lower) {
            let _ = lemma;
            return vec![irregular_shape(&lower)];
        }
        if self.irregular_noun(&lower).is_some() {
            return vec![Tag::Nns];
        }
        if self.semantic_category(&lower) == Some(SemanticCategory::Location) {
            return vec![Tag::Nnp];
        }
        if index > 0 && word.chars().next().is_some_and(char::is_uppercase) {
            return vec![Tag::Nnp];
        }
        if lower.len() > 4 && lower.ends_with("ing") {
            return vec![Tag::Vbg];
        }
        if lower.len() > 3 && lower.ends_with("ed") {
            return vec![Tag::Vbd, Tag::Vbn];
        }
        if lower.len() > 3 && lower.ends_with("ly") {
            return vec![Tag::Rb];
        }
        if lower.len() > 2 && lower.ends_with('s') && !lower.ends_with("ss") {
            let noun = self.lemmatize(&lower, Tag::Nns);
            let verb = self.lemmatize(&lower, Tag::Vbz);
            return match (self.is_noun(&noun), self.is_base_verb(&verb)) {
                (true, true) => vec![Tag::Nns, Tag::Vbz],
                (false, true) => vec![Tag::Vbz],
                _ => vec![Tag::Nns],
            };
        }
        if word.chars().next().is_some_and(char::is_uppercase) {
            return vec![Tag::Nnp];
        }
        vec![Tag::Nn]
    }

    fn disambiguate(&self, lower: &str, readings: &[Tag], prev: Option<&TaggedToken>, next: Option<&str>) -> Tag {
        let has = |t: Tag| readings.contains(&t);
        let first_of = |pred: fn(Tag) -> bool| readings.iter().copied().find(|t| pred(*t));
        let next_default = next.and_then(|n| self.pos_tags(n)).and_then(|t| t.first().copied());
        let prev_tag = prev.map(|p| p.tag);

        if lower == "that" && has(Tag::In) {
            if prev_tag.is_some_and(Tag::is_verb) {
                return Tag::In;
            }
            return Tag::Dt;
        }
        if lower == "her" && has(Tag::PrpPos) {
            let next_nominal = match next_default {
                Some(t) => t.is_noun() || t.is_adjective(),
                None => next.is_some(),
            };
            return if next_nominal { Tag::PrpPos } else { Tag::Prp };
        }
        match prev_tag {
            Some(Tag::Md) | Some(Tag::To) => {
                if has(Tag::Vb) {
                    return Tag::Vb;
                }
                if let Some(v) = first_of(Tag::is_verb) {
                    return v;
                }
            }
            Some(Tag::Dt) | Some(Tag::PrpPos) | Some(Tag::Cd) | Some(Tag::Jj) | Some(Tag::Jjr)
            | Some(Tag::Jjs) => {
                if let Some(n) = first_of(Tag::is_noun) {
                    return n;
                }
                if let Some(a) = first_of(Tag::is_adjective) {
                    return a;
                }
            }
            Some(Tag::Prp) | Some(Tag::Nn) | Some(Tag::Nns) | Some(Tag::Nnp) | Some(Tag::Nnps)
            | Some(Tag::Wp) | Some(Tag::Wdt) => {
                if let Some(v) = first_of(|t| matches!(t, Tag::Vbz | Tag::Vbp | Tag::Vbd)) {
                    return v;
                }
            }
            Some(t) if t.is_verb() => {
                let after_perfect = prev.is_some_and(|p| matches!(p.lemma.as_str(), "have" | "be"));
                if after_perfect && has(Tag::Vbn) {
                    return Tag::Vbn;
                }
                if let Some(n) = first_of(|t| t.is_noun() || t.is_adjective()) {
                    return n;
                }
            }
            _ => {}
        }
        readings[0]
    }
}

/// Tag of an irregular verb form judged by its ending.
fn irregular_shape(form: &str) -> Tag {
    if form.ends_with("ing") {
        Tag::Vbg
    } else if form.ends_with('s') {
        Tag::Vbz
    } else if form.ends_with('n') || form.ends_with("ne") {
        Tag::Vbn
    } else {
        Tag::Vbd
    }
}
