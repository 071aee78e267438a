use super::{Lexicon, Tag};

/// Upper bound on rule applications; every rule shortens the word or maps an
/// irregular form to its lemma, so real chains stop after two or three steps.
const MAX_STEPS: usize = 16;

impl Lexicon {
    /// Lemma of `word` read as `tag`. Verbs and plural nouns are reduced by
    /// the irregular table and suffix rules; every other tag only lowercases.
    /// Rules are applied until nothing changes, so the result is stable under
    /// a second application.
    pub fn lemmatize(&self, word: &str, tag: Tag) -> String {
        let mut current = word.to_lowercase();
        let step: fn(&Lexicon, &str) -> Option<String> = if tag.is_verb() {
            Lexicon::verb_step
        } else if matches!(tag, Tag::Nns | Tag::Nnps) {
            Lexicon::noun_step
        } else {
            return current;
        };
        for _ in 0..MAX_STEPS {
            match step(self, &current) {
                Some(next) if next != current && !next.is_empty() => current = next,
                _ => break,
            }
        }
        current
    }

    fn verb_step(&self, w: &str) -> Option<String> {
        if let Some(lemma) = self.irregular_verb(w) {
            return Some(lemma.to_string());
        }
        if self.is_base_verb(w) || self.modal_only(w) {
            return None;
        }
        if let Some(stem) = w.strip_suffix("ing").filter(|s| s.len() >= 2) {
            return Some(self.restore_stem(stem));
        }
        if let Some(stem) = w.strip_suffix("ed").filter(|s| s.len() >= 2) {
            if let Some(y) = stem.strip_suffix('i') {
                return Some(format!("{y}y"));
            }
            return Some(self.restore_stem(stem));
        }
        if let Some(stem) = w.strip_suffix("ies").filter(|s| s.len() >= 2) {
            return Some(format!("{stem}y"));
        }
        strip_plural_s(w, |s| self.is_base_verb(s))
    }

    fn noun_step(&self, w: &str) -> Option<String> {
        if let Some(lemma) = self.irregular_noun(w) {
            return Some(lemma.to_string());
        }
        if self.is_noun(w) {
            return None;
        }
        if let Some(stem) = w.strip_suffix("ies").filter(|s| s.len() >= 2) {
            return Some(format!("{stem}y"));
        }
        strip_plural_s(w, |s| self.is_noun(s))
    }

    fn modal_only(&self, w: &str) -> bool {
        self.pos_tags(w).is_some_and(|t| t.contains(&Tag::Md))
    }

    /// Chooses among `stem`, `stem + e` and the undoubled stem after an
    /// `-ing`/`-ed` suffix was removed.
    fn restore_stem(&self, stem: &str) -> String {
        let with_e = format!("{stem}e");
        let undoubled = undouble(stem);
        if self.is_base_verb(stem) {
            return stem.to_string();
        }
        if self.is_base_verb(&with_e) {
            return with_e;
        }
        if let Some(u) = &undoubled {
            if self.is_base_verb(u) {
                return u.clone();
            }
        }
        undoubled.unwrap_or_else(|| stem.to_string())
    }
}

/// `running` -> `run`: drops one of two identical final consonants (not `l`,
/// `s` or `z`, which double in base forms like `call`, `miss`, `buzz`).
fn undouble(stem: &str) -> Option<String> {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 3 && b[n - 1] == b[n - 2] && !b"aeiouylsz".contains(&b[n - 1]) {
        Some(stem[..n - 1].to_string())
    } else {
        None
    }
}

fn strip_plural_s(w: &str, known: impl Fn(&str) -> bool) -> Option<String> {
    if w.len() <= 2 || !w.ends_with('s') || w.ends_with("ss") || w.ends_with("us") || w.ends_with("is")
    {
        return None;
    }
    if let Some(stem) = w.strip_suffix("es") {
        let sibilant = ["s", "x", "z", "ch", "sh"].iter().any(|e| stem.ends_with(e));
        if sibilant && !known(&w[..w.len() - 1]) {
            return Some(stem.to_string());
        }
    }
    Some(w[..w.len() - 1].to_string())
}
