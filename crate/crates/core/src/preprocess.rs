//! Utterance normalization: contraction expansion, tokenization and
//! multiword-expression merging.
//!
//! Every token remembers the byte span of the raw text it came from, so that
//! extractions can point back into the original utterance.

use serde::{Deserialize, Serialize};

use crate::lexres::Lexicon;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    /// Byte offsets into the raw utterance.
    pub start: usize,
    pub end: usize,
    /// Set when the token is a merged multiword expression.
    pub mwe: bool,
}

impl Token {
    fn new(text: impl Into<String>, start: usize, end: usize) -> Self {
        Self {
            text: text.into(),
            start,
            end,
            mwe: false,
        }
    }

    /// True for tokens made only of punctuation or symbols.
    pub fn is_punct(&self) -> bool {
        !self.text.chars().any(char::is_alphanumeric)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedUtterance {
    pub raw: String,
    pub tokens: Vec<Token>,
}

impl NormalizedUtterance {
    pub fn words(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    /// The same utterance without punctuation tokens.
    pub fn without_punct(&self) -> NormalizedUtterance {
        NormalizedUtterance {
            raw: self.raw.clone(),
            tokens: self.tokens.iter().filter(|t| !t.is_punct()).cloned().collect(),
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Splits raw text into word and punctuation tokens. Apostrophes and hyphens
/// stay inside a word when letters follow them; `3.5` stays one token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |i: usize| chars.get(i).map_or(text.len(), |(b, _)| *b);
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_word_char(c) {
            let mut j = i + 1;
            while j < chars.len() {
                let c = chars[j].1;
                if is_word_char(c) {
                    j += 1;
                    continue;
                }
                let next_is_word = chars.get(j + 1).is_some_and(|(_, n)| is_word_char(*n));
                let joins = match c {
                    '\'' | '\u{2019}' | '-' => next_is_word,
                    '.' | ',' => {
                        next_is_word
                            && chars[j - 1].1.is_ascii_digit()
                            && chars[j + 1].1.is_ascii_digit()
                    }
                    _ => false,
                };
                if !joins {
                    break;
                }
                j += 2;
            }
            let end = end_of(j);
            tokens.push(Token::new(text[start..end].replace('\u{2019}', "'"), start, end));
            i = j;
        } else if (c == '\'' || c == '\u{2019}')
            && chars.get(i + 1).is_some_and(|(_, n)| n.is_alphabetic())
            && i > 0
            && !chars[i - 1].1.is_whitespace()
        {
            // clitic split off by earlier text, e.g. "john 's"
            let mut j = i + 1;
            while j < chars.len() && is_word_char(chars[j].1) {
                j += 1;
            }
            let end = end_of(j);
            tokens.push(Token::new(text[start..end].replace('\u{2019}', "'"), start, end));
            i = j;
        } else {
            let end = end_of(i + 1);
            tokens.push(Token::new(&text[start..end], start, end));
            i += 1;
        }
    }
    tokens
}

const CLITICS: [(&str, &str); 5] = [
    ("'ll", "will"),
    ("'re", "are"),
    ("'ve", "have"),
    ("'d", "would"),
    ("'m", "am"),
];

/// Expands contractions token by token. Expanded words inherit the span of
/// the token they came from.
pub fn expand_contractions(tokens: &[Token], lex: &Lexicon) -> Vec<Token> {
    let mut out = Vec::with_capacity(tokens.len());
    for tok in tokens {
        let lower = tok.text.to_lowercase();
        let push_words = |out: &mut Vec<Token>, words: &str| {
            for (k, w) in words.split_whitespace().enumerate() {
                let text = if k == 0 {
                    match_case(&tok.text, w)
                } else {
                    w.to_string()
                };
                out.push(Token::new(text, tok.start, tok.end));
            }
        };
        if let Some(long) = lex.contraction(&lower) {
            push_words(&mut out, long);
        } else if let Some(stem) = lower.strip_suffix("n't").filter(|s| !s.is_empty()) {
            push_words(&mut out, &format!("{} not", &tok.text[..stem.len()]));
        } else if let Some(stem) = lower.strip_suffix("'s").filter(|s| !s.is_empty()) {
            out.push(Token::new(&tok.text[..stem.len()], tok.start, tok.end));
            out.push(Token::new("'s", tok.start, tok.end));
        } else if let Some((stem, long)) = CLITICS
            .iter()
            .find_map(|(c, long)| lower.strip_suffix(c).filter(|s| !s.is_empty()).map(|s| (s, long)))
        {
            out.push(Token::new(&tok.text[..stem.len()], tok.start, tok.end));
            out.push(Token::new(*long, tok.start, tok.end));
        } else {
            out.push(tok.clone());
        }
    }
    out
}

/// Keeps a leading capital of `original` on the replacement word.
fn match_case(original: &str, word: &str) -> String {
    if original.chars().next().is_some_and(char::is_uppercase) {
        let mut cs = word.chars();
        match cs.next() {
            Some(f) => f.to_uppercase().chain(cs).collect(),
            None => String::new(),
        }
    } else {
        word.to_string()
    }
}

/// Greedily merges the longest listed collocation at each position into one
/// hyphen-joined token.
pub fn merge_collocations(tokens: &[Token], lex: &Lexicon) -> Vec<Token> {
    let max = lex.collocation_max_len();
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let longest = (2..=max.min(tokens.len() - i)).rev().find(|&n| {
            let words: Vec<&str> = tokens[i..i + n].iter().map(|t| t.text.as_str()).collect();
            lex.is_collocation(&words)
        });
        match longest {
            Some(n) => {
                let words: Vec<&str> = tokens[i..i + n].iter().map(|t| t.text.as_str()).collect();
                out.push(Token {
                    text: words.join("-"),
                    start: tokens[i].start,
                    end: tokens[i + n - 1].end,
                    mwe: true,
                });
                i += n;
            }
            None => {
                out.push(tokens[i].clone());
                i += 1;
            }
        }
    }
    out
}

/// Tokenize, expand contractions and merge collocations.
pub fn normalize(text: &str, lex: &Lexicon) -> NormalizedUtterance {
    let tokens = tokenize(text);
    let expanded = expand_contractions(&tokens, lex);
    NormalizedUtterance {
        raw: text.to_string(),
        tokens: merge_collocations(&expanded, lex),
    }
}
