//! Sentence and word tokenization plus character class counts.
//!
//! Sentences split on terminal punctuation (. ! ? and the ellipsis) followed
//! by whitespace or end of text, with closing quotes attached to the
//! finished sentence. Word tokens are maximal runs of letters and digits
//! with internal apostrophes and hyphens kept inside the token.

use super::{Language, StylometryError};

const TERMINALS: [char; 4] = ['.', '!', '?', '…'];
const CLOSERS: [char; 8] = ['"', '\'', '»', '\u{201d}', '\u{2019}', ')', ']', '›'];
const JOINERS: [char; 4] = ['\'', '\u{2019}', '-', '\u{2010}'];

/// Counts over every character of the text; the remainder up to `total` is
/// whitespace and symbols outside the three classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CharCounts {
    pub total: usize,
    pub letters: usize,
    pub digits: usize,
    pub punctuation: usize,
}

pub(crate) fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '«' | '»'
                | '\u{201c}'
                | '\u{201d}'
                | '\u{2018}'
                | '\u{2019}'
                | '–'
                | '—'
                | '…'
                | '¡'
                | '¿'
                | '·'
                | '‹'
                | '›'
        )
}

/// A tokenized document: sentence-grouped tokens, the flattened token list,
/// and character counts over the raw text.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenizedDoc {
    pub sentences: Vec<Vec<String>>,
    pub tokens: Vec<String>,
    pub char_counts: CharCounts,
}

impl TokenizedDoc {
    pub fn n_sentences(&self) -> usize {
        self.sentences.len()
    }

    pub fn n_tokens(&self) -> usize {
        self.tokens.len()
    }
}

/// Deterministic tokenization; the language parameter is part of the
/// contract for future language-specific rules but the splitting itself is
/// shared.
pub fn tokenize(text: &str, _language: Language) -> Result<TokenizedDoc, StylometryError> {
    if text.trim().is_empty() {
        return Err(StylometryError::EmptyText);
    }

    let mut char_counts = CharCounts::default();
    for c in text.chars() {
        char_counts.total += 1;
        if c.is_alphabetic() {
            char_counts.letters += 1;
        } else if c.is_numeric() {
            char_counts.digits += 1;
        } else if is_punctuation(c) {
            char_counts.punctuation += 1;
        }
    }

    // Sentence segmentation over the raw character stream.
    let chars: Vec<char> = text.chars().collect();
    let mut segments: Vec<String> = Vec::new();
    let mut current = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        current.push(c);
        if TERMINALS.contains(&c) {
            // Swallow the rest of the terminal run ("..."; "?!").
            while i + 1 < chars.len() && TERMINALS.contains(&chars[i + 1]) {
                i += 1;
                current.push(chars[i]);
            }
            // Attach closing quotes and brackets.
            while i + 1 < chars.len() && CLOSERS.contains(&chars[i + 1]) {
                i += 1;
                current.push(chars[i]);
            }
            let at_boundary = i + 1 >= chars.len() || chars[i + 1].is_whitespace();
            if at_boundary {
                segments.push(std::mem::take(&mut current));
            }
        }
        i += 1;
    }
    if !current.trim().is_empty() {
        segments.push(current);
    }

    let mut sentences: Vec<Vec<String>> = Vec::new();
    let mut tokens: Vec<String> = Vec::new();
    for segment in &segments {
        let words = word_tokens(segment);
        if words.is_empty() {
            continue;
        }
        tokens.extend(words.iter().cloned());
        sentences.push(words);
    }

    Ok(TokenizedDoc { sentences, tokens, char_counts })
}

/// Maximal alphanumeric runs; apostrophes and hyphens survive only between
/// two alphanumeric characters.
fn word_tokens(segment: &str) -> Vec<String> {
    let chars: Vec<char> = segment.chars().collect();
    let mut out = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let joins = JOINERS.contains(&c)
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if c.is_alphanumeric() || joins {
            current.push(c);
        } else if !current.is_empty() {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}
