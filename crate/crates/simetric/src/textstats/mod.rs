//! Deterministic text statistics: tokenization, syllable counting, FKGL,
//! BLEU, SARI, and token-overlap F1. Pure functions, no model inference.

mod bleu;
mod sari;

pub use bleu::bleu;
pub use sari::sari;

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Version tag for the tokenizer; recorded so downstream artifacts can
/// detect a tokenization change.
pub const TOKENIZER_VERSION: &str = "ws-peel-1";

/// A tokenized text with the tokenizer version that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub produced_by: &'static str,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Whitespace tokenization with leading/trailing punctuation peeled off as
/// single-character tokens, preserving original order. Internal punctuation
/// (apostrophes, hyphens) stays inside the token.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        while start < end && !is_word_char(chars[start]) {
            start += 1;
        }
        while end > start && !is_word_char(chars[end - 1]) {
            end -= 1;
        }
        for &c in &chars[..start] {
            tokens.push(c.to_string());
        }
        if start < end {
            tokens.push(chars[start..end].iter().collect());
        }
        for &c in &chars[end..] {
            tokens.push(c.to_string());
        }
    }
    TokenSequence {
        tokens,
        produced_by: TOKENIZER_VERSION,
    }
}

/// Tokens that contain at least one alphanumeric character.
pub fn word_tokens(text: &str) -> Vec<String> {
    tokenize(text)
        .tokens
        .into_iter()
        .filter(|t| t.chars().any(is_word_char))
        .collect()
}

pub(crate) fn lower_tokens(text: &str) -> Vec<String> {
    tokenize(text)
        .tokens
        .into_iter()
        .map(|t| t.to_lowercase())
        .collect()
}

/// Heuristic syllable count: maximal vowel groups (aeiouy), minus one for a
/// terminal silent 'e' not preceded by 'l', floored at one. Non-alphabetic
/// characters are ignored; a word without letters counts as one syllable.
pub fn count_syllables(word: &str) -> usize {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(|c| c.to_lowercase())
        .collect();
    if letters.is_empty() {
        return 1;
    }
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0usize;
    let mut prev_vowel = false;
    for &c in &letters {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    let n = letters.len();
    if n >= 2 && letters[n - 1] == 'e' && letters[n - 2] != 'l' {
        groups = groups.saturating_sub(1);
    }
    groups.max(1)
}

/// Flesch-Kincaid grade level:
/// 0.39 * words/sentences + 11.8 * syllables/words - 15.59.
/// Sentences are counted as `.`/`!`/`?` tokens, floored at one.
pub fn fkgl(text: &str) -> Result<f64> {
    let seq = tokenize(text);
    let words: Vec<&String> = seq
        .tokens
        .iter()
        .filter(|t| t.chars().any(is_word_char))
        .collect();
    if words.is_empty() {
        return Err(Error::NoWords);
    }
    let sentences = seq
        .tokens
        .iter()
        .filter(|t| matches!(t.as_str(), "." | "!" | "?"))
        .count()
        .max(1);
    let syllables: usize = words.iter().map(|w| count_syllables(w)).sum();
    let nw = words.len() as f64;
    Ok(0.39 * nw / sentences as f64 + 11.8 * syllables as f64 / nw - 15.59)
}

/// Multiset n-gram counts keyed by the n-gram's tokens joined with an
/// unprintable separator.
pub(crate) fn ngram_counts(tokens: &[String], n: usize) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for window in tokens.windows(n) {
        *counts.entry(window.join("\u{1f}")).or_insert(0) += 1;
    }
    counts
}

/// Case-insensitive unigram-multiset precision/recall/F1 of `a` against `b`.
/// Both empty gives (1, 1, 1); exactly one empty gives (0, 0, 0).
pub fn token_f1(a: &str, b: &str) -> (f64, f64, f64) {
    let ta = lower_tokens(a);
    let tb = lower_tokens(b);
    match (ta.is_empty(), tb.is_empty()) {
        (true, true) => return (1.0, 1.0, 1.0),
        (true, false) | (false, true) => return (0.0, 0.0, 0.0),
        _ => {}
    }
    let ca = ngram_counts(&ta, 1);
    let cb = ngram_counts(&tb, 1);
    let overlap: u64 = ca
        .iter()
        .map(|(g, &c)| c.min(cb.get(g).copied().unwrap_or(0)))
        .sum();
    let p = overlap as f64 / ta.len() as f64;
    let r = overlap as f64 / tb.len() as f64;
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f1)
}

/// Join tokens with spaces, attaching closing punctuation to the previous
/// token and skipping the space after an opening bracket.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    for (i, tok) in tokens.iter().enumerate() {
        let t = tok.as_ref();
        let closes = t.len() == 1
            && matches!(
                t.chars().next().unwrap(),
                '.' | ',' | '!' | '?' | ';' | ':' | ')' | ']' | '}' | '%' | '\''
            );
        let prev_opens = i > 0 && matches!(tokens[i - 1].as_ref(), "(" | "[" | "{");
        if i > 0 && !closes && !prev_opens {
            out.push(' ');
        }
        out.push_str(t);
    }
    out
}
