//! Rule-based fallback simplifier: stoplist deletion, sentence splitting at
//! the first coordinating conjunction, and lexicon substitution.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use sha2::{Digest, Sha256};

use super::wordlists::{LEXICON, STOPLIST};
use super::SimplifierProvider;
use crate::error::Result;
use crate::textstats::{detokenize, tokenize};

const CONJUNCTIONS: [&str; 6] = ["and", "but", "or", "so", "yet", "nor"];

/// Probability that a lexicon hit is actually substituted; sampled from a
/// generator keyed on (source, seed) so different seeds give different
/// system outputs while each call stays deterministic.
const SUBSTITUTION_PROB: f64 = 0.85;

pub struct RuleSimplifier {
    stoplist: HashSet<&'static str>,
    lexicon: HashMap<&'static str, &'static str>,
}

impl Default for RuleSimplifier {
    fn default() -> Self {
        Self::new()
    }
}

impl RuleSimplifier {
    pub fn new() -> Self {
        RuleSimplifier {
            stoplist: STOPLIST.iter().copied().collect(),
            lexicon: LEXICON.iter().copied().collect(),
        }
    }
}

fn match_case(replacement: &str, original: &str) -> String {
    let starts_upper = original.chars().next().is_some_and(|c| c.is_uppercase());
    if starts_upper {
        let mut chars = replacement.chars();
        match chars.next() {
            Some(first) => first.to_uppercase().chain(chars).collect(),
            None => String::new(),
        }
    } else {
        replacement.to_string()
    }
}

fn capitalize_first(token: &str) -> String {
    let mut chars = token.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

impl SimplifierProvider for RuleSimplifier {
    fn id(&self) -> &str {
        "fallback-rule-simplifier"
    }
    fn version(&self) -> &str {
        "1"
    }

    fn simplify(&self, source: &str, seed: u64) -> Result<String> {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update(source.as_bytes());
        let digest: [u8; 32] = hasher.finalize().into();
        let mut rng = rand_chacha::ChaCha8Rng::from_seed(digest);

        // rules (i) stoplist drop and (iii) lexicon substitution, one pass
        let mut tokens: Vec<String> = Vec::new();
        for token in tokenize(source).tokens {
            let lower = token.to_lowercase();
            if self.stoplist.contains(lower.as_str()) {
                continue;
            }
            if let Some(&simple) = self.lexicon.get(lower.as_str()) {
                if rng.random::<f64>() < SUBSTITUTION_PROB {
                    tokens.push(match_case(simple, &token));
                    continue;
                }
            }
            tokens.push(token);
        }

        // rule (ii): split into two sentences at the first conjunction with
        // at least two tokens on each side
        let split_at = tokens.iter().enumerate().position(|(i, t)| {
            i >= 2 && i + 2 < tokens.len() && CONJUNCTIONS.contains(&t.to_lowercase().as_str())
        });
        if let Some(i) = split_at {
            let mut left: Vec<String> = tokens[..i].to_vec();
            if left.last().is_some_and(|t| t == ",") {
                left.pop();
            }
            let mut right: Vec<String> = tokens[i + 1..].to_vec();
            if left.len() >= 2 && right.len() >= 2 {
                if left.last().is_none_or(|t| !matches!(t.as_str(), "." | "!" | "?")) {
                    left.push(".".to_string());
                }
                right[0] = capitalize_first(&right[0]);
                left.extend(right);
                tokens = left;
            }
        }

        let result = detokenize(&tokens);
        if result.is_empty() {
            return Ok(source.to_string());
        }
        Ok(result)
    }
}
