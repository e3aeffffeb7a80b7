//! Corpus-built token vocabulary and the delimited (source, output) pair
//! encoding consumed by the encoder.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::textstats::lower_tokens;

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;
pub const BOS_ID: u32 = 2;
pub const SEP_ID: u32 = 3;
pub const EOS_ID: u32 = 4;
const SPECIALS: u32 = 5;

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct VocabRepr {
    tokens: Vec<String>,
}

/// Lowercased token vocabulary. Ids 0..5 are reserved for the special
/// tokens; corpus tokens follow ordered by (count desc, token asc).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabRepr", into = "VocabRepr")]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl From<VocabRepr> for Vocab {
    fn from(repr: VocabRepr) -> Self {
        Vocab::from_tokens(repr.tokens)
    }
}

impl From<Vocab> for VocabRepr {
    fn from(v: Vocab) -> Self {
        VocabRepr { tokens: v.tokens }
    }
}

impl Vocab {
    fn from_tokens(tokens: Vec<String>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), SPECIALS + i as u32))
            .collect();
        Vocab { tokens, index }
    }

    /// Build from corpus texts, keeping at most `max_size` distinct tokens.
    pub fn build<S: AsRef<str>>(texts: &[S], max_size: usize) -> Self {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for text in texts {
            for token in lower_tokens(text.as_ref()) {
                *counts.entry(token).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(max_size);
        Vocab::from_tokens(ranked.into_iter().map(|(t, _)| t).collect())
    }

    pub fn id_of(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    /// Total id space including the 5 special tokens.
    pub fn size(&self) -> usize {
        SPECIALS as usize + self.tokens.len()
    }

    pub fn ids(&self, text: &str) -> Vec<u32> {
        lower_tokens(text).iter().map(|t| self.id_of(t)).collect()
    }

    /// Encode `[BOS] source [SEP] output [EOS]`, truncating each segment
    /// from its right end proportionally so the result never exceeds
    /// `max_len` (which must be at least 5).
    pub fn encode_pair(&self, source: &str, output: &str, max_len: usize) -> PairEncoding {
        assert!(max_len >= 5, "max_len must leave room for BOS/SEP/EOS");
        let src = self.ids(source);
        let out = self.ids(output);
        let budget = max_len - 3;
        let (src_keep, out_keep) = if src.len() + out.len() <= budget {
            (src.len(), out.len())
        } else if src.is_empty() {
            (0, budget)
        } else if out.is_empty() {
            (budget, 0)
        } else {
            let total = (src.len() + out.len()) as f64;
            let raw = (budget as f64 * src.len() as f64 / total).round() as usize;
            let lo = budget.saturating_sub(out.len()).max(1);
            let hi = src.len().min(budget - 1);
            let src_keep = raw.clamp(lo, hi);
            (src_keep, budget - src_keep)
        };
        let mut ids = Vec::with_capacity(src_keep + out_keep + 3);
        ids.push(BOS_ID);
        ids.extend_from_slice(&src[..src_keep]);
        ids.push(SEP_ID);
        ids.extend_from_slice(&out[..out_keep]);
        ids.push(EOS_ID);
        let mask = vec![1u8; ids.len()];
        PairEncoding { ids, mask }
    }
}

/// Token ids for `[BOS] source [SEP] output [EOS]` plus a validity mask
/// (all ones; kept for padded batching behind the same interface).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairEncoding {
    pub ids: Vec<u32>,
    pub mask: Vec<u8>,
}

impl PairEncoding {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn sep_position(&self) -> Option<usize> {
        self.ids.iter().position(|&id| id == SEP_ID)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocab {
        Vocab::build(
            &["the cat sat on the mat", "the dog sat", "a cat ran"],
            1000,
        )
    }

    #[test]
    fn specials_have_fixed_ids() {
        assert_eq!((PAD_ID, UNK_ID, BOS_ID, SEP_ID, EOS_ID), (0, 1, 2, 3, 4));
    }

    #[test]
    fn vocab_orders_by_count_then_token() {
        let v = vocab();
        // "the" (3) > "cat"/"sat" (2, alpha) > rest (1, alpha)
        assert_eq!(v.id_of("the"), 5);
        assert_eq!(v.id_of("cat"), 6);
        assert_eq!(v.id_of("sat"), 7);
        assert_eq!(v.id_of("a"), 8);
        assert_eq!(v.id_of("unseen"), UNK_ID);
        assert_eq!(v.size(), 5 + 8);
    }

    #[test]
    fn vocab_is_case_insensitive_and_capped() {
        let v = Vocab::build(&["The THE the cat"], 1);
        assert_eq!(v.size(), 6);
        assert_ne!(v.id_of("the"), UNK_ID);
        assert_eq!(v.id_of("cat"), UNK_ID);
    }

    #[test]
    fn short_pair_is_not_truncated() {
        let v = vocab();
        let enc = v.encode_pair("the cat sat", "the cat", 128);
        assert_eq!(enc.ids[0], BOS_ID);
        assert_eq!(enc.ids[enc.len() - 1], EOS_ID);
        assert_eq!(enc.sep_position(), Some(4));
        assert_eq!(enc.len(), 3 + 3 + 2);
        assert_eq!(enc.mask, vec![1; enc.len()]);
    }

    #[test]
    fn oversized_pair_truncates_to_exactly_max_len() {
        let v = vocab();
        let src = "the cat ".repeat(40);
        let out = "the dog ".repeat(20);
        let enc = v.encode_pair(&src, &out, 32);
        assert_eq!(enc.len(), 32);
        assert_eq!(enc.ids[0], BOS_ID);
        assert_eq!(enc.ids[31], EOS_ID);
        assert_eq!(enc.ids.iter().filter(|&&id| id == SEP_ID).count(), 1);
        assert_eq!(enc.ids.iter().filter(|&&id| id == BOS_ID).count(), 1);
    }

    #[test]
    fn truncation_is_proportional_to_segment_lengths() {
        let v = vocab();
        // 30 source tokens, 10 output tokens, budget 20 -> keep 15 and 5
        let src = ["cat"; 30].join(" ");
        let out = ["dog"; 10].join(" ");
        let enc = v.encode_pair(&src, &out, 23);
        let sep = enc.sep_position().unwrap();
        assert_eq!(sep - 1, 15); // source tokens kept
        assert_eq!(enc.len() - sep - 2, 5); // output tokens kept
    }

    #[test]
    fn truncation_keeps_segment_heads() {
        let v = vocab();
        let enc = v.encode_pair("the cat sat on the mat", "the dog sat", 8);
        let sep = enc.sep_position().unwrap();
        // budget 5, source share round(5*6/9)=3, output gets 2
        let src_ids: Vec<u32> = enc.ids[1..sep].to_vec();
        assert_eq!(src_ids, vec![v.id_of("the"), v.id_of("cat"), v.id_of("sat")]);
        let out_ids: Vec<u32> = enc.ids[sep + 1..enc.len() - 1].to_vec();
        assert_eq!(out_ids, vec![v.id_of("the"), v.id_of("dog")]);
    }

    #[test]
    fn every_segment_keeps_at_least_one_token_under_truncation() {
        let v = vocab();
        let src = ["cat"; 100].join(" ");
        let enc = v.encode_pair(&src, "dog", 16);
        let sep = enc.sep_position().unwrap();
        assert_eq!(enc.len(), 16);
        assert!(sep >= 2);
        assert!(enc.len() >= sep + 3);
    }

    #[test]
    fn encoding_is_deterministic() {
        let v = vocab();
        let a = v.encode_pair("the cat sat on the mat", "the cat", 16);
        let b = v.encode_pair("the cat sat on the mat", "the cat", 16);
        assert_eq!(a, b);
    }

    #[test]
    fn vocab_serialization_round_trips() {
        let v = vocab();
        let json = serde_json::to_string(&v).unwrap();
        let back: Vocab = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.id_of("the"), v.id_of("the"));
    }
}
