//! Corrupt a fraction of synthesized simplifications so the metric sees
//! low-quality outputs: random token deletion, token scrambling, and
//! source/output swapping.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{record_rng, AugmentationOp, Origin, SimplificationRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OpProbs {
    pub deletion: f64,
    pub scrambling: f64,
    pub swap: f64,
}

impl Default for OpProbs {
    fn default() -> Self {
        OpProbs {
            deletion: 0.3,
            scrambling: 0.3,
            swap: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentationPolicy {
    pub augment_fraction: f64,
    pub op_probs: OpProbs,
    /// Inclusive range the deletion count is drawn from.
    pub delete_range: (usize, usize),
    /// Inclusive range the scramble count is drawn from.
    pub scramble_range: (usize, usize),
    pub seed: u64,
}

impl Default for AugmentationPolicy {
    fn default() -> Self {
        AugmentationPolicy {
            augment_fraction: 0.40,
            op_probs: OpProbs::default(),
            delete_range: (1, 4),
            scramble_range: (1, 5),
            seed: 0,
        }
    }
}

impl AugmentationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.augment_fraction) {
            return Err(Error::invalid(
                "augment_fraction",
                format!("must be in [0,1], got {}", self.augment_fraction),
            ));
        }
        let p = &self.op_probs;
        for (name, value) in [
            ("deletion", p.deletion),
            ("scrambling", p.scrambling),
            ("swap", p.swap),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::invalid(
                    "op_probs",
                    format!("{name} probability must be in [0,1], got {value}"),
                ));
            }
        }
        let sum = p.deletion + p.scrambling + p.swap;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "op_probs",
                format!("probabilities must sum to 1.0, got {sum}"),
            ));
        }
        for (name, range) in [
            ("delete_range", self.delete_range),
            ("scramble_range", self.scramble_range),
        ] {
            if range.0 < 1 || range.0 > range.1 {
                return Err(Error::invalid(
                    name,
                    format!("range must satisfy 1 <= lo <= hi, got {range:?}"),
                ));
            }
        }
        Ok(())
    }
}

fn words(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

fn draw_k(range: (usize, usize), rng: &mut impl Rng) -> usize {
    rng.random_range(range.0..=range.1)
}

/// Remove k tokens drawn uniformly (k from `k_range`, then clamped so at
/// least one token survives). Returns the new text and a no-op flag that is
/// true when the input was too short to delete from.
pub fn delete_tokens(text: &str, k_range: (usize, usize), rng: &mut impl Rng) -> (String, bool) {
    let tokens = words(text);
    if tokens.len() < 2 {
        return (text.to_string(), true);
    }
    let k = draw_k(k_range, rng).min(tokens.len() - 1);
    let drop = rand::seq::index::sample(rng, tokens.len(), k);
    let dropped: std::collections::HashSet<usize> = drop.into_iter().collect();
    let kept: Vec<&str> = tokens
        .iter()
        .enumerate()
        .filter(|(i, _)| !dropped.contains(i))
        .map(|(_, t)| *t)
        .collect();
    (kept.join(" "), false)
}

/// Permute k tokens in place by a uniformly random non-identity permutation
/// (k from `k_range`, clamped to the token count). A drawn k of 1 would be a
/// no-op, so it is re-drawn once and then allowed to stand as the identity.
/// Returns the new text and a no-op flag for inputs too short to scramble.
pub fn scramble_tokens(text: &str, k_range: (usize, usize), rng: &mut impl Rng) -> (String, bool) {
    let tokens = words(text);
    if tokens.len() < 2 {
        return (text.to_string(), true);
    }
    let mut k = draw_k(k_range, rng).min(tokens.len());
    if k == 1 {
        k = draw_k(k_range, rng).min(tokens.len());
        if k == 1 {
            return (tokens.join(" "), false);
        }
    }
    let mut slots: Vec<usize> = rand::seq::index::sample(rng, tokens.len(), k).into_vec();
    slots.sort_unstable();
    let mut perm: Vec<usize> = (0..k).collect();
    loop {
        perm.shuffle(rng);
        if perm.iter().enumerate().any(|(i, &p)| p != i) {
            break;
        }
    }
    let mut out: Vec<&str> = tokens.clone();
    for (i, &p) in perm.iter().enumerate() {
        out[slots[i]] = tokens[slots[p]];
    }
    (out.join(" "), false)
}

/// Exchange source and output texts, marking the record augmented.
pub fn swap_pair(record: &SimplificationRecord) -> Result<SimplificationRecord> {
    SimplificationRecord::new(
        &record.source_id,
        &record.output_text,
        &record.source_text,
        &record.system_id,
        Origin::Augmented,
        Some(AugmentationOp::Swap),
        record.operation_type,
    )
}

fn corrupt(
    record: &SimplificationRecord,
    op: AugmentationOp,
    policy: &AugmentationPolicy,
    rng: &mut impl Rng,
) -> Result<Option<SimplificationRecord>> {
    let (new_output, no_op) = match op {
        AugmentationOp::Deletion => delete_tokens(&record.output_text, policy.delete_range, rng),
        AugmentationOp::Scrambling => {
            scramble_tokens(&record.output_text, policy.scramble_range, rng)
        }
        AugmentationOp::Swap => return swap_pair(record).map(Some),
    };
    if no_op {
        return Ok(None);
    }
    SimplificationRecord::new(
        &record.source_id,
        &record.source_text,
        &new_output,
        &record.system_id,
        Origin::Augmented,
        Some(op),
        record.operation_type,
    )
    .map(Some)
}

/// Independently select each model/human record with probability
/// `augment_fraction` and replace it with a corrupted version. Selection and
/// corruption for a record depend only on (policy.seed, record_id), so
/// adding unrelated records never changes a record's fate.
pub fn augment_corpus(
    records: &[SimplificationRecord],
    policy: &AugmentationPolicy,
) -> Result<Vec<SimplificationRecord>> {
    policy.validate()?;
    if records.is_empty() {
        return Err(Error::invalid("records", "corpus is empty".to_string()));
    }
    let mut out = Vec::with_capacity(records.len());
    for record in records {
        let eligible = matches!(record.origin, Origin::Model | Origin::Human);
        if !eligible {
            out.push(record.clone());
            continue;
        }
        let mut rng = record_rng(policy.seed, &record.record_id);
        if rng.random::<f64>() >= policy.augment_fraction {
            out.push(record.clone());
            continue;
        }
        let roll: f64 = rng.random();
        let op = if roll < policy.op_probs.deletion {
            AugmentationOp::Deletion
        } else if roll < policy.op_probs.deletion + policy.op_probs.scrambling {
            AugmentationOp::Scrambling
        } else {
            AugmentationOp::Swap
        };
        match corrupt(record, op, policy, &mut rng)? {
            Some(corrupted) => out.push(corrupted),
            None => out.push(record.clone()),
        }
    }
    Ok(out)
}
