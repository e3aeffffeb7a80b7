//! Sentence-level BLEU with clipped n-gram precision and add-one smoothing
//! for higher-order zero counts.

use super::{lower_tokens, ngram_counts};
use crate::error::{Error, Result};
use std::collections::HashMap;

/// Case-insensitive sentence BLEU against one or more references.
///
/// Geometric mean of clipped n-gram precisions for n = 1..=max_n, times the
/// brevity penalty exp(1 - r/c) when the candidate is shorter than the
/// effective reference length (closest length, ties to the shorter).
/// Add-one smoothing applies only for n >= 2 when the match count is zero;
/// an empty candidate scores 0.
pub fn bleu<S: AsRef<str>>(candidate: &str, references: &[S], max_n: usize) -> Result<f64> {
    if references.is_empty() {
        return Err(Error::EmptyReferences);
    }
    if max_n == 0 {
        return Err(Error::invalid("max_n", "must be at least 1".to_string()));
    }
    let cand = lower_tokens(candidate);
    if cand.is_empty() {
        return Ok(0.0);
    }
    let refs: Vec<Vec<String>> = references
        .iter()
        .map(|r| lower_tokens(r.as_ref()))
        .collect();

    let c = cand.len();
    let r = refs
        .iter()
        .map(|rf| rf.len())
        .min_by_key(|&len| ((len as i64 - c as i64).abs(), len))
        .unwrap();

    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let cand_counts = ngram_counts(&cand, n);
        let ref_counts: Vec<HashMap<String, u64>> =
            refs.iter().map(|rf| ngram_counts(rf, n)).collect();
        let total: u64 = cand_counts.values().sum();
        let matched: u64 = cand_counts
            .iter()
            .map(|(gram, &count)| {
                let clip = ref_counts
                    .iter()
                    .map(|rc| rc.get(gram).copied().unwrap_or(0))
                    .max()
                    .unwrap_or(0);
                count.min(clip)
            })
            .sum();
        let precision = if matched == 0 && n >= 2 {
            (matched + 1) as f64 / (total + 1) as f64
        } else if total == 0 {
            // candidate shorter than n; only reachable for n > candidate length
            // with matched == 0, handled by the smoothing branch above
            1.0
        } else {
            matched as f64 / total as f64
        };
        if precision == 0.0 {
            return Ok(0.0);
        }
        log_sum += precision.ln();
    }

    let geo_mean = (log_sum / max_n as f64).exp();
    let brevity = if c >= r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    Ok(brevity * geo_mean)
}
