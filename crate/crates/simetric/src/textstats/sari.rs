//! SARI: n-gram keep/add/delete scoring of a simplification against its
//! source and references, averaged over n = 1..=4 and scaled to [0, 100].

use super::{lower_tokens, ngram_counts};
use crate::error::{Error, Result};
use std::collections::{HashMap, HashSet};

/// Multiset counts scaled by the number of references, so source/output
/// masses are comparable with reference counts summed across references.
fn scaled_counts(tokens: &[String], n: usize, factor: u64) -> HashMap<String, u64> {
    ngram_counts(tokens, n)
        .into_iter()
        .map(|(g, c)| (g, c * factor))
        .collect()
}

fn get(counts: &HashMap<String, u64>, gram: &str) -> u64 {
    counts.get(gram).copied().unwrap_or(0)
}

/// F-score with the empty-set convention: a component whose system and
/// reference sides are both empty is vacuously perfect (1.0); one-sided
/// emptiness yields a zero ratio.
fn fscore(good: u64, sys: u64, reference: u64) -> f64 {
    if sys == 0 && reference == 0 {
        return 1.0;
    }
    let p = if sys == 0 { 0.0 } else { good as f64 / sys as f64 };
    let r = if reference == 0 {
        0.0
    } else {
        good as f64 / reference as f64
    };
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn precision_only(good: u64, sys: u64, reference: u64) -> f64 {
    if sys == 0 && reference == 0 {
        1.0
    } else if sys == 0 {
        0.0
    } else {
        good as f64 / sys as f64
    }
}

/// Case-insensitive SARI of `output` given `source` and `references`.
///
/// Per n-gram order: keep and add components are F1, delete is precision
/// only; the three are averaged per order, orders are averaged, and the
/// result is scaled by 100.
pub fn sari<S: AsRef<str>>(source: &str, output: &str, references: &[S]) -> Result<f64> {
    if references.is_empty() {
        return Err(Error::EmptyReferences);
    }
    let src = lower_tokens(source);
    let out = lower_tokens(output);
    let refs: Vec<Vec<String>> = references
        .iter()
        .map(|r| lower_tokens(r.as_ref()))
        .collect();
    let k = refs.len() as u64;

    let mut total = 0.0;
    for n in 1..=4 {
        let s = scaled_counts(&src, n, k);
        let o = scaled_counts(&out, n, k);
        let mut r: HashMap<String, u64> = HashMap::new();
        for rf in &refs {
            for (g, c) in ngram_counts(rf, n) {
                *r.entry(g).or_insert(0) += c;
            }
        }

        let grams: HashSet<&String> = s.keys().chain(o.keys()).chain(r.keys()).collect();
        let (mut keep_good, mut keep_sys, mut keep_ref) = (0u64, 0u64, 0u64);
        let (mut add_good, mut add_sys, mut add_ref) = (0u64, 0u64, 0u64);
        let (mut del_good, mut del_sys, mut del_ref) = (0u64, 0u64, 0u64);
        for g in grams {
            let (sc, oc, rc) = (get(&s, g), get(&o, g), get(&r, g));
            keep_sys += sc.min(oc);
            keep_ref += sc.min(rc);
            keep_good += sc.min(oc).min(rc);
            add_sys += oc.saturating_sub(sc);
            add_ref += rc.saturating_sub(sc);
            add_good += oc.saturating_sub(sc).min(rc.saturating_sub(sc));
            del_sys += sc.saturating_sub(oc);
            del_ref += sc.saturating_sub(rc);
            del_good += sc.saturating_sub(oc).min(sc.saturating_sub(rc));
        }

        let f_keep = fscore(keep_good, keep_sys, keep_ref);
        let f_add = fscore(add_good, add_sys, add_ref);
        let p_del = precision_only(del_good, del_sys, del_ref);
        total += (f_keep + f_add + p_del) / 3.0;
    }
    Ok(100.0 * total / 4.0)
}
