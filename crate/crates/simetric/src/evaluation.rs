//! Correlation of metric scores with human ratings: Pearson r plus a
//! segment-level Kendall-Tau-like coefficient over annotator-filtered
//! comparable pairs, grouped by operation type.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Aspect, RatingRecord, SimplificationRecord};
use crate::error::{Error, Result};

/// Two outputs for the same source sentence and operation type, with
/// aligned per-annotator scores and one metric score per side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparablePair {
    pub source_id: String,
    pub group: String,
    pub record_a: String,
    pub record_b: String,
    pub human_a: Vec<f64>,
    pub human_b: Vec<f64>,
    pub metric_a: f64,
    pub metric_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterParams {
    /// Unnormalized score difference an annotator must exceed (strictly).
    pub agreement_threshold: f64,
    /// How many annotators must exceed the threshold.
    pub min_raters_over_threshold: usize,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams {
            agreement_threshold: 5.0,
            min_raters_over_threshold: 2,
        }
    }
}

/// Product-moment correlation. Needs ≥ 3 points and nonzero variance on
/// both sides.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::UndefinedCorrelation("input lengths differ"));
    }
    if xs.len() < 3 {
        return Err(Error::UndefinedCorrelation("need at least 3 points"));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance in an input"));
    }
    Ok(cov / (var_x.sqrt() * var_y.sqrt()))
}

/// The direction every annotator agrees on, if they all do (no ties, no
/// reversals): +1.0 when a beats b, −1.0 when b beats a.
fn unanimous_direction(pair: &ComparablePair) -> Option<f64> {
    let mut dir = 0.0;
    for (a, b) in pair.human_a.iter().zip(&pair.human_b) {
        let diff = a - b;
        if diff == 0.0 {
            return None;
        }
        let sign = diff.signum();
        if dir == 0.0 {
            dir = sign;
        } else if sign != dir {
            return None;
        }
    }
    if dir == 0.0 {
        None
    } else {
        Some(dir)
    }
}

/// Keep pairs where every annotator ranks the two sides the same way and
/// the absolute score difference exceeds the threshold for at least
/// `min_raters_over_threshold` annotators.
pub fn filter_pairs(pairs: &[ComparablePair], params: &FilterParams) -> Vec<ComparablePair> {
    pairs
        .iter()
        .filter(|pair| {
            if unanimous_direction(pair).is_none() {
                return false;
            }
            let over = pair
                .human_a
                .iter()
                .zip(&pair.human_b)
                .filter(|(a, b)| (*a - *b).abs() > params.agreement_threshold)
                .count();
            over >= params.min_raters_over_threshold
        })
        .cloned()
        .collect()
}

fn tally(pairs: &[ComparablePair]) -> (usize, usize) {
    let mut concordant = 0;
    let mut discordant = 0;
    for pair in pairs {
        let human_mean_a: f64 = pair.human_a.iter().sum::<f64>() / pair.human_a.len() as f64;
        let human_mean_b: f64 = pair.human_b.iter().sum::<f64>() / pair.human_b.len() as f64;
        let human_dir = (human_mean_a - human_mean_b).signum();
        debug_assert!(human_dir != 0.0, "tau over an unfiltered tie");
        let metric_diff = pair.metric_a - pair.metric_b;
        // metric ties count as discordant: the formula has no tie bucket
        if metric_diff != 0.0 && metric_diff.signum() == human_dir {
            concordant += 1;
        } else {
            discordant += 1;
        }
    }
    (concordant, discordant)
}

/// (|concordant| − |discordant|) / (|concordant| + |discordant|) over
/// already-filtered pairs. Metric ties are discordant.
pub fn kendall_tau_like(pairs: &[ComparablePair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::NoComparablePairs);
    }
    let (c, d) = tally(pairs);
    Ok((c as f64 - d as f64) / (c as f64 + d as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub tau: f64,
    pub concordant: usize,
    pub discordant: usize,
    pub candidate_pairs: usize,
    pub filtered_out: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub aspect: Aspect,
    /// Per-operation τ for groups that retained at least one pair.
    pub per_operation: BTreeMap<String, GroupStats>,
    /// τ over the union of every group's retained pairs.
    pub tau_all: f64,
    pub concordant: usize,
    pub discordant: usize,
    pub candidate_pairs: usize,
    pub filtered_out: usize,
    pub pearson: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub aspect: Aspect,
    #[serde(default)]
    pub filter: FilterParams,
    /// Pearson r is only meaningful without per-source multiplicity
    /// structure; datasets opt in via this flag.
    #[serde(default)]
    pub pearson_enabled: bool,
}

impl EvalConfig {
    pub fn new(aspect: Aspect) -> Self {
        EvalConfig {
            aspect,
            filter: FilterParams::default(),
            pearson_enabled: false,
        }
    }
}

fn group_label(record: &SimplificationRecord) -> String {
    match record.operation_type {
        Some(op) => op.as_str().to_string(),
        None => "untyped".to_string(),
    }
}

/// Enumerate every same-source, same-operation record pair with aligned
/// annotator scores and metric scores attached.
pub fn comparable_pairs(
    records: &[SimplificationRecord],
    ratings_by_record: &BTreeMap<&str, &RatingRecord>,
    scores: &BTreeMap<String, f64>,
) -> Result<Vec<ComparablePair>> {
    let mut groups: BTreeMap<(String, String), Vec<&SimplificationRecord>> = BTreeMap::new();
    for record in records {
        groups
            .entry((record.source_id.clone(), group_label(record)))
            .or_default()
            .push(record);
    }
    let lookup = |record: &SimplificationRecord| -> Result<(&RatingRecord, f64)> {
        let rating = ratings_by_record.get(record.record_id.as_str()).ok_or_else(|| {
            Error::MissingRating {
                record_id: record.record_id.clone(),
                aspect: "requested".to_string(),
            }
        })?;
        let score = scores
            .get(&record.record_id)
            .copied()
            .ok_or_else(|| Error::MissingScores(vec![record.record_id.clone()]))?;
        Ok((rating, score))
    };
    let mut pairs = Vec::new();
    for ((source_id, group), members) in &groups {
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                let (ra, metric_a) = lookup(a)?;
                let (rb, metric_b) = lookup(b)?;
                if ra.rater_scores.len() != rb.rater_scores.len() {
                    return Err(Error::invalid(
                        "ratings",
                        format!(
                            "records {} and {} have {} vs {} annotator scores and cannot be compared",
                            a.record_id,
                            b.record_id,
                            ra.rater_scores.len(),
                            rb.rater_scores.len()
                        ),
                    ));
                }
                pairs.push(ComparablePair {
                    source_id: source_id.clone(),
                    group: group.clone(),
                    record_a: a.record_id.clone(),
                    record_b: b.record_id.clone(),
                    human_a: ra.rater_scores.clone(),
                    human_b: rb.rater_scores.clone(),
                    metric_a,
                    metric_b,
                });
            }
        }
    }
    Ok(pairs)
}

/// Correlate metric scores with ratings: τ within each operation group,
/// τ over the pooled pairs, and optionally Pearson r over per-record
/// (score, mean rating) points.
pub fn build_report(
    records: &[SimplificationRecord],
    ratings: &[RatingRecord],
    scores: &BTreeMap<String, f64>,
    config: &EvalConfig,
) -> Result<CorrelationReport> {
    let missing: Vec<String> = records
        .iter()
        .filter(|r| !scores.contains_key(&r.record_id))
        .map(|r| r.record_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingScores(missing));
    }
    let mut by_record: BTreeMap<&str, &RatingRecord> = BTreeMap::new();
    for rating in ratings {
        if rating.aspect == config.aspect {
            by_record.insert(rating.record_id.as_str(), rating);
        }
    }
    for record in records {
        if !by_record.contains_key(record.record_id.as_str()) {
            return Err(Error::MissingRating {
                record_id: record.record_id.clone(),
                aspect: config.aspect.as_str().to_string(),
            });
        }
    }

    let pairs = comparable_pairs(records, &by_record, scores)?;
    let retained = filter_pairs(&pairs, &config.filter);
    if retained.is_empty() {
        return Err(Error::NoComparablePairs);
    }

    let mut candidate_by_group: BTreeMap<&str, usize> = BTreeMap::new();
    for pair in &pairs {
        *candidate_by_group.entry(pair.group.as_str()).or_insert(0) += 1;
    }
    let mut retained_by_group: BTreeMap<&str, Vec<&ComparablePair>> = BTreeMap::new();
    for pair in &retained {
        retained_by_group
            .entry(pair.group.as_str())
            .or_default()
            .push(pair);
    }
    let mut per_operation = BTreeMap::new();
    for (group, members) in &retained_by_group {
        let owned: Vec<ComparablePair> = members.iter().map(|p| (*p).clone()).collect();
        let (c, d) = tally(&owned);
        let candidates = candidate_by_group[group];
        per_operation.insert(
            group.to_string(),
            GroupStats {
                tau: (c as f64 - d as f64) / (c as f64 + d as f64),
                concordant: c,
                discordant: d,
                candidate_pairs: candidates,
                filtered_out: candidates - owned.len(),
            },
        );
    }

    let (concordant, discordant) = tally(&retained);
    let tau_all = (concordant as f64 - discordant as f64) / (concordant + discordant) as f64;

    let pearson_r = if config.pearson_enabled {
        let xs: Vec<f64> = records.iter().map(|r| scores[&r.record_id]).collect();
        let ys: Vec<f64> = records
            .iter()
            .map(|r| by_record[r.record_id.as_str()].aggregate())
            .collect::<Result<_>>()?;
        Some(pearson(&xs, &ys)?)
    } else {
        None
    };

    Ok(CorrelationReport {
        aspect: config.aspect,
        per_operation,
        tau_all,
        concordant,
        discordant,
        candidate_pairs: pairs.len(),
        filtered_out: pairs.len() - retained.len(),
        pearson: pearson_r,
    })
}

impl CorrelationReport {
    /// Human-readable table.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("aspect: {}\n", self.aspect.as_str()));
        out.push_str(&format!(
            "{:<14} {:>6} {:>6} {:>6} {:>6} {:>8}\n",
            "group", "pairs", "kept", "conc", "disc", "tau"
        ));
        for (group, stats) in &self.per_operation {
            out.push_str(&format!(
                "{:<14} {:>6} {:>6} {:>6} {:>6} {:>8.3}\n",
                group,
                stats.candidate_pairs,
                stats.concordant + stats.discordant,
                stats.concordant,
                stats.discordant,
                stats.tau
            ));
        }
        out.push_str(&format!(
            "{:<14} {:>6} {:>6} {:>6} {:>6} {:>8.3}\n",
            "all",
            self.candidate_pairs,
            self.concordant + self.discordant,
            self.concordant,
            self.discordant,
            self.tau_all
        ));
        match self.pearson {
            Some(r) => out.push_str(&format!("pearson r: {r:.3}\n")),
            None => out.push_str("pearson r: n/a\n"),
        }
        out
    }

    /// Machine-readable lines: one JSON object per operation group, then
    /// one for the pooled result.
    pub fn save_machine(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for (group, stats) in &self.per_operation {
            let line = serde_json::json!({
                "aspect": self.aspect.as_str(),
                "group": group,
                "tau": stats.tau,
                "concordant": stats.concordant,
                "discordant": stats.discordant,
                "candidate_pairs": stats.candidate_pairs,
                "filtered_out": stats.filtered_out,
            });
            writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
        }
        let all = serde_json::json!({
            "aspect": self.aspect.as_str(),
            "group": "all",
            "tau": self.tau_all,
            "concordant": self.concordant,
            "discordant": self.discordant,
            "candidate_pairs": self.candidate_pairs,
            "filtered_out": self.filtered_out,
            "pearson": self.pearson,
        });
        writeln!(w, "{all}").map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{OperationType, Origin};
    use proptest::prelude::*;

    fn pair(human_a: &[f64], human_b: &[f64], metric_a: f64, metric_b: f64) -> ComparablePair {
        ComparablePair {
            source_id: "s".into(),
            group: "paraphrase".into(),
            record_a: "a".into(),
            record_b: "b".into(),
            human_a: human_a.to_vec(),
            human_b: human_b.to_vec(),
            metric_a,
            metric_b,
        }
    }

    #[test]
    fn pearson_perfect_linear() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let up: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let down: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &up).unwrap() - 1.0).abs() < 1e-9);
        assert!((pearson(&xs, &down).unwrap() + 1.0).abs() < 1e-9);
    }

    #[test]
    fn pearson_rejects_degenerate_inputs() {
        let xs = [1.0, 2.0, 3.0];
        assert!(matches!(
            pearson(&xs, &[5.0, 5.0, 5.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&xs, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn pearson_affine_invariance_and_symmetry() {
        let xs = [0.3, -1.2, 2.5, 0.9, -0.4];
        let ys = [1.0, 0.2, 1.9, -0.5, 0.7];
        let base = pearson(&xs, &ys).unwrap();
        let shifted: Vec<f64> = xs.iter().map(|x| 3.5 * x + 11.0).collect();
        assert!((pearson(&shifted, &ys).unwrap() - base).abs() < 1e-9);
        assert!((pearson(&ys, &xs).unwrap() - base).abs() < 1e-9);
        assert!((-1.0..=1.0).contains(&base));
    }

    #[test]
    fn filter_retains_unanimous_pair_with_two_big_diffs() {
        // diffs 10, 15 and exactly 5; only two exceed the threshold
        let p = pair(&[90.0, 85.0, 60.0], &[80.0, 70.0, 55.0], 0.0, 0.0);
        let kept = filter_pairs(&[p], &FilterParams::default());
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn filter_drops_reversing_annotator() {
        let p = pair(&[90.0, 70.0, 60.0], &[80.0, 85.0, 50.0], 0.0, 0.0);
        assert!(filter_pairs(&[p], &FilterParams::default()).is_empty());
    }

    #[test]
    fn filter_drops_small_differences() {
        // unanimous but diffs 4, 4, 3 never exceed 5
        let p = pair(&[90.0, 85.0, 60.0], &[86.0, 81.0, 57.0], 0.0, 0.0);
        assert!(filter_pairs(&[p], &FilterParams::default()).is_empty());
    }

    #[test]
    fn filter_drops_any_annotator_tie() {
        let p = pair(&[90.0, 85.0, 60.0], &[80.0, 85.0, 40.0], 0.0, 0.0);
        assert!(filter_pairs(&[p], &FilterParams::default()).is_empty());
    }

    #[test]
    fn filter_threshold_exactly_met_does_not_count() {
        // strict inequality: diffs 5 and 5 with min 2 fails
        let p = pair(&[90.0, 85.0], &[85.0, 80.0], 0.0, 0.0);
        assert!(filter_pairs(std::slice::from_ref(&p), &FilterParams::default()).is_empty());
        // lowering the threshold keeps it
        let relaxed = FilterParams {
            agreement_threshold: 4.0,
            min_raters_over_threshold: 2,
        };
        assert_eq!(filter_pairs(&[p], &relaxed).len(), 1);
    }

    #[test]
    fn tau_examples() {
        let all_agree: Vec<ComparablePair> = (0..4)
            .map(|i| pair(&[90.0, 80.0], &[70.0, 60.0], 1.0 + i as f64, 0.5))
            .collect();
        assert_eq!(kendall_tau_like(&all_agree).unwrap(), 1.0);

        let mut three_one = all_agree.clone();
        three_one[3].metric_a = 0.1; // metric now disagrees on one pair
        assert_eq!(kendall_tau_like(&three_one).unwrap(), 0.5);

        let mut even = all_agree.clone();
        even[2].metric_a = 0.1;
        even[3].metric_a = 0.1;
        assert_eq!(kendall_tau_like(&even).unwrap(), 0.0);
    }

    #[test]
    fn tau_counts_metric_ties_as_discordant() {
        let tied: Vec<ComparablePair> = (0..3)
            .map(|_| pair(&[90.0, 80.0], &[70.0, 60.0], 0.5, 0.5))
            .collect();
        assert_eq!(kendall_tau_like(&tied).unwrap(), -1.0);
    }

    #[test]
    fn tau_errors_on_empty_input() {
        assert!(matches!(
            kendall_tau_like(&[]),
            Err(Error::NoComparablePairs)
        ));
    }

    proptest! {
        #[test]
        fn filter_is_monotone_in_threshold(
            seeds in proptest::collection::vec((0u8..100, 0u8..100, 0u8..100, 0u8..100, 0u8..100, 0u8..100), 1..30),
            low in 0.0f64..6.0,
            extra in 0.1f64..8.0,
        ) {
            let pairs: Vec<ComparablePair> = seeds
                .iter()
                .map(|&(a1, a2, a3, b1, b2, b3)| {
                    pair(
                        &[a1 as f64, a2 as f64, a3 as f64],
                        &[b1 as f64, b2 as f64, b3 as f64],
                        0.0,
                        0.0,
                    )
                })
                .collect();
            let loose = FilterParams { agreement_threshold: low, min_raters_over_threshold: 2 };
            let strict = FilterParams { agreement_threshold: low + extra, min_raters_over_threshold: 2 };
            let kept_loose = filter_pairs(&pairs, &loose);
            let kept_strict = filter_pairs(&pairs, &strict);
            prop_assert!(kept_strict.len() <= kept_loose.len());
            for p in &kept_strict {
                prop_assert!(kept_loose.contains(p));
            }
        }

        #[test]
        fn tau_is_bounded(
            metric in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..20)
        ) {
            let pairs: Vec<ComparablePair> = metric
                .iter()
                .map(|&(a, b)| pair(&[90.0, 80.0], &[60.0, 50.0], a, b))
                .collect();
            let tau = kendall_tau_like(&pairs).unwrap();
            prop_assert!((-1.0..=1.0).contains(&tau));
        }
    }

    fn record(
        source: usize,
        system: &str,
        op: Option<OperationType>,
    ) -> SimplificationRecord {
        SimplificationRecord::new(
            format!("src-{source}"),
            format!("source sentence number {source} with several words"),
            format!("output from {system} for source {source}"),
            system,
            Origin::Human,
            None,
            op,
        )
        .unwrap()
    }

    fn rating(record_id: &str, aspect: Aspect, scores: &[f64]) -> RatingRecord {
        RatingRecord {
            record_id: record_id.to_string(),
            aspect,
            rater_scores: scores.to_vec(),
            scale_max: 100.0,
        }
    }

    /// Two sources, one paraphrase group each with 2 systems, one splitting
    /// group on source 0 with 2 systems.
    fn hand_dataset() -> (
        Vec<SimplificationRecord>,
        Vec<RatingRecord>,
        BTreeMap<String, f64>,
    ) {
        let records = vec![
            record(0, "sys-a", Some(OperationType::Paraphrase)),
            record(0, "sys-b", Some(OperationType::Paraphrase)),
            record(1, "sys-a", Some(OperationType::Paraphrase)),
            record(1, "sys-b", Some(OperationType::Paraphrase)),
            record(0, "sys-c", Some(OperationType::Splitting)),
            record(0, "sys-d", Some(OperationType::Splitting)),
        ];
        let ratings = vec![
            rating(&records[0].record_id, Aspect::Overall, &[90.0, 85.0, 80.0]),
            rating(&records[1].record_id, Aspect::Overall, &[70.0, 60.0, 65.0]),
            rating(&records[2].record_id, Aspect::Overall, &[50.0, 55.0, 52.0]),
            rating(&records[3].record_id, Aspect::Overall, &[80.0, 75.0, 78.0]),
            rating(&records[4].record_id, Aspect::Overall, &[88.0, 90.0, 84.0]),
            rating(&records[5].record_id, Aspect::Overall, &[60.0, 55.0, 62.0]),
        ];
        let mut scores = BTreeMap::new();
        scores.insert(records[0].record_id.clone(), 0.9); // beats records[1]: concordant
        scores.insert(records[1].record_id.clone(), 0.2);
        scores.insert(records[2].record_id.clone(), 0.8); // beats records[3]: discordant
        scores.insert(records[3].record_id.clone(), 0.3);
        scores.insert(records[4].record_id.clone(), 0.7); // beats records[5]: concordant
        scores.insert(records[5].record_id.clone(), 0.1);
        (records, ratings, scores)
    }

    #[test]
    fn report_matches_hand_counts() {
        let (records, ratings, scores) = hand_dataset();
        let config = EvalConfig::new(Aspect::Overall);
        let report = build_report(&records, &ratings, &scores, &config).unwrap();
        assert_eq!(report.candidate_pairs, 3);
        assert_eq!(report.filtered_out, 0);
        let para = &report.per_operation["paraphrase"];
        assert_eq!((para.concordant, para.discordant), (1, 1));
        assert_eq!(para.tau, 0.0);
        let split = &report.per_operation["splitting"];
        assert_eq!((split.concordant, split.discordant), (1, 0));
        assert_eq!(split.tau, 1.0);
        // pooled: 2 concordant, 1 discordant
        assert!((report.tau_all - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(report.concordant + report.discordant, 3);
        assert!(report.pearson.is_none());
    }

    #[test]
    fn single_group_dataset_has_tau_all_equal_group_tau() {
        let (mut records, mut ratings, mut scores) = hand_dataset();
        records.truncate(4);
        ratings.truncate(4);
        let keep: Vec<String> = records.iter().map(|r| r.record_id.clone()).collect();
        scores.retain(|k, _| keep.contains(k));
        let report =
            build_report(&records, &ratings, &scores, &EvalConfig::new(Aspect::Overall)).unwrap();
        assert_eq!(report.per_operation.len(), 1);
        assert!(!report.per_operation.contains_key("splitting"));
        assert_eq!(report.per_operation["paraphrase"].tau, report.tau_all);
    }

    #[test]
    fn report_is_invariant_under_increasing_transforms_of_scores() {
        let (records, ratings, scores) = hand_dataset();
        let transformed: BTreeMap<String, f64> = scores
            .iter()
            .map(|(k, &v)| (k.clone(), v * v * v + v))
            .collect();
        let config = EvalConfig::new(Aspect::Overall);
        let a = build_report(&records, &ratings, &scores, &config).unwrap();
        let b = build_report(&records, &ratings, &transformed, &config).unwrap();
        assert_eq!(a.tau_all, b.tau_all);
        assert_eq!(a.per_operation, b.per_operation);
    }

    #[test]
    fn missing_scores_are_listed() {
        let (records, ratings, mut scores) = hand_dataset();
        scores.remove(&records[1].record_id);
        scores.remove(&records[4].record_id);
        let err = build_report(&records, &ratings, &scores, &EvalConfig::new(Aspect::Overall))
            .unwrap_err();
        match err {
            Error::MissingScores(ids) => {
                assert_eq!(ids.len(), 2);
                assert!(ids.contains(&records[1].record_id));
                assert!(ids.contains(&records[4].record_id));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn missing_rating_is_an_error() {
        let (records, mut ratings, scores) = hand_dataset();
        ratings.remove(3);
        let err = build_report(&records, &ratings, &scores, &EvalConfig::new(Aspect::Overall))
            .unwrap_err();
        assert!(matches!(err, Error::MissingRating { .. }), "{err}");
    }

    #[test]
    fn mismatched_annotator_counts_error() {
        let (records, mut ratings, scores) = hand_dataset();
        ratings[1].rater_scores.pop();
        let err = build_report(&records, &ratings, &scores, &EvalConfig::new(Aspect::Overall))
            .unwrap_err();
        assert!(err.to_string().contains("annotator"), "{err}");
    }

    #[test]
    fn pearson_flag_adds_per_record_correlation() {
        let (records, ratings, scores) = hand_dataset();
        let config = EvalConfig {
            pearson_enabled: true,
            ..EvalConfig::new(Aspect::Overall)
        };
        let report = build_report(&records, &ratings, &scores, &config).unwrap();
        let r = report.pearson.unwrap();
        assert!((-1.0..=1.0).contains(&r));
    }

    #[test]
    fn all_equal_metric_scores_give_tau_minus_one() {
        let (records, ratings, scores) = hand_dataset();
        let constant: BTreeMap<String, f64> =
            scores.keys().map(|k| (k.clone(), 0.5)).collect();
        let report =
            build_report(&records, &ratings, &constant, &EvalConfig::new(Aspect::Overall))
                .unwrap();
        assert_eq!(report.tau_all, -1.0);
    }

    #[test]
    fn fully_filtered_dataset_errors() {
        let (records, ratings, scores) = hand_dataset();
        let config = EvalConfig {
            filter: FilterParams {
                agreement_threshold: 100.0,
                min_raters_over_threshold: 2,
            },
            ..EvalConfig::new(Aspect::Overall)
        };
        let err = build_report(&records, &ratings, &scores, &config).unwrap_err();
        assert!(matches!(err, Error::NoComparablePairs));
    }

    #[test]
    fn render_and_machine_output_cover_all_groups() {
        let dir = tempfile::tempdir().unwrap();
        let (records, ratings, scores) = hand_dataset();
        let report =
            build_report(&records, &ratings, &scores, &EvalConfig::new(Aspect::Overall)).unwrap();
        let text = report.render();
        assert!(text.contains("paraphrase"));
        assert!(text.contains("splitting"));
        assert!(text.contains("all"));
        let path = dir.path().join("report.jsonl");
        report.save_machine(&path).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = content.lines().collect();
        assert_eq!(lines.len(), 3);
        let last: serde_json::Value = serde_json::from_str(lines[2]).unwrap();
        assert_eq!(last["group"], "all");
        assert!((last["tau"].as_f64().unwrap() - report.tau_all).abs() < 1e-12);
    }
}
