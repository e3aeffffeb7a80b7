//! Corpus record types, JSONL persistence, deterministic splitting, and
//! the seeded-randomness helpers used across the pipeline.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Where a simplification came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Model,
    Human,
    Augmented,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Model => "model",
            Origin::Human => "human",
            Origin::Augmented => "augmented",
        }
    }
}

/// Corruption applied to an augmented record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentationOp {
    Deletion,
    Scrambling,
    Swap,
}

impl AugmentationOp {
    pub fn as_str(self) -> &'static str {
        match self {
            AugmentationOp::Deletion => "deletion",
            AugmentationOp::Scrambling => "scrambling",
            AugmentationOp::Swap => "swap",
        }
    }
}

/// Simplification operation the output performs relative to its source.
/// Correlation reports never compare records across different operation types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperationType {
    Paraphrase,
    Splitting,
    DeletionOp,
    Unknown,
}

impl OperationType {
    pub fn as_str(self) -> &'static str {
        match self {
            OperationType::Paraphrase => "paraphrase",
            OperationType::Splitting => "splitting",
            OperationType::DeletionOp => "deletion_op",
            OperationType::Unknown => "unknown",
        }
    }
}

/// One (source, output) pair with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplificationRecord {
    /// Content hash; recomputed whenever the hashed fields change.
    #[serde(default)]
    pub record_id: String,
    pub source_id: String,
    pub source_text: String,
    pub output_text: String,
    pub system_id: String,
    pub origin: Origin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augmentation_op: Option<AugmentationOp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operation_type: Option<OperationType>,
}

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Content hash over the identity-carrying fields, sorted by field name.
/// source_id and operation_type are provenance, not content, and are excluded.
pub fn content_id(
    source_text: &str,
    output_text: &str,
    system_id: &str,
    origin: Origin,
    augmentation_op: Option<AugmentationOp>,
) -> String {
    let canonical = format!(
        "augmentation_op={}\norigin={}\noutput_text={}\nsource_text={}\nsystem_id={}",
        augmentation_op.map(|op| op.as_str()).unwrap_or(""),
        origin.as_str(),
        normalize_ws(output_text),
        normalize_ws(source_text),
        normalize_ws(system_id),
    );
    let digest = Sha256::digest(canonical.as_bytes());
    hex::encode(&digest[..16])
}

impl SimplificationRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        source_id: impl Into<String>,
        source_text: impl Into<String>,
        output_text: impl Into<String>,
        system_id: impl Into<String>,
        origin: Origin,
        augmentation_op: Option<AugmentationOp>,
        operation_type: Option<OperationType>,
    ) -> Result<Self> {
        let mut record = SimplificationRecord {
            record_id: String::new(),
            source_id: source_id.into(),
            source_text: source_text.into(),
            output_text: output_text.into(),
            system_id: system_id.into(),
            origin,
            augmentation_op,
            operation_type,
        };
        record.refresh_id();
        record.check()?;
        Ok(record)
    }

    pub fn computed_id(&self) -> String {
        content_id(
            &self.source_text,
            &self.output_text,
            &self.system_id,
            self.origin,
            self.augmentation_op,
        )
    }

    /// Recompute record_id from content; call after mutating hashed fields.
    pub fn refresh_id(&mut self) {
        self.record_id = self.computed_id();
    }

    /// Verify field consistency and that record_id matches the content hash.
    pub fn check(&self) -> Result<()> {
        self.validate().map_err(|m| Error::invalid("record", m))
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.source_id.trim().is_empty() {
            return Err("source_id is empty".into());
        }
        if self.source_text.trim().is_empty() {
            return Err("source_text is empty".into());
        }
        if self.output_text.trim().is_empty() {
            return Err("output_text is empty".into());
        }
        match (self.origin, self.augmentation_op) {
            (Origin::Augmented, None) => {
                return Err("origin is augmented but augmentation_op is missing".into())
            }
            (Origin::Model | Origin::Human, Some(_)) => {
                return Err("augmentation_op set on a non-augmented record".into())
            }
            _ => {}
        }
        let expected = self.computed_id();
        if self.record_id != expected {
            return Err(format!(
                "record_id {} does not match content hash {}",
                self.record_id, expected
            ));
        }
        Ok(())
    }
}

/// References available for one source sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceBundle {
    pub source_id: String,
    pub references: Vec<String>,
}

impl ReferenceBundle {
    fn check(&self) -> std::result::Result<(), String> {
        if self.source_id.trim().is_empty() {
            return Err("source_id is empty".into());
        }
        if self.references.is_empty() {
            return Err("references is empty".into());
        }
        if self.references.iter().any(|r| r.trim().is_empty()) {
            return Err("references contains an empty entry".into());
        }
        Ok(())
    }
}

/// Human quality aspect a rating was collected for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aspect {
    Overall,
    Adequacy,
    Fluency,
    Simplicity,
}

impl Aspect {
    pub fn as_str(self) -> &'static str {
        match self {
            Aspect::Overall => "overall",
            Aspect::Adequacy => "adequacy",
            Aspect::Fluency => "fluency",
            Aspect::Simplicity => "simplicity",
        }
    }
}

/// Per-annotator scores for one record under one aspect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub record_id: String,
    pub aspect: Aspect,
    pub rater_scores: Vec<f64>,
    pub scale_max: f64,
}

impl RatingRecord {
    /// Mean of the per-annotator scores.
    pub fn aggregate(&self) -> Result<f64> {
        if self.rater_scores.is_empty() {
            return Err(Error::invalid("rater_scores", "empty".to_string()));
        }
        Ok(self.rater_scores.iter().sum::<f64>() / self.rater_scores.len() as f64)
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.record_id.trim().is_empty() {
            return Err("record_id is empty".into());
        }
        if self.rater_scores.is_empty() {
            return Err("rater_scores is empty".into());
        }
        if self.scale_max.is_nan() || self.scale_max <= 0.0 {
            return Err("scale_max must be positive".into());
        }
        for &s in &self.rater_scores {
            if !s.is_finite() || s < 0.0 || s > self.scale_max {
                return Err(format!(
                    "rater score {s} outside [0, {}]",
                    self.scale_max
                ));
            }
        }
        Ok(())
    }
}

/// Disjoint train/dev/test assignment of source ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSplit {
    pub seed: u64,
    pub ratio: (usize, usize, usize),
    pub train: BTreeSet<String>,
    pub dev: BTreeSet<String>,
    pub test: BTreeSet<String>,
}

impl CorpusSplit {
    /// Borrowing partition of records by their source_id's split membership.
    /// Records with a source id not in the split land nowhere.
    pub fn partition<'a>(
        &self,
        records: &'a [SimplificationRecord],
    ) -> (
        Vec<&'a SimplificationRecord>,
        Vec<&'a SimplificationRecord>,
        Vec<&'a SimplificationRecord>,
    ) {
        let mut train = Vec::new();
        let mut dev = Vec::new();
        let mut test = Vec::new();
        for r in records {
            if self.train.contains(&r.source_id) {
                train.push(r);
            } else if self.dev.contains(&r.source_id) {
                dev.push(r);
            } else if self.test.contains(&r.source_id) {
                test.push(r);
            }
        }
        (train, dev, test)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)
            .map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::malformed(path, 1, e.to_string()))
    }
}

/// Deterministically split records into train/dev/test groups by source id.
///
/// Distinct source ids are sorted, shuffled with a seeded generator, and
/// allocated by largest remainder so group sizes are as close to the ratio
/// as integers allow. All records sharing a source id stay together.
pub fn split_by_source(
    records: &[SimplificationRecord],
    ratio: (usize, usize, usize),
    seed: u64,
) -> Result<CorpusSplit> {
    let (r_train, r_dev, r_test) = ratio;
    if r_train == 0 || r_dev == 0 || r_test == 0 {
        return Err(Error::invalid("ratio", "all parts must be positive".to_string()));
    }
    let parts = r_train + r_dev + r_test;
    let mut ids: Vec<String> = records
        .iter()
        .map(|r| r.source_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if ids.len() < parts {
        return Err(Error::InsufficientSources {
            needed: parts,
            found: ids.len(),
        });
    }
    let mut rng = rng_from_seed(seed);
    ids.shuffle(&mut rng);

    let n = ids.len();
    let weights = [r_train, r_dev, r_test];
    let mut counts = [0usize; 3];
    let mut remainders = [0usize; 3];
    for i in 0..3 {
        counts[i] = n * weights[i] / parts;
        remainders[i] = n * weights[i] % parts;
    }
    let mut leftover = n - counts.iter().sum::<usize>();
    // Largest remainder first; ties go to the earlier group.
    let mut order = [0usize, 1, 2];
    order.sort_by_key(|&i| (std::cmp::Reverse(remainders[i]), i));
    for &i in &order {
        if leftover == 0 {
            break;
        }
        counts[i] += 1;
        leftover -= 1;
    }

    let train: BTreeSet<String> = ids[..counts[0]].iter().cloned().collect();
    let dev: BTreeSet<String> = ids[counts[0]..counts[0] + counts[1]].iter().cloned().collect();
    let test: BTreeSet<String> = ids[counts[0] + counts[1]..].iter().cloned().collect();
    Ok(CorpusSplit {
        seed,
        ratio,
        train,
        dev,
        test,
    })
}

// ---------------------------------------------------------------------------
// Seeded randomness
// ---------------------------------------------------------------------------

/// The pipeline's generator: fixed-algorithm, platform-independent.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent sub-seed for a named pipeline step.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Generator keyed on (seed, record_id) so a record's randomness is stable
/// no matter what other records exist in the corpus.
pub fn record_rng(seed: u64, record_id: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(record_id.as_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

// ---------------------------------------------------------------------------
// JSONL persistence
// ---------------------------------------------------------------------------

fn read_jsonl<T, F>(path: &Path, mut fixup: F) -> Result<Vec<T>>
where
    T: serde::de::DeserializeOwned,
    F: FnMut(&mut T) -> std::result::Result<(), String>,
{
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut value: T = serde_json::from_str(&line)
            .map_err(|e| Error::malformed(path, idx + 1, e.to_string()))?;
        fixup(&mut value).map_err(|m| Error::malformed(path, idx + 1, m))?;
        out.push(value);
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Load simplification records from a JSONL file. A missing record_id is
/// computed from content; a present one is validated against content.
pub fn load_records(path: &Path) -> Result<Vec<SimplificationRecord>> {
    read_jsonl(path, |r: &mut SimplificationRecord| {
        if r.record_id.is_empty() {
            r.refresh_id();
        }
        r.validate()
    })
}

pub fn save_records(path: &Path, records: &[SimplificationRecord]) -> Result<()> {
    write_jsonl(path, records)
}

pub fn load_references(path: &Path) -> Result<Vec<ReferenceBundle>> {
    read_jsonl(path, |b: &mut ReferenceBundle| b.check())
}

pub fn save_references(path: &Path, bundles: &[ReferenceBundle]) -> Result<()> {
    write_jsonl(path, bundles)
}

pub fn load_ratings(path: &Path) -> Result<Vec<RatingRecord>> {
    read_jsonl(path, |r: &mut RatingRecord| r.check())
}

pub fn save_ratings(path: &Path, ratings: &[RatingRecord]) -> Result<()> {
    write_jsonl(path, ratings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn record(source_id: &str, source: &str, output: &str) -> SimplificationRecord {
        SimplificationRecord::new(
            source_id,
            source,
            output,
            "sys-a",
            Origin::Model,
            None,
            Some(OperationType::Paraphrase),
        )
        .unwrap()
    }

    #[test]
    fn identical_content_gets_identical_id() {
        let a = record("s1", "The cat sat.", "Cat sat.");
        let b = record("s1", "The cat sat.", "Cat sat.");
        assert_eq!(a.record_id, b.record_id);
        // source_id is provenance, not content
        let c = record("s2", "The cat sat.", "Cat sat.");
        assert_eq!(a.record_id, c.record_id);
    }

    #[test]
    fn single_character_change_changes_id() {
        let a = record("s1", "The cat sat.", "Cat sat.");
        let b = record("s1", "The cat sat.", "Cat sat!");
        assert_ne!(a.record_id, b.record_id);
    }

    #[test]
    fn whitespace_normalization_in_hash() {
        let a = record("s1", "The  cat\tsat.", "Cat sat.");
        let b = record("s1", "The cat sat.", "Cat sat.");
        assert_eq!(a.record_id, b.record_id);
    }

    #[test]
    fn augmentation_op_requires_augmented_origin() {
        let err = SimplificationRecord::new(
            "s1",
            "a b",
            "a",
            "sys",
            Origin::Model,
            Some(AugmentationOp::Deletion),
            None,
        )
        .unwrap_err();
        assert!(err.to_string().contains("augmentation_op"));

        let err = SimplificationRecord::new(
            "s1", "a b", "a", "sys", Origin::Augmented, None, None,
        )
        .unwrap_err();
        assert!(err.to_string().contains("augmentation_op"));
    }

    #[test]
    fn empty_texts_rejected() {
        assert!(SimplificationRecord::new("s1", "  ", "out", "sys", Origin::Model, None, None)
            .is_err());
        assert!(SimplificationRecord::new("s1", "src", "\n", "sys", Origin::Model, None, None)
            .is_err());
    }

    #[test]
    fn jsonl_round_trip_is_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.jsonl");
        let p2 = dir.path().join("b.jsonl");
        let records = vec![
            record("s1", "The cat sat on the mat.", "Cat sat."),
            SimplificationRecord::new(
                "s2",
                "A complicated sentence.",
                "sentence complicated A.",
                "sys-a",
                Origin::Augmented,
                Some(AugmentationOp::Scrambling),
                None,
            )
            .unwrap(),
        ];
        save_records(&p1, &records).unwrap();
        let loaded = load_records(&p1).unwrap();
        assert_eq!(loaded, records);
        save_records(&p2, &loaded).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn load_fills_missing_record_id() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        std::fs::write(
            &p,
            r#"{"source_id":"s1","source_text":"a b","output_text":"a","system_id":"sys","origin":"model"}"#,
        )
        .unwrap();
        let loaded = load_records(&p).unwrap();
        assert_eq!(loaded[0].record_id, loaded[0].computed_id());
    }

    #[test]
    fn malformed_line_reports_line_number_and_field() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        let good = serde_json::to_string(&record("s1", "a b", "a")).unwrap();
        let bad = r#"{"source_id":"s2","source_text":"c d","system_id":"sys","origin":"model"}"#;
        std::fs::write(&p, format!("{good}\n{bad}\n{good}\n")).unwrap();
        let err = load_records(&p).unwrap_err().to_string();
        assert!(err.contains(":2:"), "error should name line 2: {err}");
        assert!(err.contains("output_text"), "error should name the field: {err}");
    }

    #[test]
    fn tampered_record_id_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        let mut r = record("s1", "a b", "a");
        r.record_id = "deadbeef".into();
        std::fs::write(&p, format!("{}\n", serde_json::to_string(&r).unwrap())).unwrap();
        let err = load_records(&p).unwrap_err().to_string();
        assert!(err.contains("does not match content hash"), "{err}");
    }

    #[test]
    fn empty_file_loads_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.jsonl");
        std::fs::write(&p, "").unwrap();
        assert!(load_records(&p).unwrap().is_empty());
    }

    #[test]
    fn rating_aggregation() {
        let r = RatingRecord {
            record_id: "r".into(),
            aspect: Aspect::Overall,
            rater_scores: vec![80.0, 90.0, 100.0],
            scale_max: 100.0,
        };
        assert_eq!(r.aggregate().unwrap(), 90.0);
        let single = RatingRecord {
            rater_scores: vec![50.0],
            ..r.clone()
        };
        assert_eq!(single.aggregate().unwrap(), 50.0);
        let pair = RatingRecord {
            rater_scores: vec![0.0, 100.0],
            ..r
        };
        assert_eq!(pair.aggregate().unwrap(), 50.0);
    }

    #[test]
    fn rating_validation_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ratings.jsonl");
        std::fs::write(
            &p,
            r#"{"record_id":"r","aspect":"overall","rater_scores":[120.0],"scale_max":100.0}"#,
        )
        .unwrap();
        assert!(load_ratings(&p).is_err());
    }

    fn corpus_with_sources(n: usize) -> Vec<SimplificationRecord> {
        (0..n)
            .map(|i| record(&format!("src-{i:03}"), &format!("sentence number {i}."), "short."))
            .collect()
    }

    #[test]
    fn split_60_sources_is_40_10_10() {
        let split = split_by_source(&corpus_with_sources(60), (4, 1, 1), 7).unwrap();
        assert_eq!(split.train.len(), 40);
        assert_eq!(split.dev.len(), 10);
        assert_eq!(split.test.len(), 10);
    }

    #[test]
    fn split_61_sources_largest_remainder() {
        let split = split_by_source(&corpus_with_sources(61), (4, 1, 1), 7).unwrap();
        assert_eq!(
            (split.train.len(), split.dev.len(), split.test.len()),
            (41, 10, 10)
        );
    }

    #[test]
    fn split_keeps_shared_sources_together() {
        let mut records = corpus_with_sources(12);
        for i in 0..12 {
            records.push(record(
                &format!("src-{i:03}"),
                &format!("sentence number {i}."),
                &format!("variant {i}."),
            ));
        }
        let split = split_by_source(&records, (4, 1, 1), 3).unwrap();
        let (train, dev, test) = split.partition(&records);
        assert_eq!(train.len() + dev.len() + test.len(), records.len());
        let train_ids: HashSet<_> = train.iter().map(|r| &r.source_id).collect();
        let dev_ids: HashSet<_> = dev.iter().map(|r| &r.source_id).collect();
        let test_ids: HashSet<_> = test.iter().map(|r| &r.source_id).collect();
        assert!(train_ids.is_disjoint(&dev_ids));
        assert!(train_ids.is_disjoint(&test_ids));
        assert!(dev_ids.is_disjoint(&test_ids));
    }

    #[test]
    fn split_too_few_sources_errors() {
        let err = split_by_source(&corpus_with_sources(5), (4, 1, 1), 1).unwrap_err();
        assert!(matches!(err, Error::InsufficientSources { needed: 6, found: 5 }));
    }

    #[test]
    fn split_is_seed_deterministic_and_seed_sensitive() {
        let records = corpus_with_sources(30);
        let a = split_by_source(&records, (4, 1, 1), 11).unwrap();
        let b = split_by_source(&records, (4, 1, 1), 11).unwrap();
        assert_eq!(a, b);
        let c = split_by_source(&records, (4, 1, 1), 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn split_partitions_all_sources() {
        for seed in 0..20u64 {
            let n = 6 + (seed as usize * 7) % 80;
            let records = corpus_with_sources(n);
            let split = split_by_source(&records, (4, 1, 1), seed).unwrap();
            assert_eq!(split.train.len() + split.dev.len() + split.test.len(), n);
            assert!(split.train.is_disjoint(&split.dev));
            assert!(split.train.is_disjoint(&split.test));
            assert!(split.dev.is_disjoint(&split.test));
            let sizes = [split.train.len(), split.dev.len(), split.test.len()];
            // largest-remainder allocation never deviates more than 1 from the quota
            let quotas = [n as f64 * 4.0 / 6.0, n as f64 / 6.0, n as f64 / 6.0];
            for (size, quota) in sizes.iter().zip(quotas) {
                assert!((*size as f64 - quota).abs() < 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn derive_seed_separates_labels() {
        assert_ne!(derive_seed(1, "augment"), derive_seed(1, "simplify"));
        assert_eq!(derive_seed(1, "augment"), derive_seed(1, "augment"));
    }

    #[test]
    fn record_rng_is_stable_per_record() {
        use rand::Rng;
        let mut a = record_rng(42, "abc");
        let mut b = record_rng(42, "abc");
        let mut c = record_rng(42, "abd");
        let (va, vb, vc) = (a.random::<u64>(), b.random::<u64>(), c.random::<u64>());
        assert_eq!(va, vb);
        assert_ne!(va, vc);
    }

    #[test]
    fn split_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("split.json");
        let split = split_by_source(&corpus_with_sources(18), (4, 1, 1), 5).unwrap();
        split.save(&p).unwrap();
        assert_eq!(CorpusSplit::load(&p).unwrap(), split);
    }
}
