//! Per-record supervision-signal vectors for each curriculum stage, plus
//! dataset normalization with recorded statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::corpus::{ReferenceBundle, SimplificationRecord};
use crate::error::{Error, Result};
use crate::providers::ProviderRegistry;
use crate::textstats;

pub const STAGE1_SIGNALS: [&str; 9] = [
    "sbert_distance",
    "self_bleu",
    "self_simscore",
    "src_perplexity",
    "out_perplexity",
    "src_fkgl",
    "out_fkgl",
    "src_readability",
    "out_readability",
];

pub const STAGE2_SIGNALS: [&str; 12] = [
    "sbert_distance",
    "self_bleu",
    "self_simscore",
    "src_perplexity",
    "out_perplexity",
    "src_fkgl",
    "out_fkgl",
    "src_readability",
    "out_readability",
    "bleu",
    "sari",
    "simscore_vs_ref",
];

pub const BLEU_MAX_N: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Stage1,
    Stage2,
}

/// Which component of the similarity provider's (precision, recall, f1)
/// feeds the similarity-based signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityComponent {
    Precision,
    Recall,
    F1,
}

impl SimilarityComponent {
    fn pick(self, s: crate::providers::Similarity) -> f64 {
        match self {
            SimilarityComponent::Precision => s.precision,
            SimilarityComponent::Recall => s.recall,
            SimilarityComponent::F1 => s.f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalSuite {
    pub kind: SuiteKind,
    pub similarity_component: SimilarityComponent,
}

impl SignalSuite {
    pub fn stage1() -> Self {
        SignalSuite {
            kind: SuiteKind::Stage1,
            similarity_component: SimilarityComponent::F1,
        }
    }

    pub fn stage2() -> Self {
        SignalSuite {
            kind: SuiteKind::Stage2,
            similarity_component: SimilarityComponent::F1,
        }
    }

    pub fn signal_names(&self) -> &'static [&'static str] {
        match self.kind {
            SuiteKind::Stage1 => &STAGE1_SIGNALS,
            SuiteKind::Stage2 => &STAGE2_SIGNALS,
        }
    }

    pub fn len(&self) -> usize {
        self.signal_names().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Signal name → value. BTreeMap keeps serialization order stable.
pub type SignalVector = BTreeMap<String, f64>;

fn signal_err(signal: &'static str, record_id: &str, source: Error) -> Error {
    Error::Signal {
        signal,
        record_id: record_id.to_string(),
        source: Box::new(source),
    }
}

fn finite(signal: &'static str, record_id: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(signal_err(
            signal,
            record_id,
            Error::ProviderFault(format!("non-finite value {value}")),
        ))
    }
}

/// Compute the suite's signals for one record. Stage-2 suites require a
/// reference bundle; reference-based signals use all references jointly
/// (similarity-vs-reference takes the max over references).
pub fn compute_signals(
    record: &SimplificationRecord,
    refs: Option<&ReferenceBundle>,
    suite: &SignalSuite,
    providers: &ProviderRegistry,
) -> Result<SignalVector> {
    let rid = record.record_id.as_str();
    let src = record.source_text.as_str();
    let out = record.output_text.as_str();
    let mut v = SignalVector::new();

    let distance = providers
        .embedding_distance(src, out)
        .map_err(|e| signal_err("sbert_distance", rid, e))?;
    v.insert("sbert_distance".into(), finite("sbert_distance", rid, distance)?);

    let self_bleu = textstats::bleu(out, &[src], BLEU_MAX_N)
        .map_err(|e| signal_err("self_bleu", rid, e))?;
    v.insert("self_bleu".into(), finite("self_bleu", rid, self_bleu)?);

    let self_sim = providers
        .similarity(out, src)
        .map_err(|e| signal_err("self_simscore", rid, e))?;
    v.insert(
        "self_simscore".into(),
        finite("self_simscore", rid, suite.similarity_component.pick(self_sim))?,
    );

    let src_ppl = providers
        .perplexity(src)
        .map_err(|e| signal_err("src_perplexity", rid, e))?;
    v.insert("src_perplexity".into(), finite("src_perplexity", rid, src_ppl)?);

    let out_ppl = providers
        .perplexity(out)
        .map_err(|e| signal_err("out_perplexity", rid, e))?;
    v.insert("out_perplexity".into(), finite("out_perplexity", rid, out_ppl)?);

    let src_fkgl = textstats::fkgl(src).map_err(|e| signal_err("src_fkgl", rid, e))?;
    v.insert("src_fkgl".into(), finite("src_fkgl", rid, src_fkgl)?);

    let out_fkgl = textstats::fkgl(out).map_err(|e| signal_err("out_fkgl", rid, e))?;
    v.insert("out_fkgl".into(), finite("out_fkgl", rid, out_fkgl)?);

    let src_read = providers
        .readability(src)
        .map_err(|e| signal_err("src_readability", rid, e))?;
    v.insert("src_readability".into(), finite("src_readability", rid, src_read)?);

    let out_read = providers
        .readability(out)
        .map_err(|e| signal_err("out_readability", rid, e))?;
    v.insert("out_readability".into(), finite("out_readability", rid, out_read)?);

    if suite.kind == SuiteKind::Stage2 {
        let bundle = refs.ok_or_else(|| Error::MissingReferences {
            record_id: rid.to_string(),
            source_id: record.source_id.clone(),
        })?;

        let bleu = textstats::bleu(out, &bundle.references, BLEU_MAX_N)
            .map_err(|e| signal_err("bleu", rid, e))?;
        v.insert("bleu".into(), finite("bleu", rid, bleu)?);

        let sari = textstats::sari(src, out, &bundle.references)
            .map_err(|e| signal_err("sari", rid, e))?;
        v.insert("sari".into(), finite("sari", rid, sari)?);

        let mut best = f64::NEG_INFINITY;
        for reference in &bundle.references {
            let s = providers
                .similarity(out, reference)
                .map_err(|e| signal_err("simscore_vs_ref", rid, e))?;
            best = best.max(suite.similarity_component.pick(s));
        }
        v.insert(
            "simscore_vs_ref".into(),
            finite("simscore_vs_ref", rid, best)?,
        );
    }

    debug_assert_eq!(v.len(), suite.len());
    Ok(v)
}

/// Per-signal mean and population standard deviation, with the names of
/// degenerate (zero-variance) columns that were zeroed out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub means: BTreeMap<String, f64>,
    pub stds: BTreeMap<String, f64>,
    pub degenerate: Vec<String>,
}

const DEGENERATE_STD: f64 = 1e-12;

/// Signal vectors for a set of records, in insertion order, with optional
/// normalization statistics once normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTable {
    pub suite: SignalSuite,
    pub rows: IndexMap<String, SignalVector>,
    pub normalization: Option<NormalizationStats>,
}

impl SignalTable {
    pub fn new(suite: SignalSuite) -> Self {
        SignalTable {
            suite,
            rows: IndexMap::new(),
            normalization: None,
        }
    }

    /// Compute signals for every record. For stage-2 suites, `references`
    /// must cover every record's source_id.
    pub fn compute(
        records: &[SimplificationRecord],
        references: Option<&BTreeMap<String, ReferenceBundle>>,
        suite: SignalSuite,
        providers: &ProviderRegistry,
    ) -> Result<Self> {
        let mut table = SignalTable::new(suite);
        for record in records {
            let bundle = references.and_then(|m| m.get(&record.source_id));
            let vector = compute_signals(record, bundle, &suite, providers)?;
            table.rows.insert(record.record_id.clone(), vector);
        }
        Ok(table)
    }

    pub fn get(&self, record_id: &str) -> Result<&SignalVector> {
        self.rows.get(record_id).ok_or_else(|| Error::MissingSignal {
            record_id: record_id.to_string(),
            signal: "<all>".to_string(),
        })
    }

    /// Mean/population-stddev per signal over `subset` row ids (all rows if
    /// None). Needs at least 2 contributing rows.
    pub fn compute_stats(&self, subset: Option<&BTreeSet<String>>) -> Result<NormalizationStats> {
        let selected: Vec<&SignalVector> = self
            .rows
            .iter()
            .filter(|(id, _)| subset.is_none_or(|s| s.contains(*id)))
            .map(|(_, v)| v)
            .collect();
        if selected.len() < 2 {
            return Err(Error::invalid(
                "signal_table",
                format!("need at least 2 rows to normalize, have {}", selected.len()),
            ));
        }
        let n = selected.len() as f64;
        let mut means = BTreeMap::new();
        let mut stds = BTreeMap::new();
        let mut degenerate = Vec::new();
        for &name in self.suite.signal_names() {
            let mut sum = 0.0;
            for row in &selected {
                sum += row.get(name).ok_or_else(|| Error::MissingSignal {
                    record_id: "<stats>".to_string(),
                    signal: name.to_string(),
                })?;
            }
            let mean = sum / n;
            let var = selected
                .iter()
                .map(|row| {
                    let d = row[name] - mean;
                    d * d
                })
                .sum::<f64>()
                / n;
            let std = var.sqrt();
            if std < DEGENERATE_STD {
                degenerate.push(name.to_string());
            }
            means.insert(name.to_string(), mean);
            stds.insert(name.to_string(), std);
        }
        Ok(NormalizationStats {
            means,
            stds,
            degenerate,
        })
    }

    /// Z-score every cell with `stats`. Degenerate columns become zeros.
    /// On an already-normalized table the stored statistics are composed
    /// with `stats`, so they always map the original scale to the current
    /// values; normalizing twice is therefore a numeric no-op. Returns the
    /// degenerate column names as warnings.
    pub fn normalize_with(&mut self, stats: &NormalizationStats) -> Result<Vec<String>> {
        for (record_id, row) in &mut self.rows {
            for &name in self.suite.signal_names() {
                let value = row.get(name).copied().ok_or_else(|| Error::MissingSignal {
                    record_id: record_id.clone(),
                    signal: name.to_string(),
                })?;
                let mean = stats.means[name];
                let std = stats.stds[name];
                let z = if std < DEGENERATE_STD {
                    0.0
                } else {
                    (value - mean) / std
                };
                row.insert(name.to_string(), z);
            }
        }
        self.normalization = Some(match self.normalization.take() {
            None => stats.clone(),
            Some(prior) => compose_stats(&prior, stats),
        });
        Ok(stats.degenerate.clone())
    }

    /// Normalize with statistics over all rows.
    pub fn normalize(&mut self) -> Result<Vec<String>> {
        let stats = self.compute_stats(None)?;
        self.normalize_with(&stats)
    }

    /// Map a normalized value back to the signal's original scale.
    pub fn denormalize(&self, signal: &str, value: f64) -> Result<f64> {
        let stats = self.normalization.as_ref().ok_or_else(|| {
            Error::invalid("signal_table", "table is not normalized".to_string())
        })?;
        let mean = stats.means.get(signal).ok_or_else(|| Error::MissingSignal {
            record_id: "<denormalize>".to_string(),
            signal: signal.to_string(),
        })?;
        let std = stats.stds[signal];
        Ok(value * std + mean)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Header<'a> {
            format: &'static str,
            suite: &'a SignalSuite,
            normalization: &'a Option<NormalizationStats>,
        }
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let header = Header {
            format: TABLE_FORMAT,
            suite: &self.suite,
            normalization: &self.normalization,
        };
        let line = serde_json::to_string(&header).map_err(|e| Error::io(path, e.into()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
        for (record_id, signals) in &self.rows {
            let row = serde_json::json!({ "record_id": record_id, "signals": signals });
            let line = serde_json::to_string(&row).map_err(|e| Error::io(path, e.into()))?;
            writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            format: String,
            suite: SignalSuite,
            normalization: Option<NormalizationStats>,
        }
        #[derive(Deserialize)]
        struct Row {
            record_id: String,
            signals: SignalVector,
        }
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines().enumerate();
        let (_, header_line) = lines
            .next()
            .ok_or_else(|| Error::malformed(path, 1, "missing header line"))?;
        let header_line = header_line.map_err(|e| Error::io(path, e))?;
        let header: Header = serde_json::from_str(&header_line)
            .map_err(|e| Error::malformed(path, 1, e.to_string()))?;
        if header.format != TABLE_FORMAT {
            return Err(Error::malformed(
                path,
                1,
                format!("unsupported table format {:?}", header.format),
            ));
        }
        let mut table = SignalTable::new(header.suite);
        table.normalization = header.normalization;
        for (idx, line) in lines {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Row = serde_json::from_str(&line)
                .map_err(|e| Error::malformed(path, idx + 1, e.to_string()))?;
            for &name in table.suite.signal_names() {
                if !row.signals.contains_key(name) {
                    return Err(Error::malformed(
                        path,
                        idx + 1,
                        format!("record {} is missing signal {name}", row.record_id),
                    ));
                }
            }
            table.rows.insert(row.record_id, row.signals);
        }
        Ok(table)
    }
}

const TABLE_FORMAT: &str = "signal-table-v1";

/// If `prior` mapped raw values x to z = (x - m1)/s1 and `next` maps z to
/// z' = (z - m2)/s2, the composition maps x to z' with mean m1 + s1*m2 and
/// stddev s1*s2.
fn compose_stats(prior: &NormalizationStats, next: &NormalizationStats) -> NormalizationStats {
    let mut means = BTreeMap::new();
    let mut stds = BTreeMap::new();
    let mut degenerate: Vec<String> = prior.degenerate.clone();
    for (name, &m1) in &prior.means {
        let s1 = prior.stds[name];
        let m2 = next.means[name];
        let s2 = next.stds[name];
        means.insert(name.clone(), m1 + s1 * m2);
        stds.insert(name.clone(), s1 * s2);
    }
    for name in &next.degenerate {
        if !degenerate.contains(name) {
            degenerate.push(name.clone());
        }
    }
    degenerate.sort();
    NormalizationStats {
        means,
        stds,
        degenerate,
    }
}
