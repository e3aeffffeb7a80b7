//! Declarative pipeline driving the whole system from one config file and
//! one top-level seed: corpus synthesis, three-stage training, scoring,
//! correlation evaluation, and classical baselines.
//!
//! Every command is deterministic: identical config + inputs give
//! byte-identical outputs. Inputs are never mutated; outputs land only
//! under the configured output directory (or an explicitly given path).

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augmentation::{augment_corpus, AugmentationPolicy};
use crate::corpus::{
    derive_seed, load_ratings, load_records, load_references, save_records, split_by_source,
    Aspect, CorpusSplit, Origin, ReferenceBundle, SimplificationRecord,
};
use crate::curriculum::{
    run_finetune, run_stage1, run_stage2, StageConfig, StageCorpus, StageKind, TrainingReport,
};
use crate::error::{Error, Result};
use crate::evaluation::{build_report, CorrelationReport, EvalConfig, FilterParams};
use crate::model::{MetricModel, Vocab};
use crate::providers::{ProviderRegistry, RemoteProvider, FALLBACK_EMBED_DIM};
use crate::signals::{SignalSuite, SignalTable, BLEU_MAX_N};
use crate::textstats::{self, TOKENIZER_VERSION};

/// Environment variable that overrides the provider cache directory.
pub const CACHE_DIR_ENV: &str = "SIMETRIC_CACHE_DIR";
const CACHE_FILE_NAME: &str = "providers.cache";

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    /// Plain-text source sentences, one per line (synthesize input).
    pub sources: Option<PathBuf>,
    /// Simplification records, JSON lines. Defaults to the synthesize
    /// output under `output_dir` when absent.
    pub records: Option<PathBuf>,
    /// Normalized stage-1 signal table. Defaults like `records`.
    pub signals: Option<PathBuf>,
    /// Train/dev/test split. Defaults like `records`.
    pub split: Option<PathBuf>,
    pub references: Option<PathBuf>,
    pub ratings: Option<PathBuf>,
    /// Provider response cache file; no caching when absent.
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub d_model: usize,
    pub n_layers: usize,
    pub ffn_hidden: usize,
    pub max_len: usize,
    pub vocab_size: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        let encoder = crate::model::EncoderConfig::default();
        ModelSection {
            d_model: encoder.d_model,
            n_layers: encoder.n_layers,
            ffn_hidden: encoder.ffn_hidden,
            max_len: encoder.max_len,
            vocab_size: 8192,
        }
    }
}

impl ModelSection {
    pub fn encoder_config(&self) -> crate::model::EncoderConfig {
        crate::model::EncoderConfig {
            d_model: self.d_model,
            n_layers: self.n_layers,
            ffn_hidden: self.ffn_hidden,
            max_len: self.max_len,
        }
    }
}

/// One provider slot: the built-in fallback or a spawned subprocess
/// speaking line-delimited JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProviderChoice {
    Named(String),
    Remote {
        command: Vec<String>,
        #[serde(default = "default_provider_version")]
        version: String,
        #[serde(default = "default_embed_dim")]
        dim: usize,
    },
}

fn default_provider_version() -> String {
    "1".to_string()
}

fn default_embed_dim() -> usize {
    FALLBACK_EMBED_DIM
}

impl Default for ProviderChoice {
    fn default() -> Self {
        ProviderChoice::Named("fallback".to_string())
    }
}

impl ProviderChoice {
    fn validate(&self, slot: &str) -> Result<()> {
        match self {
            ProviderChoice::Named(name) if name == "fallback" => Ok(()),
            ProviderChoice::Named(name) => Err(Error::Config(format!(
                "provider slot {slot}: unknown provider {name:?}; use \"fallback\" or a remote table"
            ))),
            ProviderChoice::Remote { command, dim, .. } => {
                if command.is_empty() {
                    return Err(Error::Config(format!(
                        "provider slot {slot}: remote command is empty"
                    )));
                }
                if *dim == 0 {
                    return Err(Error::Config(format!(
                        "provider slot {slot}: embedding dim must be positive"
                    )));
                }
                Ok(())
            }
        }
    }

    fn is_remote(&self) -> bool {
        matches!(self, ProviderChoice::Remote { .. })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProvidersSection {
    pub embedding: ProviderChoice,
    pub perplexity: ProviderChoice,
    pub readability: ProviderChoice,
    pub similarity: ProviderChoice,
    pub simplifier: ProviderChoice,
}

impl ProvidersSection {
    fn validate(&self) -> Result<()> {
        self.embedding.validate("embedding")?;
        self.perplexity.validate("perplexity")?;
        self.readability.validate("readability")?;
        self.similarity.validate("similarity")?;
        self.simplifier.validate("simplifier")
    }
}

/// Per-stage overrides on top of the built-in stage defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageSection {
    pub max_epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
    pub early_stop_patience: Option<usize>,
    pub eval_every: Option<usize>,
}

impl StageSection {
    fn resolve(&self, mut base: StageConfig, seed: u64) -> StageConfig {
        if let Some(v) = self.max_epochs {
            base.max_epochs = v;
        }
        if let Some(v) = self.learning_rate {
            base.learning_rate = v;
        }
        if let Some(v) = self.batch_size {
            base.batch_size = v;
        }
        if let Some(v) = self.early_stop_patience {
            base.early_stop_patience = v;
        }
        if self.eval_every.is_some() {
            base.eval_every = self.eval_every;
        }
        base.seed = seed;
        base
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    /// Rating aspect used for fine-tuning and correlation reports.
    pub aspect: Aspect,
    pub agreement_threshold: f64,
    pub min_raters_over_threshold: usize,
    /// Pearson r is only meaningful for corpora without several outputs
    /// per source; enable it explicitly for such datasets.
    pub pearson_enabled: bool,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        let filter = FilterParams::default();
        EvaluationSection {
            aspect: Aspect::Overall,
            agreement_threshold: filter.agreement_threshold,
            min_raters_over_threshold: filter.min_raters_over_threshold,
            pearson_enabled: false,
        }
    }
}

impl EvaluationSection {
    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            aspect: self.aspect,
            filter: FilterParams {
                agreement_threshold: self.agreement_threshold,
                min_raters_over_threshold: self.min_raters_over_threshold,
            },
            pearson_enabled: self.pearson_enabled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// The single top-level seed; everything else derives from it.
    pub seed: u64,
    #[serde(default = "default_num_runs")]
    pub num_runs: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Train/dev/test proportions for the source-level split.
    #[serde(default = "default_split_ratio")]
    pub split_ratio: [usize; 3],
    #[serde(default)]
    pub paths: PathsSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub augmentation: AugmentationPolicy,
    #[serde(default)]
    pub providers: ProvidersSection,
    #[serde(default)]
    pub stage1: StageSection,
    #[serde(default)]
    pub stage2: StageSection,
    #[serde(default)]
    pub finetune: StageSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
}

fn default_num_runs() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_split_ratio() -> [usize; 3] {
    [4, 1, 1]
}

impl PipelineConfig {
    /// Parse and validate a TOML config file, honoring the cache-directory
    /// environment override.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        // e.message() is the single-line diagnostic without the snippet
        let mut config: PipelineConfig = toml::from_str(&raw)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
        if let Ok(dir) = std::env::var(CACHE_DIR_ENV) {
            config.paths.cache = Some(PathBuf::from(dir).join(CACHE_FILE_NAME));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_runs == 0 {
            return Err(Error::Config("num_runs must be at least 1".to_string()));
        }
        if self.split_ratio.contains(&0) {
            return Err(Error::Config(
                "split_ratio parts must all be positive".to_string(),
            ));
        }
        if self.model.vocab_size == 0 {
            return Err(Error::Config("vocab_size must be positive".to_string()));
        }
        self.model
            .encoder_config()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.augmentation
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.providers.validate()?;
        for (label, section, base) in [
            ("stage1", &self.stage1, StageConfig::stage1()),
            ("stage2", &self.stage2, StageConfig::stage2()),
            ("finetune", &self.finetune, StageConfig::finetune()),
        ] {
            section
                .resolve(base, self.seed)
                .validate()
                .map_err(|e| Error::Config(format!("{label}: {e}")))?;
        }
        if self.evaluation.agreement_threshold < 0.0
            || !self.evaluation.agreement_threshold.is_finite()
        {
            return Err(Error::Config(
                "agreement_threshold must be finite and non-negative".to_string(),
            ));
        }
        Ok(())
    }

    pub fn records_path(&self) -> PathBuf {
        self.paths
            .records
            .clone()
            .unwrap_or_else(|| self.output_dir.join("records.jsonl"))
    }

    pub fn signals_path(&self) -> PathBuf {
        self.paths
            .signals
            .clone()
            .unwrap_or_else(|| self.output_dir.join("signals-stage1.jsonl"))
    }

    pub fn split_path(&self) -> PathBuf {
        self.paths
            .split
            .clone()
            .unwrap_or_else(|| self.output_dir.join("split.json"))
    }
}

fn require_exists(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("{what} file not found"),
            ),
        ))
    }
}

// ---------------------------------------------------------------------------
// Provider wiring
// ---------------------------------------------------------------------------

fn spawn_remote(choice: &ProviderChoice) -> Result<RemoteProvider> {
    match choice {
        ProviderChoice::Remote {
            command,
            version,
            dim,
        } => RemoteProvider::spawn(command, version, *dim),
        ProviderChoice::Named(_) => unreachable!("spawn_remote on a fallback slot"),
    }
}

/// Registry per the config's provider section. The fallback perplexity
/// model is fit on `perplexity_corpus`.
pub fn build_registry<S: AsRef<str>>(
    config: &PipelineConfig,
    perplexity_corpus: &[S],
) -> Result<ProviderRegistry> {
    let mut registry = ProviderRegistry::fallback(perplexity_corpus);
    if config.providers.embedding.is_remote() {
        registry.set_embedding(Box::new(spawn_remote(&config.providers.embedding)?));
    }
    if config.providers.perplexity.is_remote() {
        registry.set_perplexity(Box::new(spawn_remote(&config.providers.perplexity)?));
    }
    if config.providers.readability.is_remote() {
        registry.set_readability(Box::new(spawn_remote(&config.providers.readability)?));
    }
    if config.providers.similarity.is_remote() {
        registry.set_similarity(Box::new(spawn_remote(&config.providers.similarity)?));
    }
    if config.providers.simplifier.is_remote() {
        registry.set_simplifier(Box::new(spawn_remote(&config.providers.simplifier)?));
    }
    if let Some(cache) = &config.paths.cache {
        if let Some(parent) = cache.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        registry = registry.with_cache_file(cache)?;
    }
    Ok(registry)
}

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSummary {
    pub sources: usize,
    pub records: usize,
    pub augmented: usize,
    pub records_path: PathBuf,
    pub signals_path: PathBuf,
    pub split_path: PathBuf,
    /// Degenerate (zero-variance) signal columns that were zeroed.
    pub warnings: Vec<String>,
}

fn read_source_lines(path: &Path) -> Result<Vec<String>> {
    require_exists(path, "sources")?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if !trimmed.is_empty() {
            lines.push(trimmed.to_string());
        }
    }
    if lines.is_empty() {
        return Err(Error::invalid(
            "sources",
            format!("{} contains no sentences", path.display()),
        ));
    }
    Ok(lines)
}

fn with_record_context(record_label: &str, error: Error) -> Error {
    match error {
        Error::ProviderFault(m) => Error::ProviderFault(format!("{record_label}: {m}")),
        Error::ProviderTransport(m) => Error::ProviderTransport(format!("{record_label}: {m}")),
        other => other,
    }
}

/// Run the simplifier over every source sentence, corrupt a seeded subset
/// of the outputs, compute the reference-free signal suite, z-score it
/// with train-split statistics, and write records + split + signal table.
pub fn cmd_synthesize(config: &PipelineConfig) -> Result<SynthesisSummary> {
    let sources_path = config.paths.sources.clone().ok_or_else(|| {
        Error::Config("synthesize needs paths.sources in the config".to_string())
    })?;
    let sources = read_source_lines(&sources_path)?;
    let registry = build_registry(config, &sources)?;

    let width = sources.len().to_string().len().max(4);
    let mut records = Vec::with_capacity(sources.len());
    for (i, text) in sources.iter().enumerate() {
        let source_id = format!("src-{:0width$}", i + 1);
        let seed = derive_seed(config.seed, &format!("simplify-{source_id}"));
        let output = registry
            .simplify(text, seed)
            .map_err(|e| with_record_context(&format!("source {source_id}"), e))?;
        records.push(SimplificationRecord::new(
            source_id,
            text.clone(),
            output,
            "simplifier",
            Origin::Model,
            None,
            None,
        )?);
    }

    let mut policy = config.augmentation.clone();
    policy.seed = derive_seed(config.seed, "augmentation");
    let records = augment_corpus(&records, &policy)?;
    let augmented = records
        .iter()
        .filter(|r| r.origin == Origin::Augmented)
        .count();

    let ratio = config.split_ratio;
    let split = split_by_source(
        &records,
        (ratio[0], ratio[1], ratio[2]),
        derive_seed(config.seed, "split"),
    )?;

    let mut table = SignalTable::compute(&records, None, SignalSuite::stage1(), &registry)?;
    let train_rows: BTreeSet<String> = records
        .iter()
        .filter(|r| split.train.contains(&r.source_id))
        .map(|r| r.record_id.clone())
        .collect();
    let stats = table.compute_stats(Some(&train_rows))?;
    let warnings = table.normalize_with(&stats)?;

    fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;
    let records_path = config.records_path();
    let signals_path = config.signals_path();
    let split_path = config.split_path();
    let outputs = [&records_path, &signals_path, &split_path];
    let written = (|| -> Result<()> {
        save_records(&records_path, &records)?;
        split.save(&split_path)?;
        table.save(&signals_path)
    })();
    if written.is_err() {
        for path in outputs {
            let _ = fs::remove_file(path);
        }
        written?;
    }

    Ok(SynthesisSummary {
        sources: sources.len(),
        records: records.len(),
        augmented,
        records_path,
        signals_path,
        split_path,
        warnings,
    })
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

pub fn stage_slug(stage: StageKind) -> &'static str {
    match stage {
        StageKind::Stage1 => "stage1",
        StageKind::Stage2 => "stage2",
        StageKind::Finetune => "finetune",
    }
}

pub fn parse_stage(name: &str) -> Result<StageKind> {
    match name {
        "stage1" => Ok(StageKind::Stage1),
        "stage2" => Ok(StageKind::Stage2),
        "finetune" => Ok(StageKind::Finetune),
        other => Err(Error::Config(format!(
            "unknown stage {other:?}; expected stage1, stage2 or finetune"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifacts {
    pub seed: u64,
    pub reports: BTreeMap<String, TrainingReport>,
    pub checkpoints: BTreeMap<String, PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageAggregate {
    pub mean_best_dev_loss: f64,
    /// Sample standard deviation across runs; 0 for a single run.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub stages: Vec<String>,
    pub runs: Vec<RunArtifacts>,
    pub aggregates: BTreeMap<String, StageAggregate>,
}

fn validate_stage_selection(stages: &[StageKind]) -> Result<()> {
    if stages.is_empty() {
        return Err(Error::Config("no stages requested".to_string()));
    }
    let order = |s: StageKind| match s {
        StageKind::Stage1 => 0,
        StageKind::Stage2 => 1,
        StageKind::Finetune => 2,
    };
    for pair in stages.windows(2) {
        if order(pair[0]) >= order(pair[1]) {
            return Err(Error::Config(
                "stages must be unique and in curriculum order (stage1, stage2, finetune)"
                    .to_string(),
            ));
        }
    }
    Ok(())
}

fn references_by_source(path: &Path) -> Result<BTreeMap<String, ReferenceBundle>> {
    let bundles = load_references(path)?;
    let mut map = BTreeMap::new();
    for bundle in bundles {
        if map.insert(bundle.source_id.clone(), bundle).is_some() {
            return Err(Error::invalid(
                "references",
                "duplicate source_id in references file".to_string(),
            ));
        }
    }
    Ok(map)
}

/// Stage-2 signals for the given records, z-scored with statistics from
/// the train rows only.
fn stage2_table(
    train: &[SimplificationRecord],
    dev: &[SimplificationRecord],
    references: &BTreeMap<String, ReferenceBundle>,
    registry: &ProviderRegistry,
) -> Result<SignalTable> {
    let mut all: Vec<SimplificationRecord> = Vec::with_capacity(train.len() + dev.len());
    all.extend(train.iter().cloned());
    all.extend(dev.iter().cloned());
    let mut table =
        SignalTable::compute(&all, Some(references), SignalSuite::stage2(), registry)?;
    let train_rows: BTreeSet<String> = train.iter().map(|r| r.record_id.clone()).collect();
    let stats = table.compute_stats(Some(&train_rows))?;
    table.normalize_with(&stats)?;
    Ok(table)
}

fn mean_and_spread(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Run the requested curriculum stages, once per seed in
/// `seed..seed+num_runs`, writing one checkpoint and one report per stage
/// per run plus an aggregate summary.
pub fn cmd_train(config: &PipelineConfig, stages: &[StageKind]) -> Result<TrainSummary> {
    validate_stage_selection(stages)?;

    // Every requested stage's inputs are checked before any training.
    let records_path = config.records_path();
    require_exists(&records_path, "records")?;
    let split_path = config.split_path();
    require_exists(&split_path, "split")?;
    if stages.contains(&StageKind::Stage1) {
        require_exists(&config.signals_path(), "signal table")?;
    }
    if stages.contains(&StageKind::Stage2) {
        let refs = config.paths.references.as_ref().ok_or_else(|| {
            Error::Config("stage2 needs paths.references in the config".to_string())
        })?;
        require_exists(refs, "references")?;
    }
    if stages.contains(&StageKind::Finetune) {
        let ratings = config.paths.ratings.as_ref().ok_or_else(|| {
            Error::Config("finetune needs paths.ratings in the config".to_string())
        })?;
        require_exists(ratings, "ratings")?;
    }

    let records = load_records(&records_path)?;
    let split = CorpusSplit::load(&split_path)?;
    let (train_refs, dev_refs, _) = split.partition(&records);
    let train: Vec<SimplificationRecord> = train_refs.into_iter().cloned().collect();
    let dev: Vec<SimplificationRecord> = dev_refs.into_iter().cloned().collect();
    if train.is_empty() || dev.is_empty() {
        return Err(Error::invalid(
            "split",
            "train and dev must both be non-empty".to_string(),
        ));
    }
    let corpus = StageCorpus {
        train: &train,
        dev: &dev,
    };

    let stage1_table = if stages.contains(&StageKind::Stage1) {
        Some(SignalTable::load(&config.signals_path())?)
    } else {
        None
    };
    let stage2_signals = if stages.contains(&StageKind::Stage2) {
        let references = references_by_source(config.paths.references.as_ref().unwrap())?;
        let source_texts: Vec<String> = unique_source_texts(&records);
        let registry = build_registry(config, &source_texts)?;
        Some(stage2_table(&train, &dev, &references, &registry)?)
    } else {
        None
    };
    let ratings = if stages.contains(&StageKind::Finetune) {
        Some(load_ratings(config.paths.ratings.as_ref().unwrap())?)
    } else {
        None
    };

    let vocab_texts: Vec<&str> = train
        .iter()
        .chain(dev.iter())
        .flat_map(|r| [r.source_text.as_str(), r.output_text.as_str()])
        .collect();
    let vocab = Vocab::build(&vocab_texts, config.model.vocab_size);

    let mut runs = Vec::with_capacity(config.num_runs);
    for run in 0..config.num_runs {
        let run_seed = config.seed + run as u64;
        let run_dir = config.output_dir.join(format!("run-{run_seed}"));
        fs::create_dir_all(&run_dir).map_err(|e| Error::io(&run_dir, e))?;

        let mut model =
            MetricModel::new(config.model.encoder_config(), vocab.clone(), &[], run_seed)?;
        let mut reports = BTreeMap::new();
        let mut checkpoints = BTreeMap::new();
        for &stage in stages {
            let (next, mut report) = match stage {
                StageKind::Stage1 => {
                    let stage_config = config
                        .stage1
                        .resolve(StageConfig::stage1(), run_seed);
                    run_stage1(&model, &corpus, stage1_table.as_ref().unwrap(), &stage_config)?
                }
                StageKind::Stage2 => {
                    let stage_config = config
                        .stage2
                        .resolve(StageConfig::stage2(), run_seed);
                    run_stage2(&model, &corpus, stage2_signals.as_ref().unwrap(), &stage_config)?
                }
                StageKind::Finetune => {
                    let stage_config = config
                        .finetune
                        .resolve(StageConfig::finetune(), run_seed);
                    run_finetune(
                        &model,
                        &corpus,
                        ratings.as_ref().unwrap(),
                        config.evaluation.aspect,
                        &stage_config,
                    )?
                }
            };
            let slug = stage_slug(stage);
            let checkpoint_path = run_dir.join(format!("{slug}.checkpoint.json"));
            next.save(&checkpoint_path)?;
            report.best_checkpoint = Some(checkpoint_path.display().to_string());
            let report_path = run_dir.join(format!("{slug}.report.json"));
            write_pretty_json(&report_path, &report)?;
            reports.insert(slug.to_string(), report);
            checkpoints.insert(slug.to_string(), checkpoint_path);
            model = next;
        }
        runs.push(RunArtifacts {
            seed: run_seed,
            reports,
            checkpoints,
        });
    }

    let mut aggregates = BTreeMap::new();
    for &stage in stages {
        let slug = stage_slug(stage);
        let losses: Vec<f64> = runs
            .iter()
            .map(|run| run.reports[slug].best_dev_loss)
            .collect();
        let (mean, spread) = mean_and_spread(&losses);
        aggregates.insert(
            slug.to_string(),
            StageAggregate {
                mean_best_dev_loss: mean,
                spread,
            },
        );
    }

    let summary = TrainSummary {
        stages: stages.iter().map(|&s| stage_slug(s).to_string()).collect(),
        runs,
        aggregates,
    };
    write_pretty_json(&config.output_dir.join("train-summary.json"), &summary)?;
    Ok(summary)
}

fn unique_source_texts(records: &[SimplificationRecord]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut texts = Vec::new();
    for record in records {
        if seen.insert(record.source_id.clone()) {
            texts.push(record.source_text.clone());
        }
    }
    texts
}

fn write_pretty_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::io(path, e.into()))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct ScoreLine {
    record_id: String,
    score: f64,
}

pub fn save_scores(path: &Path, scores: &[(String, f64)]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (record_id, score) in scores {
        let line = serde_json::to_string(&ScoreLine {
            record_id: record_id.clone(),
            score: *score,
        })
        .map_err(|e| Error::io(path, e.into()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Scores in file order. Record ids must be unique.
pub fn load_scores(path: &Path) -> Result<Vec<(String, f64)>> {
    require_exists(path, "scores")?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut scores = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ScoreLine = serde_json::from_str(&line)
            .map_err(|e| Error::malformed(path, i + 1, e.to_string()))?;
        if !parsed.score.is_finite() {
            return Err(Error::malformed(
                path,
                i + 1,
                format!("non-finite score for {}", parsed.record_id),
            ));
        }
        if !seen.insert(parsed.record_id.clone()) {
            return Err(Error::malformed(
                path,
                i + 1,
                format!("duplicate record_id {}", parsed.record_id),
            ));
        }
        scores.push((parsed.record_id, parsed.score));
    }
    Ok(scores)
}

/// Score every record in `records_path` with a fine-tuned checkpoint,
/// preserving input order. Output defaults to
/// `<output_dir>/scores-<checkpoint stem>.jsonl`.
pub fn cmd_score(
    config: &PipelineConfig,
    checkpoint: &Path,
    records_path: &Path,
    out: Option<&Path>,
) -> Result<PathBuf> {
    require_exists(checkpoint, "checkpoint")?;
    require_exists(records_path, "records")?;
    let model = MetricModel::load(checkpoint)?;
    if model.metadata.tokenizer_version != TOKENIZER_VERSION {
        return Err(Error::ModelState(format!(
            "checkpoint was built with tokenizer {:?} but this binary uses {:?}",
            model.metadata.tokenizer_version, TOKENIZER_VERSION
        )));
    }
    let records = load_records(records_path)?;
    let mut scores = Vec::with_capacity(records.len());
    for record in &records {
        let value = model
            .score(&record.source_text, &record.output_text)
            .map_err(|e| with_record_context(&format!("record {}", record.record_id), e))?;
        scores.push((record.record_id.clone(), value));
    }
    let out_path = match out {
        Some(p) => p.to_path_buf(),
        None => {
            let stem = checkpoint
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| "checkpoint".to_string());
            config.output_dir.join(format!("scores-{stem}.jsonl"))
        }
    };
    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    save_scores(&out_path, &scores)?;
    Ok(out_path)
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// One correlation report per scores file, written as a text table and a
/// machine-readable line file next to each other under the output dir.
pub fn cmd_evaluate(
    config: &PipelineConfig,
    score_files: &[PathBuf],
) -> Result<Vec<(String, CorrelationReport)>> {
    if score_files.is_empty() {
        return Err(Error::Config("no score files given".to_string()));
    }
    let records_path = config.records_path();
    require_exists(&records_path, "records")?;
    let ratings_path = config.paths.ratings.clone().ok_or_else(|| {
        Error::Config("evaluate needs paths.ratings in the config".to_string())
    })?;
    require_exists(&ratings_path, "ratings")?;

    let records = load_records(&records_path)?;
    let ratings = load_ratings(&ratings_path)?;
    let eval_config = config.evaluation.eval_config();
    fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;

    let mut reports = Vec::with_capacity(score_files.len());
    for path in score_files {
        let scores: BTreeMap<String, f64> = load_scores(path)?.into_iter().collect();
        let report = build_report(&records, &ratings, &scores, &eval_config)?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "scores".to_string());
        fs::write(
            config.output_dir.join(format!("eval-{label}.txt")),
            report.render(),
        )
        .map_err(|e| Error::io(&config.output_dir, e))?;
        report.save_machine(&config.output_dir.join(format!("eval-{label}.jsonl")))?;
        reports.push((label, report));
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineOutcome {
    pub name: String,
    /// The written scores file, or None with a notice when skipped.
    pub path: Option<PathBuf>,
    pub notice: Option<String>,
}

/// Classical metric scores per record: FKGL of the output, self-similarity
/// against the source, and, when references are available, BLEU and SARI.
pub fn cmd_baselines(config: &PipelineConfig) -> Result<Vec<BaselineOutcome>> {
    let records_path = config.records_path();
    require_exists(&records_path, "records")?;
    let records = load_records(&records_path)?;
    let references = match &config.paths.references {
        Some(path) => {
            require_exists(path, "references")?;
            Some(references_by_source(path)?)
        }
        None => None,
    };
    let source_texts = unique_source_texts(&records);
    let registry = build_registry(config, &source_texts)?;
    fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;

    let mut outcomes = Vec::new();

    let fkgl_scores: Vec<(String, f64)> = records
        .iter()
        .map(|r| Ok((r.record_id.clone(), textstats::fkgl(&r.output_text)?)))
        .collect::<Result<_>>()?;
    outcomes.push(write_baseline(config, "fkgl", fkgl_scores)?);

    let self_sim: Vec<(String, f64)> = records
        .iter()
        .map(|r| {
            let s = registry
                .similarity(&r.output_text, &r.source_text)
                .map_err(|e| with_record_context(&format!("record {}", r.record_id), e))?;
            Ok((r.record_id.clone(), s.f1))
        })
        .collect::<Result<_>>()?;
    outcomes.push(write_baseline(config, "self_similarity", self_sim)?);

    for (name, needs_refs) in [("bleu", true), ("sari", true)] {
        let _ = needs_refs;
        match &references {
            None => outcomes.push(BaselineOutcome {
                name: name.to_string(),
                path: None,
                notice: Some(format!("{name}: skipped, no references configured")),
            }),
            Some(refs) => {
                let mut scores = Vec::with_capacity(records.len());
                for record in &records {
                    let bundle = refs.get(&record.source_id).ok_or_else(|| {
                        Error::MissingReferences {
                            record_id: record.record_id.clone(),
                            source_id: record.source_id.clone(),
                        }
                    })?;
                    let value = match name {
                        "bleu" => textstats::bleu(
                            &record.output_text,
                            &bundle.references,
                            BLEU_MAX_N,
                        )?,
                        _ => textstats::sari(
                            &record.source_text,
                            &record.output_text,
                            &bundle.references,
                        )?,
                    };
                    scores.push((record.record_id.clone(), value));
                }
                outcomes.push(write_baseline(config, name, scores)?);
            }
        }
    }
    Ok(outcomes)
}

fn write_baseline(
    config: &PipelineConfig,
    name: &str,
    scores: Vec<(String, f64)>,
) -> Result<BaselineOutcome> {
    let path = config.output_dir.join(format!("baseline-{name}.jsonl"));
    save_scores(&path, &scores)?;
    Ok(BaselineOutcome {
        name: name.to_string(),
        path: Some(path),
        notice: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RatingRecord;

    fn write_sources(dir: &Path, n: usize) -> PathBuf {
        let path = dir.join("sources.txt");
        let mut file = File::create(&path).unwrap();
        let subjects = ["engineer", "teacher", "doctor", "farmer", "artist", "pilot"];
        let verbs = ["described", "examined", "constructed", "improved"];
        let objects = [
            "an intricate mechanism with numerous components",
            "a complicated agreement involving several parties",
            "the fundamental principles of the procedure",
            "a sophisticated instrument for precise measurement",
        ];
        for i in 0..n {
            writeln!(
                file,
                "The {} carefully {} {} during demonstration {}.",
                subjects[i % subjects.len()],
                verbs[i % verbs.len()],
                objects[i % objects.len()],
                i + 1,
            )
            .unwrap();
        }
        path
    }

    fn base_config(dir: &Path) -> PipelineConfig {
        let mut config: PipelineConfig = toml::from_str("seed = 11").unwrap();
        config.output_dir = dir.join("out");
        config.paths.sources = Some(write_sources(dir, 18));
        config.model = ModelSection {
            d_model: 8,
            n_layers: 1,
            ffn_hidden: 16,
            max_len: 32,
            vocab_size: 300,
        };
        config
    }

    #[test]
    fn config_defaults_and_required_seed() {
        let config: PipelineConfig = toml::from_str("seed = 3").unwrap();
        assert_eq!(config.num_runs, 1);
        assert_eq!(config.split_ratio, [4, 1, 1]);
        assert_eq!(config.model.vocab_size, 8192);
        assert!(config.validate().is_ok());
        assert!(toml::from_str::<PipelineConfig>("num_runs = 2").is_err());
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        assert!(toml::from_str::<PipelineConfig>("seed = 1\ntypo_key = 2").is_err());
        let mut config: PipelineConfig = toml::from_str("seed = 1").unwrap();
        config.num_runs = 0;
        assert!(matches!(config.validate(), Err(Error::Config(_))));
        let mut config: PipelineConfig = toml::from_str("seed = 1").unwrap();
        config.augmentation.augment_fraction = 1.5;
        assert!(config.validate().is_err());
        let mut config: PipelineConfig = toml::from_str("seed = 1").unwrap();
        config.providers.embedding = ProviderChoice::Named("bert".to_string());
        assert!(matches!(config.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn config_file_round_trip_with_sections() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.toml");
        fs::write(
            &path,
            r#"
seed = 9
num_runs = 2
output_dir = "artifacts"
split_ratio = [3, 2, 1]

[paths]
sources = "sources.txt"
ratings = "ratings.jsonl"

[model]
d_model = 16
vocab_size = 500

[augmentation]
augment_fraction = 0.25

[stage1]
max_epochs = 2
learning_rate = 0.001

[evaluation]
aspect = "simplicity"
agreement_threshold = 3.0
pearson_enabled = true

[providers]
simplifier = { command = ["my-provider", "--flag"], dim = 4 }
"#,
        )
        .unwrap();
        let config = PipelineConfig::load(&path).unwrap();
        assert_eq!(config.seed, 9);
        assert_eq!(config.num_runs, 2);
        assert_eq!(config.split_ratio, [3, 2, 1]);
        assert_eq!(config.model.d_model, 16);
        assert_eq!(config.model.n_layers, 2);
        assert_eq!(config.augmentation.augment_fraction, 0.25);
        let stage1 = config.stage1.resolve(StageConfig::stage1(), config.seed);
        assert_eq!(stage1.max_epochs, 2);
        assert_eq!(stage1.learning_rate, 0.001);
        assert_eq!(stage1.batch_size, 32);
        assert_eq!(config.evaluation.aspect, Aspect::Simplicity);
        assert!(config.evaluation.pearson_enabled);
        assert!(config.providers.simplifier.is_remote());
        assert!(!config.providers.embedding.is_remote());
    }

    #[test]
    fn cache_env_var_overrides_cache_path() {
        // set/remove env vars only in this isolated test
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.toml");
        fs::write(&path, "seed = 1\n[paths]\ncache = \"explicit.cache\"\n").unwrap();
        std::env::set_var(CACHE_DIR_ENV, dir.path().join("cachedir"));
        let config = PipelineConfig::load(&path).unwrap();
        std::env::remove_var(CACHE_DIR_ENV);
        assert_eq!(
            config.paths.cache,
            Some(dir.path().join("cachedir").join(CACHE_FILE_NAME))
        );
        let config = PipelineConfig::load(&path).unwrap();
        assert_eq!(config.paths.cache, Some(PathBuf::from("explicit.cache")));
    }

    #[test]
    fn synthesize_writes_records_split_and_normalized_signals() {
        let dir = tempfile::tempdir().unwrap();
        let config = base_config(dir.path());
        let summary = cmd_synthesize(&config).unwrap();
        assert_eq!(summary.sources, 18);
        assert_eq!(summary.records, 18);
        assert!(summary.augmented > 0 && summary.augmented < 18);

        let records = load_records(&summary.records_path).unwrap();
        assert_eq!(records.len(), 18);
        assert_eq!(
            records.iter().filter(|r| r.origin == Origin::Augmented).count(),
            summary.augmented
        );
        let table = SignalTable::load(&summary.signals_path).unwrap();
        assert!(table.normalization.is_some());
        assert_eq!(table.rows.len(), 18);
        let split = CorpusSplit::load(&summary.split_path).unwrap();
        assert_eq!(
            split.train.len() + split.dev.len() + split.test.len(),
            18
        );
    }

    #[test]
    fn synthesize_is_byte_identical_across_reruns() {
        let dir = tempfile::tempdir().unwrap();
        let config = base_config(dir.path());
        let summary = cmd_synthesize(&config).unwrap();
        let read_all = |s: &SynthesisSummary| {
            (
                fs::read(&s.records_path).unwrap(),
                fs::read(&s.signals_path).unwrap(),
                fs::read(&s.split_path).unwrap(),
            )
        };
        let first = read_all(&summary);
        fs::remove_dir_all(&config.output_dir).unwrap();
        let summary = cmd_synthesize(&config).unwrap();
        assert_eq!(first, read_all(&summary));
    }

    #[test]
    fn synthesize_missing_sources_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(dir.path());
        config.paths.sources = Some(dir.path().join("absent.txt"));
        let err = cmd_synthesize(&config).unwrap_err();
        assert_eq!(err.category(), "io");
        assert!(err.to_string().contains("absent.txt"));
    }

    #[test]
    fn synthesize_provider_failure_leaves_no_partial_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(dir.path());
        config.providers.simplifier = ProviderChoice::Remote {
            command: vec![dir.path().join("no-such-binary").display().to_string()],
            version: "1".to_string(),
            dim: 4,
        };
        let err = cmd_synthesize(&config).unwrap_err();
        assert_eq!(err.category(), "provider");
        assert!(!config.records_path().exists());
        assert!(!config.signals_path().exists());
        assert!(!config.split_path().exists());
    }

    #[test]
    fn train_stage_selection_is_validated() {
        assert!(validate_stage_selection(&[]).is_err());
        assert!(validate_stage_selection(&[StageKind::Stage2, StageKind::Stage1]).is_err());
        assert!(validate_stage_selection(&[StageKind::Stage1, StageKind::Stage1]).is_err());
        assert!(validate_stage_selection(&[StageKind::Stage1, StageKind::Finetune]).is_ok());
        assert!(parse_stage("stage2").is_ok());
        assert!(parse_stage("warmup").is_err());
    }

    #[test]
    fn train_requires_stage_inputs_before_running() {
        let dir = tempfile::tempdir().unwrap();
        let config = base_config(dir.path());
        cmd_synthesize(&config).unwrap();
        // finetune requested without a ratings path configured
        let err = cmd_train(&config, &[StageKind::Finetune]).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        // stage2 requested without references
        let err = cmd_train(&config, &[StageKind::Stage2]).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    fn tiny_stage1_config(config: &mut PipelineConfig) {
        config.stage1.max_epochs = Some(1);
        config.stage1.learning_rate = Some(1e-3);
        config.stage1.batch_size = Some(8);
    }

    #[test]
    fn train_stage1_writes_checkpoint_report_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(dir.path());
        cmd_synthesize(&config).unwrap();
        tiny_stage1_config(&mut config);
        let summary = cmd_train(&config, &[StageKind::Stage1]).unwrap();
        assert_eq!(summary.runs.len(), 1);
        let run = &summary.runs[0];
        assert_eq!(run.seed, config.seed);
        assert!(run.checkpoints["stage1"].is_file());
        assert!(config.output_dir.join("train-summary.json").is_file());
        let report = &run.reports["stage1"];
        assert_eq!(report.seed, config.seed);
        assert!(report.best_checkpoint.is_some());
        let model = MetricModel::load(&run.checkpoints["stage1"]).unwrap();
        assert_eq!(model.heads.len(), 9);
        // aggregates carry the best dev loss for a single run with no spread
        let agg = &summary.aggregates["stage1"];
        assert_eq!(agg.mean_best_dev_loss, report.best_dev_loss);
        assert_eq!(agg.spread, 0.0);
    }

    #[test]
    fn multi_run_training_uses_consecutive_seeds() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(dir.path());
        cmd_synthesize(&config).unwrap();
        tiny_stage1_config(&mut config);
        config.num_runs = 2;
        let summary = cmd_train(&config, &[StageKind::Stage1]).unwrap();
        assert_eq!(summary.runs.len(), 2);
        assert_eq!(summary.runs[0].seed, config.seed);
        assert_eq!(summary.runs[1].seed, config.seed + 1);
        assert!(config.output_dir.join(format!("run-{}", config.seed)).is_dir());
        assert!(config
            .output_dir
            .join(format!("run-{}", config.seed + 1))
            .is_dir());
        let spread = summary.aggregates["stage1"].spread;
        assert!(spread >= 0.0);
    }

    fn write_ratings_for(
        records: &[SimplificationRecord],
        aspect: Aspect,
        path: &Path,
    ) -> Vec<RatingRecord> {
        let ratings: Vec<RatingRecord> = records
            .iter()
            .enumerate()
            .map(|(i, r)| RatingRecord {
                record_id: r.record_id.clone(),
                aspect,
                rater_scores: vec![
                    40.0 + (i % 7) as f64 * 8.0,
                    42.0 + (i % 5) as f64 * 9.0,
                    38.0 + (i % 3) as f64 * 11.0,
                ],
                scale_max: 100.0,
            })
            .collect();
        crate::corpus::save_ratings(path, &ratings).unwrap();
        ratings
    }

    #[test]
    fn finetune_only_run_produces_a_scoring_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(dir.path());
        let summary = cmd_synthesize(&config).unwrap();
        let records = load_records(&summary.records_path).unwrap();
        let ratings_path = dir.path().join("ratings.jsonl");
        write_ratings_for(&records, Aspect::Overall, &ratings_path);
        config.paths.ratings = Some(ratings_path);
        config.finetune.max_epochs = Some(1);
        config.finetune.learning_rate = Some(1e-3);
        config.finetune.batch_size = Some(8);
        let summary = cmd_train(&config, &[StageKind::Finetune]).unwrap();
        let checkpoint = &summary.runs[0].checkpoints["finetune"];
        let model = MetricModel::load(checkpoint).unwrap();
        let value = model.score("A sentence here.", "A sentence.").unwrap();
        assert!(value.is_finite());
    }

    #[test]
    fn score_writes_ordered_scores_and_checks_versions() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(dir.path());
        let synth = cmd_synthesize(&config).unwrap();
        let records = load_records(&synth.records_path).unwrap();
        let ratings_path = dir.path().join("ratings.jsonl");
        write_ratings_for(&records, Aspect::Overall, &ratings_path);
        config.paths.ratings = Some(ratings_path);
        config.finetune.max_epochs = Some(1);
        config.finetune.learning_rate = Some(1e-3);
        config.finetune.batch_size = Some(8);
        let summary = cmd_train(&config, &[StageKind::Finetune]).unwrap();
        let checkpoint = summary.runs[0].checkpoints["finetune"].clone();

        let out = cmd_score(&config, &checkpoint, &synth.records_path, None).unwrap();
        let scores = load_scores(&out).unwrap();
        assert_eq!(scores.len(), records.len());
        for (record, (id, value)) in records.iter().zip(&scores) {
            assert_eq!(&record.record_id, id);
            assert!(value.is_finite());
        }
        // scoring again is identical
        let again = cmd_score(&config, &checkpoint, &synth.records_path, None).unwrap();
        assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());

        let missing = dir.path().join("missing-checkpoint.json");
        let err = cmd_score(&config, &missing, &synth.records_path, None).unwrap_err();
        assert_eq!(err.category(), "io");

        // stage-1 checkpoint cannot score: no rating head yet
        tiny_stage1_config(&mut config);
        let summary = cmd_train(&config, &[StageKind::Stage1]).unwrap();
        let stage1_ckpt = summary.runs[0].checkpoints["stage1"].clone();
        let err = cmd_score(&config, &stage1_ckpt, &synth.records_path, None).unwrap_err();
        assert!(matches!(err, Error::ModelState(_)), "{err}");
    }

    #[test]
    fn scores_file_round_trip_rejects_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.jsonl");
        let scores = vec![("a".to_string(), 0.25), ("b".to_string(), -1.5)];
        save_scores(&path, &scores).unwrap();
        assert_eq!(load_scores(&path).unwrap(), scores);
        fs::write(
            &path,
            "{\"record_id\":\"a\",\"score\":1.0}\n{\"record_id\":\"a\",\"score\":2.0}\n",
        )
        .unwrap();
        let err = load_scores(&path).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn evaluate_writes_text_and_machine_reports() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(dir.path());
        // hand-built corpus: two systems per source so pairs exist
        let mut records = Vec::new();
        for i in 0..6 {
            for system in ["sys-a", "sys-b"] {
                records.push(
                    SimplificationRecord::new(
                        format!("s{i}"),
                        format!("long and complicated source sentence number {i}"),
                        format!("short output {i} from {system}"),
                        system,
                        Origin::Model,
                        None,
                        None,
                    )
                    .unwrap(),
                );
            }
        }
        let records_path = dir.path().join("records.jsonl");
        save_records(&records_path, &records).unwrap();
        config.paths.records = Some(records_path);

        let ratings_path = dir.path().join("ratings.jsonl");
        let ratings: Vec<RatingRecord> = records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let base = if r.system_id == "sys-a" { 80.0 } else { 50.0 };
                RatingRecord {
                    record_id: r.record_id.clone(),
                    aspect: Aspect::Overall,
                    rater_scores: vec![base, base + 3.0 + i as f64, base - 7.0],
                    scale_max: 100.0,
                }
            })
            .collect();
        crate::corpus::save_ratings(&ratings_path, &ratings).unwrap();
        config.paths.ratings = Some(ratings_path);

        // metric that always prefers sys-a, matching the humans
        let scores: Vec<(String, f64)> = records
            .iter()
            .map(|r| {
                let value = if r.system_id == "sys-a" { 0.9 } else { 0.1 };
                (r.record_id.clone(), value)
            })
            .collect();
        let scores_path = dir.path().join("my-metric.jsonl");
        save_scores(&scores_path, &scores).unwrap();

        let reports = cmd_evaluate(&config, &[scores_path]).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].0, "my-metric");
        assert_eq!(reports[0].1.tau_all, 1.0);
        assert!(config.output_dir.join("eval-my-metric.txt").is_file());
        assert!(config.output_dir.join("eval-my-metric.jsonl").is_file());

        // a missing record score is reported with its id
        let mut partial = scores.clone();
        partial.pop();
        let partial_path = dir.path().join("partial.jsonl");
        save_scores(&partial_path, &partial).unwrap();
        let err = cmd_evaluate(&config, &[partial_path]).unwrap_err();
        match err {
            Error::MissingScores(ids) => assert_eq!(ids, vec![records.last().unwrap().record_id.clone()]),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn baselines_delegate_and_skip_reference_metrics_without_references() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(dir.path());
        let synth = cmd_synthesize(&config).unwrap();
        config.paths.records = Some(synth.records_path.clone());

        let outcomes = cmd_baselines(&config).unwrap();
        let by_name: BTreeMap<&str, &BaselineOutcome> =
            outcomes.iter().map(|o| (o.name.as_str(), o)).collect();
        assert!(by_name["fkgl"].path.is_some());
        assert!(by_name["self_similarity"].path.is_some());
        assert!(by_name["bleu"].path.is_none());
        assert!(by_name["sari"].notice.as_deref().unwrap().contains("skipped"));

        let records = load_records(&synth.records_path).unwrap();
        let fkgl_scores = load_scores(by_name["fkgl"].path.as_ref().unwrap()).unwrap();
        for (record, (id, value)) in records.iter().zip(&fkgl_scores) {
            assert_eq!(&record.record_id, id);
            assert_eq!(*value, textstats::fkgl(&record.output_text).unwrap());
        }

        // with references, all four baselines appear
        let references: Vec<ReferenceBundle> = records
            .iter()
            .map(|r| ReferenceBundle {
                source_id: r.source_id.clone(),
                references: vec![format!("simple version of {}", r.source_id)],
            })
            .collect();
        let unique: Vec<ReferenceBundle> = {
            let mut seen = BTreeSet::new();
            references
                .into_iter()
                .filter(|b| seen.insert(b.source_id.clone()))
                .collect()
        };
        let refs_path = dir.path().join("references.jsonl");
        crate::corpus::save_references(&refs_path, &unique).unwrap();
        config.paths.references = Some(refs_path);
        let outcomes = cmd_baselines(&config).unwrap();
        assert!(outcomes.iter().all(|o| o.path.is_some()));
    }
}
