//! Three-stage training driver: reference-free signal pretraining,
//! reference-augmented pretraining, and fine-tuning on human ratings, with
//! dev-loss early stopping and an Adam optimizer.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{derive_seed, rng_from_seed, Aspect, RatingRecord, SimplificationRecord};
use crate::error::{Error, Result};
use crate::model::{loss, MetricModel, PairEncoding, RatingNorm, Stage, RATING_HEAD};
use crate::signals::{SignalTable, SignalVector, SuiteKind};

pub const ADAM_EPS: f64 = 1e-6;
pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    Stage1,
    Stage2,
    Finetune,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageConfig {
    pub stage: StageKind,
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub early_stop_patience: usize,
    /// Optimizer steps between dev evaluations; None evaluates once per
    /// epoch.
    pub eval_every: Option<usize>,
    pub seed: u64,
}

impl StageConfig {
    pub fn stage1() -> Self {
        StageConfig {
            stage: StageKind::Stage1,
            max_epochs: 3,
            learning_rate: 1e-5,
            batch_size: 32,
            early_stop_patience: 5,
            eval_every: None,
            seed: 0,
        }
    }

    pub fn stage2() -> Self {
        StageConfig {
            max_epochs: 30,
            ..StageConfig::stage1().with_stage(StageKind::Stage2)
        }
    }

    pub fn finetune() -> Self {
        StageConfig {
            max_epochs: 50,
            learning_rate: 1e-7,
            ..StageConfig::stage1().with_stage(StageKind::Finetune)
        }
    }

    fn with_stage(mut self, stage: StageKind) -> Self {
        self.stage = stage;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.learning_rate < 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!(
                "learning_rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".to_string()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".to_string()));
        }
        if self.eval_every == Some(0) {
            return Err(Error::Config(
                "eval_every must be a positive step count".to_string(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Patience,
    EpochCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub stage: StageKind,
    /// Dev loss at initialization followed by one entry per evaluation.
    pub dev_losses: Vec<f64>,
    pub stop_reason: StopReason,
    /// Index into `dev_losses` of the restored checkpoint.
    pub best_eval: usize,
    pub best_dev_loss: f64,
    pub epochs_run: usize,
    pub seed: u64,
    pub wall_clock_secs: f64,
    /// Filled by callers that persist the best checkpoint.
    pub best_checkpoint: Option<String>,
}

/// Adam with bias correction; epsilon sits outside the square root.
pub struct Adam {
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(lr: f64, n_params: usize) -> Self {
        Adam {
            lr,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = ADAM_BETA1 * self.m[i] + (1.0 - ADAM_BETA1) * grads[i];
            self.v[i] = ADAM_BETA2 * self.v[i] + (1.0 - ADAM_BETA2) * grads[i] * grads[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }
}

/// Train/dev record slices for one stage.
pub struct StageCorpus<'a> {
    pub train: &'a [SimplificationRecord],
    pub dev: &'a [SimplificationRecord],
}

fn targets_for<'t>(
    records: &[SimplificationRecord],
    table: &'t SignalTable,
) -> Result<Vec<&'t SignalVector>> {
    records.iter().map(|r| table.get(&r.record_id)).collect()
}

fn encode_all(model: &MetricModel, records: &[SimplificationRecord]) -> Vec<PairEncoding> {
    records
        .iter()
        .map(|r| model.encode_pair(&r.source_text, &r.output_text))
        .collect()
}

fn dev_loss(
    model: &MetricModel,
    encodings: &[PairEncoding],
    targets: &[&SignalVector],
) -> Result<f64> {
    let preds = model.forward(encodings, None)?;
    loss(&preds, targets)
}

/// Shared training loop: mini-batch Adam over the model's heads with
/// dev-loss early stopping; returns the best-dev snapshot.
fn train_loop(
    mut model: MetricModel,
    train_enc: &[PairEncoding],
    train_targets: &[&SignalVector],
    dev_enc: &[PairEncoding],
    dev_targets: &[&SignalVector],
    config: &StageConfig,
) -> Result<(MetricModel, TrainingReport)> {
    config.validate()?;
    if train_enc.is_empty() || dev_enc.is_empty() {
        return Err(Error::invalid(
            "corpus",
            "train and dev splits must both be non-empty".to_string(),
        ));
    }
    let started = Instant::now();
    let stage_label = match config.stage {
        StageKind::Stage1 => "stage1",
        StageKind::Stage2 => "stage2",
        StageKind::Finetune => "finetune",
    };

    let mut params = model.params_to_vec();
    let mut grad = vec![0.0; params.len()];
    let mut adam = Adam::new(config.learning_rate, params.len());

    let mut dev_losses = vec![dev_loss(&model, dev_enc, dev_targets)?];
    let mut best_eval = 0;
    let mut best_loss = dev_losses[0];
    let mut best_params = params.clone();
    let mut evals_since_best = 0usize;
    let mut stop_reason = StopReason::EpochCap;
    let mut epochs_run = 0;
    let mut step = 0usize;

    'training: for epoch in 0..config.max_epochs {
        epochs_run = epoch + 1;
        let mut order: Vec<usize> = (0..train_enc.len()).collect();
        let mut epoch_rng = rng_from_seed(derive_seed(
            config.seed,
            &format!("{stage_label}-epoch-{epoch}"),
        ));
        order.shuffle(&mut epoch_rng);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&PairEncoding> = chunk.iter().map(|&i| &train_enc[i]).collect();
            let targets: Vec<&SignalVector> = chunk.iter().map(|&i| train_targets[i]).collect();
            model.loss_and_grad(&batch, &targets, &mut grad)?;
            adam.step(&mut params, &grad);
            model.set_params_from(&params)?;
            step += 1;
            if let Some(every) = config.eval_every {
                if step.is_multiple_of(every) {
                    let l = dev_loss(&model, dev_enc, dev_targets)?;
                    dev_losses.push(l);
                    if l < best_loss {
                        best_loss = l;
                        best_eval = dev_losses.len() - 1;
                        best_params.copy_from_slice(&params);
                        evals_since_best = 0;
                    } else {
                        evals_since_best += 1;
                        if evals_since_best >= config.early_stop_patience {
                            stop_reason = StopReason::Patience;
                            break 'training;
                        }
                    }
                }
            }
        }
        if config.eval_every.is_none() {
            let l = dev_loss(&model, dev_enc, dev_targets)?;
            dev_losses.push(l);
            if l < best_loss {
                best_loss = l;
                best_eval = dev_losses.len() - 1;
                best_params.copy_from_slice(&params);
                evals_since_best = 0;
            } else {
                evals_since_best += 1;
                if evals_since_best >= config.early_stop_patience {
                    stop_reason = StopReason::Patience;
                    break 'training;
                }
            }
        }
    }

    model.set_params_from(&best_params)?;
    let report = TrainingReport {
        stage: config.stage,
        dev_losses,
        stop_reason,
        best_eval,
        best_dev_loss: best_loss,
        epochs_run,
        seed: config.seed,
        wall_clock_secs: started.elapsed().as_secs_f64(),
        best_checkpoint: None,
    };
    Ok((model, report))
}

fn check_table(table: &SignalTable, expected: SuiteKind, field: &'static str) -> Result<()> {
    if table.suite.kind != expected {
        return Err(Error::invalid(
            field,
            format!("signal table has suite {:?}, expected {expected:?}", table.suite.kind),
        ));
    }
    if table.normalization.is_none() {
        return Err(Error::invalid(
            field,
            "signal table must be normalized before training".to_string(),
        ));
    }
    Ok(())
}

fn suite_head_names(table: &SignalTable) -> Vec<&'static str> {
    table.suite.signal_names().to_vec()
}

/// Stage 1: pretrain on the 9 reference-free signals. The model's heads are
/// replaced by a fresh stage-1 suite unless they already match it.
pub fn run_stage1(
    model: &MetricModel,
    corpus: &StageCorpus,
    table: &SignalTable,
    config: &StageConfig,
) -> Result<(MetricModel, TrainingReport)> {
    if config.stage != StageKind::Stage1 {
        return Err(Error::Config(format!(
            "run_stage1 called with a {:?} config",
            config.stage
        )));
    }
    check_table(table, SuiteKind::Stage1, "stage1")?;
    let names = suite_head_names(table);
    let mut staged = if model.head_names() == names {
        model.clone()
    } else {
        model.with_fresh_heads(&names, derive_seed(config.seed, "stage1-heads"))
    };
    let train_targets = targets_for(corpus.train, table)?;
    let dev_targets = targets_for(corpus.dev, table)?;
    let train_enc = encode_all(&staged, corpus.train);
    let dev_enc = encode_all(&staged, corpus.dev);
    staged.metadata.stage = Stage::Stage1;
    staged.metadata.suite = Some(table.suite);
    staged.metadata.normalization = table.normalization.clone();
    staged.metadata.seed = config.seed;
    train_loop(staged, &train_enc, &train_targets, &dev_enc, &dev_targets, config)
}

/// Stage 2: continue training with the reference-based signals added. Heads
/// shared with the incoming model are warm-started; the new reference heads
/// are freshly initialized.
pub fn run_stage2(
    model: &MetricModel,
    corpus: &StageCorpus,
    table: &SignalTable,
    config: &StageConfig,
) -> Result<(MetricModel, TrainingReport)> {
    if config.stage != StageKind::Stage2 {
        return Err(Error::Config(format!(
            "run_stage2 called with a {:?} config",
            config.stage
        )));
    }
    check_table(table, SuiteKind::Stage2, "stage2")?;
    let names = suite_head_names(table);
    let mut staged = model.with_extended_heads(&names, derive_seed(config.seed, "stage2-heads"));
    let train_targets = targets_for(corpus.train, table)?;
    let dev_targets = targets_for(corpus.dev, table)?;
    let train_enc = encode_all(&staged, corpus.train);
    let dev_enc = encode_all(&staged, corpus.dev);
    staged.metadata.stage = Stage::Stage2;
    staged.metadata.suite = Some(table.suite);
    staged.metadata.normalization = table.normalization.clone();
    staged.metadata.seed = config.seed;
    train_loop(staged, &train_enc, &train_targets, &dev_enc, &dev_targets, config)
}

/// Mean rating per record for one aspect, z-scored with statistics from the
/// training records only.
fn rating_targets(
    train: &[SimplificationRecord],
    dev: &[SimplificationRecord],
    ratings: &[RatingRecord],
    aspect: Aspect,
) -> Result<(Vec<SignalVector>, Vec<SignalVector>, RatingNorm)> {
    let mut by_record: BTreeMap<&str, f64> = BTreeMap::new();
    for rating in ratings {
        if rating.aspect == aspect {
            by_record.insert(rating.record_id.as_str(), rating.aggregate()?);
        }
    }
    let lookup = |record: &SimplificationRecord| -> Result<f64> {
        by_record
            .get(record.record_id.as_str())
            .copied()
            .ok_or_else(|| Error::MissingRating {
                record_id: record.record_id.clone(),
                aspect: aspect.as_str().to_string(),
            })
    };
    let train_raw: Vec<f64> = train.iter().map(&lookup).collect::<Result<_>>()?;
    let dev_raw: Vec<f64> = dev.iter().map(&lookup).collect::<Result<_>>()?;
    let n = train_raw.len() as f64;
    let mean = train_raw.iter().sum::<f64>() / n;
    let std = (train_raw.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
    if std < 1e-12 {
        return Err(Error::invalid(
            "ratings",
            "training ratings are constant; cannot standardize".to_string(),
        ));
    }
    let to_vec = |raw: Vec<f64>| -> Vec<SignalVector> {
        raw.into_iter()
            .map(|r| {
                let mut v = SignalVector::new();
                v.insert(RATING_HEAD.to_string(), (r - mean) / std);
                v
            })
            .collect()
    };
    Ok((to_vec(train_raw), to_vec(dev_raw), RatingNorm { mean, std }))
}

/// Fine-tune on human ratings for one aspect: signal heads are dropped, a
/// fresh rating head is attached, and the encoder carries over.
pub fn run_finetune(
    model: &MetricModel,
    corpus: &StageCorpus,
    ratings: &[RatingRecord],
    aspect: Aspect,
    config: &StageConfig,
) -> Result<(MetricModel, TrainingReport)> {
    if config.stage != StageKind::Finetune {
        return Err(Error::Config(format!(
            "run_finetune called with a {:?} config",
            config.stage
        )));
    }
    let (train_targets, dev_targets, norm) =
        rating_targets(corpus.train, corpus.dev, ratings, aspect)?;
    let mut staged =
        model.with_fresh_heads(&[RATING_HEAD], derive_seed(config.seed, "rating-head"));
    staged.metadata.stage = Stage::Finetuned;
    staged.metadata.rating_norm = Some(norm);
    staged.metadata.seed = config.seed;
    let train_enc = encode_all(&staged, corpus.train);
    let dev_enc = encode_all(&staged, corpus.dev);
    let train_refs: Vec<&SignalVector> = train_targets.iter().collect();
    let dev_refs: Vec<&SignalVector> = dev_targets.iter().collect();
    train_loop(staged, &train_enc, &train_refs, &dev_enc, &dev_refs, config)
}
