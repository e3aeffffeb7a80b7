//! The metric model: a sequence encoder over the delimited (source, output)
//! pair pooled at the BOS position, with one linear regression head per
//! training target, plus loss computation and checkpointing.

pub mod encoder;
pub mod vocab;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::Path;

use ndarray::Array1;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::rng_from_seed;
use crate::error::{Error, Result};
use crate::signals::{NormalizationStats, SignalSuite, SignalVector};
use crate::textstats::TOKENIZER_VERSION;

pub use encoder::{Encoder, EncoderConfig};
pub use vocab::{PairEncoding, Vocab};

pub const RATING_HEAD: &str = "rating";
const CHECKPOINT_FORMAT: &str = "metric-model-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Initialized,
    Stage1,
    Stage2,
    Finetuned,
}

/// Mean/stddev an aggregated rating was standardized with during
/// fine-tuning; `score` maps predictions back through it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingNorm {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub stage: Stage,
    pub suite: Option<SignalSuite>,
    pub normalization: Option<NormalizationStats>,
    pub rating_norm: Option<RatingNorm>,
    pub seed: u64,
    pub tokenizer_version: String,
}

impl ModelMetadata {
    fn initial(seed: u64) -> Self {
        ModelMetadata {
            stage: Stage::Initialized,
            suite: None,
            normalization: None,
            rating_norm: None,
            seed,
            tokenizer_version: TOKENIZER_VERSION.to_string(),
        }
    }
}

/// One affine map d -> 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Head {
    pub w: Vec<f64>,
    pub b: f64,
}

impl Head {
    fn random(d: usize, rng: &mut impl Rng) -> Self {
        let normal = Normal::new(0.0, encoder::INIT_STD).expect("valid stddev");
        Head {
            w: (0..d).map(|_| normal.sample(rng)).collect(),
            b: 0.0,
        }
    }

    fn zeros(d: usize) -> Self {
        Head {
            w: vec![0.0; d],
            b: 0.0,
        }
    }

    fn apply(&self, pooled: &Array1<f64>) -> f64 {
        self.w
            .iter()
            .zip(pooled.iter())
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricModel {
    pub encoder: Encoder,
    pub heads: BTreeMap<String, Head>,
    pub vocab: Vocab,
    pub metadata: ModelMetadata,
}

impl MetricModel {
    /// Fresh model with N(0, 0.02) weights, one head per name.
    pub fn new(
        config: EncoderConfig,
        vocab: Vocab,
        head_names: &[&str],
        seed: u64,
    ) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let encoder = Encoder::new(config, vocab.size(), &mut rng)?;
        let mut heads = BTreeMap::new();
        for name in head_names {
            heads.insert(name.to_string(), Head::random(config.d_model, &mut rng));
        }
        Ok(MetricModel {
            encoder,
            heads,
            vocab,
            metadata: ModelMetadata::initial(seed),
        })
    }

    /// Same encoder and vocab, but a freshly initialized head set; used when
    /// fine-tuning replaces the signal heads with a new rating head.
    pub fn with_fresh_heads(&self, head_names: &[&str], seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let d = self.encoder.config().d_model;
        let mut heads = BTreeMap::new();
        for name in head_names {
            heads.insert(name.to_string(), Head::random(d, &mut rng));
        }
        MetricModel {
            encoder: self.encoder.clone(),
            heads,
            vocab: self.vocab.clone(),
            metadata: self.metadata.clone(),
        }
    }

    /// Keep every existing head named in `head_names` (warm start) and
    /// freshly initialize the missing ones; heads not named are dropped.
    pub fn with_extended_heads(&self, head_names: &[&str], seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let d = self.encoder.config().d_model;
        let mut heads = BTreeMap::new();
        for name in head_names {
            let head = match self.heads.get(*name) {
                Some(existing) => existing.clone(),
                None => Head::random(d, &mut rng),
            };
            heads.insert(name.to_string(), head);
        }
        MetricModel {
            encoder: self.encoder.clone(),
            heads,
            vocab: self.vocab.clone(),
            metadata: self.metadata.clone(),
        }
    }

    pub fn encode_pair(&self, source: &str, output: &str) -> PairEncoding {
        self.vocab
            .encode_pair(source, output, self.encoder.config().max_len)
    }

    pub fn head_names(&self) -> Vec<String> {
        self.heads.keys().cloned().collect()
    }

    fn resolve_heads(&self, requested: Option<&[String]>) -> Result<Vec<String>> {
        if self.heads.is_empty() {
            return Err(Error::ModelState("model has no heads".to_string()));
        }
        match requested {
            None => Ok(self.head_names()),
            Some(names) => {
                for name in names {
                    if !self.heads.contains_key(name) {
                        return Err(Error::UnknownHead(name.clone()));
                    }
                }
                Ok(names.to_vec())
            }
        }
    }

    /// Predict every requested head for every batch item. Sequences are
    /// processed independently, so results do not depend on batch
    /// composition.
    pub fn forward(
        &self,
        batch: &[PairEncoding],
        requested: Option<&[String]>,
    ) -> Result<BTreeMap<String, Vec<f64>>> {
        let names = self.resolve_heads(requested)?;
        let mut out: BTreeMap<String, Vec<f64>> = names
            .iter()
            .map(|n| (n.clone(), Vec::with_capacity(batch.len())))
            .collect();
        for enc in batch {
            let pooled = self.encoder.pooled(&enc.ids);
            for name in &names {
                out.get_mut(name)
                    .expect("resolved head")
                    .push(self.heads[name].apply(&pooled));
            }
        }
        Ok(out)
    }

    /// Total length of the flat parameter vector (encoder then heads in
    /// name order, each head as w then b).
    pub fn param_count(&self) -> usize {
        self.encoder.param_count() + self.heads.values().map(|h| h.w.len() + 1).sum::<usize>()
    }

    pub fn params_to_vec(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        self.encoder.write_params(&mut flat);
        for head in self.heads.values() {
            flat.extend_from_slice(&head.w);
            flat.push(head.b);
        }
        flat
    }

    pub fn set_params_from(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::ModelState(format!(
                "parameter vector has length {}, model needs {}",
                flat.len(),
                self.param_count()
            )));
        }
        let mut pos = 0;
        self.encoder.read_params(flat, &mut pos)?;
        for head in self.heads.values_mut() {
            let len = head.w.len();
            head.w.copy_from_slice(&flat[pos..pos + len]);
            pos += len;
            head.b = flat[pos];
            pos += 1;
        }
        debug_assert_eq!(pos, flat.len());
        Ok(())
    }

    /// Index range of a head's parameters inside the flat vector.
    pub fn head_param_range(&self, name: &str) -> Result<std::ops::Range<usize>> {
        let mut start = self.encoder.param_count();
        for (head_name, head) in &self.heads {
            let len = head.w.len() + 1;
            if head_name == name {
                return Ok(start..start + len);
            }
            start += len;
        }
        Err(Error::UnknownHead(name.to_string()))
    }

    pub fn all_finite(&self) -> bool {
        self.encoder.all_finite()
            && self
                .heads
                .values()
                .all(|h| h.b.is_finite() && h.w.iter().all(|v| v.is_finite()))
    }

    /// Forward, loss, and analytic gradients in one pass. Targets are
    /// matched per head name; heads absent from any target are excluded
    /// (per the loss contract). `grad` must have `param_count()` entries
    /// and is overwritten.
    pub fn loss_and_grad(
        &self,
        batch: &[&PairEncoding],
        targets: &[&SignalVector],
        grad: &mut [f64],
    ) -> Result<f64> {
        if batch.len() != targets.len() {
            return Err(Error::invalid(
                "loss",
                format!("{} encodings but {} targets", batch.len(), targets.len()),
            ));
        }
        if batch.is_empty() {
            return Err(Error::invalid("loss", "empty batch".to_string()));
        }
        if grad.len() != self.param_count() {
            return Err(Error::ModelState(format!(
                "gradient buffer has length {}, model needs {}",
                grad.len(),
                self.param_count()
            )));
        }
        let names = active_heads(self.heads.keys(), targets)?;
        grad.fill(0.0);
        let n_heads = names.len() as f64;
        let n_items = batch.len() as f64;
        let mut enc_grads = self.encoder.zeros_like();
        let mut head_grads: BTreeMap<&str, Head> = names
            .iter()
            .map(|n| {
                (
                    n.as_str(),
                    Head::zeros(self.encoder.config().d_model),
                )
            })
            .collect();
        let mut loss = 0.0;
        for (enc, target) in batch.iter().zip(targets) {
            let (pooled, cache) = self.encoder.forward_cached(&enc.ids);
            let mut d_pooled = Array1::zeros(pooled.len());
            for name in &names {
                let head = &self.heads[name];
                let pred = head.apply(&pooled);
                let diff = pred - target[name];
                loss += diff * diff / (n_heads * n_items);
                let dpred = 2.0 * diff / (n_heads * n_items);
                let hg = head_grads.get_mut(name.as_str()).expect("active head");
                for (slot, x) in hg.w.iter_mut().zip(pooled.iter()) {
                    *slot += dpred * x;
                }
                hg.b += dpred;
                for (slot, w) in d_pooled.iter_mut().zip(&head.w) {
                    *slot += dpred * w;
                }
            }
            self.encoder.backward(&cache, &d_pooled, &mut enc_grads);
        }
        let mut flat = Vec::with_capacity(grad.len());
        enc_grads.write_params(&mut flat);
        for (name, head) in &self.heads {
            match head_grads.get(name.as_str()) {
                Some(hg) => {
                    flat.extend_from_slice(&hg.w);
                    flat.push(hg.b);
                }
                None => flat.extend(std::iter::repeat_n(0.0, head.w.len() + 1)),
            }
        }
        grad.copy_from_slice(&flat);
        Ok(loss)
    }

    /// Metric score for one pair. Only valid on a fine-tuned model with a
    /// single rating head; predictions are mapped back through the rating
    /// standardization when one is recorded.
    pub fn score(&self, source: &str, output: &str) -> Result<f64> {
        if self.metadata.stage != Stage::Finetuned {
            return Err(Error::ModelState(
                "model is not fine-tuned; score requires a rating model".to_string(),
            ));
        }
        if self.heads.len() != 1 || !self.heads.contains_key(RATING_HEAD) {
            return Err(Error::ModelState(format!(
                "fine-tuned model must have exactly the {RATING_HEAD:?} head, found {:?}",
                self.head_names()
            )));
        }
        let enc = self.encode_pair(source, output);
        let pooled = self.encoder.pooled(&enc.ids);
        let raw = self.heads[RATING_HEAD].apply(&pooled);
        Ok(match self.metadata.rating_norm {
            Some(norm) => raw * norm.std + norm.mean,
            None => raw,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if !self.all_finite() {
            return Err(Error::ModelState(
                "refusing to save a model with non-finite parameters".to_string(),
            ));
        }
        let mut encoder_params = Vec::with_capacity(self.encoder.param_count());
        self.encoder.write_params(&mut encoder_params);
        let file = Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            config: *self.encoder.config(),
            vocab: self.vocab.clone(),
            encoder_params,
            heads: self.heads.clone(),
            metadata: self.metadata.clone(),
        };
        let out = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(out);
        serde_json::to_writer(&mut w, &file).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let ckpt: Checkpoint = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::malformed(path, 1, e.to_string()))?;
        if ckpt.format != CHECKPOINT_FORMAT {
            return Err(Error::malformed(
                path,
                1,
                format!("unsupported checkpoint format {:?}", ckpt.format),
            ));
        }
        let mut encoder = Encoder::new(ckpt.config, ckpt.vocab.size(), &mut rng_from_seed(0))?;
        let mut pos = 0;
        encoder.read_params(&ckpt.encoder_params, &mut pos)?;
        if pos != ckpt.encoder_params.len() {
            return Err(Error::malformed(
                path,
                1,
                format!(
                    "encoder parameter count mismatch: file has {}, config needs {pos}",
                    ckpt.encoder_params.len()
                ),
            ));
        }
        let d = ckpt.config.d_model;
        for (name, head) in &ckpt.heads {
            if head.w.len() != d {
                return Err(Error::malformed(
                    path,
                    1,
                    format!("head {name:?} has width {}, expected {d}", head.w.len()),
                ));
            }
        }
        let model = MetricModel {
            encoder,
            heads: ckpt.heads,
            vocab: ckpt.vocab,
            metadata: ckpt.metadata,
        };
        if !model.all_finite() {
            return Err(Error::malformed(
                path,
                1,
                "checkpoint contains non-finite parameters".to_string(),
            ));
        }
        Ok(model)
    }
}

/// Heads present in the model and in every target row, in name order.
fn active_heads<'a>(
    model_heads: impl Iterator<Item = &'a String>,
    targets: &[&SignalVector],
) -> Result<Vec<String>> {
    let names: Vec<String> = model_heads
        .filter(|name| targets.iter().all(|t| t.contains_key(name.as_str())))
        .cloned()
        .collect();
    if names.is_empty() {
        return Err(Error::invalid(
            "loss",
            "no model head overlaps the provided targets".to_string(),
        ));
    }
    Ok(names)
}

/// Mean over heads of the per-head mean squared error. Heads missing from
/// the targets are excluded; no overlap at all is an error.
pub fn loss(predictions: &BTreeMap<String, Vec<f64>>, targets: &[&SignalVector]) -> Result<f64> {
    let names = active_heads(predictions.keys(), targets)?;
    let mut total = 0.0;
    for name in &names {
        let preds = &predictions[name];
        if preds.len() != targets.len() {
            return Err(Error::invalid(
                "loss",
                format!(
                    "head {name:?} has {} predictions for {} targets",
                    preds.len(),
                    targets.len()
                ),
            ));
        }
        let mse = preds
            .iter()
            .zip(targets)
            .map(|(p, t)| {
                let d = p - t[name];
                d * d
            })
            .sum::<f64>()
            / targets.len() as f64;
        total += mse;
    }
    Ok(total / names.len() as f64)
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    config: EncoderConfig,
    vocab: Vocab,
    encoder_params: Vec<f64>,
    heads: BTreeMap<String, Head>,
    metadata: ModelMetadata,
}
