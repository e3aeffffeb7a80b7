//! Small trainable sequence encoder: token embeddings plus learned
//! positional embeddings, then a stack of single-head self-attention and
//! tanh feed-forward blocks with residual connections. Forward passes cache
//! activations so gradients can be computed analytically.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const INIT_STD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderConfig {
    pub d_model: usize,
    pub n_layers: usize,
    pub ffn_hidden: usize,
    pub max_len: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            d_model: 64,
            n_layers: 2,
            ffn_hidden: 128,
            max_len: 128,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_model == 0 || self.n_layers == 0 || self.ffn_hidden == 0 {
            return Err(Error::invalid(
                "encoder_config",
                "d_model, n_layers and ffn_hidden must be positive".to_string(),
            ));
        }
        if self.max_len < 5 {
            return Err(Error::invalid(
                "encoder_config",
                format!("max_len must be at least 5, got {}", self.max_len),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    wq: Array2<f64>,
    wk: Array2<f64>,
    wv: Array2<f64>,
    wo: Array2<f64>,
    w1: Array2<f64>,
    b1: Array1<f64>,
    w2: Array2<f64>,
    b2: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    config: EncoderConfig,
    vocab_size: usize,
    tok_emb: Array2<f64>,
    pos_emb: Array2<f64>,
    layers: Vec<Layer>,
}

enum TensorRef<'a> {
    M(&'a Array2<f64>),
    V(&'a Array1<f64>),
}

enum TensorMut<'a> {
    M(&'a mut Array2<f64>),
    V(&'a mut Array1<f64>),
}

impl Encoder {
    fn with_weights(
        config: EncoderConfig,
        vocab_size: usize,
        mut fill: impl FnMut() -> f64,
    ) -> Self {
        let d = config.d_model;
        let h = config.ffn_hidden;
        let mut layers = Vec::with_capacity(config.n_layers);
        let tok_emb = Array2::from_shape_simple_fn((vocab_size, d), &mut fill);
        let pos_emb = Array2::from_shape_simple_fn((config.max_len, d), &mut fill);
        for _ in 0..config.n_layers {
            layers.push(Layer {
                wq: Array2::from_shape_simple_fn((d, d), &mut fill),
                wk: Array2::from_shape_simple_fn((d, d), &mut fill),
                wv: Array2::from_shape_simple_fn((d, d), &mut fill),
                wo: Array2::from_shape_simple_fn((d, d), &mut fill),
                w1: Array2::from_shape_simple_fn((d, h), &mut fill),
                b1: Array1::zeros(h),
                w2: Array2::from_shape_simple_fn((h, d), &mut fill),
                b2: Array1::zeros(d),
            });
        }
        Encoder {
            config,
            vocab_size,
            tok_emb,
            pos_emb,
            layers,
        }
    }

    /// Fresh encoder with weights drawn from N(0, 0.02) and zero biases.
    pub fn new(config: EncoderConfig, vocab_size: usize, rng: &mut impl Rng) -> Result<Self> {
        config.validate()?;
        if vocab_size == 0 {
            return Err(Error::invalid("vocab_size", "must be positive".to_string()));
        }
        let normal = Normal::new(0.0, INIT_STD).expect("valid stddev");
        Ok(Encoder::with_weights(config, vocab_size, || {
            normal.sample(rng)
        }))
    }

    /// Same shape as `self` with every parameter zero; used as a gradient
    /// accumulator sharing the flat parameter layout.
    pub fn zeros_like(&self) -> Self {
        Encoder::with_weights(self.config, self.vocab_size, || 0.0)
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn tensors(&self) -> Vec<TensorRef<'_>> {
        let mut v = vec![TensorRef::M(&self.tok_emb), TensorRef::M(&self.pos_emb)];
        for l in &self.layers {
            v.push(TensorRef::M(&l.wq));
            v.push(TensorRef::M(&l.wk));
            v.push(TensorRef::M(&l.wv));
            v.push(TensorRef::M(&l.wo));
            v.push(TensorRef::M(&l.w1));
            v.push(TensorRef::V(&l.b1));
            v.push(TensorRef::M(&l.w2));
            v.push(TensorRef::V(&l.b2));
        }
        v
    }

    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let mut v = vec![
            TensorMut::M(&mut self.tok_emb),
            TensorMut::M(&mut self.pos_emb),
        ];
        for l in &mut self.layers {
            v.push(TensorMut::M(&mut l.wq));
            v.push(TensorMut::M(&mut l.wk));
            v.push(TensorMut::M(&mut l.wv));
            v.push(TensorMut::M(&mut l.wo));
            v.push(TensorMut::M(&mut l.w1));
            v.push(TensorMut::V(&mut l.b1));
            v.push(TensorMut::M(&mut l.w2));
            v.push(TensorMut::V(&mut l.b2));
        }
        v
    }

    pub fn param_count(&self) -> usize {
        self.tensors()
            .iter()
            .map(|t| match t {
                TensorRef::M(m) => m.len(),
                TensorRef::V(v) => v.len(),
            })
            .sum()
    }

    /// Append all parameters to `out` in the canonical (row-major) order.
    pub fn write_params(&self, out: &mut Vec<f64>) {
        for t in self.tensors() {
            match t {
                TensorRef::M(m) => out.extend(m.iter()),
                TensorRef::V(v) => out.extend(v.iter()),
            }
        }
    }

    /// Read parameters back from the canonical order, advancing `pos`.
    pub fn read_params(&mut self, src: &[f64], pos: &mut usize) -> Result<()> {
        for t in self.tensors_mut() {
            let iter: &mut dyn Iterator<Item = &mut f64> = match t {
                TensorMut::M(m) => &mut m.iter_mut(),
                TensorMut::V(v) => &mut v.iter_mut(),
            };
            for slot in iter {
                let value = *src.get(*pos).ok_or_else(|| {
                    Error::ModelState("parameter vector too short for encoder".to_string())
                })?;
                *slot = value;
                *pos += 1;
            }
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| match t {
            TensorRef::M(m) => m.iter().all(|v| v.is_finite()),
            TensorRef::V(v) => v.iter().all(|x| x.is_finite()),
        })
    }

    /// Run the encoder over one id sequence, returning the BOS-position
    /// vector and the cached activations needed for a backward pass.
    pub fn forward_cached(&self, ids: &[u32]) -> (Array1<f64>, EncoderCache) {
        let n = ids.len();
        assert!(n >= 1, "empty id sequence");
        assert!(
            n <= self.config.max_len,
            "sequence length {n} exceeds max_len {}",
            self.config.max_len
        );
        let d = self.config.d_model;
        let mut x = Array2::zeros((n, d));
        for (pos, &id) in ids.iter().enumerate() {
            let row = &self.tok_emb.row(id as usize) + &self.pos_emb.row(pos);
            x.row_mut(pos).assign(&row);
        }
        let scale = 1.0 / (d as f64).sqrt();
        let mut layers = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let q = x.dot(&layer.wq);
            let k = x.dot(&layer.wk);
            let v = x.dot(&layer.wv);
            let a = softmax_rows(q.dot(&k.t()) * scale);
            let c = a.dot(&v);
            let o = c.dot(&layer.wo);
            let x1 = &x + &o;
            let h = (x1.dot(&layer.w1) + &layer.b1).mapv(f64::tanh);
            let f2 = h.dot(&layer.w2) + &layer.b2;
            let x2 = &x1 + &f2;
            layers.push(LayerCache {
                x,
                q,
                k,
                v,
                a,
                c,
                x1,
                h,
            });
            x = x2;
        }
        let pooled = x.row(0).to_owned();
        (
            pooled,
            EncoderCache {
                ids: ids.to_vec(),
                layers,
            },
        )
    }

    pub fn pooled(&self, ids: &[u32]) -> Array1<f64> {
        self.forward_cached(ids).0
    }

    /// Backpropagate a gradient on the pooled vector through the cached
    /// forward pass, accumulating parameter gradients into `grads` (an
    /// encoder of identical shape holding gradient values).
    pub fn backward(&self, cache: &EncoderCache, d_pooled: &Array1<f64>, grads: &mut Encoder) {
        let n = cache.ids.len();
        let d = self.config.d_model;
        let scale = 1.0 / (d as f64).sqrt();
        let mut dx = Array2::zeros((n, d));
        dx.row_mut(0).assign(d_pooled);
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let lc = &cache.layers[i];
            let g = &mut grads.layers[i];
            // feed-forward block: x2 = x1 + tanh(x1 w1 + b1) w2 + b2
            let df2 = dx;
            let mut dx1 = df2.clone();
            let dh = df2.dot(&layer.w2.t());
            g.w2.scaled_add(1.0, &lc.h.t().dot(&df2));
            g.b2.scaled_add(1.0, &df2.sum_axis(Axis(0)));
            let df1 = &dh * &lc.h.mapv(|t| 1.0 - t * t);
            g.w1.scaled_add(1.0, &lc.x1.t().dot(&df1));
            g.b1.scaled_add(1.0, &df1.sum_axis(Axis(0)));
            dx1 += &df1.dot(&layer.w1.t());
            // attention block: x1 = x + softmax(q k^T / sqrt(d)) v wo
            let d_out = dx1.clone();
            let mut dx_prev = dx1;
            g.wo.scaled_add(1.0, &lc.c.t().dot(&d_out));
            let dc = d_out.dot(&layer.wo.t());
            let dv = lc.a.t().dot(&dc);
            let da = dc.dot(&lc.v.t());
            let mut ds = Array2::zeros((n, n));
            for r in 0..n {
                let a_row = lc.a.row(r);
                let da_row = da.row(r);
                let dot = da_row.dot(&a_row);
                for cidx in 0..n {
                    ds[[r, cidx]] = (da_row[cidx] - dot) * a_row[cidx];
                }
            }
            let dq = ds.dot(&lc.k) * scale;
            let dk = ds.t().dot(&lc.q) * scale;
            g.wq.scaled_add(1.0, &lc.x.t().dot(&dq));
            g.wk.scaled_add(1.0, &lc.x.t().dot(&dk));
            g.wv.scaled_add(1.0, &lc.x.t().dot(&dv));
            dx_prev += &dq.dot(&layer.wq.t());
            dx_prev += &dk.dot(&layer.wk.t());
            dx_prev += &dv.dot(&layer.wv.t());
            dx = dx_prev;
        }
        for (pos, &id) in cache.ids.iter().enumerate() {
            grads
                .tok_emb
                .row_mut(id as usize)
                .scaled_add(1.0, &dx.row(pos));
            grads.pos_emb.row_mut(pos).scaled_add(1.0, &dx.row(pos));
        }
    }
}

pub struct EncoderCache {
    ids: Vec<u32>,
    layers: Vec<LayerCache>,
}

struct LayerCache {
    x: Array2<f64>,
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    a: Array2<f64>,
    c: Array2<f64>,
    x1: Array2<f64>,
    h: Array2<f64>,
}

fn softmax_rows(mut s: Array2<f64>) -> Array2<f64> {
    for mut row in s.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum: f64 = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    s
}
