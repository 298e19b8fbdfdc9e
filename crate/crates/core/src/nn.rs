//! Embedding → global average pooling → ReLU → sigmoid network.
//!
//! Everything is `f64`. Dense weights are stored row-major with the input
//! dimension as the row: `hidden_weights[j * hidden + k]` connects pooled
//! channel `j` to hidden unit `k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::{Label, TokenSequence, SEQ_LEN};

pub const EMBED_DIM: usize = 64;
pub const DEFAULT_HIDDEN: usize = 16;
/// Probability clamp used by [`bce_loss`].
pub const BCE_EPSILON: f64 = 1e-7;
const EMBED_INIT_LIMIT: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("invalid dimensions: {0}")]
    Dims(String),
    #[error("tensor `{name}` has {actual} values, expected {expected}")]
    Shape {
        name: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("tensor `{name}` holds a non-finite value at {index}")]
    NonFinite { name: &'static str, index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub seq_len: usize,
    pub embed_dim: usize,
    pub hidden: usize,
    pub vocab: usize,
}

impl Dims {
    pub fn new(vocab: usize, hidden: usize) -> Self {
        Self {
            seq_len: SEQ_LEN,
            embed_dim: EMBED_DIM,
            hidden,
            vocab,
        }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        if self.seq_len != SEQ_LEN {
            return Err(NnError::Dims(format!(
                "sequence length {} (must be {SEQ_LEN})",
                self.seq_len
            )));
        }
        if self.embed_dim == 0 || self.hidden == 0 {
            return Err(NnError::Dims(
                "embedding and hidden widths must be non-zero".into(),
            ));
        }
        if self.vocab < 2 {
            return Err(NnError::Dims(format!(
                "vocabulary of {} cannot hold PAD and OOV",
                self.vocab
            )));
        }
        Ok(())
    }
}

/// Trainable tensors of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub dims: Dims,
    /// `vocab × embed_dim`
    pub embedding: Vec<f64>,
    /// `embed_dim × hidden`
    pub hidden_weights: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

/// Partial derivatives of the mean batch loss, shaped like [`ModelParams`].
pub type Gradients = ModelParams;

impl ModelParams {
    pub fn zeros(dims: Dims) -> Self {
        Self {
            dims,
            embedding: vec![0.0; dims.vocab * dims.embed_dim],
            hidden_weights: vec![0.0; dims.embed_dim * dims.hidden],
            hidden_bias: vec![0.0; dims.hidden],
            output_weights: vec![0.0; dims.hidden],
            output_bias: 0.0,
        }
    }

    /// Uniform `(-0.05, 0.05)` embeddings, Glorot-uniform dense weights and
    /// zero biases, fully determined by `seed`.
    pub fn init(dims: Dims, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Self::zeros(dims);
        for v in &mut params.embedding {
            *v = rng.gen_range(-EMBED_INIT_LIMIT..EMBED_INIT_LIMIT);
        }
        let limit = glorot_limit(dims.embed_dim, dims.hidden);
        for v in &mut params.hidden_weights {
            *v = rng.gen_range(-limit..limit);
        }
        let limit = glorot_limit(dims.hidden, 1);
        for v in &mut params.output_weights {
            *v = rng.gen_range(-limit..limit);
        }
        params
    }

    pub fn embedding_row(&self, id: u32) -> &[f64] {
        let d = self.dims.embed_dim;
        let start = id as usize * d;
        &self.embedding[start..start + d]
    }

    /// Named tensors in a fixed order; the output bias is a one-element slice.
    pub fn tensors(&self) -> [(&'static str, &[f64]); 5] {
        [
            ("embedding", &self.embedding),
            ("hidden_weights", &self.hidden_weights),
            ("hidden_bias", &self.hidden_bias),
            ("output_weights", &self.output_weights),
            ("output_bias", std::slice::from_ref(&self.output_bias)),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 5] {
        [
            &mut self.embedding,
            &mut self.hidden_weights,
            &mut self.hidden_bias,
            &mut self.output_weights,
            std::slice::from_mut(&mut self.output_bias),
        ]
    }

    /// Checks dimensions, tensor lengths and finiteness.
    pub fn validate(&self) -> Result<(), NnError> {
        self.dims.validate()?;
        let d = self.dims;
        let expected = [
            d.vocab * d.embed_dim,
            d.embed_dim * d.hidden,
            d.hidden,
            d.hidden,
            1,
        ];
        for ((name, values), expected) in self.tensors().into_iter().zip(expected) {
            if values.len() != expected {
                return Err(NnError::Shape {
                    name,
                    expected,
                    actual: values.len(),
                });
            }
            if let Some(index) = values.iter().position(|v| !v.is_finite()) {
                return Err(NnError::NonFinite { name, index });
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }
}

fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

/// Looks up one embedding row per position; padding rows are kept.
pub fn embed(seq: &TokenSequence, params: &ModelParams) -> Matrix {
    let ids = seq.ids();
    let mut data = Vec::with_capacity(ids.len() * params.dims.embed_dim);
    for &id in ids {
        data.extend_from_slice(params.embedding_row(id));
    }
    Matrix {
        rows: ids.len(),
        cols: params.dims.embed_dim,
        data,
    }
}

/// Per-column mean over all rows.
pub fn global_average_pool(m: &Matrix) -> Vec<f64> {
    let mut out = vec![0.0; m.cols];
    for i in 0..m.rows {
        for (acc, v) in out.iter_mut().zip(m.row(i)) {
            *acc += v;
        }
    }
    let n = m.rows as f64;
    for v in &mut out {
        *v /= n;
    }
    out
}

/// Hidden layer pre-activations `xᵀW + b`.
fn dense_pre(x: &[f64], weights: &[f64], bias: &[f64]) -> Vec<f64> {
    let width = bias.len();
    assert_eq!(weights.len(), x.len() * width, "dense weight shape");
    let mut acc = vec![0.0; width];
    for (j, &xj) in x.iter().enumerate() {
        let row = &weights[j * width..(j + 1) * width];
        for (a, w) in acc.iter_mut().zip(row) {
            *a += xj * w;
        }
    }
    for (a, b) in acc.iter_mut().zip(bias) {
        *a += b;
    }
    acc
}

/// `max(0, xᵀW + b)` elementwise.
pub fn dense_relu(x: &[f64], weights: &[f64], bias: &[f64]) -> Vec<f64> {
    let mut out = dense_pre(x, weights, bias);
    for v in &mut out {
        *v = relu(*v);
    }
    out
}

fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

/// Logistic function kept strictly inside `(0, 1)`.
pub fn sigmoid(z: f64) -> f64 {
    let p = 1.0 / (1.0 + (-z).exp());
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot shape");
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// `sigmoid(h · w + b)`.
pub fn dense_sigmoid(h: &[f64], weights: &[f64], bias: f64) -> f64 {
    sigmoid(dot(h, weights) + bias)
}

struct Trace {
    pooled: Vec<f64>,
    hidden_pre: Vec<f64>,
    hidden: Vec<f64>,
    score: f64,
}

fn trace(seq: &TokenSequence, params: &ModelParams) -> Trace {
    let pooled = global_average_pool(&embed(seq, params));
    let hidden_pre = dense_pre(&pooled, &params.hidden_weights, &params.hidden_bias);
    let hidden: Vec<f64> = hidden_pre.iter().map(|&z| relu(z)).collect();
    let score = dense_sigmoid(&hidden, &params.output_weights, params.output_bias);
    Trace {
        pooled,
        hidden_pre,
        hidden,
        score,
    }
}

/// Clickbait score in `(0, 1)`.
pub fn forward(seq: &TokenSequence, params: &ModelParams) -> f64 {
    trace(seq, params).score
}

/// Binary cross-entropy with the prediction clamped to `[ε, 1 − ε]`.
pub fn bce_loss(p: f64, label: Label) -> f64 {
    let p = p.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
    let y = label.target();
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Mean batch loss and its gradient with respect to every parameter.
///
/// The logit gradient is `(p − y) / n`; ReLU passes gradient only for
/// strictly positive pre-activations. Embedding rows not present in the
/// batch receive exactly zero.
#[allow(clippy::needless_range_loop)]
pub fn backward(batch: &[(TokenSequence, Label)], params: &ModelParams) -> (Gradients, f64) {
    assert!(!batch.is_empty(), "backward needs a non-empty batch");
    let dims = params.dims;
    let (d, h) = (dims.embed_dim, dims.hidden);
    let n = batch.len() as f64;
    let mut grads = Gradients::zeros(dims);
    let mut loss_sum = 0.0;
    let mut d_hidden = vec![0.0; h];
    let mut d_pooled = vec![0.0; d];

    for (seq, label) in batch {
        let t = trace(seq, params);
        loss_sum += bce_loss(t.score, *label);
        let d_logit = (t.score - label.target()) / n;

        grads.output_bias += d_logit;
        for k in 0..h {
            grads.output_weights[k] += d_logit * t.hidden[k];
            d_hidden[k] = if t.hidden_pre[k] > 0.0 {
                d_logit * params.output_weights[k]
            } else {
                0.0
            };
            grads.hidden_bias[k] += d_hidden[k];
        }
        for j in 0..d {
            let row = j * h;
            let mut acc = 0.0;
            for k in 0..h {
                grads.hidden_weights[row + k] += t.pooled[j] * d_hidden[k];
                acc += params.hidden_weights[row + k] * d_hidden[k];
            }
            d_pooled[j] = acc / dims.seq_len as f64;
        }
        for &id in seq.ids() {
            let start = id as usize * d;
            for (g, dp) in grads.embedding[start..start + d].iter_mut().zip(&d_pooled) {
                *g += dp;
            }
        }
    }
    (grads, loss_sum / n)
}

/// Momentum accumulator, shaped like the parameters and zero on creation.
#[derive(Debug, Clone, PartialEq)]
pub struct Velocity(pub ModelParams);

impl Velocity {
    pub fn zeros(dims: Dims) -> Self {
        Self(ModelParams::zeros(dims))
    }
}

/// Classical momentum: `v ← μ·v − lr·g`, then `w ← w + v`.
pub fn sgd_momentum_step(
    params: &mut ModelParams,
    grads: &Gradients,
    velocity: &mut Velocity,
    lr: f64,
    momentum: f64,
) {
    assert_eq!(params.dims, grads.dims, "gradient shape");
    assert_eq!(params.dims, velocity.0.dims, "velocity shape");
    let grad_tensors = grads.tensors();
    for ((w, v), (_, g)) in params
        .tensors_mut()
        .into_iter()
        .zip(velocity.0.tensors_mut())
        .zip(grad_tensors)
    {
        for ((w, v), g) in w.iter_mut().zip(v.iter_mut()).zip(g) {
            *v = momentum * *v - lr * g;
            *w += *v;
        }
    }
}
