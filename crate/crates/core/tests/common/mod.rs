//! Random instances and oracle glue shared by the numeric test suites.
#![allow(dead_code)]

use deep_breath::nn::{backward, bce_loss, forward, Dims, ModelParams};
use deep_breath::preprocess::{Label, TokenSequence, SEQ_LEN};
use deep_breath_testkit as oracle;
use rand::Rng;

/// Every tensor, biases included, drawn from `uniform(-scale, scale)`.
pub fn random_params(dims: Dims, rng: &mut impl Rng, scale: f64) -> ModelParams {
    let mut p = ModelParams::zeros(dims);
    for t in p.tensors_mut() {
        for v in t.iter_mut() {
            *v = rng.gen_range(-scale..scale);
        }
    }
    p
}

/// A random prefix of real ids followed by padding.
pub fn random_sequence(vocab: usize, rng: &mut impl Rng) -> TokenSequence {
    let len = rng.gen_range(0..=SEQ_LEN);
    let mut ids = [0u32; SEQ_LEN];
    for slot in &mut ids[..len] {
        *slot = rng.gen_range(1..vocab as u32);
    }
    TokenSequence::new(ids)
}

pub fn random_label(rng: &mut impl Rng) -> Label {
    if rng.gen_bool(0.5) {
        Label::Clickbait
    } else {
        Label::NonClickbait
    }
}

pub fn rows(flat: &[f64], width: usize) -> Vec<Vec<f64>> {
    flat.chunks(width).map(<[f64]>::to_vec).collect()
}

/// Forward pass composed from the naive per-layer oracles.
pub fn oracle_forward(seq: &TokenSequence, p: &ModelParams) -> f64 {
    let table = rows(&p.embedding, p.dims.embed_dim);
    let weights = rows(&p.hidden_weights, p.dims.hidden);
    let embedded = oracle::embed(seq.ids(), &table);
    let pooled = oracle::column_means(&embedded);
    let hidden = oracle::clamp_negative(&oracle::affine(&pooled, &weights, &p.hidden_bias));
    oracle::logistic(&hidden, &p.output_weights, p.output_bias)
}

pub fn flatten(p: &ModelParams) -> Vec<f64> {
    p.tensors()
        .iter()
        .flat_map(|(_, t)| t.iter().copied())
        .collect()
}

pub fn unflatten(dims: Dims, flat: &[f64]) -> ModelParams {
    let mut p = ModelParams::zeros(dims);
    let mut rest = flat;
    for t in p.tensors_mut() {
        let (head, tail) = rest.split_at(t.len());
        t.copy_from_slice(head);
        rest = tail;
    }
    assert!(rest.is_empty());
    p
}

pub fn mean_loss(batch: &[(TokenSequence, Label)], p: &ModelParams) -> f64 {
    batch
        .iter()
        .map(|(s, y)| bce_loss(forward(s, p), *y))
        .sum::<f64>()
        / batch.len() as f64
}

pub struct GradCheck {
    pub entries: usize,
    /// Largest relative error among entries of magnitude above 1e-6.
    pub worst_rel: f64,
    pub failures: Vec<String>,
}

/// Compares analytic gradients with central differences on one random
/// tiny model (`vocab` ids, `hidden` units, a batch of `batch` examples).
pub fn gradient_check(
    rng: &mut impl Rng,
    vocab: usize,
    hidden: usize,
    batch: usize,
    step: f64,
    rel: f64,
    abs: f64,
) -> GradCheck {
    let dims = Dims::new(vocab, hidden);
    let params = random_params(dims, rng, 0.5);
    let data: Vec<(TokenSequence, Label)> = (0..batch)
        .map(|_| (random_sequence(vocab, rng), random_label(rng)))
        .collect();
    let (grads, loss) = backward(&data, &params);
    assert!((loss - mean_loss(&data, &params)).abs() < 1e-12);

    let numeric = oracle::central_difference(
        |x| mean_loss(&data, &unflatten(dims, x)),
        &flatten(&params),
        step,
    );
    let analytic = flatten(&grads);
    let mut check = GradCheck {
        entries: analytic.len(),
        worst_rel: 0.0,
        failures: Vec::new(),
    };
    for (i, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
        let scale = a.abs().max(n.abs());
        if scale > 1e-6 {
            check.worst_rel = check.worst_rel.max((a - n).abs() / scale);
        }
        if !oracle::close(*a, *n, rel, abs) {
            check
                .failures
                .push(format!("entry {i}: analytic {a:e} vs numeric {n:e}"));
        }
    }
    check
}
