//! Naive reference implementations used as test oracles.
//!
//! Nothing here shares code with the production crate. Matrices are plain
//! `Vec<Vec<f64>>`; sums run in index order so results are comparable
//! bit-for-bit with any implementation that accumulates the same way.

#![allow(clippy::needless_range_loop)]

pub mod synthetic;

/// Copies row `ids[i]` of `table` into output row `i`, one element at a time.
pub fn embed(ids: &[u32], table: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for &id in ids {
        let src = &table[id as usize];
        let mut row = Vec::new();
        for j in 0..src.len() {
            row.push(src[j]);
        }
        out.push(row);
    }
    out
}

/// Column means by explicit double loop.
pub fn column_means(m: &[Vec<f64>]) -> Vec<f64> {
    let cols = m[0].len();
    let mut out = vec![0.0; cols];
    for j in 0..cols {
        let mut sum = 0.0;
        for i in 0..m.len() {
            sum += m[i][j];
        }
        out[j] = sum / m.len() as f64;
    }
    out
}

/// `xᵀW + b` by triple-loop matrix product; `w` is `inputs × outputs`.
pub fn affine(x: &[f64], w: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; b.len()];
    for k in 0..b.len() {
        let mut sum = 0.0;
        for j in 0..x.len() {
            sum += x[j] * w[j][k];
        }
        out[k] = sum + b[k];
    }
    out
}

pub fn clamp_negative(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&z| if z > 0.0 { z } else { 0.0 }).collect()
}

pub fn logistic(h: &[f64], w: &[f64], b: f64) -> f64 {
    let mut z = 0.0;
    for k in 0..h.len() {
        z += h[k] * w[k];
    }
    1.0 / (1.0 + (-(z + b)).exp())
}

/// Central finite differences of `f` at `x` with step `h`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let up = f(&probe);
        probe[i] = orig - h;
        let down = f(&probe);
        probe[i] = orig;
        out.push((up - down) / (2.0 * h));
    }
    out
}

/// True when `a` and `b` agree within `rel` relative error or `abs` absolute.
pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    let diff = (a - b).abs();
    diff <= abs || diff <= rel * a.abs().max(b.abs())
}
