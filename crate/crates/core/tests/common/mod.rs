//! Helpers shared by the integration suites.
#![allow(dead_code)]

use cellsearch::Tensor;
use rand::seq::SliceRandom;
use rand::Rng;

/// Relative error with a unit floor: `|a − b| / max(1, |a|, |b|)`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1.0_f64.max(a.abs()).max(b.abs())
}

/// Central difference `(f(h) − f(−h)) / 2h` of a scalar probe around 0.
pub fn central_diff(mut f: impl FnMut(f64) -> f64, h: f64) -> f64 {
    (f(h) - f(-h)) / (2.0 * h)
}

/// Tensor with independent uniform entries in `[−scale, scale)`.
pub fn random_tensor<R: Rng>(shape: &[usize], scale: f64, rng: &mut R) -> Tensor {
    let len: usize = shape.iter().product();
    let data = (0..len).map(|_| rng.gen_range(-scale..scale)).collect();
    Tensor::from_vec(shape, data).expect("length matches shape")
}

/// Tensor whose entries are pairwise at least 0.07 apart, so ordering-based
/// kinks (max-pooling) sit far from any finite-difference step.
pub fn separated_tensor<R: Rng>(shape: &[usize], rng: &mut R) -> Tensor {
    let len: usize = shape.iter().product();
    let mut values: Vec<f64> =
        (0..len).map(|i| 0.07 * (i as f64 - len as f64 / 2.0)).collect();
    values.shuffle(rng);
    Tensor::from_vec(shape, values).expect("length matches shape")
}
