//! Reward oracles: the evaluator contract plus three implementations — a
//! planted-utility synthetic oracle, a brute-force enumerator used as ground
//! truth, and a tiny adversarially trained network.

pub mod dataset;
pub mod synthetic;
pub mod tinynet;

use crate::error::Result;
use crate::space::Genotype;
use std::sync::atomic::{AtomicU64, Ordering};

/// A reward oracle: maps `(genotype, seed)` to a validation accuracy in
/// `[0, 1]`. Implementations must be pure given their own configuration —
/// repeated calls with the same arguments return bit-identical values.
pub trait Evaluator {
    fn evaluate(&self, genotype: &Genotype, seed: u64) -> Result<f64>;
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn evaluate(&self, genotype: &Genotype, seed: u64) -> Result<f64> {
        (**self).evaluate(genotype, seed)
    }
}

impl<E: Evaluator + ?Sized> Evaluator for Box<E> {
    fn evaluate(&self, genotype: &Genotype, seed: u64) -> Result<f64> {
        (**self).evaluate(genotype, seed)
    }
}

/// Wraps an evaluator and counts calls; used to verify budget arithmetic.
pub struct CountingEvaluator<E> {
    inner: E,
    calls: AtomicU64,
}

impl<E: Evaluator> CountingEvaluator<E> {
    pub fn new(inner: E) -> CountingEvaluator<E> {
        CountingEvaluator { inner, calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn into_inner(self) -> E {
        self.inner
    }
}

impl<E: Evaluator> Evaluator for CountingEvaluator<E> {
    fn evaluate(&self, genotype: &Genotype, seed: u64) -> Result<f64> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(genotype, seed)
    }
}
