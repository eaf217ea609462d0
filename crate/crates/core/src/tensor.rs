//! A minimal dense tensor over `f64`, just large enough for the numeric
//! kernels in [`crate::ops`]: shape-checked construction, row-major strides
//! and channel-major `(c, h, w)` indexing.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dense row-major tensor. Feature-map values use shape `[channels, height,
/// width]`; weight blobs use whatever shape the owning operation documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Tensor {
        let len = shape.iter().product();
        Tensor { shape: shape.to_vec(), data: vec![0.0; len] }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Tensor> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor { shape: shape.to_vec(), data })
    }

    pub fn filled(shape: &[usize], value: f64) -> Tensor {
        let len = shape.iter().product();
        Tensor { shape: shape.to_vec(), data: vec![value; len] }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Rank-3 `(channel, row, col)` read; panics on out-of-range in debug
    /// builds like slice indexing does.
    #[inline]
    pub fn at3(&self, c: usize, h: usize, w: usize) -> f64 {
        debug_assert_eq!(self.shape.len(), 3);
        let (rows, cols) = (self.shape[1], self.shape[2]);
        self.data[(c * rows + h) * cols + w]
    }

    #[inline]
    pub fn set3(&mut self, c: usize, h: usize, w: usize, value: f64) {
        debug_assert_eq!(self.shape.len(), 3);
        let (rows, cols) = (self.shape[1], self.shape[2]);
        self.data[(c * rows + h) * cols + w] = value;
    }

    #[inline]
    pub fn add3(&mut self, c: usize, h: usize, w: usize, value: f64) {
        debug_assert_eq!(self.shape.len(), 3);
        let (rows, cols) = (self.shape[1], self.shape[2]);
        self.data[(c * rows + h) * cols + w] += value;
    }

    /// Reshapes without copying; element count must match.
    pub fn reshape(mut self, shape: &[usize]) -> Result<Tensor> {
        let expected: usize = shape.iter().product();
        if expected != self.data.len() {
            return Err(Error::Shape(format!(
                "cannot view {} values as shape {shape:?}",
                self.data.len()
            )));
        }
        self.shape = shape.to_vec();
        Ok(self)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor { shape: self.shape.clone(), data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Elementwise combine; shapes must match exactly.
    pub fn zip_map(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Tensor { shape: self.shape.clone(), data })
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn scale(&self, factor: f64) -> Tensor {
        self.map(|v| v * factor)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
