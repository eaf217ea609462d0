//! Synthetic two-class image data for the trained-network evaluator.
//!
//! Class 0 is a softly drawn oriented bar on a noisy background, class 1 is
//! isotropic noise alone. The generator is fully seeded, so a `(count, seed)`
//! pair always reproduces pixel-identical data.

use crate::error::{Error, Result};
use crate::rng::{self, gaussian};
use crate::tensor::Tensor;
use rand::Rng;
use std::io::{Read, Write};

/// Image geometry: single channel, 8×8.
pub const IMAGE_CHANNELS: usize = 1;
pub const IMAGE_SIDE: usize = 8;

/// Fraction of examples used for training; the remainder validates.
const TRAIN_NUMERATOR: usize = 2;
const TRAIN_DENOMINATOR: usize = 3;

/// A labeled image set with a fixed train/validation split: the first
/// `train_count` examples train, the rest validate.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    images: Vec<Tensor>,
    labels: Vec<u8>,
    train_count: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn train_count(&self) -> usize {
        self.train_count
    }

    pub fn validation_count(&self) -> usize {
        self.images.len() - self.train_count
    }

    pub fn train(&self) -> impl Iterator<Item = (&Tensor, u8)> {
        self.images[..self.train_count]
            .iter()
            .zip(self.labels[..self.train_count].iter().copied())
    }

    pub fn validation(&self) -> impl Iterator<Item = (&Tensor, u8)> {
        self.images[self.train_count..]
            .iter()
            .zip(self.labels[self.train_count..].iter().copied())
    }

    pub fn images(&self) -> &[Tensor] {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Serializes to the flat interchange layout: a little-endian `u32`
    /// header (channels, height, width, count, train_count) followed by all
    /// pixels as `f64` in example/channel/row-major order, then one label
    /// byte per example.
    pub fn write_flat<W: Write>(&self, mut out: W) -> Result<()> {
        let header: [u32; 5] = [
            IMAGE_CHANNELS as u32,
            IMAGE_SIDE as u32,
            IMAGE_SIDE as u32,
            self.images.len() as u32,
            self.train_count as u32,
        ];
        for field in header {
            out.write_all(&field.to_le_bytes())?;
        }
        for image in &self.images {
            for &v in image.data() {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        out.write_all(&self.labels)?;
        Ok(())
    }

    /// Reads the layout produced by [`Dataset::write_flat`].
    pub fn read_flat<R: Read>(mut input: R) -> Result<Dataset> {
        let mut word = [0u8; 4];
        let mut header = [0u32; 5];
        for field in header.iter_mut() {
            input.read_exact(&mut word)?;
            *field = u32::from_le_bytes(word);
        }
        let [channels, height, width, count, train_count] = header.map(|v| v as usize);
        if channels != IMAGE_CHANNELS || height != IMAGE_SIDE || width != IMAGE_SIDE {
            return Err(Error::Checkpoint(format!(
                "unsupported image geometry {channels}x{height}x{width}"
            )));
        }
        if train_count > count {
            return Err(Error::Checkpoint(format!(
                "train count {train_count} exceeds example count {count}"
            )));
        }
        let pixels = channels * height * width;
        let mut scalar = [0u8; 8];
        let mut images = Vec::with_capacity(count);
        for _ in 0..count {
            let mut data = Vec::with_capacity(pixels);
            for _ in 0..pixels {
                input.read_exact(&mut scalar)?;
                data.push(f64::from_le_bytes(scalar));
            }
            images.push(Tensor::from_vec(&[channels, height, width], data)?);
        }
        let mut labels = vec![0u8; count];
        input.read_exact(&mut labels)?;
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::Checkpoint("labels must be 0 or 1".into()));
        }
        Ok(Dataset { images, labels, train_count })
    }
}

/// Generates `count` examples, alternating class 0 (oriented bar plus noise)
/// and class 1 (noise only), split two-thirds train / one-third validation.
pub fn make_synthetic_dataset(count: usize, seed: u64) -> Result<Dataset> {
    if count < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 examples for a split, got {count}"
        )));
    }
    let mut stream = rng::stream(seed, rng::domain::DATASET, 0);
    let mut images = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for index in 0..count {
        let label = (index % 2) as u8;
        images.push(render_example(label, &mut stream));
        labels.push(label);
    }
    let train_count = count * TRAIN_NUMERATOR / TRAIN_DENOMINATOR;
    Ok(Dataset { images, labels, train_count })
}

/// Noise level shared by both classes.
const NOISE_SCALE: f64 = 0.2;
/// Peak intensity of the bar.
const BAR_GAIN: f64 = 0.8;
/// Gaussian half-width of the bar profile, in pixels.
const BAR_WIDTH: f64 = 0.7;
/// Slope of the bar: horizontal drift per row.
const BAR_SLOPE: f64 = 0.5;

fn render_example<R: Rng>(label: u8, rng: &mut R) -> Tensor {
    let mut data = vec![0.0; IMAGE_CHANNELS * IMAGE_SIDE * IMAGE_SIDE];
    if label == 0 {
        // a tilted bright bar whose horizontal position varies per example
        let anchor = rng.gen_range(2.5..4.5);
        for row in 0..IMAGE_SIDE {
            let center = anchor + BAR_SLOPE * (row as f64 - 3.5);
            for col in 0..IMAGE_SIDE {
                let offset = col as f64 - center;
                data[row * IMAGE_SIDE + col] =
                    BAR_GAIN * (-offset * offset / (2.0 * BAR_WIDTH * BAR_WIDTH)).exp();
            }
        }
    }
    for v in data.iter_mut() {
        *v += NOISE_SCALE * gaussian(rng);
    }
    Tensor::from_vec(&[IMAGE_CHANNELS, IMAGE_SIDE, IMAGE_SIDE], data)
        .expect("length matches shape")
}
