//! Gabor kernel synthesis with analytic derivatives for its five scalar
//! parameters.
//!
//! A kernel entry at integer offsets `(x, y)` from the centre (x along
//! columns, y along rows) is
//!
//! ```text
//! g(x, y) = exp(−(x'² + γ²·y'²) / (2σ²)) · cos(2π·x'/λ + ψ)
//! x' =  x·cosθ + y·sinθ
//! y' = −x·sinθ + y·cosθ
//! ```
//!
//! where σ is the envelope scale, γ the aspect ratio, λ the cosine
//! wavelength, ψ the phase and θ the orientation. All five are learnable.

use crate::error::{Error, Result};
use crate::tensor::Tensor;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// The five learnable scalars of one Gabor kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaborParams {
    /// Envelope scale (σ), must be positive.
    pub sigma: f64,
    /// Aspect ratio (γ) squeezing the envelope along y'.
    pub aspect: f64,
    /// Cosine period (λ), must be positive.
    pub wavelength: f64,
    /// Phase offset (ψ), radians.
    pub phase: f64,
    /// Orientation (θ), radians.
    pub orientation: f64,
}

pub const GABOR_PARAM_COUNT: usize = 5;

impl GaborParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "gabor sigma must be positive and finite, got {}",
                self.sigma
            )));
        }
        if !(self.wavelength > 0.0) || !self.wavelength.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "gabor wavelength must be positive and finite, got {}",
                self.wavelength
            )));
        }
        if !self.aspect.is_finite() || !self.phase.is_finite() || !self.orientation.is_finite() {
            return Err(Error::InvalidArgument("gabor parameters must be finite".into()));
        }
        Ok(())
    }

    /// Flat view in the fixed order (sigma, aspect, wavelength, phase,
    /// orientation) used by gradient vectors.
    pub fn to_array(self) -> [f64; GABOR_PARAM_COUNT] {
        [self.sigma, self.aspect, self.wavelength, self.phase, self.orientation]
    }

    pub fn from_array(a: [f64; GABOR_PARAM_COUNT]) -> GaborParams {
        GaborParams { sigma: a[0], aspect: a[1], wavelength: a[2], phase: a[3], orientation: a[4] }
    }
}

fn check_size(size: usize) -> Result<()> {
    if size == 0 || size % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "kernel size must be odd and positive, got {size}"
        )));
    }
    Ok(())
}

/// The kernel value and its five partial derivatives at offsets `(x, y)`.
fn entry_and_derivatives(p: &GaborParams, x: f64, y: f64) -> (f64, [f64; GABOR_PARAM_COUNT]) {
    let (sin_t, cos_t) = p.orientation.sin_cos();
    let xr = x * cos_t + y * sin_t;
    let yr = -x * sin_t + y * cos_t;
    let sigma2 = p.sigma * p.sigma;
    let quad = xr * xr + p.aspect * p.aspect * yr * yr;
    let envelope = (-quad / (2.0 * sigma2)).exp();
    let angle = 2.0 * PI * xr / p.wavelength + p.phase;
    let (sin_a, cos_a) = angle.sin_cos();
    let value = envelope * cos_a;

    let d_sigma = envelope * cos_a * quad / (sigma2 * p.sigma);
    let d_aspect = -envelope * cos_a * p.aspect * yr * yr / sigma2;
    let d_wavelength = envelope * sin_a * 2.0 * PI * xr / (p.wavelength * p.wavelength);
    let d_phase = -envelope * sin_a;
    // x' and y' rotate with θ: dx'/dθ = y', dy'/dθ = −x'
    let d_theta = envelope * cos_a * xr * yr * (p.aspect * p.aspect - 1.0) / sigma2
        - envelope * sin_a * 2.0 * PI * yr / p.wavelength;

    (value, [d_sigma, d_aspect, d_wavelength, d_phase, d_theta])
}

/// Synthesizes the `size×size` kernel (row-major; row = y offset, column = x
/// offset, both relative to the centre).
pub fn gabor_kernel(params: &GaborParams, size: usize) -> Result<Tensor> {
    params.validate()?;
    check_size(size)?;
    let r = (size / 2) as isize;
    let mut out = Tensor::zeros(&[size, size]);
    for row in 0..size {
        for col in 0..size {
            let y = (row as isize - r) as f64;
            let x = (col as isize - r) as f64;
            let (value, _) = entry_and_derivatives(params, x, y);
            out.data_mut()[row * size + col] = value;
        }
    }
    Ok(out)
}

/// Loss gradient for each of the five parameters given the upstream gradient
/// on the kernel entries: `∂L/∂p = Σ_entries upstream·∂g/∂p`.
pub fn gabor_param_gradients(
    params: &GaborParams,
    size: usize,
    upstream: &Tensor,
) -> Result<[f64; GABOR_PARAM_COUNT]> {
    params.validate()?;
    check_size(size)?;
    if upstream.shape() != [size, size] {
        return Err(Error::Shape(format!(
            "upstream must be [{size}, {size}], got {:?}",
            upstream.shape()
        )));
    }
    let r = (size / 2) as isize;
    let mut grads = [0.0; GABOR_PARAM_COUNT];
    for row in 0..size {
        for col in 0..size {
            let y = (row as isize - r) as f64;
            let x = (col as isize - r) as f64;
            let (_, derivs) = entry_and_derivatives(params, x, y);
            let u = upstream.data()[row * size + col];
            for (g, d) in grads.iter_mut().zip(derivs) {
                *g += u * d;
            }
        }
    }
    Ok(grads)
}
