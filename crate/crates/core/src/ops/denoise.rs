//! Non-local means over feature maps: each spatial location's channel vector
//! is replaced by a similarity-weighted mean over all locations,
//!
//! ```text
//! z_p = (1/L) · Σ_q  (x_p · x_q) · x_q
//! ```
//!
//! with `L = H·W` locations and the dot product of channel vectors as the
//! similarity. This is the pre-wrap value; the denoise *operation* adds the
//! identity skip and a 1×1 convolution on top (see [`crate::ops`]).

use crate::error::{Error, Result};
use crate::ops::conv::unpack3;
use crate::tensor::Tensor;

/// Similarity-weighted mean `z` (pre-wrap). Shape-preserving.
pub fn nonlocal_means(input: &Tensor) -> Result<Tensor> {
    let (c, h, w) = unpack3(input)?;
    let locations = h * w;
    if locations == 0 {
        return Err(Error::Shape("feature map must have at least one location".into()));
    }
    let scale = 1.0 / locations as f64;
    let mut out = Tensor::zeros(&[c, h, w]);
    for p in 0..locations {
        for q in 0..locations {
            let mut dot = 0.0;
            for ch in 0..c {
                dot += input.data()[ch * locations + p] * input.data()[ch * locations + q];
            }
            let weighted = scale * dot;
            for ch in 0..c {
                out.data_mut()[ch * locations + p] +=
                    weighted * input.data()[ch * locations + q];
            }
        }
    }
    Ok(out)
}

/// Gradient of [`nonlocal_means`] with respect to the input.
///
/// From `L_loss = Σ_p u_p·z_p = (1/L)·Σ_{p,q} (x_p·x_q)(u_p·x_q)`, the
/// derivative at location `r` collects three families of terms:
/// `grad_r = (1/L)·[ Σ_q (u_r·x_q)·x_q + Σ_p ((u_p·x_r)·x_p + (x_p·x_r)·u_p) ]`.
pub fn nonlocal_means_backward(input: &Tensor, upstream: &Tensor) -> Result<Tensor> {
    let (c, h, w) = unpack3(input)?;
    if upstream.shape() != input.shape() {
        return Err(Error::Shape(format!(
            "upstream must match input shape {:?}, got {:?}",
            input.shape(),
            upstream.shape()
        )));
    }
    let locations = h * w;
    let scale = 1.0 / locations as f64;
    let x = |ch: usize, loc: usize| input.data()[ch * locations + loc];
    let u = |ch: usize, loc: usize| upstream.data()[ch * locations + loc];
    let mut grad = Tensor::zeros(&[c, h, w]);
    for r in 0..locations {
        for q in 0..locations {
            // q plays the "other location" role for all three terms
            let mut u_r_dot_x_q = 0.0;
            let mut u_q_dot_x_r = 0.0;
            let mut x_q_dot_x_r = 0.0;
            for ch in 0..c {
                u_r_dot_x_q += u(ch, r) * x(ch, q);
                u_q_dot_x_r += u(ch, q) * x(ch, r);
                x_q_dot_x_r += x(ch, q) * x(ch, r);
            }
            for ch in 0..c {
                grad.data_mut()[ch * locations + r] += scale
                    * (u_r_dot_x_q * x(ch, q)
                        + u_q_dot_x_r * x(ch, q)
                        + x_q_dot_x_r * u(ch, q));
            }
        }
    }
    Ok(grad)
}
