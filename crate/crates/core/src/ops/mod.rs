//! The nine candidate operations as pure numeric kernels with exact
//! reverse-mode derivatives, plus the adversarial-attack routines.
//!
//! Every operation maps `[C, H, W] → [C, H, W]` (stride 1, zero-padded);
//! spatial down-sampling happens only in the fixed stage between cells,
//! owned by the network builder.

pub mod attack;
pub mod conv;
pub mod denoise;
pub mod gabor;
pub mod pool;

pub use attack::{fgsm_random_init, pgd_attack, AttackConfig, GradientOracle};
pub use gabor::{gabor_kernel, gabor_param_gradients, GaborParams, GABOR_PARAM_COUNT};
pub use denoise::{nonlocal_means, nonlocal_means_backward};

use crate::error::{Error, Result};
use crate::rng::gaussian;
use crate::space::OperationKind;
use crate::tensor::Tensor;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Dilation rate of the dilated convolutions.
const DILATION_RATE: usize = 2;
/// Projection floors keeping Gabor kernels well-defined under SGD.
const MIN_SIGMA: f64 = 0.1;
const MIN_WAVELENGTH: f64 = 0.5;

/// Weights of one operation instance. The same shapes carry gradients, so an
/// SGD step is an elementwise walk over matching variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OpWeights {
    /// Pools and the identity carry no parameters.
    None,
    /// Dense (dilated) convolution: `weight` is `[C, C, k, k]`.
    Conv { weight: Tensor },
    /// Depthwise `[C, k, k]` followed by pointwise `[C, C, 1, 1]`.
    Separable { depthwise: Tensor, pointwise: Tensor },
    /// One set of five scalars per output channel; the synthesized kernel is
    /// shared across input channels.
    Gabor { params: Vec<GaborParams> },
    /// The 1×1 mixing convolution of the denoise wrap: `[C, C, 1, 1]`.
    Denoise { mix: Tensor },
}

impl OpWeights {
    /// Freshly initialized weights for `kind` at `channels` width.
    pub fn init<R: Rng>(kind: OperationKind, channels: usize, rng: &mut R) -> OpWeights {
        let c = channels;
        match kind {
            OperationKind::MaxPool3x3 | OperationKind::AvgPool3x3 | OperationKind::SkipConnect => {
                OpWeights::None
            }
            OperationKind::DilConv3x3 => OpWeights::Conv { weight: conv_init(c, 3, rng) },
            OperationKind::DilConv5x5 => OpWeights::Conv { weight: conv_init(c, 5, rng) },
            OperationKind::SepConv3x3 => OpWeights::Separable {
                depthwise: depthwise_init(c, 3, rng),
                pointwise: pointwise_init(c, rng),
            },
            OperationKind::SepConv5x5 => OpWeights::Separable {
                depthwise: depthwise_init(c, 5, rng),
                pointwise: pointwise_init(c, rng),
            },
            OperationKind::Gabor3x3 => OpWeights::Gabor {
                params: (0..c)
                    .map(|_| GaborParams {
                        sigma: (0.2 * gaussian(rng)).exp(),
                        aspect: (0.3 * gaussian(rng)).exp(),
                        wavelength: 4.0 * (0.2 * gaussian(rng)).exp(),
                        phase: 0.5 * gaussian(rng),
                        orientation: rng.gen_range(-PI..PI),
                    })
                    .collect(),
            },
            OperationKind::Denoise => OpWeights::Denoise { mix: denoise_init(c, rng) },
        }
    }

    /// `θ ← θ − lr·grad`, with both sides in the same variant. Gabor scale
    /// parameters are floored afterwards so the kernel stays well-defined.
    pub fn sgd_step(&mut self, grads: &OpWeights, learning_rate: f64) -> Result<()> {
        match (self, grads) {
            (OpWeights::None, OpWeights::None) => Ok(()),
            (OpWeights::Conv { weight }, OpWeights::Conv { weight: g }) => {
                step_tensor(weight, g, learning_rate)
            }
            (
                OpWeights::Separable { depthwise, pointwise },
                OpWeights::Separable { depthwise: gd, pointwise: gp },
            ) => {
                step_tensor(depthwise, gd, learning_rate)?;
                step_tensor(pointwise, gp, learning_rate)
            }
            (OpWeights::Gabor { params }, OpWeights::Gabor { params: g }) => {
                if params.len() != g.len() {
                    return Err(Error::Shape(format!(
                        "gabor gradient count {} does not match {} kernels",
                        g.len(),
                        params.len()
                    )));
                }
                for (p, dp) in params.iter_mut().zip(g) {
                    let mut flat = p.to_array();
                    for (v, d) in flat.iter_mut().zip(dp.to_array()) {
                        *v -= learning_rate * d;
                    }
                    let mut next = GaborParams::from_array(flat);
                    next.sigma = next.sigma.max(MIN_SIGMA);
                    next.wavelength = next.wavelength.max(MIN_WAVELENGTH);
                    *p = next;
                }
                Ok(())
            }
            (OpWeights::Denoise { mix }, OpWeights::Denoise { mix: g }) => {
                step_tensor(mix, g, learning_rate)
            }
            (have, _) => Err(Error::Shape(format!(
                "gradient variant does not match weights ({have:?})"
            ))),
        }
    }

    pub fn all_finite(&self) -> bool {
        match self {
            OpWeights::None => true,
            OpWeights::Conv { weight } => weight.all_finite(),
            OpWeights::Separable { depthwise, pointwise } => {
                depthwise.all_finite() && pointwise.all_finite()
            }
            OpWeights::Gabor { params } => params
                .iter()
                .all(|p| p.to_array().iter().all(|v| v.is_finite())),
            OpWeights::Denoise { mix } => mix.all_finite(),
        }
    }

    /// Every scalar parameter, in a fixed traversal order (tensors row-major,
    /// Gabor kernels as five scalars each).
    pub fn flat_parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.append_flat(&mut out);
        out
    }

    pub(crate) fn append_flat(&self, out: &mut Vec<f64>) {
        match self {
            OpWeights::None => {}
            OpWeights::Conv { weight } => out.extend_from_slice(weight.data()),
            OpWeights::Separable { depthwise, pointwise } => {
                out.extend_from_slice(depthwise.data());
                out.extend_from_slice(pointwise.data());
            }
            OpWeights::Gabor { params } => {
                for p in params {
                    out.extend_from_slice(&p.to_array());
                }
            }
            OpWeights::Denoise { mix } => out.extend_from_slice(mix.data()),
        }
    }

    /// Writes parameters back in [`OpWeights::flat_parameters`] order;
    /// `values` must have exactly the flattened length. Values are stored
    /// verbatim (no Gabor floors), so exact round trips hold.
    pub fn set_flat_parameters(&mut self, values: &[f64]) -> Result<()> {
        let mut cursor = values;
        self.read_flat(&mut cursor)?;
        if !cursor.is_empty() {
            return Err(Error::Shape(format!(
                "{} unused values in parameter vector",
                cursor.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn read_flat(&mut self, cursor: &mut &[f64]) -> Result<()> {
        match self {
            OpWeights::None => Ok(()),
            OpWeights::Conv { weight } => read_tensor_flat(weight, cursor),
            OpWeights::Separable { depthwise, pointwise } => {
                read_tensor_flat(depthwise, cursor)?;
                read_tensor_flat(pointwise, cursor)
            }
            OpWeights::Gabor { params } => {
                for p in params.iter_mut() {
                    let src = take_flat(cursor, GABOR_PARAM_COUNT)?;
                    *p = GaborParams::from_array(
                        src.try_into().expect("take_flat returned the exact count"),
                    );
                }
                Ok(())
            }
            OpWeights::Denoise { mix } => read_tensor_flat(mix, cursor),
        }
    }
}

/// Splits `n` values off the front of a flat parameter cursor.
pub(crate) fn take_flat<'a>(cursor: &mut &'a [f64], n: usize) -> Result<&'a [f64]> {
    if cursor.len() < n {
        return Err(Error::Shape(format!(
            "parameter vector too short: needed {n} more values, have {}",
            cursor.len()
        )));
    }
    let (head, tail) = cursor.split_at(n);
    *cursor = tail;
    Ok(head)
}

pub(crate) fn read_tensor_flat(tensor: &mut Tensor, cursor: &mut &[f64]) -> Result<()> {
    let src = take_flat(cursor, tensor.len())?;
    tensor.data_mut().copy_from_slice(src);
    Ok(())
}

pub(crate) fn step_tensor(weight: &mut Tensor, grad: &Tensor, learning_rate: f64) -> Result<()> {
    if weight.shape() != grad.shape() {
        return Err(Error::Shape(format!(
            "gradient shape {:?} does not match weight shape {:?}",
            grad.shape(),
            weight.shape()
        )));
    }
    for (w, g) in weight.data_mut().iter_mut().zip(grad.data()) {
        *w -= learning_rate * g;
    }
    Ok(())
}

fn gaussian_tensor<R: Rng>(shape: &[usize], scale: f64, rng: &mut R) -> Tensor {
    let len: usize = shape.iter().product();
    Tensor::from_vec(shape, (0..len).map(|_| scale * gaussian(rng)).collect())
        .expect("length matches shape")
}

fn conv_init<R: Rng>(c: usize, k: usize, rng: &mut R) -> Tensor {
    gaussian_tensor(&[c, c, k, k], 1.0 / ((c * k * k) as f64).sqrt(), rng)
}

fn depthwise_init<R: Rng>(c: usize, k: usize, rng: &mut R) -> Tensor {
    gaussian_tensor(&[c, k, k], 1.0 / ((k * k) as f64).sqrt(), rng)
}

fn pointwise_init<R: Rng>(c: usize, rng: &mut R) -> Tensor {
    gaussian_tensor(&[c, c, 1, 1], 1.0 / (c as f64).sqrt(), rng)
}

fn denoise_init<R: Rng>(c: usize, rng: &mut R) -> Tensor {
    // the similarity-weighted mean grows with channel count; damp the mix
    gaussian_tensor(&[c, c, 1, 1], 0.5 / c as f64, rng)
}

/// Synthesizes the dense `[C, C, 3, 3]` weight of a Gabor convolution: the
/// kernel of output channel `o` is replicated across all input channels.
fn gabor_dense_weight(params: &[GaborParams], channels: usize) -> Result<Tensor> {
    if params.len() != channels {
        return Err(Error::Shape(format!(
            "need one gabor kernel per output channel: {} vs {channels}",
            params.len()
        )));
    }
    let k = 3;
    let mut weight = Tensor::zeros(&[channels, channels, k, k]);
    for (o, p) in params.iter().enumerate() {
        let kernel = gabor_kernel(p, k)?;
        for i in 0..channels {
            for t in 0..k * k {
                weight.data_mut()[((o * channels + i) * k + t / k) * k + t % k] =
                    kernel.data()[t];
            }
        }
    }
    Ok(weight)
}

/// Applies one operation; shape-preserving `[C, H, W] → [C, H, W]`.
pub fn op_forward(kind: OperationKind, input: &Tensor, weights: &OpWeights) -> Result<Tensor> {
    let channels = feature_channels(input)?;
    match (kind, weights) {
        (OperationKind::MaxPool3x3, OpWeights::None) => pool::max_pool3_forward(input),
        (OperationKind::AvgPool3x3, OpWeights::None) => pool::avg_pool3_forward(input),
        (OperationKind::SkipConnect, OpWeights::None) => Ok(input.clone()),
        (OperationKind::DilConv3x3 | OperationKind::DilConv5x5, OpWeights::Conv { weight }) => {
            conv::conv2d_forward(input, weight, DILATION_RATE)
        }
        (
            OperationKind::SepConv3x3 | OperationKind::SepConv5x5,
            OpWeights::Separable { depthwise, pointwise },
        ) => {
            let mid = conv::depthwise_forward(input, depthwise, 1)?;
            conv::conv2d_forward(&mid, pointwise, 1)
        }
        (OperationKind::Gabor3x3, OpWeights::Gabor { params }) => {
            let weight = gabor_dense_weight(params, channels)?;
            conv::conv2d_forward(input, &weight, 1)
        }
        (OperationKind::Denoise, OpWeights::Denoise { mix }) => {
            let z = nonlocal_means(input)?;
            input.add(&conv::conv2d_forward(&z, mix, 1)?)
        }
        (kind, weights) => Err(Error::InvalidArgument(format!(
            "weights {weights:?} do not belong to operation {kind}"
        ))),
    }
}

/// Exact reverse-mode derivatives of [`op_forward`]: gradients with respect
/// to the input and to the weights (in the same container shape).
pub fn op_backward(
    kind: OperationKind,
    input: &Tensor,
    weights: &OpWeights,
    upstream: &Tensor,
) -> Result<(Tensor, OpWeights)> {
    let channels = feature_channels(input)?;
    match (kind, weights) {
        (OperationKind::MaxPool3x3, OpWeights::None) => {
            Ok((pool::max_pool3_backward(input, upstream)?, OpWeights::None))
        }
        (OperationKind::AvgPool3x3, OpWeights::None) => {
            Ok((pool::avg_pool3_backward(input, upstream)?, OpWeights::None))
        }
        (OperationKind::SkipConnect, OpWeights::None) => {
            if upstream.shape() != input.shape() {
                return Err(Error::Shape(format!(
                    "upstream must match input shape {:?}, got {:?}",
                    input.shape(),
                    upstream.shape()
                )));
            }
            Ok((upstream.clone(), OpWeights::None))
        }
        (OperationKind::DilConv3x3 | OperationKind::DilConv5x5, OpWeights::Conv { weight }) => {
            let (gi, gw) = conv::conv2d_backward(input, weight, DILATION_RATE, upstream)?;
            Ok((gi, OpWeights::Conv { weight: gw }))
        }
        (
            OperationKind::SepConv3x3 | OperationKind::SepConv5x5,
            OpWeights::Separable { depthwise, pointwise },
        ) => {
            let mid = conv::depthwise_forward(input, depthwise, 1)?;
            let (g_mid, g_pw) = conv::conv2d_backward(&mid, pointwise, 1, upstream)?;
            let (g_in, g_dw) = conv::depthwise_backward(input, depthwise, 1, &g_mid)?;
            Ok((g_in, OpWeights::Separable { depthwise: g_dw, pointwise: g_pw }))
        }
        (OperationKind::Gabor3x3, OpWeights::Gabor { params }) => {
            let weight = gabor_dense_weight(params, channels)?;
            let (gi, g_dense) = conv::conv2d_backward(input, &weight, 1, upstream)?;
            let k = 3;
            let mut grads = Vec::with_capacity(params.len());
            for (o, p) in params.iter().enumerate() {
                // the kernel is shared across input channels, so its upstream
                // is the sum of the dense-weight gradients over that axis
                let mut kernel_up = Tensor::zeros(&[k, k]);
                for i in 0..channels {
                    for t in 0..k * k {
                        kernel_up.data_mut()[t] +=
                            g_dense.data()[((o * channels + i) * k + t / k) * k + t % k];
                    }
                }
                let g = gabor_param_gradients(p, k, &kernel_up)?;
                grads.push(GaborParams::from_array(g));
            }
            Ok((gi, OpWeights::Gabor { params: grads }))
        }
        (OperationKind::Denoise, OpWeights::Denoise { mix }) => {
            let z = nonlocal_means(input)?;
            let (g_z, g_mix) = conv::conv2d_backward(&z, mix, 1, upstream)?;
            let g_through_mean = nonlocal_means_backward(input, &g_z)?;
            let grad_input = upstream.add(&g_through_mean)?;
            Ok((grad_input, OpWeights::Denoise { mix: g_mix }))
        }
        (kind, weights) => Err(Error::InvalidArgument(format!(
            "weights {weights:?} do not belong to operation {kind}"
        ))),
    }
}

fn feature_channels(input: &Tensor) -> Result<usize> {
    match input.shape() {
        [c, _, _] => Ok(*c),
        other => Err(Error::Shape(format!("expected a [C, H, W] input, got {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn random_input(c: usize, h: usize, w: usize, rng: &mut impl rand::Rng) -> Tensor {
        Tensor::from_vec(&[c, h, w], (0..c * h * w).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .unwrap()
    }

    #[test]
    fn identity_forward_bit_equals_input() {
        let mut rng = rng::stream(20, rng::domain::WEIGHTS, 0);
        let x = random_input(2, 4, 4, &mut rng);
        let y = op_forward(OperationKind::SkipConnect, &x, &OpWeights::None).unwrap();
        assert_eq!(x, y);
        let (gi, gw) = op_backward(OperationKind::SkipConnect, &x, &OpWeights::None, &y).unwrap();
        assert_eq!(gi, y);
        assert_eq!(gw, OpWeights::None);
    }

    #[test]
    fn every_kind_preserves_shape_and_finiteness() {
        let mut rng = rng::stream(21, rng::domain::WEIGHTS, 0);
        for kind in OperationKind::ALL {
            let x = random_input(3, 5, 4, &mut rng);
            let w = OpWeights::init(kind, 3, &mut rng);
            let y = op_forward(kind, &x, &w).unwrap();
            assert_eq!(y.shape(), x.shape(), "{kind}");
            assert!(y.all_finite(), "{kind}");
            let upstream = random_input(3, 5, 4, &mut rng);
            let (gi, gw) = op_backward(kind, &x, &w, &upstream).unwrap();
            assert_eq!(gi.shape(), x.shape(), "{kind}");
            assert!(gi.all_finite(), "{kind}");
            assert!(gw.all_finite(), "{kind}");
        }
    }

    #[test]
    fn mismatched_weights_are_rejected() {
        let x = Tensor::zeros(&[2, 3, 3]);
        let err = op_forward(OperationKind::MaxPool3x3, &x, &OpWeights::Denoise {
            mix: Tensor::zeros(&[2, 2, 1, 1]),
        });
        assert!(err.is_err());
        let err = op_backward(OperationKind::Gabor3x3, &x, &OpWeights::None, &x);
        assert!(err.is_err());
    }

    #[test]
    fn gabor_weight_replicates_kernel_across_input_channels() {
        let params = vec![
            GaborParams { sigma: 1.0, aspect: 1.0, wavelength: 4.0, phase: 0.0, orientation: 0.0 },
            GaborParams { sigma: 0.8, aspect: 1.2, wavelength: 3.0, phase: 0.3, orientation: 0.7 },
        ];
        let w = gabor_dense_weight(&params, 2).unwrap();
        for o in 0..2 {
            let reference = gabor_kernel(&params[o], 3).unwrap();
            for i in 0..2 {
                for t in 0..9 {
                    assert_eq!(
                        w.data()[((o * 2 + i) * 3 + t / 3) * 3 + t % 3],
                        reference.data()[t]
                    );
                }
            }
        }
    }

    #[test]
    fn sgd_step_moves_against_gradient_and_floors_gabor_scales() {
        let mut rng = rng::stream(22, rng::domain::WEIGHTS, 0);
        let mut w = OpWeights::init(OperationKind::DilConv3x3, 2, &mut rng);
        let before = match &w {
            OpWeights::Conv { weight } => weight.data()[0],
            _ => unreachable!(),
        };
        let grad = OpWeights::Conv { weight: Tensor::filled(&[2, 2, 3, 3], 1.0) };
        w.sgd_step(&grad, 0.1).unwrap();
        let after = match &w {
            OpWeights::Conv { weight } => weight.data()[0],
            _ => unreachable!(),
        };
        assert!((before - after - 0.1).abs() < 1e-15);

        let mut g = OpWeights::Gabor {
            params: vec![GaborParams {
                sigma: 0.11,
                aspect: 1.0,
                wavelength: 0.6,
                phase: 0.0,
                orientation: 0.0,
            }],
        };
        let huge = OpWeights::Gabor {
            params: vec![GaborParams {
                sigma: 100.0,
                aspect: 0.0,
                wavelength: 100.0,
                phase: 0.0,
                orientation: 0.0,
            }],
        };
        g.sgd_step(&huge, 1.0).unwrap();
        match g {
            OpWeights::Gabor { params } => {
                assert_eq!(params[0].sigma, MIN_SIGMA);
                assert_eq!(params[0].wavelength, MIN_WAVELENGTH);
            }
            _ => unreachable!(),
        }

        let mismatch = OpWeights::None;
        let mut w2 = OpWeights::init(OperationKind::Denoise, 2, &mut rng);
        assert!(w2.sgd_step(&mismatch, 0.1).is_err());
    }

    #[test]
    fn denoise_forward_is_input_plus_mixed_mean() {
        let mut rng = rng::stream(23, rng::domain::WEIGHTS, 0);
        let x = random_input(2, 3, 3, &mut rng);
        let w = OpWeights::init(OperationKind::Denoise, 2, &mut rng);
        let y = op_forward(OperationKind::Denoise, &x, &w).unwrap();
        let OpWeights::Denoise { mix } = &w else { unreachable!() };
        let z = nonlocal_means(&x).unwrap();
        let expected = x.add(&conv::conv2d_forward(&z, mix, 1).unwrap()).unwrap();
        assert_eq!(y, expected);
    }

    /// Smoke finite-difference pass over all parameterized kinds; the
    /// exhaustive 100-instance sweep lives in the integration suite.
    #[test]
    fn parameterized_backward_smoke_finite_difference() {
        let mut rng = rng::stream(24, rng::domain::WEIGHTS, 0);
        let h = 1e-5;
        for kind in [
            OperationKind::DilConv3x3,
            OperationKind::SepConv3x3,
            OperationKind::Gabor3x3,
            OperationKind::Denoise,
        ] {
            let x = random_input(2, 3, 3, &mut rng);
            let w = OpWeights::init(kind, 2, &mut rng);
            let upstream = random_input(2, 3, 3, &mut rng);
            let loss = |input: &Tensor, weights: &OpWeights| -> f64 {
                op_forward(kind, input, weights)
                    .unwrap()
                    .data()
                    .iter()
                    .zip(upstream.data())
                    .map(|(a, b)| a * b)
                    .sum()
            };
            let (gi, _) = op_backward(kind, &x, &w, &upstream).unwrap();
            for idx in [0usize, 5, 11, 17] {
                let mut plus = x.clone();
                plus.data_mut()[idx] += h;
                let mut minus = x.clone();
                minus.data_mut()[idx] -= h;
                let fd = (loss(&plus, &w) - loss(&minus, &w)) / (2.0 * h);
                let denom = fd.abs().max(gi.data()[idx].abs()).max(1.0);
                assert!(
                    (fd - gi.data()[idx]).abs() / denom < 1e-4,
                    "{kind} input grad idx {idx}: {fd} vs {}",
                    gi.data()[idx]
                );
            }
        }
    }
}
