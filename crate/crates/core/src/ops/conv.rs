//! Dense and depthwise 2-D convolution, stride 1, zero-padded to preserve
//! spatial shape, with exact reverse-mode derivatives.
//!
//! Conventions: feature maps are `[channels, height, width]`; dense weights
//! are `[out_channels, in_channels, k, k]`; depthwise weights are
//! `[channels, k, k]`. Padding is `(k−1)·dilation/2` per side, which keeps
//! `H×W` fixed for odd `k`.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

fn check_kernel(k: usize, dilation: usize) -> Result<()> {
    if k % 2 == 0 || k == 0 {
        return Err(Error::Shape(format!("kernel size must be odd, got {k}")));
    }
    if dilation == 0 {
        return Err(Error::Shape("dilation must be at least 1".into()));
    }
    Ok(())
}

/// Dense convolution: `out[o,y,x] = Σ_{i,u,v} w[o,i,u,v]·in[i, y+(u−r)d, x+(v−r)d]`
/// with zero padding outside the input.
pub fn conv2d_forward(input: &Tensor, weight: &Tensor, dilation: usize) -> Result<Tensor> {
    let (c_in, h, w) = unpack3(input)?;
    let ws = weight.shape();
    if ws.len() != 4 || ws[1] != c_in || ws[2] != ws[3] {
        return Err(Error::Shape(format!(
            "dense conv weight must be [out, {c_in}, k, k], got {ws:?}"
        )));
    }
    let (c_out, k) = (ws[0], ws[2]);
    check_kernel(k, dilation)?;
    let r = (k - 1) / 2;
    let mut out = Tensor::zeros(&[c_out, h, w]);
    for o in 0..c_out {
        for i in 0..c_in {
            for u in 0..k {
                for v in 0..k {
                    let wv = weight.data()[((o * c_in + i) * k + u) * k + v];
                    if wv == 0.0 {
                        continue;
                    }
                    accumulate_shifted(&mut out, input, o, i, wv, u, v, r, dilation);
                }
            }
        }
    }
    Ok(out)
}

/// Gradients of [`conv2d_forward`] with respect to input and weight.
pub fn conv2d_backward(
    input: &Tensor,
    weight: &Tensor,
    dilation: usize,
    upstream: &Tensor,
) -> Result<(Tensor, Tensor)> {
    let (c_in, h, w) = unpack3(input)?;
    let ws = weight.shape();
    if ws.len() != 4 || ws[1] != c_in || ws[2] != ws[3] {
        return Err(Error::Shape(format!(
            "dense conv weight must be [out, {c_in}, k, k], got {ws:?}"
        )));
    }
    let (c_out, k) = (ws[0], ws[2]);
    check_kernel(k, dilation)?;
    if upstream.shape() != [c_out, h, w] {
        return Err(Error::Shape(format!(
            "upstream must be [{c_out}, {h}, {w}], got {:?}",
            upstream.shape()
        )));
    }
    let r = (k - 1) / 2;
    let mut grad_input = Tensor::zeros(&[c_in, h, w]);
    let mut grad_weight = Tensor::zeros(ws);
    for o in 0..c_out {
        for y in 0..h {
            for x in 0..w {
                let up = upstream.at3(o, y, x);
                if up == 0.0 {
                    continue;
                }
                for i in 0..c_in {
                    for u in 0..k {
                        let Some(yy) = shifted(y, u, r, dilation, h) else { continue };
                        for v in 0..k {
                            let Some(xx) = shifted(x, v, r, dilation, w) else { continue };
                            let widx = ((o * c_in + i) * k + u) * k + v;
                            grad_weight.data_mut()[widx] += up * input.at3(i, yy, xx);
                            grad_input.add3(i, yy, xx, up * weight.data()[widx]);
                        }
                    }
                }
            }
        }
    }
    Ok((grad_input, grad_weight))
}

/// Depthwise convolution: each channel is convolved with its own kernel.
pub fn depthwise_forward(input: &Tensor, weight: &Tensor, dilation: usize) -> Result<Tensor> {
    let (c, h, w) = unpack3(input)?;
    let ws = weight.shape();
    if ws.len() != 3 || ws[0] != c || ws[1] != ws[2] {
        return Err(Error::Shape(format!(
            "depthwise weight must be [{c}, k, k], got {ws:?}"
        )));
    }
    let k = ws[1];
    check_kernel(k, dilation)?;
    let r = (k - 1) / 2;
    let mut out = Tensor::zeros(&[c, h, w]);
    for i in 0..c {
        for u in 0..k {
            for v in 0..k {
                let wv = weight.data()[(i * k + u) * k + v];
                if wv == 0.0 {
                    continue;
                }
                accumulate_shifted(&mut out, input, i, i, wv, u, v, r, dilation);
            }
        }
    }
    Ok(out)
}

/// Gradients of [`depthwise_forward`] with respect to input and weight.
pub fn depthwise_backward(
    input: &Tensor,
    weight: &Tensor,
    dilation: usize,
    upstream: &Tensor,
) -> Result<(Tensor, Tensor)> {
    let (c, h, w) = unpack3(input)?;
    let ws = weight.shape();
    if ws.len() != 3 || ws[0] != c || ws[1] != ws[2] {
        return Err(Error::Shape(format!(
            "depthwise weight must be [{c}, k, k], got {ws:?}"
        )));
    }
    let k = ws[1];
    check_kernel(k, dilation)?;
    if upstream.shape() != [c, h, w] {
        return Err(Error::Shape(format!(
            "upstream must be [{c}, {h}, {w}], got {:?}",
            upstream.shape()
        )));
    }
    let r = (k - 1) / 2;
    let mut grad_input = Tensor::zeros(&[c, h, w]);
    let mut grad_weight = Tensor::zeros(ws);
    for i in 0..c {
        for y in 0..h {
            for x in 0..w {
                let up = upstream.at3(i, y, x);
                if up == 0.0 {
                    continue;
                }
                for u in 0..k {
                    let Some(yy) = shifted(y, u, r, dilation, h) else { continue };
                    for v in 0..k {
                        let Some(xx) = shifted(x, v, r, dilation, w) else { continue };
                        let widx = (i * k + u) * k + v;
                        grad_weight.data_mut()[widx] += up * input.at3(i, yy, xx);
                        grad_input.add3(i, yy, xx, up * weight.data()[widx]);
                    }
                }
            }
        }
    }
    Ok((grad_input, grad_weight))
}

/// In-bounds source coordinate for output position `pos` and kernel tap `tap`,
/// or `None` when the tap lands in the zero padding.
#[inline]
fn shifted(pos: usize, tap: usize, r: usize, dilation: usize, limit: usize) -> Option<usize> {
    let shifted = pos as isize + (tap as isize - r as isize) * dilation as isize;
    if shifted < 0 || shifted >= limit as isize {
        None
    } else {
        Some(shifted as usize)
    }
}

#[inline]
#[allow(clippy::too_many_arguments)]
fn accumulate_shifted(
    out: &mut Tensor,
    input: &Tensor,
    o: usize,
    i: usize,
    wv: f64,
    u: usize,
    v: usize,
    r: usize,
    dilation: usize,
) {
    let (h, w) = (input.shape()[1], input.shape()[2]);
    for y in 0..h {
        let Some(yy) = shifted(y, u, r, dilation, h) else { continue };
        for x in 0..w {
            let Some(xx) = shifted(x, v, r, dilation, w) else { continue };
            out.add3(o, y, x, wv * input.at3(i, yy, xx));
        }
    }
}

pub(crate) fn unpack3(t: &Tensor) -> Result<(usize, usize, usize)> {
    match t.shape() {
        [c, h, w] => Ok((*c, *h, *w)),
        other => Err(Error::Shape(format!("expected a [C, H, W] tensor, got {other:?}"))),
    }
}
