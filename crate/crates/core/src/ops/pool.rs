//! 3×3 pooling, stride 1, zero-padded to preserve shape.
//!
//! Padding cells participate in the windows: an average window always divides
//! by 9, so borders attenuate, and a max window includes the implicit zeros,
//! so an all-negative border neighbourhood maxes to 0. Max-pool gradient
//! routes to the argmax input cell (first scanned wins ties) and vanishes
//! when a padding zero wins.

use crate::error::{Error, Result};
use crate::ops::conv::unpack3;
use crate::tensor::Tensor;

const WINDOW: usize = 3;
const AREA: f64 = (WINDOW * WINDOW) as f64;

fn window(pos: usize, limit: usize) -> impl Iterator<Item = Option<usize>> {
    (-1..=1isize).map(move |d| {
        let p = pos as isize + d;
        if p < 0 || p >= limit as isize {
            None
        } else {
            Some(p as usize)
        }
    })
}

/// 3×3 max pooling; implicit padding zeros compete in each window.
pub fn max_pool3_forward(input: &Tensor) -> Result<Tensor> {
    let (c, h, w) = unpack3(input)?;
    let mut out = Tensor::zeros(&[c, h, w]);
    for ch in 0..c {
        for y in 0..h {
            for x in 0..w {
                let mut best = f64::NEG_INFINITY;
                let mut saw_pad = false;
                for yy in window(y, h) {
                    for xx in window(x, w) {
                        match (yy, xx) {
                            (Some(yy), Some(xx)) => best = best.max(input.at3(ch, yy, xx)),
                            _ => saw_pad = true,
                        }
                    }
                }
                if saw_pad {
                    best = best.max(0.0);
                }
                out.set3(ch, y, x, best);
            }
        }
    }
    Ok(out)
}

/// Gradient of [`max_pool3_forward`]: upstream routes to each window's
/// argmax cell; nothing flows when a padding zero holds the max.
pub fn max_pool3_backward(input: &Tensor, upstream: &Tensor) -> Result<Tensor> {
    let (c, h, w) = unpack3(input)?;
    if upstream.shape() != input.shape() {
        return Err(Error::Shape(format!(
            "upstream must match input shape {:?}, got {:?}",
            input.shape(),
            upstream.shape()
        )));
    }
    let mut grad = Tensor::zeros(&[c, h, w]);
    for ch in 0..c {
        for y in 0..h {
            for x in 0..w {
                let mut best = f64::NEG_INFINITY;
                let mut arg: Option<(usize, usize)> = None;
                let mut saw_pad = false;
                for yy in window(y, h) {
                    for xx in window(x, w) {
                        match (yy, xx) {
                            (Some(yy), Some(xx)) => {
                                let v = input.at3(ch, yy, xx);
                                if v > best {
                                    best = v;
                                    arg = Some((yy, xx));
                                }
                            }
                            _ => saw_pad = true,
                        }
                    }
                }
                // a padding zero strictly above every real cell wins the max
                if saw_pad && 0.0 > best {
                    arg = None;
                }
                if let Some((yy, xx)) = arg {
                    grad.add3(ch, yy, xx, upstream.at3(ch, y, x));
                }
            }
        }
    }
    Ok(grad)
}

/// 3×3 average pooling; every window divides by 9, padding counted as zero.
pub fn avg_pool3_forward(input: &Tensor) -> Result<Tensor> {
    let (c, h, w) = unpack3(input)?;
    let mut out = Tensor::zeros(&[c, h, w]);
    for ch in 0..c {
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for yy in window(y, h).flatten() {
                    for xx in window(x, w).flatten() {
                        acc += input.at3(ch, yy, xx);
                    }
                }
                out.set3(ch, y, x, acc / AREA);
            }
        }
    }
    Ok(out)
}

/// Gradient of [`avg_pool3_forward`].
pub fn avg_pool3_backward(input: &Tensor, upstream: &Tensor) -> Result<Tensor> {
    let (c, h, w) = unpack3(input)?;
    if upstream.shape() != input.shape() {
        return Err(Error::Shape(format!(
            "upstream must match input shape {:?}, got {:?}",
            input.shape(),
            upstream.shape()
        )));
    }
    let mut grad = Tensor::zeros(&[c, h, w]);
    for ch in 0..c {
        for y in 0..h {
            for x in 0..w {
                let share = upstream.at3(ch, y, x) / AREA;
                for yy in window(y, h).flatten() {
                    for xx in window(x, w).flatten() {
                        grad.add3(ch, yy, xx, share);
                    }
                }
            }
        }
    }
    Ok(grad)
}

/// 2×2 average pooling with stride 2; halves both spatial dimensions.
/// Used only by the fixed down-sampling stage between cells.
pub fn avg_pool2_stride2_forward(input: &Tensor) -> Result<Tensor> {
    let (c, h, w) = unpack3(input)?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::Shape(format!(
            "down-sampling needs even spatial dims, got {h}x{w}"
        )));
    }
    let mut out = Tensor::zeros(&[c, h / 2, w / 2]);
    for ch in 0..c {
        for y in 0..h / 2 {
            for x in 0..w / 2 {
                let acc = input.at3(ch, 2 * y, 2 * x)
                    + input.at3(ch, 2 * y, 2 * x + 1)
                    + input.at3(ch, 2 * y + 1, 2 * x)
                    + input.at3(ch, 2 * y + 1, 2 * x + 1);
                out.set3(ch, y, x, acc / 4.0);
            }
        }
    }
    Ok(out)
}

/// Gradient of [`avg_pool2_stride2_forward`].
pub fn avg_pool2_stride2_backward(input: &Tensor, upstream: &Tensor) -> Result<Tensor> {
    let (c, h, w) = unpack3(input)?;
    if upstream.shape() != [c, h / 2, w / 2] {
        return Err(Error::Shape(format!(
            "upstream must be [{c}, {}, {}], got {:?}",
            h / 2,
            w / 2,
            upstream.shape()
        )));
    }
    let mut grad = Tensor::zeros(&[c, h, w]);
    for ch in 0..c {
        for y in 0..h / 2 {
            for x in 0..w / 2 {
                let share = upstream.at3(ch, y, x) / 4.0;
                grad.add3(ch, 2 * y, 2 * x, share);
                grad.add3(ch, 2 * y, 2 * x + 1, share);
                grad.add3(ch, 2 * y + 1, 2 * x, share);
                grad.add3(ch, 2 * y + 1, 2 * x + 1, share);
            }
        }
    }
    Ok(grad)
}
