//! Raw-pixel window descriptors.
//!
//! A candidate window of any size is resampled to 9x9 with bilinear
//! interpolation and normalised to zero mean and unit variance, giving an
//! 81-dimensional vector that is invariant to brightness offset and
//! contrast scaling. Flat windows have no contrast to normalise and map to
//! the zero vector.

use crate::error::{Error, Result};
use crate::frame::GrayFrame;
use crate::scalar::{real, Real};

pub const DESCRIPTOR_SIDE: usize = 9;
pub const DESCRIPTOR_LEN: usize = DESCRIPTOR_SIDE * DESCRIPTOR_SIDE;

/// Normalised 9x9 window descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelDescriptor<R> {
    pub values: [R; DESCRIPTOR_LEN],
}

/// Bilinear sample at (sx, sy), clamped to the window so pixels outside it
/// never leak in.
fn sample_window<R: Real>(frame: &GrayFrame, x0: usize, y0: usize, size: usize, sx: R, sy: R) -> R {
    let max = real::<R>((size - 1) as f64);
    let sx = sx.max(R::zero()).min(max);
    let sy = sy.max(R::zero()).min(max);
    let fx = sx.floor();
    let fy = sy.floor();
    let ix = fx.to_usize().unwrap().min(size - 1);
    let iy = fy.to_usize().unwrap().min(size - 1);
    let ix1 = (ix + 1).min(size - 1);
    let iy1 = (iy + 1).min(size - 1);
    let tx = sx - fx;
    let ty = sy - fy;

    let at = |x: usize, y: usize| real::<R>(frame.get(x0 + x, y0 + y) as f64);
    let top = at(ix, iy) * (R::one() - tx) + at(ix1, iy) * tx;
    let bot = at(ix, iy1) * (R::one() - tx) + at(ix1, iy1) * tx;
    top * (R::one() - ty) + bot * ty
}

/// Extract the descriptor for the square window at (x, y) with edge `size`.
pub fn extract_descriptor<R: Real>(
    frame: &GrayFrame,
    x: usize,
    y: usize,
    size: usize,
) -> Result<PixelDescriptor<R>> {
    if size == 0 {
        return Err(Error::InvalidParameter("window size must be at least 1".into()));
    }
    if x + size > frame.width() || y + size > frame.height() {
        return Err(Error::InvalidParameter(format!(
            "window ({x}, {y}) size {size} leaves the {}x{} frame",
            frame.width(),
            frame.height()
        )));
    }

    let mut values = [R::zero(); DESCRIPTOR_LEN];
    let scale = real::<R>(size as f64 / DESCRIPTOR_SIDE as f64);
    let half = real::<R>(0.5);
    for j in 0..DESCRIPTOR_SIDE {
        for i in 0..DESCRIPTOR_SIDE {
            // Centre of output pixel (i, j) mapped into window coordinates.
            let sx = (real::<R>(i as f64) + half) * scale - half;
            let sy = (real::<R>(j as f64) + half) * scale - half;
            values[j * DESCRIPTOR_SIDE + i] = sample_window(frame, x, y, size, sx, sy);
        }
    }

    let n = real::<R>(DESCRIPTOR_LEN as f64);
    let mean = values.iter().copied().sum::<R>() / n;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<R>() / n;
    if var <= real::<R>(1e-12) {
        return Ok(PixelDescriptor { values: [R::zero(); DESCRIPTOR_LEN] });
    }
    let inv_sd = var.sqrt().recip();
    for v in values.iter_mut() {
        *v = (*v - mean) * inv_sd;
    }
    Ok(PixelDescriptor { values })
}

/// Bilinearly resamples the square window at (x, y) with edge `size` into
/// an `out` by `out` frame, without any normalisation. Used to cut fixed
/// size training windows out of full frames.
pub fn resample_window(
    frame: &GrayFrame,
    x: usize,
    y: usize,
    size: usize,
    out: usize,
) -> Result<GrayFrame> {
    if size == 0 || out == 0 {
        return Err(Error::InvalidParameter("window sizes must be at least 1".into()));
    }
    if x + size > frame.width() || y + size > frame.height() {
        return Err(Error::InvalidParameter(format!(
            "window ({x}, {y}) size {size} leaves the {}x{} frame",
            frame.width(),
            frame.height()
        )));
    }
    let mut resampled = GrayFrame::filled(out, out, 0)?;
    let scale = size as f64 / out as f64;
    for j in 0..out {
        for i in 0..out {
            let sx = (i as f64 + 0.5) * scale - 0.5;
            let sy = (j as f64 + 0.5) * scale - 0.5;
            let v: f64 = sample_window(frame, x, y, size, sx, sy);
            resampled.set(i, j, v.round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(resampled)
}
