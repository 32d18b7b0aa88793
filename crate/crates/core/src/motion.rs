//! Motion segmentation.
//!
//! A pixel is moving when it differs from the background model by more than
//! the model tolerance *and* from the previous frame by more than the frame
//! difference threshold. The full segmentation pipeline smooths the inputs
//! with a 5x5 Gaussian, applies the combined test per intensity difference,
//! binarises with hysteresis and closes the mask before blob extraction.

use crate::error::{Error, Result};
use crate::frame::{BinaryMask, GrayFrame, StructuringElement};

/// Integer 5x5 Gaussian kernel (sigma = 1.0), divisor 273.
const GAUSSIAN_5X5: [[u32; 5]; 5] = [
    [1, 4, 7, 4, 1],
    [4, 16, 26, 16, 4],
    [7, 26, 41, 26, 7],
    [4, 16, 26, 16, 4],
    [1, 4, 7, 4, 1],
];
const GAUSSIAN_DIVISOR: u32 = 273;

/// Per-pixel mean of an empty-scene sequence plus the intensity tolerance
/// used when differencing against it.
#[derive(Debug, Clone)]
pub struct BackgroundModel {
    mean: GrayFrame,
    tolerance: u32,
}

impl BackgroundModel {
    pub fn from_parts(mean: GrayFrame, tolerance: u32) -> Self {
        BackgroundModel { mean, tolerance }
    }

    pub fn mean(&self) -> &GrayFrame {
        &self.mean
    }

    pub fn tolerance(&self) -> u32 {
        self.tolerance
    }
}

/// Averages an empty-scene sequence into a background model. All frames must
/// share one size; the per-pixel mean rounds to nearest.
pub fn build_background(frames: &[GrayFrame], tolerance: u32) -> Result<BackgroundModel> {
    let first = frames.first().ok_or(Error::EmptyInput("background frame list"))?;
    let (w, h) = (first.width(), first.height());
    let mut sums = vec![0u64; w * h];
    for (i, frame) in frames.iter().enumerate() {
        if !frame.same_size(first) {
            return Err(Error::DimensionMismatch(format!(
                "background frame {i} is {}x{}, expected {w}x{h}",
                frame.width(),
                frame.height()
            )));
        }
        for (sum, &px) in sums.iter_mut().zip(frame.pixels()) {
            *sum += px as u64;
        }
    }
    let n = frames.len() as u64;
    let mean: Vec<u8> = sums.iter().map(|&s| ((s + n / 2) / n) as u8).collect();
    Ok(BackgroundModel { mean: GrayFrame::new(w, h, mean)?, tolerance })
}

/// Combined background/frame differencing: a pixel is set when it deviates
/// from the background mean by more than the model tolerance and from the
/// previous frame by more than `diff_threshold`.
pub fn segment_motion(
    current: &GrayFrame,
    previous: &GrayFrame,
    background: &BackgroundModel,
    diff_threshold: u32,
) -> Result<BinaryMask> {
    if !current.same_size(previous) || !current.same_size(background.mean()) {
        return Err(Error::DimensionMismatch(
            "current, previous and background frames must share a size".into(),
        ));
    }
    let mut mask = BinaryMask::new(current.width(), current.height())?;
    for y in 0..current.height() {
        for x in 0..current.width() {
            let cur = current.get(x, y) as i32;
            let bg = background.mean().get(x, y) as i32;
            let prev = previous.get(x, y) as i32;
            let moving = (cur - bg).unsigned_abs() > background.tolerance
                && (cur - prev).unsigned_abs() > diff_threshold;
            mask.set(x, y, moving);
        }
    }
    Ok(mask)
}

/// 5x5 Gaussian smoothing with edge replication and round-to-nearest.
pub fn gaussian_blur(frame: &GrayFrame) -> GrayFrame {
    let (w, h) = (frame.width(), frame.height());
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0u32;
            for (ky, row) in GAUSSIAN_5X5.iter().enumerate() {
                for (kx, &weight) in row.iter().enumerate() {
                    let sx = x as isize + kx as isize - 2;
                    let sy = y as isize + ky as isize - 2;
                    acc += weight * frame.get_replicated(sx, sy) as u32;
                }
            }
            out[y * w + x] = ((acc + GAUSSIAN_DIVISOR / 2) / GAUSSIAN_DIVISOR) as u8;
        }
    }
    GrayFrame::new(w, h, out).expect("dimensions preserved")
}

/// Binary dilation; pixels outside the mask are clear.
pub fn dilate(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let mut out = BinaryMask::new(w, h).expect("dimensions preserved");
    let offsets: Vec<(isize, isize)> = se.offsets().collect();
    for y in 0..h as isize {
        for x in 0..w as isize {
            let hit = offsets.iter().any(|&(dx, dy)| mask.get_clear(x - dx, y - dy));
            out.set(x as usize, y as usize, hit);
        }
    }
    out
}

/// Binary erosion; pixels outside the mask are clear, so set regions touching
/// the border erode there.
pub fn erode(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let mut out = BinaryMask::new(w, h).expect("dimensions preserved");
    let offsets: Vec<(isize, isize)> = se.offsets().collect();
    for y in 0..h as isize {
        for x in 0..w as isize {
            let all = offsets.iter().all(|&(dx, dy)| mask.get_clear(x + dx, y + dy));
            out.set(x as usize, y as usize, all);
        }
    }
    out
}

/// Morphological closing: dilation followed by erosion.
pub fn morphological_close(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    erode(&dilate(mask, se), se)
}

/// Hysteresis thresholding: pixels >= `high` seed regions which then extend
/// over every 8-connected pixel >= `low`.
pub fn hysteresis_threshold(frame: &GrayFrame, low: u32, high: u32) -> Result<BinaryMask> {
    if low > high {
        return Err(Error::InvalidParameter(format!(
            "hysteresis low threshold {low} exceeds high threshold {high}"
        )));
    }
    let (w, h) = (frame.width(), frame.height());
    let mut out = BinaryMask::new(w, h)?;
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if frame.get(x, y) as u32 >= high && !out.get(x, y) {
                out.set(x, y, true);
                stack.push((x, y));
                while let Some((cx, cy)) = stack.pop() {
                    for (nx, ny) in neighbours8(cx, cy, w, h) {
                        if !out.get(nx, ny) && frame.get(nx, ny) as u32 >= low {
                            out.set(nx, ny, true);
                            stack.push((nx, ny));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn neighbours8(
    x: usize,
    y: usize,
    w: usize,
    h: usize,
) -> impl Iterator<Item = (usize, usize)> {
    const OFFSETS: [(isize, isize); 8] = [
        (-1, -1),
        (0, -1),
        (1, -1),
        (-1, 0),
        (1, 0),
        (-1, 1),
        (0, 1),
        (1, 1),
    ];
    OFFSETS.into_iter().filter_map(move |(dx, dy)| {
        let nx = x as isize + dx;
        let ny = y as isize + dy;
        (nx >= 0 && ny >= 0 && nx < w as isize && ny < h as isize)
            .then(|| (nx as usize, ny as usize))
    })
}

/// Bounding box of one 8-connected mask component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Blob {
    /// Top-left corner.
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    /// Number of set pixels in the component, at most `width * height`.
    pub area: usize,
}

impl Blob {
    /// True when (x, y) lies inside the bounding box.
    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }
}

/// Extracts the 8-connected components of `mask` with at least `min_area` set
/// pixels, as tight bounding boxes ordered by (y, x) of the top-left corner.
pub fn extract_blobs(mask: &BinaryMask, min_area: usize) -> Vec<Blob> {
    let (w, h) = (mask.width(), mask.height());
    let mut visited = vec![false; w * h];
    let mut blobs = Vec::new();
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) || visited[y * w + x] {
                continue;
            }
            visited[y * w + x] = true;
            stack.push((x, y));
            let (mut min_x, mut max_x, mut min_y, mut max_y) = (x, x, y, y);
            let mut area = 0usize;
            while let Some((cx, cy)) = stack.pop() {
                area += 1;
                min_x = min_x.min(cx);
                max_x = max_x.max(cx);
                min_y = min_y.min(cy);
                max_y = max_y.max(cy);
                for (nx, ny) in neighbours8(cx, cy, w, h) {
                    if mask.get(nx, ny) && !visited[ny * w + nx] {
                        visited[ny * w + nx] = true;
                        stack.push((nx, ny));
                    }
                }
            }
            if area >= min_area {
                blobs.push(Blob {
                    x: min_x,
                    y: min_y,
                    width: max_x - min_x + 1,
                    height: max_y - min_y + 1,
                    area,
                });
            }
        }
    }
    blobs.sort_by_key(|b| (b.y, b.x));
    blobs
}
