//! Corner detection on moving regions.
//!
//! Sobel gradients feed a Gaussian-weighted structure tensor per pixel; the
//! corner score is the eigenvalue ratio lambda_min / lambda_max, which lies
//! in [0, 1] and is invariant to global intensity scaling. Candidates are
//! strict 8-neighbourhood maxima of the score inside movement blobs that pass
//! both the score threshold and a gradient magnitude floor, thinned by greedy
//! minimum-distance suppression in descending score order.

use crate::error::{Error, Result};
use crate::frame::GrayFrame;
use crate::motion::Blob;
use crate::scalar::{real, Real};
use crate::ViewId;

/// Sobel responses per pixel.
#[derive(Debug, Clone)]
pub struct GradientField<R> {
    width: usize,
    height: usize,
    gx: Vec<R>,
    gy: Vec<R>,
}

impl<R: Real> GradientField<R> {
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn gx(&self, x: usize, y: usize) -> R {
        self.gx[y * self.width + x]
    }

    #[inline]
    pub fn gy(&self, x: usize, y: usize) -> R {
        self.gy[y * self.width + x]
    }

    /// Euclidean gradient magnitude.
    #[inline]
    pub fn magnitude(&self, x: usize, y: usize) -> R {
        self.gx(x, y).hypot(self.gy(x, y))
    }

    /// Reads with edge replication for window sums near the border.
    #[inline]
    fn replicated(&self, x: isize, y: isize) -> (R, R) {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        (self.gx(cx, cy), self.gy(cx, cy))
    }
}

/// 3x3 Sobel gradients with edge replication. Frames smaller than the kernel
/// are rejected.
pub fn sobel_gradients<R: Real>(frame: &GrayFrame) -> Result<GradientField<R>> {
    if frame.width() < 3 || frame.height() < 3 {
        return Err(Error::InvalidParameter(format!(
            "frame {}x{} is smaller than the 3x3 gradient kernel",
            frame.width(),
            frame.height()
        )));
    }
    let (w, h) = (frame.width(), frame.height());
    let mut gx = vec![R::zero(); w * h];
    let mut gy = vec![R::zero(); w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |dx: isize, dy: isize| frame.get_replicated(x + dx, y + dy) as i32;
            let sx = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
            let sy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
            let idx = y as usize * w + x as usize;
            gx[idx] = R::from_i32(sx).expect("sobel response fits scalar");
            gy[idx] = R::from_i32(sy).expect("sobel response fits scalar");
        }
    }
    Ok(GradientField { width: w, height: h, gx, gy })
}

/// Gaussian-weighted second-moment sums per pixel: xx = sum w Gx^2,
/// xy = sum w Gx Gy, yy = sum w Gy^2 over a 5x5 window.
#[derive(Debug, Clone)]
pub struct StructureTensorField<R> {
    width: usize,
    height: usize,
    xx: Vec<R>,
    xy: Vec<R>,
    yy: Vec<R>,
}

impl<R: Real> StructureTensorField<R> {
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Tensor entries (xx, xy, yy) at one pixel.
    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (R, R, R) {
        let idx = y * self.width + x;
        (self.xx[idx], self.xy[idx], self.yy[idx])
    }
}

/// Normalised 5x5 Gaussian window weights (sigma = 1.0).
fn gaussian_weights<R: Real>() -> [[R; 5]; 5] {
    const K: [[u32; 5]; 5] = [
        [1, 4, 7, 4, 1],
        [4, 16, 26, 16, 4],
        [7, 26, 41, 26, 7],
        [4, 16, 26, 16, 4],
        [1, 4, 7, 4, 1],
    ];
    let div = real::<R>(273.0);
    let mut out = [[R::zero(); 5]; 5];
    for (row, krow) in out.iter_mut().zip(K.iter()) {
        for (cell, &k) in row.iter_mut().zip(krow.iter()) {
            *cell = real::<R>(k as f64) / div;
        }
    }
    out
}

/// Accumulates the structure tensor over a Gaussian-weighted 5x5 window with
/// edge replication.
pub fn structure_tensor<R: Real>(grads: &GradientField<R>) -> StructureTensorField<R> {
    let (w, h) = (grads.width, grads.height);
    let weights = gaussian_weights::<R>();
    let mut xx = vec![R::zero(); w * h];
    let mut xy = vec![R::zero(); w * h];
    let mut yy = vec![R::zero(); w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let (mut sxx, mut sxy, mut syy) = (R::zero(), R::zero(), R::zero());
            for (ky, row) in weights.iter().enumerate() {
                for (kx, &weight) in row.iter().enumerate() {
                    let (gx, gy) =
                        grads.replicated(x + kx as isize - 2, y + ky as isize - 2);
                    sxx += weight * gx * gx;
                    sxy += weight * gx * gy;
                    syy += weight * gy * gy;
                }
            }
            let idx = y as usize * w + x as usize;
            xx[idx] = sxx;
            xy[idx] = sxy;
            yy[idx] = syy;
        }
    }
    StructureTensorField { width: w, height: h, xx, xy, yy }
}

/// Per-pixel corner score map.
#[derive(Debug, Clone)]
pub struct ScoreMap<R> {
    width: usize,
    height: usize,
    values: Vec<R>,
}

impl<R: Real> ScoreMap<R> {
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> R {
        self.values[y * self.width + x]
    }
}

/// Eigenvalue-ratio score lambda_min / lambda_max per pixel, in [0, 1].
/// Pixels whose larger eigenvalue falls below `eps` score 0.
pub fn corner_discriminant<R: Real>(tensor: &StructureTensorField<R>, eps: R) -> ScoreMap<R> {
    let two = real::<R>(2.0);
    let values = tensor
        .xx
        .iter()
        .zip(&tensor.xy)
        .zip(&tensor.yy)
        .map(|((&a, &b), &c)| {
            // Closed-form eigenvalues of the symmetric 2x2 [[a, b], [b, c]].
            let half_trace = (a + c) / two;
            let radius = ((a - c) / two).hypot(b);
            let lam_max = half_trace + radius;
            let lam_min = (half_trace - radius).max(R::zero());
            if lam_max < eps {
                R::zero()
            } else {
                (lam_min / lam_max).min(R::one())
            }
        })
        .collect();
    ScoreMap { width: tensor.width, height: tensor.height, values }
}

/// Shape of the suppression neighbourhood around a retained corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskShape {
    Square,
    Circular,
}

impl std::str::FromStr for MaskShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(MaskShape::Square),
            "circular" => Ok(MaskShape::Circular),
            other => Err(Error::InvalidParameter(format!(
                "unknown mask shape {other:?} (expected square or circular)"
            ))),
        }
    }
}

/// Thresholds and suppression geometry for the detector.
#[derive(Debug, Clone, Copy)]
pub struct CornerConfig<R> {
    /// Minimum eigenvalue-ratio score.
    pub th_d: R,
    /// Minimum Sobel gradient magnitude.
    pub th_g: R,
    /// Guard against division by a vanishing larger eigenvalue.
    pub eps: R,
    pub mask_shape: MaskShape,
    /// Suppression mask side length / diameter, one of 3, 5 or 7.
    pub mask_size: u32,
}

impl<R: Real> CornerConfig<R> {
    pub fn new(th_d: R, th_g: R, mask_shape: MaskShape, mask_size: u32) -> Result<Self> {
        if !(R::zero()..=R::one()).contains(&th_d) {
            return Err(Error::InvalidParameter(format!(
                "corner score threshold {th_d} outside [0, 1]"
            )));
        }
        if th_g < R::zero() {
            return Err(Error::InvalidParameter(format!(
                "gradient threshold {th_g} must be non-negative"
            )));
        }
        if !matches!(mask_size, 3 | 5 | 7) {
            return Err(Error::InvalidParameter(format!(
                "suppression mask size {mask_size} not one of 3, 5, 7"
            )));
        }
        Ok(CornerConfig { th_d, th_g, eps: real(1e-12), mask_shape, mask_size })
    }
}

impl<R: Real> Default for CornerConfig<R> {
    fn default() -> Self {
        CornerConfig {
            th_d: real(0.1),
            th_g: real(20.0),
            eps: real(1e-12),
            mask_shape: MaskShape::Square,
            mask_size: 5,
        }
    }
}

/// A retained corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerPoint<R> {
    pub x: usize,
    pub y: usize,
    /// Eigenvalue-ratio score in [0, 1].
    pub score: R,
    pub view: ViewId,
}

/// Detects corners inside the given movement blobs.
///
/// Candidates must exceed both thresholds and be strict local maxima of the
/// score over their 8-neighbourhood. Suppression keeps the highest-scoring
/// candidate first (ties broken by ascending (y, x)) and removes every
/// candidate inside its mask, repeating over the remainder. The result is
/// deterministic and ordered by retention.
pub fn detect_corners<R: Real>(
    frame: &GrayFrame,
    blobs: &[Blob],
    cfg: &CornerConfig<R>,
    view: ViewId,
) -> Result<Vec<CornerPoint<R>>> {
    if blobs.is_empty() {
        return Ok(Vec::new());
    }
    let grads = sobel_gradients::<R>(frame)?;
    let tensor = structure_tensor(&grads);
    let scores = corner_discriminant(&tensor, cfg.eps);
    Ok(select_corners(&scores, &grads, blobs, cfg, view))
}

/// Thresholding, local-maximum and suppression stages on a precomputed score
/// map. Split out so oracle tests can drive it with independent scores.
pub fn select_corners<R: Real>(
    scores: &ScoreMap<R>,
    grads: &GradientField<R>,
    blobs: &[Blob],
    cfg: &CornerConfig<R>,
    view: ViewId,
) -> Vec<CornerPoint<R>> {
    let (w, h) = (scores.width, scores.height);
    let mut candidates: Vec<(usize, usize, R)> = Vec::new();
    for blob in blobs {
        for y in blob.y..blob.y + blob.height {
            for x in blob.x..blob.x + blob.width {
                let score = scores.get(x, y);
                if score <= cfg.th_d || grads.magnitude(x, y) <= cfg.th_g {
                    continue;
                }
                if is_strict_local_max(scores, x, y, w, h) {
                    candidates.push((x, y, score));
                }
            }
        }
    }
    // Blobs may overlap; dedupe before suppression.
    candidates.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.0.cmp(&b.0))
    });
    candidates.dedup_by_key(|c| (c.0, c.1));

    let radius = (cfg.mask_size as isize - 1) / 2;
    let radius_sq = (cfg.mask_size as f64 / 2.0).powi(2);
    let mut kept: Vec<CornerPoint<R>> = Vec::new();
    'next: for &(x, y, score) in &candidates {
        for k in &kept {
            let dx = x as isize - k.x as isize;
            let dy = y as isize - k.y as isize;
            let inside = match cfg.mask_shape {
                MaskShape::Square => dx.abs() <= radius && dy.abs() <= radius,
                MaskShape::Circular => (dx * dx + dy * dy) as f64 <= radius_sq,
            };
            if inside {
                continue 'next;
            }
        }
        kept.push(CornerPoint { x, y, score, view });
    }
    kept
}

fn is_strict_local_max<R: Real>(
    scores: &ScoreMap<R>,
    x: usize,
    y: usize,
    w: usize,
    h: usize,
) -> bool {
    let v = scores.get(x, y);
    for dy in -1isize..=1 {
        for dx in -1isize..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let nx = x as isize + dx;
            let ny = y as isize + dy;
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            if scores.get(nx as usize, ny as usize) >= v {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::Blob;

    fn whole_frame_blob(frame: &GrayFrame) -> Vec<Blob> {
        vec![Blob {
            x: 0,
            y: 0,
            width: frame.width(),
            height: frame.height(),
            area: frame.width() * frame.height(),
        }]
    }

    /// Checkerboard-like grid with a distinct intensity per cell. Distinct
    /// values avoid the score plateaus of a two-tone board, where no pixel
    /// is a *strict* local maximum.
    fn checkerboard(w: usize, h: usize, cell: usize) -> GrayFrame {
        let mut f = GrayFrame::filled(w, h, 0).unwrap();
        for y in 0..h {
            for x in 0..w {
                let (cx, cy) = (x / cell, y / cell);
                let mix = cx.wrapping_mul(61) ^ cy.wrapping_mul(97) ^ (cx * cy);
                f.set(x, y, (40 + (mix * 53) % 176) as u8);
            }
        }
        f
    }

    #[test]
    fn uniform_frame_has_no_corners() {
        let frame = GrayFrame::filled(32, 32, 128).unwrap();
        let corners = detect_corners::<f64>(
            &frame,
            &whole_frame_blob(&frame),
            &CornerConfig::default(),
            0,
        )
        .unwrap();
        assert!(corners.is_empty());
    }

    #[test]
    fn flat_regions_score_zero_not_nan() {
        let frame = GrayFrame::filled(8, 8, 50).unwrap();
        let grads = sobel_gradients::<f64>(&frame).unwrap();
        let scores = corner_discriminant(&structure_tensor(&grads), 1e-12);
        for y in 0..8 {
            for x in 0..8 {
                assert_eq!(scores.get(x, y), 0.0);
            }
        }
    }

    #[test]
    fn scores_stay_in_unit_interval() {
        let frame = checkerboard(24, 24, 4);
        let grads = sobel_gradients::<f64>(&frame).unwrap();
        let scores = corner_discriminant(&structure_tensor(&grads), 1e-12);
        for y in 0..24 {
            for x in 0..24 {
                let v = scores.get(x, y);
                assert!((0.0..=1.0).contains(&v), "score {v} at ({x},{y})");
            }
        }
    }

    #[test]
    fn checkerboard_junctions_are_detected() {
        let frame = checkerboard(32, 32, 8);
        let corners = detect_corners::<f64>(
            &frame,
            &whole_frame_blob(&frame),
            &CornerConfig::default(),
            0,
        )
        .unwrap();
        assert!(!corners.is_empty());
        // Every retained corner sits within 3px of a cell junction: Sobel
        // support (1px) plus the 5x5 tensor window (2px) bounds how far a
        // junction can push its score peak.
        for c in &corners {
            let near_jx = (c.x as isize % 8).min(8 - c.x as isize % 8) <= 3;
            let near_jy = (c.y as isize % 8).min(8 - c.y as isize % 8) <= 3;
            assert!(near_jx && near_jy, "corner at ({}, {}) off-junction", c.x, c.y);
        }
    }

    #[test]
    fn corners_restricted_to_blobs() {
        let frame = checkerboard(32, 32, 8);
        let blob = Blob { x: 0, y: 0, width: 16, height: 32, area: 16 * 32 };
        let corners =
            detect_corners::<f64>(&frame, &[blob], &CornerConfig::default(), 0).unwrap();
        assert!(!corners.is_empty());
        assert!(corners.iter().all(|c| c.x < 16));
    }

    #[test]
    fn score_candidates_invariant_to_intensity_scaling() {
        let mut base = checkerboard(24, 24, 5);
        // Reduce contrast so doubling stays within u8 range.
        let halved: Vec<u8> = base.pixels().iter().map(|&p| p / 4).collect();
        base = GrayFrame::new(24, 24, halved).unwrap();
        let doubled = GrayFrame::new(
            24,
            24,
            base.pixels().iter().map(|&p| p * 2).collect(),
        )
        .unwrap();

        let d_base = corner_discriminant(
            &structure_tensor(&sobel_gradients::<f64>(&base).unwrap()),
            1e-12,
        );
        let d_doubled = corner_discriminant(
            &structure_tensor(&sobel_gradients::<f64>(&doubled).unwrap()),
            1e-12,
        );
        let th = 0.1;
        for y in 0..24 {
            for x in 0..24 {
                assert_eq!(
                    d_base.get(x, y) > th,
                    d_doubled.get(x, y) > th,
                    "threshold set changed at ({x},{y})"
                );
            }
        }
    }

    #[test]
    fn suppression_is_deterministic_and_respects_mask() {
        let frame = checkerboard(32, 32, 4);
        let cfg = CornerConfig::<f64>::default();
        let blobs = whole_frame_blob(&frame);
        let a = detect_corners(&frame, &blobs, &cfg, 0).unwrap();
        let b = detect_corners(&frame, &blobs, &cfg, 0).unwrap();
        assert_eq!(a, b);
        // No two retained corners within the square mask.
        for (i, p) in a.iter().enumerate() {
            for q in &a[i + 1..] {
                let dx = (p.x as isize - q.x as isize).abs();
                let dy = (p.y as isize - q.y as isize).abs();
                assert!(dx > 2 || dy > 2, "({},{}) and ({},{}) too close", p.x, p.y, q.x, q.y);
            }
        }
    }

    #[test]
    fn larger_masks_keep_fewer_corners() {
        let frame = checkerboard(48, 48, 4);
        let blobs = whole_frame_blob(&frame);
        let mut counts = Vec::new();
        for size in [3, 5, 7] {
            let cfg = CornerConfig::new(0.1, 20.0, MaskShape::Square, size).unwrap();
            counts.push(detect_corners::<f64>(&frame, &blobs, &cfg, 0).unwrap().len());
        }
        assert!(counts[0] >= counts[1] && counts[1] >= counts[2], "counts {counts:?}");
    }

    #[test]
    fn circular_mask_is_looser_than_square_at_diagonals() {
        // Two equal peaks at Chebyshev distance 2 but Euclidean distance
        // sqrt(8) > 2.5: the square 5-mask suppresses the second peak, the
        // circular 5-mask keeps it.
        let mut frame = GrayFrame::filled(16, 16, 0).unwrap();
        for (cx, cy) in [(6usize, 6usize), (8, 8)] {
            for y in cy.saturating_sub(1)..=cy + 1 {
                for x in cx.saturating_sub(1)..=cx + 1 {
                    frame.set(x, y, 200);
                }
            }
        }
        let blobs = whole_frame_blob(&frame);
        let square = CornerConfig::new(0.05, 10.0, MaskShape::Square, 5).unwrap();
        let circular = CornerConfig::new(0.05, 10.0, MaskShape::Circular, 5).unwrap();
        let n_square = detect_corners::<f64>(&frame, &blobs, &square, 0).unwrap().len();
        let n_circular = detect_corners::<f64>(&frame, &blobs, &circular, 0).unwrap().len();
        assert!(n_circular >= n_square);
    }

    #[test]
    fn config_validation() {
        assert!(CornerConfig::new(1.5, 20.0, MaskShape::Square, 5).is_err());
        assert!(CornerConfig::new(0.1, -1.0, MaskShape::Square, 5).is_err());
        assert!(CornerConfig::new(0.1, 20.0, MaskShape::Square, 4).is_err());
        assert!(CornerConfig::new(0.1, 20.0, MaskShape::Square, 9).is_err());
        assert!(CornerConfig::<f64>::new(0.1, 20.0, MaskShape::Circular, 7).is_ok());
    }

    #[test]
    fn rejects_tiny_frames() {
        let frame = GrayFrame::filled(2, 2, 0).unwrap();
        assert!(sobel_gradients::<f64>(&frame).is_err());
    }
}
