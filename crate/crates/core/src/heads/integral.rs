//! Exact integral images for box-filter features.
//!
//! Two tables are kept per frame: the standard summed-area table for upright
//! rectangles and a diagonal-prefix table for 45-degree rectangles. Both use
//! u64 accumulators, so every rectangle sum is exact; a full 768x576 frame of
//! 255s tops out near 1.1e8, far below overflow.

use crate::frame::GrayFrame;

/// Upright and diagonal prefix sums of one frame.
#[derive(Debug, Clone)]
pub struct IntegralImage {
    width: usize,
    height: usize,
    /// (width + 1) x (height + 1) summed-area table, `sat[y][x]` = sum over
    /// pixels strictly left of x and above y.
    sat: Vec<u64>,
    /// Dominance sums over the diagonal coordinates s = x + y (column) and
    /// d = y - x (row, offset by width - 1).
    diag: Vec<u64>,
    diag_size: usize,
}

impl IntegralImage {
    pub fn from_frame(frame: &GrayFrame) -> Self {
        let (w, h) = (frame.width(), frame.height());

        let mut sat = vec![0u64; (w + 1) * (h + 1)];
        for y in 0..h {
            let mut row_sum = 0u64;
            for x in 0..w {
                row_sum += frame.get(x, y) as u64;
                sat[(y + 1) * (w + 1) + (x + 1)] = sat[y * (w + 1) + (x + 1)] + row_sum;
            }
        }

        // Scatter pixels into (s, d) space, then take the 2D inclusive
        // prefix. s and d each span w + h - 1 values.
        let n = w + h - 1;
        let d_off = w - 1;
        let mut diag = vec![0u64; n * n];
        for y in 0..h {
            for x in 0..w {
                let s = x + y;
                let d = y + d_off - x;
                diag[d * n + s] = frame.get(x, y) as u64;
            }
        }
        for d in 0..n {
            for s in 1..n {
                diag[d * n + s] += diag[d * n + s - 1];
            }
        }
        for d in 1..n {
            for s in 0..n {
                diag[d * n + s] += diag[(d - 1) * n + s];
            }
        }

        IntegralImage { width: w, height: h, sat, diag, diag_size: n }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Sum over the upright rectangle with top-left (x, y), `rw` columns and
    /// `rh` rows. The rectangle must lie inside the frame.
    #[inline]
    pub fn rect_sum(&self, x: usize, y: usize, rw: usize, rh: usize) -> u64 {
        debug_assert!(x + rw <= self.width && y + rh <= self.height);
        let w1 = self.width + 1;
        let a = self.sat[y * w1 + x];
        let b = self.sat[y * w1 + (x + rw)];
        let c = self.sat[(y + rh) * w1 + x];
        let d = self.sat[(y + rh) * w1 + (x + rw)];
        d + a - b - c
    }

    /// Count of pixels with x' + y' <= s and y' - x' <= d.
    #[inline]
    fn cone(&self, s: i64, d: i64) -> u64 {
        let d_off = self.width as i64 - 1;
        if s < 0 || d < -d_off {
            return 0;
        }
        let max = self.diag_size as i64 - 1;
        let s = s.min(max) as usize;
        let d = (d + d_off).min(max) as usize;
        self.diag[d * self.diag_size + s]
    }

    /// Sum over the 45-degree rectangle with apex (x, y), extent `rw` along
    /// the down-right diagonal and `rh` along the down-left diagonal.
    ///
    /// The pixel set is { (u, v) : x + y < u + v <= x + y + 2 rw  and
    /// y - x < v - u <= y - x + 2 rh }, which covers 2 rw rh pixels and
    /// tiles exactly when rectangles abut along either diagonal. The apex
    /// pixel itself is not part of the set; the set must lie inside the
    /// frame ([`tilted_bounds`] gives its bounding box).
    #[inline]
    pub fn tilted_sum(&self, x: i64, y: i64, rw: i64, rh: i64) -> u64 {
        debug_assert!(rw >= 1 && rh >= 1);
        #[cfg(debug_assertions)]
        {
            let (x0, y0, x1, y1) = tilted_bounds(x, y, rw, rh);
            debug_assert!(
                x0 >= 0 && y0 >= 0 && x1 < self.width as i64 && y1 < self.height as i64,
                "tilted rectangle ({x}, {y}, {rw}, {rh}) leaves the frame"
            );
        }
        let s_lo = x + y;
        let s_hi = s_lo + 2 * rw;
        let d_lo = y - x;
        let d_hi = d_lo + 2 * rh;
        (self.cone(s_hi, d_hi) + self.cone(s_lo, d_lo))
            - (self.cone(s_lo, d_hi) + self.cone(s_hi, d_lo))
    }
}

/// Bounding box (x0, y0, x1, y1), inclusive, of the tilted rectangle pixel
/// set used by [`IntegralImage::tilted_sum`].
pub fn tilted_bounds(x: i64, y: i64, rw: i64, rh: i64) -> (i64, i64, i64, i64) {
    (x - rh + 1, y + 1, x + rw - 1, y + rw + rh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_frame(rng: &mut impl Rng, w: usize, h: usize) -> GrayFrame {
        let pixels = (0..w * h).map(|_| rng.gen()).collect();
        GrayFrame::new(w, h, pixels).unwrap()
    }

    fn naive_rect_sum(f: &GrayFrame, x: usize, y: usize, rw: usize, rh: usize) -> u64 {
        let mut sum = 0u64;
        for yy in y..y + rh {
            for xx in x..x + rw {
                sum += f.get(xx, yy) as u64;
            }
        }
        sum
    }

    /// Independent enumeration of the tilted pixel set straight from its
    /// defining inequalities.
    fn naive_tilted_sum(f: &GrayFrame, x: i64, y: i64, rw: i64, rh: i64) -> u64 {
        let mut sum = 0u64;
        for v in 0..f.height() as i64 {
            for u in 0..f.width() as i64 {
                let s = u + v;
                let d = v - u;
                if s > x + y && s <= x + y + 2 * rw && d > y - x && d <= y - x + 2 * rh {
                    sum += f.get(u as usize, v as usize) as u64;
                }
            }
        }
        sum
    }

    #[test]
    fn rect_sums_match_naive_exactly() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let w = rng.gen_range(3..40);
            let h = rng.gen_range(3..40);
            let frame = random_frame(&mut rng, w, h);
            let ii = IntegralImage::from_frame(&frame);
            for _ in 0..40 {
                let x = rng.gen_range(0..w);
                let y = rng.gen_range(0..h);
                let rw = rng.gen_range(1..=w - x);
                let rh = rng.gen_range(1..=h - y);
                assert_eq!(ii.rect_sum(x, y, rw, rh), naive_rect_sum(&frame, x, y, rw, rh));
            }
        }
    }

    #[test]
    fn whole_frame_sum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        let frame = random_frame(&mut rng, 17, 11);
        let ii = IntegralImage::from_frame(&frame);
        let expected: u64 = frame.pixels().iter().map(|&p| p as u64).sum();
        assert_eq!(ii.rect_sum(0, 0, 17, 11), expected);
    }

    #[test]
    fn tilted_sums_match_naive_exactly() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let w = rng.gen_range(6..40);
            let h = rng.gen_range(6..40);
            let frame = random_frame(&mut rng, w, h);
            let ii = IntegralImage::from_frame(&frame);
            let mut checked = 0;
            while checked < 40 {
                let rw = rng.gen_range(1..6i64);
                let rh = rng.gen_range(1..6i64);
                let x = rng.gen_range(-6..w as i64 + 6);
                let y = rng.gen_range(-6..h as i64 + 6);
                let (x0, y0, x1, y1) = tilted_bounds(x, y, rw, rh);
                if x0 < 0 || y0 < 0 || x1 >= w as i64 || y1 >= h as i64 {
                    continue;
                }
                assert_eq!(
                    ii.tilted_sum(x, y, rw, rh),
                    naive_tilted_sum(&frame, x, y, rw, rh),
                    "mismatch at ({x}, {y}, {rw}, {rh}) in {w}x{h}"
                );
                checked += 1;
            }
        }
    }

    #[test]
    fn tilted_area_is_2wh() {
        // On an all-ones frame the tilted sum equals the pixel count.
        let frame = GrayFrame::filled(30, 30, 1).unwrap();
        let ii = IntegralImage::from_frame(&frame);
        for (x, y, rw, rh) in [(10i64, 5i64, 1i64, 1i64), (12, 3, 3, 2), (15, 0, 4, 4), (9, 10, 2, 5)] {
            assert_eq!(ii.tilted_sum(x, y, rw, rh), (2 * rw * rh) as u64);
        }
    }

    #[test]
    fn tilted_rectangles_tile() {
        // Two rectangles abutting along either diagonal cover the union.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(24);
        let frame = random_frame(&mut rng, 32, 32);
        let ii = IntegralImage::from_frame(&frame);
        let (x, y, rw, rh) = (14i64, 4i64, 2i64, 3i64);
        assert_eq!(
            ii.tilted_sum(x, y, rw, rh) + ii.tilted_sum(x + rw, y + rw, rw, rh),
            ii.tilted_sum(x, y, 2 * rw, rh)
        );
        assert_eq!(
            ii.tilted_sum(x, y, rw, rh) + ii.tilted_sum(x - rh, y + rh, rw, rh),
            ii.tilted_sum(x, y, rw, 2 * rh)
        );
    }
}
