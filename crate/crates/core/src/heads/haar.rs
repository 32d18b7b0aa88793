//! Haar-like rectangle features over upright and 45-degree geometry.
//!
//! Fourteen prototypes are used: four edge features, eight line features and
//! two centre-surround features, half of them axis-aligned and half rotated
//! by 45 degrees. A feature's response is the mean intensity over its white
//! region minus the mean over its black region, so responses are invariant
//! to adding a constant to every pixel and scale linearly with contrast.

use super::integral::{tilted_bounds, IntegralImage};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Base window edge length that feature placements are expressed in.
pub const BASE_WINDOW: u32 = 9;

/// The fixed feature shapes. Upright variants use axis-aligned rectangles,
/// diagonal variants use 45-degree rectangles; "wide" line features give the
/// middle band twice the thickness of the flanks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HaarPrototype {
    EdgeHorizontal,
    EdgeVertical,
    EdgeDiagonalRight,
    EdgeDiagonalLeft,
    LineHorizontal,
    LineHorizontalWide,
    LineVertical,
    LineVerticalWide,
    LineDiagonal,
    LineDiagonalWide,
    LineAntidiagonal,
    LineAntidiagonalWide,
    CenterSurround,
    CenterSurroundDiagonal,
}

pub const ALL_PROTOTYPES: [HaarPrototype; 14] = [
    HaarPrototype::EdgeHorizontal,
    HaarPrototype::EdgeVertical,
    HaarPrototype::EdgeDiagonalRight,
    HaarPrototype::EdgeDiagonalLeft,
    HaarPrototype::LineHorizontal,
    HaarPrototype::LineHorizontalWide,
    HaarPrototype::LineVertical,
    HaarPrototype::LineVerticalWide,
    HaarPrototype::LineDiagonal,
    HaarPrototype::LineDiagonalWide,
    HaarPrototype::LineAntidiagonal,
    HaarPrototype::LineAntidiagonalWide,
    HaarPrototype::CenterSurround,
    HaarPrototype::CenterSurroundDiagonal,
];

impl HaarPrototype {
    /// Stable identifier used in cascade files.
    pub fn id(self) -> u32 {
        ALL_PROTOTYPES.iter().position(|&p| p == self).unwrap() as u32 + 1
    }

    pub fn from_id(id: u32) -> Result<Self> {
        if id == 0 || id as usize > ALL_PROTOTYPES.len() {
            return Err(Error::InvalidParameter(format!("unknown feature prototype id {id}")));
        }
        Ok(ALL_PROTOTYPES[id as usize - 1])
    }

    pub fn is_tilted(self) -> bool {
        use HaarPrototype::*;
        matches!(
            self,
            EdgeDiagonalRight
                | EdgeDiagonalLeft
                | LineDiagonal
                | LineDiagonalWide
                | LineAntidiagonal
                | LineAntidiagonalWide
                | CenterSurroundDiagonal
        )
    }

    /// Total extent in unit cells along the two prototype axes. For upright
    /// prototypes the axes are x and y; for tilted ones they are the
    /// down-right and down-left diagonals.
    fn grid(self) -> (i64, i64) {
        use HaarPrototype::*;
        match self {
            EdgeHorizontal | EdgeDiagonalRight => (2, 1),
            EdgeVertical | EdgeDiagonalLeft => (1, 2),
            LineHorizontal | LineDiagonal => (3, 1),
            LineHorizontalWide | LineDiagonalWide => (4, 1),
            LineVertical | LineAntidiagonal => (1, 3),
            LineVerticalWide | LineAntidiagonalWide => (1, 4),
            CenterSurround | CenterSurroundDiagonal => (3, 3),
        }
    }

    /// Black cells as (cell_x, cell_y, cells_wide, cells_high) spans within
    /// the prototype grid; every other cell is white.
    fn black_cells(self) -> &'static [(i64, i64, i64, i64)] {
        use HaarPrototype::*;
        match self {
            EdgeHorizontal | EdgeDiagonalRight => &[(1, 0, 1, 1)],
            EdgeVertical | EdgeDiagonalLeft => &[(0, 1, 1, 1)],
            LineHorizontal | LineDiagonal => &[(1, 0, 1, 1)],
            LineHorizontalWide | LineDiagonalWide => &[(1, 0, 2, 1)],
            LineVertical | LineAntidiagonal => &[(0, 1, 1, 1)],
            LineVerticalWide | LineAntidiagonalWide => &[(0, 1, 1, 2)],
            CenterSurround | CenterSurroundDiagonal => &[(1, 1, 1, 1)],
        }
    }
}

/// A prototype placed in a window, in base-window coordinates. `x`, `y` is
/// the top-left corner for upright prototypes and the apex pixel for tilted
/// ones (the apex sits just above the covered pixel set, so y = -1 touches
/// the window's top row). `unit_w`, `unit_h` size one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaarFeature {
    pub prototype: HaarPrototype,
    pub x: i64,
    pub y: i64,
    pub unit_w: i64,
    pub unit_h: i64,
}

/// One rectangle of a scaled feature with its inclusion-exclusion weight.
#[derive(Debug, Clone, Copy)]
enum Region {
    Upright { dx: i64, dy: i64, w: i64, h: i64 },
    Tilted { dx: i64, dy: i64, w: i64, h: i64 },
}

impl Region {
    fn sum(&self, ii: &IntegralImage, wx: i64, wy: i64) -> i64 {
        match *self {
            Region::Upright { dx, dy, w, h } => {
                ii.rect_sum((wx + dx) as usize, (wy + dy) as usize, w as usize, h as usize) as i64
            }
            Region::Tilted { dx, dy, w, h } => ii.tilted_sum(wx + dx, wy + dy, w, h) as i64,
        }
    }

    fn bounds(&self) -> (i64, i64, i64, i64) {
        match *self {
            Region::Upright { dx, dy, w, h } => (dx, dy, dx + w - 1, dy + h - 1),
            Region::Tilted { dx, dy, w, h } => tilted_bounds(dx, dy, w, h),
        }
    }
}

/// A feature resolved to concrete pixel rectangles for one window size.
/// Region offsets are window-relative; [`ScaledHaar::response`] adds the
/// window origin. The white region is represented implicitly as the whole
/// extent minus the black cells.
#[derive(Debug, Clone)]
pub struct ScaledHaar {
    whole: Region,
    black: Vec<Region>,
    black_area: i64,
    white_area: i64,
}

impl HaarFeature {
    /// Extent of the full prototype in grid units.
    fn total_units(&self) -> (i64, i64) {
        let (gx, gy) = self.prototype.grid();
        (gx * self.unit_w, gy * self.unit_h)
    }

    /// Window-relative bounding box at base scale, inclusive.
    pub fn bounds(&self) -> (i64, i64, i64, i64) {
        let (tw, th) = self.total_units();
        if self.prototype.is_tilted() {
            tilted_bounds(self.x, self.y, tw, th)
        } else {
            (self.x, self.y, self.x + tw - 1, self.y + th - 1)
        }
    }

    /// Resolve the feature for a window of edge length `size`, scaling all
    /// placements from the base window. Cell sizes round to the nearest
    /// pixel but never below one, shrinking again if rounding pushed the
    /// pattern over the window edge; the placement is then shifted inward
    /// as needed.
    pub fn scaled(&self, size: u32) -> Result<ScaledHaar> {
        let s = size as f64 / BASE_WINDOW as f64;
        let mut unit_w = ((self.unit_w as f64 * s).round() as i64).max(1);
        let mut unit_h = ((self.unit_h as f64 * s).round() as i64).max(1);
        let (gx, gy) = self.prototype.grid();
        let win = size as i64;

        // An upright pattern needs gx * unit_w and gy * unit_h both within
        // the window; a tilted one occupies gx * unit_w + gy * unit_h rows.
        let oversize = |uw: i64, uh: i64| -> bool {
            if self.prototype.is_tilted() {
                gx * uw + gy * uh > win
            } else {
                gx * uw > win || gy * uh > win
            }
        };
        while oversize(unit_w, unit_h) {
            if unit_w >= unit_h && unit_w > 1 {
                unit_w -= 1;
            } else if unit_h > 1 {
                unit_h -= 1;
            } else {
                return Err(Error::InvalidParameter(format!(
                    "feature {:?} does not fit a {size} pixel window",
                    self.prototype
                )));
            }
        }
        let (tw, th) = (gx * unit_w, gy * unit_h);

        let mut x = (self.x as f64 * s).round() as i64;
        let mut y = (self.y as f64 * s).round() as i64;

        // Clamp the scaled bounding box into the window.
        let fit = |x: i64, y: i64| -> (i64, i64, i64, i64) {
            if self.prototype.is_tilted() {
                tilted_bounds(x, y, tw, th)
            } else {
                (x, y, x + tw - 1, y + th - 1)
            }
        };
        let (mut x0, mut y0, mut x1, mut y1) = fit(x, y);
        if x0 < 0 {
            x -= x0;
        } else if x1 > win - 1 {
            x -= x1 - (win - 1);
        }
        if y0 < 0 {
            y -= y0;
        } else if y1 > win - 1 {
            y -= y1 - (win - 1);
        }
        (x0, y0, x1, y1) = fit(x, y);
        debug_assert!(x0 >= 0 && y0 >= 0 && x1 < win && y1 < win);

        // The white region is the prototype extent minus the black cells, so
        // one whole-extent rectangle plus negated black rectangles covers it.
        let tilted = self.prototype.is_tilted();
        let place = |cx: i64, cy: i64, cw: i64, ch: i64| -> Region {
            if tilted {
                // Cell (cx, cy) sits cx cells down-right and cy cells
                // down-left of the apex.
                Region::Tilted {
                    dx: x + cx * unit_w - cy * unit_h,
                    dy: y + cx * unit_w + cy * unit_h,
                    w: cw * unit_w,
                    h: ch * unit_h,
                }
            } else {
                Region::Upright { dx: x + cx * unit_w, dy: y + cy * unit_h, w: cw * unit_w, h: ch * unit_h }
            }
        };
        let cell_area = if tilted { 2 * unit_w * unit_h } else { unit_w * unit_h };

        let whole = place(0, 0, gx, gy);
        let mut black = Vec::new();
        let mut black_cells = 0i64;
        for &(cx, cy, cw, ch) in self.prototype.black_cells() {
            black.push(place(cx, cy, cw, ch));
            black_cells += cw * ch;
        }
        let total_cells = gx * gy;

        Ok(ScaledHaar {
            whole,
            black,
            black_area: black_cells * cell_area,
            white_area: (total_cells - black_cells) * cell_area,
        })
    }
}

impl ScaledHaar {
    /// Window-relative bounding box, inclusive.
    pub fn bounds(&self) -> (i64, i64, i64, i64) {
        self.whole.bounds()
    }

    /// mean(white) - mean(black) for the window at (wx, wy).
    pub fn response<R: Real>(&self, ii: &IntegralImage, wx: usize, wy: usize) -> R {
        let (wx, wy) = (wx as i64, wy as i64);
        let whole = self.whole.sum(ii, wx, wy);
        let mut black_sum = 0i64;
        for region in &self.black {
            black_sum += region.sum(ii, wx, wy);
        }
        let white_sum = whole - black_sum;
        let white = R::from_i64(white_sum).unwrap() / R::from_i64(self.white_area).unwrap();
        let black = R::from_i64(black_sum).unwrap() / R::from_i64(self.black_area).unwrap();
        white - black
    }
}

/// Enumerate every placement of every prototype that fits the base window,
/// stepping positions by `stride`. The order is fixed: prototypes in id
/// order, then cell height, cell width, row, column.
pub fn enumerate_features(stride: u32) -> Result<Vec<HaarFeature>> {
    if stride == 0 {
        return Err(Error::InvalidParameter("feature stride must be at least 1".into()));
    }
    let stride = stride as i64;
    let win = BASE_WINDOW as i64;
    let mut out = Vec::new();
    for &proto in ALL_PROTOTYPES.iter() {
        let (gx, gy) = proto.grid();
        for unit_h in 1.. {
            if gy * unit_h > win {
                break;
            }
            for unit_w in 1.. {
                if gx * unit_w > win {
                    break;
                }
                let (tw, th) = (gx * unit_w, gy * unit_h);
                if proto.is_tilted() {
                    // Apex placements whose covered pixels stay inside the
                    // window: x in [th - 1, win - tw], y in [-1, win - 1 - tw - th].
                    let mut y = -1;
                    while y + tw + th <= win - 1 {
                        let mut x = th - 1;
                        while x + tw - 1 <= win - 1 {
                            out.push(HaarFeature { prototype: proto, x, y, unit_w, unit_h });
                            x += stride;
                        }
                        y += stride;
                    }
                } else {
                    let mut y = 0;
                    while y + th <= win {
                        let mut x = 0;
                        while x + tw <= win {
                            out.push(HaarFeature { prototype: proto, x, y, unit_w, unit_h });
                            x += stride;
                        }
                        y += stride;
                    }
                }
            }
        }
    }
    Ok(out)
}
