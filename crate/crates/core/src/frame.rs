//! Grayscale frames and binary masks.
//!
//! All image input is reduced to 8-bit luminance before any processing; the
//! colour-to-luminance conversion is the usual 0.299 R + 0.587 G + 0.114 B
//! with round-to-nearest.

use crate::error::{Error, Result};

/// 8-bit grayscale image, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayFrame {
    /// Wraps a row-major pixel buffer. Errors on zero dimensions or a buffer
    /// whose length does not match `width * height`.
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "frame dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "frame buffer has {} pixels, expected {}",
                pixels.len(),
                width * height
            )));
        }
        Ok(GrayFrame { width, height, pixels })
    }

    /// Constant-valued frame.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        GrayFrame::new(width, height, vec![value; width * height])
    }

    /// Converts packed RGB8 data to luminance.
    pub fn from_rgb(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::DimensionMismatch(format!(
                "rgb buffer has {} bytes, expected {}",
                rgb.len(),
                width * height * 3
            )));
        }
        let pixels = rgb
            .chunks_exact(3)
            .map(|c| luminance(c[0], c[1], c[2]))
            .collect();
        GrayFrame::new(width, height, pixels)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }

    /// Reads with edge replication: coordinates outside the frame clamp to
    /// the nearest border pixel.
    #[inline]
    pub fn get_replicated(&self, x: isize, y: isize) -> u8 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.pixels[cy * self.width + cx]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x] = value;
    }

    /// True when `other` has the same dimensions.
    pub fn same_size(&self, other: &GrayFrame) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Rec. 601 luminance with round-to-nearest, in integer arithmetic.
#[inline]
pub fn luminance(r: u8, g: u8, b: u8) -> u8 {
    let sum = 299u32 * r as u32 + 587u32 * g as u32 + 114u32 * b as u32;
    ((sum + 500) / 1000) as u8
}

/// Binary image, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "mask dimensions must be positive, got {width}x{height}"
            )));
        }
        Ok(BinaryMask { width, height, bits: vec![false; width * height] })
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "mask dimensions must be positive, got {width}x{height}"
            )));
        }
        if bits.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "mask buffer has {} entries, expected {}",
                bits.len(),
                width * height
            )));
        }
        Ok(BinaryMask { width, height, bits })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        debug_assert!(x < self.width && y < self.height);
        self.bits[y * self.width + x]
    }

    /// Reads with the outside-is-clear convention used by the morphology.
    #[inline]
    pub fn get_clear(&self, x: isize, y: isize) -> bool {
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            false
        } else {
            self.bits[y as usize * self.width + x as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        debug_assert!(x < self.width && y < self.height);
        self.bits[y * self.width + x] = value;
    }

    pub fn count_set(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn same_size(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// 3x3 structuring element for binary morphology. The origin (centre cell)
/// must be set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringElement {
    cells: [[bool; 3]; 3],
}

impl StructuringElement {
    pub fn new(cells: [[bool; 3]; 3]) -> Result<Self> {
        if !cells[1][1] {
            return Err(Error::InvalidParameter(
                "structuring element origin must be set".into(),
            ));
        }
        Ok(StructuringElement { cells })
    }

    /// The full 3x3 element used by the default pipeline.
    pub fn full() -> Self {
        StructuringElement { cells: [[true; 3]; 3] }
    }

    /// Offsets (dx, dy) of the set cells, relative to the centre.
    pub fn offsets(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        self.cells.iter().enumerate().flat_map(|(row, line)| {
            line.iter().enumerate().filter_map(move |(col, &set)| {
                set.then_some((col as isize - 1, row as isize - 1))
            })
        })
    }
}
