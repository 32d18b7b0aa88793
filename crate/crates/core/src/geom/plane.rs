//! Ground-plane raster and projected observation points.
//!
//! The ground plane z = 0 is rasterised into a square image whose centre
//! pixel is the world origin; observations from all views land in this one
//! frame so they can be compared per pixel.

use crate::error::{Error, Result};
use crate::geom::camera::TsaiCamera;
use crate::geom::linalg::Vec2;
use crate::scalar::{real, Real};
use crate::ViewId;

/// What produced a ground observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSource {
    Corner,
    Head,
}

/// A projected observation on the ground plane, in millimetres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundPoint<R> {
    pub x: R,
    pub y: R,
    /// Region weight applied when tallying; 1 for unweighted points.
    pub weight: R,
    pub source: PointSource,
    pub view: ViewId,
}

impl<R: Real> GroundPoint<R> {
    pub fn position(&self) -> Vec2<R> {
        Vec2::new(self.x, self.y)
    }

    /// Back-projects a pixel observation onto the ground plane.
    pub fn from_pixel(
        cam: &TsaiCamera<R>,
        pixel: Vec2<R>,
        source: PointSource,
        view: ViewId,
    ) -> Result<Self> {
        let g = cam.image_to_ground(pixel)?;
        Ok(GroundPoint { x: g.x, y: g.y, weight: R::one(), source, view })
    }
}

/// Square raster over the ground plane. The world origin maps to the centre
/// pixel (size/2, size/2); pixel x grows with world x and pixel y with
/// world y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundPlaneSpec<R> {
    /// Raster side length in pixels.
    pub size: u32,
    /// Width of one raster pixel in millimetres.
    pub mm_per_pixel: R,
}

impl<R: Real> GroundPlaneSpec<R> {
    pub fn new(size: u32, mm_per_pixel: R) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("plane raster size must be positive".into()));
        }
        if !(mm_per_pixel > R::zero()) {
            return Err(Error::InvalidParameter(format!(
                "plane raster scale must be positive, got {mm_per_pixel} mm/px"
            )));
        }
        Ok(GroundPlaneSpec { size, mm_per_pixel })
    }

    /// Signed raster coordinates of a ground point, round-to-nearest. May
    /// fall outside [0, size).
    pub fn to_pixel_signed(&self, g: Vec2<R>) -> (i64, i64) {
        let centre = real::<R>(self.size as f64 / 2.0);
        let px = (centre + g.x / self.mm_per_pixel).round();
        let py = (centre + g.y / self.mm_per_pixel).round();
        (px.to_i64().unwrap_or(i64::MAX), py.to_i64().unwrap_or(i64::MAX))
    }

    /// Raster coordinates of a ground point, or `None` when it falls outside
    /// the raster. Out-of-bounds points are reported, never clamped.
    pub fn to_pixel(&self, g: Vec2<R>) -> Option<(u32, u32)> {
        let (px, py) = self.to_pixel_signed(g);
        let size = self.size as i64;
        (px >= 0 && py >= 0 && px < size && py < size).then_some((px as u32, py as u32))
    }

    /// Centre of a raster pixel in world millimetres.
    pub fn to_world(&self, px: u32, py: u32) -> Vec2<R> {
        let centre = real::<R>(self.size as f64 / 2.0);
        Vec2::new(
            (real::<R>(px as f64) - centre) * self.mm_per_pixel,
            (real::<R>(py as f64) - centre) * self.mm_per_pixel,
        )
    }
}

impl<R: Real> Default for GroundPlaneSpec<R> {
    /// 600 x 600 raster at 50 mm per pixel (30 m x 30 m coverage).
    fn default() -> Self {
        GroundPlaneSpec { size: 600, mm_per_pixel: real(50.0) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_maps_to_centre_pixel() {
        let spec = GroundPlaneSpec::<f64>::default();
        assert_eq!(spec.to_pixel(Vec2::new(0.0, 0.0)), Some((300, 300)));
        assert_eq!(spec.to_pixel(Vec2::new(50.0, 0.0)), Some((301, 300)));
        assert_eq!(spec.to_pixel(Vec2::new(0.0, -50.0)), Some((300, 299)));
    }

    #[test]
    fn out_of_bounds_is_reported_not_clamped() {
        let spec = GroundPlaneSpec::<f64>::default();
        assert_eq!(spec.to_pixel(Vec2::new(20000.0, 0.0)), None);
        let (px, _) = spec.to_pixel_signed(Vec2::new(20000.0, 0.0));
        assert_eq!(px, 700);
        assert_eq!(spec.to_pixel(Vec2::new(-15050.0, 0.0)), None);
    }

    #[test]
    fn world_pixel_round_trip() {
        let spec = GroundPlaneSpec::<f64>::default();
        for (px, py) in [(0u32, 0u32), (300, 300), (599, 1), (17, 401)] {
            let w = spec.to_world(px, py);
            assert_eq!(spec.to_pixel(w), Some((px, py)));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GroundPlaneSpec::new(0, 50.0).is_err());
        assert!(GroundPlaneSpec::new(600, 0.0).is_err());
        assert!(GroundPlaneSpec::new(600, -1.0).is_err());
    }
}
