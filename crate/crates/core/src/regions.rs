//! Distance regions and perspective weighting.
//!
//! Each camera partitions the ground plane into concentric circular regions
//! of fixed width around its ground position. People in far regions cover
//! fewer pixels (and so produce fewer corners) than people near the camera;
//! a per-region weight derived from observed person heights compensates:
//! weight(r) = height(origin region) / height(r), pinned to exactly 1 in the
//! region containing the world origin. Projection corrections move observed
//! points back towards each feature's ground position before tallying.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::camera::TsaiCamera;
use crate::geom::linalg::Vec2;
use crate::geom::plane::GroundPoint;
use crate::scalar::{real, Real};

/// Concentric distance regions around one camera's ground position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionMap<R> {
    camera_ground: Vec2<R>,
    region_width: R,
    region_count: usize,
}

impl<R: Real> RegionMap<R> {
    pub fn new(camera_ground: Vec2<R>, region_width: R, region_count: usize) -> Result<Self> {
        if !(region_width > R::zero()) {
            return Err(Error::InvalidParameter(format!(
                "region width must be positive, got {region_width}"
            )));
        }
        if region_count == 0 {
            return Err(Error::InvalidParameter("region count must be positive".into()));
        }
        Ok(RegionMap { camera_ground, region_width, region_count })
    }

    #[inline]
    pub fn camera_ground(&self) -> Vec2<R> {
        self.camera_ground
    }

    #[inline]
    pub fn region_width(&self) -> R {
        self.region_width
    }

    #[inline]
    pub fn region_count(&self) -> usize {
        self.region_count
    }

    /// Region index floor(distance / width), or `None` beyond the last
    /// region.
    pub fn region_of(&self, p: Vec2<R>) -> Option<usize> {
        let dist = p.distance(self.camera_ground);
        let idx = (dist / self.region_width).floor();
        let idx = idx.to_usize()?;
        (idx < self.region_count).then_some(idx)
    }

    /// Distance of a region's inner boundary from the camera ground point.
    #[inline]
    pub fn inner_radius(&self, region: usize) -> R {
        real::<R>(region as f64) * self.region_width
    }
}

/// Mean observed person height in pixels per region. Regions the exemplar
/// never visited are `None` until interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightProfile<R> {
    heights: Vec<Option<R>>,
}

impl<R: Real> HeightProfile<R> {
    pub fn new(heights: Vec<Option<R>>) -> Result<Self> {
        if heights.is_empty() {
            return Err(Error::EmptyInput("height profile"));
        }
        for (r, h) in heights.iter().enumerate() {
            if let Some(h) = h {
                if !(*h > R::zero()) {
                    return Err(Error::InvalidParameter(format!(
                        "height profile region {r} has non-positive height {h}"
                    )));
                }
            }
        }
        Ok(HeightProfile { heights })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.heights.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    #[inline]
    pub fn get(&self, region: usize) -> Option<R> {
        self.heights.get(region).copied().flatten()
    }

    pub fn observed_regions(&self) -> usize {
        self.heights.iter().filter(|h| h.is_some()).count()
    }
}

/// Fills the gaps of a partially observed profile: interior gaps interpolate
/// linearly between the nearest observed regions, exterior gaps clamp to the
/// nearest observed value. Needs at least two observed regions.
pub fn interpolate_profile<R: Real>(profile: &HeightProfile<R>) -> Result<HeightProfile<R>> {
    let observed: Vec<usize> = (0..profile.len())
        .filter(|&r| profile.get(r).is_some())
        .collect();
    if observed.len() < 2 {
        return Err(Error::Calibration(format!(
            "height interpolation needs at least 2 observed regions, got {}",
            observed.len()
        )));
    }
    let mut heights = Vec::with_capacity(profile.len());
    for r in 0..profile.len() {
        let h = if let Some(h) = profile.get(r) {
            h
        } else if r < observed[0] {
            profile.get(observed[0]).expect("observed")
        } else if r > *observed.last().expect("non-empty") {
            profile.get(*observed.last().expect("non-empty")).expect("observed")
        } else {
            let next_pos = observed.partition_point(|&o| o < r);
            let prev = observed[next_pos - 1];
            let next = observed[next_pos];
            let h_prev = profile.get(prev).expect("observed");
            let h_next = profile.get(next).expect("observed");
            let t = real::<R>((r - prev) as f64) / real::<R>((next - prev) as f64);
            h_prev + (h_next - h_prev) * t
        };
        heights.push(Some(h));
    }
    HeightProfile::new(heights)
}

/// Per-region tally weights, all positive, exactly 1 in the region that
/// contains the world origin.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionWeights<R> {
    weights: Vec<R>,
}

impl<R: Real> RegionWeights<R> {
    pub fn new(weights: Vec<R>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput("region weights"));
        }
        for (r, w) in weights.iter().enumerate() {
            if !(*w > R::zero()) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "region {r} has non-positive weight {w}"
                )));
            }
        }
        Ok(RegionWeights { weights })
    }

    /// Weight 1 everywhere, for unweighted baseline runs.
    pub fn uniform(region_count: usize) -> Result<Self> {
        RegionWeights::new(vec![R::one(); region_count])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn get(&self, region: usize) -> R {
        self.weights[region]
    }
}

/// One observation of the walked exemplar: where their feet were in the
/// image and how tall they appeared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSample<R> {
    pub frame: usize,
    pub foot_pixel: Vec2<R>,
    pub height_px: R,
}

/// Pixel-space track of a single person walking through the scene, used to
/// calibrate the per-region weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ExemplarTrack<R> {
    pub samples: Vec<TrackSample<R>>,
}

impl<R: Real> ExemplarTrack<R> {
    /// Parses `frame,foot_x,foot_y,height_px` CSV; a header line is
    /// accepted.
    pub fn parse_csv(text: &str, context: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("frame")) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::parse(
                    context,
                    format!("line {}: expected 4 fields, got {}", lineno + 1, fields.len()),
                ));
            }
            let frame: usize = fields[0]
                .parse()
                .map_err(|_| Error::parse(context, format!("line {}: bad frame", lineno + 1)))?;
            let nums: Vec<f64> = fields[1..]
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(context, format!("line {}: bad number", lineno + 1)))?;
            samples.push(TrackSample {
                frame,
                foot_pixel: Vec2::new(real(nums[0]), real(nums[1])),
                height_px: real(nums[2]),
            });
        }
        if samples.is_empty() {
            return Err(Error::EmptyInput("exemplar track"));
        }
        Ok(ExemplarTrack { samples })
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ExemplarTrack::parse_csv(&text, &path.display().to_string())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame,foot_x,foot_y,height_px\n");
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{}",
                s.frame,
                s.foot_pixel.x.to_f64().unwrap_or(f64::NAN),
                s.foot_pixel.y.to_f64().unwrap_or(f64::NAN),
                s.height_px.to_f64().unwrap_or(f64::NAN)
            )
            .expect("string write");
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Calibrates the per-region height profile and weights from an exemplar
/// track.
///
/// Foot pixels are back-projected to the ground plane and binned by region;
/// each observed region gets the mean of its height samples. Gaps are filled
/// by [`interpolate_profile`] before the weights are formed, so every region
/// ends up with a positive weight. The anchor is the region containing the
/// world origin: its completed-profile height gets weight exactly 1, so a
/// track that never walks through that exact distance band still calibrates.
pub fn calibrate_weights<R: Real>(
    track: &ExemplarTrack<R>,
    cam: &TsaiCamera<R>,
    regions: &RegionMap<R>,
) -> Result<(HeightProfile<R>, RegionWeights<R>)> {
    if track.samples.is_empty() {
        return Err(Error::EmptyInput("exemplar track"));
    }
    let mut sums = vec![R::zero(); regions.region_count()];
    let mut counts = vec![0usize; regions.region_count()];
    for sample in &track.samples {
        if !(sample.height_px > R::zero()) {
            return Err(Error::InvalidParameter(format!(
                "track frame {} has non-positive height {}",
                sample.frame, sample.height_px
            )));
        }
        let ground = cam.image_to_ground(sample.foot_pixel)?;
        if let Some(r) = regions.region_of(ground) {
            sums[r] += sample.height_px;
            counts[r] += 1;
        }
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::Calibration(
            "no track samples fall inside the camera's regions".into(),
        ));
    }

    let observed = HeightProfile::new(
        sums.iter()
            .zip(&counts)
            .map(|(&s, &c)| (c > 0).then(|| s / real::<R>(c as f64)))
            .collect(),
    )?;

    let origin_region = regions
        .region_of(Vec2::zero())
        .ok_or_else(|| Error::Calibration("world origin lies outside all regions".into()))?;

    let complete = if observed.observed_regions() == 1 {
        // A single observed region pins a constant profile.
        let h = (0..regions.region_count())
            .find_map(|r| observed.get(r))
            .expect("one region observed");
        HeightProfile::new(vec![Some(h); regions.region_count()])?
    } else {
        interpolate_profile(&observed)?
    };

    let h_origin = complete.get(origin_region).expect("complete profile");
    let mut weights = Vec::with_capacity(regions.region_count());
    for r in 0..regions.region_count() {
        let h = complete.get(r).expect("complete profile");
        weights.push(if r == origin_region { R::one() } else { h_origin / h });
    }
    Ok((observed, RegionWeights::new(weights)?))
}

/// Serialises a profile/weight pair as `region_index,avg_height_px,weight`
/// CSV. Unobserved profile entries write an empty height field.
pub fn weights_to_csv<R: Real>(profile: &HeightProfile<R>, weights: &RegionWeights<R>) -> String {
    let mut out = String::from("region_index,avg_height_px,weight\n");
    for r in 0..weights.len() {
        let height = profile
            .get(r)
            .map(|h| h.to_f64().unwrap_or(f64::NAN).to_string())
            .unwrap_or_default();
        writeln!(out, "{r},{height},{}", weights.get(r).to_f64().unwrap_or(f64::NAN))
            .expect("string write");
    }
    out
}

/// Parses the CSV written by [`weights_to_csv`].
pub fn weights_from_csv<R: Real>(
    text: &str,
    context: &str,
) -> Result<(HeightProfile<R>, RegionWeights<R>)> {
    let mut heights = Vec::new();
    let mut weights = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("region_index")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                context,
                format!("line {}: expected 3 fields, got {}", lineno + 1, fields.len()),
            ));
        }
        let idx: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(context, format!("line {}: bad region index", lineno + 1)))?;
        if idx != heights.len() {
            return Err(Error::parse(
                context,
                format!("line {}: region indices must be contiguous from 0", lineno + 1),
            ));
        }
        let height = if fields[1].is_empty() {
            None
        } else {
            Some(real::<R>(fields[1].parse::<f64>().map_err(|_| {
                Error::parse(context, format!("line {}: bad height", lineno + 1))
            })?))
        };
        let weight = real::<R>(fields[2].parse::<f64>().map_err(|_| {
            Error::parse(context, format!("line {}: bad weight", lineno + 1))
        })?);
        heights.push(height);
        weights.push(weight);
    }
    Ok((HeightProfile::new(heights)?, RegionWeights::new(weights)?))
}

pub fn save_weights<R: Real>(
    path: &Path,
    profile: &HeightProfile<R>,
    weights: &RegionWeights<R>,
) -> Result<()> {
    std::fs::write(path, weights_to_csv(profile, weights)).map_err(|e| Error::io(path, e))
}

pub fn load_weights<R: Real>(path: &Path) -> Result<(HeightProfile<R>, RegionWeights<R>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    weights_from_csv(&text, &path.display().to_string())
}

/// How a corner correction was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CornerCorrection {
    /// Moved the full half person height towards the camera.
    Moved,
    /// The half-height step would have crossed the region's inner boundary;
    /// stopped on the boundary instead.
    ClampedToBoundary,
    /// The point lies outside all regions and was left untouched.
    OutsideRegions,
}

/// Moves a corner observation towards the camera by half the average person
/// height, but never past the inner boundary of the region it fell into.
/// Corners project anywhere on the body, so on average they sit half a
/// person height too far from the camera.
pub fn correct_corner_projection<R: Real>(
    point: &GroundPoint<R>,
    regions: &RegionMap<R>,
    person_height_mm: R,
) -> (GroundPoint<R>, CornerCorrection) {
    let pos = point.position();
    let region = match regions.region_of(pos) {
        Some(r) => r,
        None => return (*point, CornerCorrection::OutsideRegions),
    };
    let cam = regions.camera_ground();
    let dist = pos.distance(cam);
    if dist <= R::zero() {
        return (*point, CornerCorrection::Moved);
    }
    let slack = dist - regions.inner_radius(region);
    let half_height = person_height_mm / real::<R>(2.0);
    let (step, outcome) = if half_height <= slack {
        (half_height, CornerCorrection::Moved)
    } else {
        (slack, CornerCorrection::ClampedToBoundary)
    };
    let towards_cam = (cam - pos).scale(step / dist);
    let corrected = pos + towards_cam;
    (
        GroundPoint { x: corrected.x, y: corrected.y, ..*point },
        outcome,
    )
}

/// Moves a head observation towards the camera to its ground position.
///
/// A head at height hP seen by a camera at height hC projects onto the
/// ground a factor hC / (hC - hP) too far out; similar triangles give the
/// pull-back distance d = D hP / hC for a head whose projection landed at
/// distance D. Setting `invert_ratio` uses d = D hC / hP instead, matching
/// systems that apply the proportion upside down; it overshoots badly and
/// exists only for comparison runs.
pub fn correct_head_projection<R: Real>(
    point: &GroundPoint<R>,
    camera_ground: Vec2<R>,
    camera_height: R,
    person_height: R,
    invert_ratio: bool,
) -> Result<GroundPoint<R>> {
    if !(person_height > R::zero()) || !(person_height < camera_height) {
        return Err(Error::InvalidParameter(format!(
            "head correction needs 0 < person height < camera height, got {person_height} vs {camera_height}"
        )));
    }
    let pos = point.position();
    let dist = pos.distance(camera_ground);
    if dist <= R::zero() {
        return Ok(*point);
    }
    let ratio = if invert_ratio {
        camera_height / person_height
    } else {
        person_height / camera_height
    };
    let step = dist * ratio;
    let towards_cam = (camera_ground - pos).scale(step / dist);
    let corrected = pos + towards_cam;
    Ok(GroundPoint { x: corrected.x, y: corrected.y, ..*point })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::linalg::Vec3;
    use crate::geom::plane::PointSource;
    use approx::assert_relative_eq;

    fn ground_point(x: f64, y: f64) -> GroundPoint<f64> {
        GroundPoint { x, y, weight: 1.0, source: PointSource::Corner, view: 0 }
    }

    #[test]
    fn region_binning_uses_floor() {
        let regions = RegionMap::new(Vec2::new(0.0, 0.0), 1000.0, 5).unwrap();
        assert_eq!(regions.region_of(Vec2::new(0.0, 0.0)), Some(0));
        assert_eq!(regions.region_of(Vec2::new(999.0, 0.0)), Some(0));
        assert_eq!(regions.region_of(Vec2::new(1000.0, 0.0)), Some(1));
        assert_eq!(regions.region_of(Vec2::new(0.0, 4999.0)), Some(4));
        assert_eq!(regions.region_of(Vec2::new(5000.0, 0.0)), None);
    }

    #[test]
    fn profile_interpolation_fills_gaps() {
        let profile = HeightProfile::new(vec![
            None,
            Some(60.0),
            None,
            None,
            Some(30.0),
            None,
        ])
        .unwrap();
        let full = interpolate_profile(&profile).unwrap();
        // Exterior clamps, interior is linear.
        assert_relative_eq!(full.get(0).unwrap(), 60.0);
        assert_relative_eq!(full.get(2).unwrap(), 50.0);
        assert_relative_eq!(full.get(3).unwrap(), 40.0);
        assert_relative_eq!(full.get(5).unwrap(), 30.0);
    }

    #[test]
    fn interpolation_needs_two_observations() {
        let profile = HeightProfile::new(vec![None, Some(60.0), None]).unwrap();
        assert!(interpolate_profile(&profile).is_err());
    }

    fn walkthrough_camera() -> TsaiCamera<f64> {
        TsaiCamera::look_at(
            Vec3::new(0.0, -8000.0, 6000.0),
            Vec3::new(0.0, 4000.0, 0.0),
            640,
            480,
            6.0,
            0.0,
            0.01,
        )
        .unwrap()
    }

    /// Walks a person of the given height along +y through the camera axis,
    /// sampling foot pixel and apparent pixel height from the projection.
    fn walkthrough_track(cam: &TsaiCamera<f64>, height_mm: f64) -> ExemplarTrack<f64> {
        let mut samples = Vec::new();
        let mut frame = 0;
        let mut y = -6500.0;
        while y < 12000.0 {
            let foot = Vec3::new(0.0, y, 0.0);
            let head = Vec3::new(0.0, y, height_mm);
            if let (Ok(fp), Ok(hp)) = (cam.world_to_image(foot), cam.world_to_image(head)) {
                samples.push(TrackSample {
                    frame,
                    foot_pixel: fp,
                    height_px: fp.distance(hp),
                });
            }
            frame += 1;
            y += 200.0;
        }
        ExemplarTrack { samples }
    }

    #[test]
    fn origin_region_weight_is_exactly_one() {
        let cam = walkthrough_camera();
        let regions = RegionMap::new(cam.ground_position().unwrap().0, 1000.0, 20).unwrap();
        let track = walkthrough_track(&cam, 1700.0);
        let (profile, weights) = calibrate_weights(&track, &cam, &regions).unwrap();
        let origin_region = regions.region_of(Vec2::zero()).unwrap();
        assert_eq!(weights.get(origin_region), 1.0);
        assert!(profile.observed_regions() > 5);
        // Farther regions see shorter people, hence weights grow.
        for r in origin_region..weights.len() - 1 {
            assert!(
                weights.get(r + 1) >= weights.get(r),
                "weights not monotone at region {r}"
            );
        }
        // Regions nearer than the origin get weights below 1.
        assert!(weights.get(origin_region - 1) < 1.0);
    }

    #[test]
    fn unobserved_origin_region_anchors_on_the_interpolated_height() {
        let cam = walkthrough_camera();
        let regions = RegionMap::new(cam.ground_position().unwrap().0, 1000.0, 20).unwrap();
        let mut track = walkthrough_track(&cam, 1700.0);
        // Drop every sample near the origin's distance (8 m) so the anchor
        // region is only reachable through interpolation.
        track.samples.retain(|s| {
            let g = cam.image_to_ground(s.foot_pixel).unwrap();
            let dist = g.distance(cam.ground_position().unwrap().0);
            !(6500.0..9500.0).contains(&dist)
        });
        let origin_region = regions.region_of(Vec2::zero()).unwrap();
        let (profile, weights) = calibrate_weights(&track, &cam, &regions).unwrap();
        assert!(profile.get(origin_region).is_none(), "gap must stay visible in the profile");
        assert_eq!(weights.get(origin_region), 1.0);
        for r in origin_region..weights.len() - 1 {
            assert!(
                weights.get(r + 1) >= weights.get(r),
                "weights not monotone at region {r}"
            );
        }
    }

    #[test]
    fn constant_height_gives_unit_weights() {
        // A track whose apparent height never changes calibrates to weight 1
        // everywhere; feed synthetic constant heights through a real camera.
        let cam = walkthrough_camera();
        let regions = RegionMap::new(cam.ground_position().unwrap().0, 1000.0, 20).unwrap();
        let mut track = walkthrough_track(&cam, 1700.0);
        for s in &mut track.samples {
            s.height_px = 42.0;
        }
        let (_, weights) = calibrate_weights(&track, &cam, &regions).unwrap();
        for r in 0..weights.len() {
            assert_relative_eq!(weights.get(r), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn weights_csv_round_trip() {
        let cam = walkthrough_camera();
        let regions = RegionMap::new(cam.ground_position().unwrap().0, 1000.0, 20).unwrap();
        let track = walkthrough_track(&cam, 1700.0);
        let (profile, weights) = calibrate_weights(&track, &cam, &regions).unwrap();
        let csv = weights_to_csv(&profile, &weights);
        let (profile2, weights2) = weights_from_csv::<f64>(&csv, "round-trip").unwrap();
        assert_eq!(profile.observed_regions(), profile2.observed_regions());
        for r in 0..weights.len() {
            assert_relative_eq!(weights.get(r), weights2.get(r), max_relative = 1e-12);
        }
    }

    #[test]
    fn corner_correction_moves_towards_camera() {
        let regions = RegionMap::new(Vec2::new(0.0, 0.0), 1000.0, 20).unwrap();
        // Point with plenty of slack to its inner boundary (5000): full
        // half-height step.
        let p = ground_point(5900.0, 0.0);
        let (corrected, outcome) = correct_corner_projection(&p, &regions, 1700.0);
        assert_eq!(outcome, CornerCorrection::Moved);
        assert_relative_eq!(corrected.x, 5900.0 - 850.0);
        assert_relative_eq!(corrected.y, 0.0);

        // Point just past its inner boundary: clamped onto it.
        let p = ground_point(0.0, 5200.0);
        let (corrected, outcome) = correct_corner_projection(&p, &regions, 1700.0);
        assert_eq!(outcome, CornerCorrection::ClampedToBoundary);
        assert_relative_eq!(corrected.y, 5000.0);

        // Same region before and after, including the clamped case.
        for (x, y) in [(5900.0, 0.0), (0.0, 5200.0), (300.0, 400.0)] {
            let p = ground_point(x, y);
            let before = regions.region_of(p.position()).unwrap();
            let (c, _) = correct_corner_projection(&p, &regions, 1700.0);
            assert_eq!(regions.region_of(c.position()), Some(before));
        }

        // Outside all regions: untouched and flagged.
        let p = ground_point(50000.0, 0.0);
        let (corrected, outcome) = correct_corner_projection(&p, &regions, 1700.0);
        assert_eq!(outcome, CornerCorrection::OutsideRegions);
        assert_eq!(corrected, p);
    }

    #[test]
    fn head_correction_similar_triangles() {
        // Camera 6 m up; a 1.8 m head seen at ground distance 9 m pulls back
        // by 9000 * 1800 / 6000 = 2700 mm.
        let p = ground_point(9000.0, 0.0);
        let corrected =
            correct_head_projection(&p, Vec2::new(0.0, 0.0), 6000.0, 1800.0, false).unwrap();
        assert_relative_eq!(corrected.x, 6300.0);
        assert_relative_eq!(corrected.y, 0.0);

        // The inverted ratio overshoots far past the camera.
        let inverted =
            correct_head_projection(&p, Vec2::new(0.0, 0.0), 6000.0, 1800.0, true).unwrap();
        assert_relative_eq!(inverted.x, 9000.0 - 9000.0 * 6000.0 / 1800.0);
    }

    #[test]
    fn head_correction_recovers_projected_foot() {
        // End-to-end: project a head through a camera, back-project, correct;
        // the result is the person's ground position.
        let cam = walkthrough_camera();
        let (cam_ground, cam_height) = cam.ground_position().unwrap();
        for (x, y, h) in [(0.0, 2000.0, 1700.0), (1500.0, -1000.0, 1950.0), (-900.0, 5000.0, 1520.0)] {
            let head_px = cam.world_to_image(Vec3::new(x, y, h)).unwrap();
            let on_ground = GroundPoint::from_pixel(&cam, head_px, PointSource::Head, 0).unwrap();
            let corrected =
                correct_head_projection(&on_ground, cam_ground, cam_height, h, false).unwrap();
            assert!(
                corrected.position().distance(Vec2::new(x, y)) < 1e-6,
                "failed to recover foot for ({x}, {y}, {h})"
            );
        }
    }

    #[test]
    fn head_correction_rejects_bad_heights() {
        let p = ground_point(9000.0, 0.0);
        let cam = Vec2::new(0.0, 0.0);
        assert!(correct_head_projection(&p, cam, 6000.0, 0.0, false).is_err());
        assert!(correct_head_projection(&p, cam, 6000.0, -5.0, false).is_err());
        assert!(correct_head_projection(&p, cam, 6000.0, 6000.0, false).is_err());
        assert!(correct_head_projection(&p, cam, 6000.0, 6500.0, false).is_err());
    }

    #[test]
    fn corrections_preserve_point_metadata() {
        let regions = RegionMap::new(Vec2::new(0.0, 0.0), 1000.0, 20).unwrap();
        let p = GroundPoint { x: 4000.0, y: 0.0, weight: 0.8, source: PointSource::Head, view: 3 };
        let (c, _) = correct_corner_projection(&p, &regions, 1700.0);
        assert_eq!((c.weight, c.source, c.view), (0.8, PointSource::Head, 3));
        let c = correct_head_projection(&p, Vec2::zero(), 6000.0, 1700.0, false).unwrap();
        assert_eq!((c.weight, c.source, c.view), (0.8, PointSource::Head, 3));
    }
}
