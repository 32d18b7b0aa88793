//! Frame-to-report composites tying the stages together.
//!
//! Everything here operates on in-memory frame sequences so tests and the
//! command line share one code path. Per-frame work is embarrassingly
//! parallel and runs through rayon; all models are immutable once built.

use crate::corners::{detect_corners, CornerConfig, CornerPoint};
use crate::counting::{
    accumulate_observation, correspond_heads, count_heads, estimate_single_view, fuse_frame,
    AcppModel, CountReport, FrameObservation, FusionRule, HeadPoint, Polygon, ReportRow,
};
use crate::error::{Error, Result};
use crate::frame::{BinaryMask, GrayFrame, StructuringElement};
use crate::geom::{GroundPlaneSpec, GroundPoint, PointSource, TsaiCamera, Vec2};
use crate::heads::{detect_heads, DetectionBox, ScanConfig, WindowClassifier};
use crate::motion::{
    extract_blobs, gaussian_blur, hysteresis_threshold, morphological_close, segment_motion,
    BackgroundModel, Blob,
};
use crate::regions::{
    correct_corner_projection, correct_head_projection, RegionMap, RegionWeights,
};
use crate::scalar::{real, Real};
use crate::ViewId;
use rayon::prelude::*;
use std::path::Path;

/// Thresholds of the motion segmentation chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentationParams {
    /// Minimum deviation from the previous frame.
    pub diff_threshold: u32,
    /// Hysteresis thresholds on the conjunctive difference image.
    pub hysteresis_low: u32,
    pub hysteresis_high: u32,
    /// Smallest connected component kept as a blob.
    pub min_blob_area: usize,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        SegmentationParams {
            diff_threshold: 10,
            hysteresis_low: 64,
            hysteresis_high: 128,
            min_blob_area: 50,
        }
    }
}

impl SegmentationParams {
    pub fn validate(&self) -> Result<()> {
        if self.hysteresis_low > self.hysteresis_high {
            return Err(Error::InvalidParameter(format!(
                "hysteresis low {} exceeds high {}",
                self.hysteresis_low, self.hysteresis_high
            )));
        }
        Ok(())
    }
}

/// Pointwise strength at which a pixel passes both motion tests: the
/// smaller of its background deviation and its frame-to-frame change.
pub fn conjunctive_difference(
    current: &GrayFrame,
    previous: &GrayFrame,
    background: &GrayFrame,
) -> Result<GrayFrame> {
    if !current.same_size(previous) || !current.same_size(background) {
        return Err(Error::DimensionMismatch(
            "conjunctive difference needs equally sized frames".into(),
        ));
    }
    let mut out = GrayFrame::filled(current.width(), current.height(), 0)?;
    for y in 0..current.height() {
        for x in 0..current.width() {
            let c = current.get(x, y) as i32;
            let b = (c - background.get(x, y) as i32).unsigned_abs();
            let p = (c - previous.get(x, y) as i32).unsigned_abs();
            out.set(x, y, b.min(p).min(255) as u8);
        }
    }
    Ok(out)
}

/// One segmented frame: the smoothed input (reused by corner detection),
/// the motion mask after closing, and its blobs.
#[derive(Debug, Clone)]
pub struct SegmentedFrame {
    pub smoothed: GrayFrame,
    pub mask: BinaryMask,
    pub blobs: Vec<Blob>,
}

/// Full segmentation chain: smoothing, background subtraction combined
/// with frame differencing, hysteresis on the conjunctive difference,
/// morphological closing and blob extraction.
///
/// The model's mean is used as-is; pair it with frames smoothed the same
/// way (see [`ViewContext::new`], which smooths the mean once).
pub fn segment_frame(
    current: &GrayFrame,
    previous: &GrayFrame,
    model: &BackgroundModel,
    params: &SegmentationParams,
) -> Result<SegmentedFrame> {
    params.validate()?;
    let smoothed = gaussian_blur(current);
    let prev_smoothed = gaussian_blur(previous);
    let strict = segment_motion(&smoothed, &prev_smoothed, model, params.diff_threshold)?;
    let diff = conjunctive_difference(&smoothed, &prev_smoothed, model.mean())?;
    let hyst = hysteresis_threshold(&diff, params.hysteresis_low, params.hysteresis_high)?;
    let mut mask = BinaryMask::new(strict.width(), strict.height())?;
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            mask.set(x, y, strict.get(x, y) && hyst.get(x, y));
        }
    }
    let closed = morphological_close(&mask, &StructuringElement::full());
    let blobs = extract_blobs(&closed, params.min_blob_area);
    Ok(SegmentedFrame { smoothed, mask: closed, blobs })
}

/// Everything fixed about one view for a run: camera, smoothed background,
/// distance regions and their weights.
#[derive(Debug, Clone)]
pub struct ViewContext<R> {
    pub view: ViewId,
    pub camera: TsaiCamera<R>,
    pub background: BackgroundModel,
    pub regions: RegionMap<R>,
    pub weights: RegionWeights<R>,
}

impl<R: Real> ViewContext<R> {
    /// Smooths the background mean so it matches the smoothed frames the
    /// segmentation chain compares against, and centres the distance
    /// regions under the camera.
    pub fn new(
        view: ViewId,
        camera: TsaiCamera<R>,
        background: &BackgroundModel,
        region_width_mm: R,
        region_count: usize,
        weights: RegionWeights<R>,
    ) -> Result<Self> {
        camera.validate()?;
        let (camera_ground, _) = camera.ground_position()?;
        let regions = RegionMap::new(camera_ground, region_width_mm, region_count)?;
        if weights.len() != regions.region_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} regions",
                weights.len(),
                regions.region_count()
            )));
        }
        let smoothed_mean = gaussian_blur(background.mean());
        Ok(ViewContext {
            view,
            camera,
            background: BackgroundModel::from_parts(smoothed_mean, background.tolerance()),
            regions,
            weights,
        })
    }

    /// Camera ground position and height, guaranteed valid after `new`.
    fn camera_ground(&self) -> (Vec2<R>, R) {
        self.camera.ground_position().expect("validated in ViewContext::new")
    }
}

/// Projects detected corners to the ground, applies the half-height
/// correction and accumulates the weighted per-region tallies.
pub fn corner_observation<R: Real>(
    ctx: &ViewContext<R>,
    frame: usize,
    corners: &[CornerPoint<R>],
    person_height_mm: R,
    correct_projection: bool,
) -> Result<FrameObservation<R>> {
    let mut points = Vec::with_capacity(corners.len());
    for c in corners {
        let pixel = Vec2::new(real(c.x as f64), real(c.y as f64));
        let mut p = GroundPoint::from_pixel(&ctx.camera, pixel, PointSource::Corner, ctx.view)?;
        if correct_projection {
            p = correct_corner_projection(&p, &ctx.regions, person_height_mm).0;
        }
        points.push(p);
    }
    accumulate_observation(frame, ctx.view, &points, &ctx.regions, &ctx.weights)
}

/// Segments and corner-detects one frame against its predecessor.
pub fn detect_frame_corners<R: Real>(
    ctx: &ViewContext<R>,
    current: &GrayFrame,
    previous: &GrayFrame,
    seg: &SegmentationParams,
    corner_cfg: &CornerConfig<R>,
) -> Result<(SegmentedFrame, Vec<CornerPoint<R>>)> {
    let segmented = segment_frame(current, previous, &ctx.background, seg)?;
    let corners = detect_corners(&segmented.smoothed, &segmented.blobs, corner_cfg, ctx.view)?;
    Ok((segmented, corners))
}

/// Runs segmentation, corner detection, projection and weighting over a
/// whole sequence. Frame 0 only seeds the differencing, so observations
/// start at frame 1.
pub fn process_view<R: Real>(
    ctx: &ViewContext<R>,
    frames: &[GrayFrame],
    seg: &SegmentationParams,
    corner_cfg: &CornerConfig<R>,
    person_height_mm: R,
    correct_projection: bool,
) -> Result<Vec<FrameObservation<R>>> {
    if frames.len() < 2 {
        return Err(Error::EmptyInput("need at least two frames to difference"));
    }
    (1..frames.len())
        .into_par_iter()
        .map(|t| {
            let (_, corners) =
                detect_frame_corners(ctx, &frames[t], &frames[t - 1], seg, corner_cfg)?;
            corner_observation(ctx, t, &corners, person_height_mm, correct_projection)
        })
        .collect()
}

/// Corners-per-person ratios for every view plus the scene-level ratio the
/// fusion rules divide by.
#[derive(Debug, Clone, PartialEq)]
pub struct AcppTable<R> {
    pub per_view: Vec<(ViewId, R)>,
    pub scene: R,
}

impl<R: Real> AcppTable<R> {
    /// Builds the table; the scene ratio defaults to the mean of the
    /// per-view ratios unless overridden.
    pub fn from_views(per_view: Vec<(ViewId, R)>, scene_override: Option<R>) -> Result<Self> {
        if per_view.is_empty() {
            return Err(Error::EmptyInput("per-view ratios"));
        }
        for &(view, acpp) in &per_view {
            if !(acpp > R::zero()) || !acpp.is_finite() {
                return Err(Error::Calibration(format!(
                    "view {view} corners-per-person ratio {acpp} not positive"
                )));
            }
        }
        let scene = match scene_override {
            Some(s) if s > R::zero() && s.is_finite() => s,
            Some(s) => {
                return Err(Error::InvalidParameter(format!(
                    "scene corners-per-person override {s} not positive"
                )))
            }
            None => {
                let mut sum = R::zero();
                for &(_, a) in &per_view {
                    sum += a;
                }
                sum / real(per_view.len() as f64)
            }
        };
        Ok(AcppTable { per_view, scene })
    }

    pub fn view_ratio(&self, view: ViewId) -> Result<R> {
        self.per_view
            .iter()
            .find(|(v, _)| *v == view)
            .map(|&(_, a)| a)
            .ok_or_else(|| Error::Config(format!("no corners-per-person ratio for view {view}")))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("scene = {}\n", self.scene.to_f64().unwrap_or(f64::NAN));
        for &(view, acpp) in &self.per_view {
            out.push_str(&format!("view {view} = {}\n", acpp.to_f64().unwrap_or(f64::NAN)));
        }
        out
    }

    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut per_view = Vec::new();
        let mut scene = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(context, format!("expected key = value, got {line:?}"))
            })?;
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::parse(context, format!("bad number {:?}", value.trim()))
            })?;
            let key = key.trim();
            if key == "scene" {
                scene = Some(real::<R>(value));
            } else if let Some(view) = key.strip_prefix("view ") {
                let view: ViewId = view.trim().parse().map_err(|_| {
                    Error::parse(context, format!("bad view id {:?}", view.trim()))
                })?;
                per_view.push((view, real::<R>(value)));
            } else {
                return Err(Error::parse(context, format!("unknown key {key:?}")));
            }
        }
        AcppTable::from_views(per_view, scene)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        AcppTable::parse(&text, &path.display().to_string())
    }
}

fn check_synchronized(frame_counts: &[usize]) -> Result<usize> {
    let first = *frame_counts.first().ok_or(Error::EmptyInput("views"))?;
    if frame_counts.iter().any(|&n| n != first) {
        return Err(Error::Data(format!(
            "views are not synchronized: frame counts {frame_counts:?}"
        )));
    }
    Ok(first)
}

fn ground_truth_value<R: Real>(gt: Option<&[(usize, usize)]>, frame: usize) -> Option<R> {
    gt.and_then(|rows| rows.iter().find(|(f, _)| *f == frame)).map(|&(_, c)| real(c as f64))
}

/// The indirect pipeline end to end: per-view corner observations, single
/// view estimates, and per-region fusion under the given rule.
#[allow(clippy::too_many_arguments)]
pub fn run_indirect<R: Real>(
    views: &[ViewContext<R>],
    frames_per_view: &[Vec<GrayFrame>],
    seg: &SegmentationParams,
    corner_cfg: &CornerConfig<R>,
    person_height_mm: R,
    correct_projection: bool,
    acpp: &AcppTable<R>,
    rule: FusionRule,
    ground_truth: Option<&[(usize, usize)]>,
    signed_error: bool,
) -> Result<CountReport<R>> {
    if views.len() != frames_per_view.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} view contexts for {} frame sequences",
            views.len(),
            frames_per_view.len()
        )));
    }
    let frame_count =
        check_synchronized(&frames_per_view.iter().map(|f| f.len()).collect::<Vec<_>>())?;
    if frame_count < 2 {
        return Err(Error::EmptyInput("need at least two frames to difference"));
    }

    let observations: Vec<Vec<FrameObservation<R>>> = views
        .iter()
        .zip(frames_per_view)
        .map(|(ctx, frames)| {
            process_view(ctx, frames, seg, corner_cfg, person_height_mm, correct_projection)
        })
        .collect::<Result<_>>()?;

    let view_models: Vec<AcppModel<R>> = views
        .iter()
        .map(|ctx| AcppModel::new(acpp.view_ratio(ctx.view)?))
        .collect::<Result<_>>()?;
    let scene_model = AcppModel::new(acpp.scene)?;

    let mut rows = Vec::with_capacity(frame_count - 1);
    for t in 1..frame_count {
        let per_frame: Vec<&FrameObservation<R>> =
            observations.iter().map(|obs| &obs[t - 1]).collect();
        let view_estimates: Vec<R> = per_frame
            .iter()
            .zip(&view_models)
            .map(|(obs, model)| estimate_single_view(obs, model))
            .collect();
        let fused = fuse_frame(&per_frame, rule, &scene_model)?;
        let ground_truth = ground_truth_value(ground_truth, t);
        rows.push(ReportRow {
            frame: t,
            view_estimates,
            fused,
            ground_truth,
            abs_error: ground_truth.map(|g| (fused - g).abs()),
        });
    }
    CountReport::new(views.iter().map(|v| v.view).collect(), rows, signed_error)
}

/// Corner observations for a training sequence, keyed the way
/// [`crate::counting::calibrate_acpp`] expects.
pub fn training_observations<R: Real>(
    ctx: &ViewContext<R>,
    frames: &[GrayFrame],
    seg: &SegmentationParams,
    corner_cfg: &CornerConfig<R>,
    person_height_mm: R,
    correct_projection: bool,
) -> Result<Vec<FrameObservation<R>>> {
    process_view(ctx, frames, seg, corner_cfg, person_height_mm, correct_projection)
}

/// Projects head detections to the ground and pulls them back under the
/// camera by the similar-triangles ratio.
pub fn head_points<R: Real>(
    ctx: &ViewContext<R>,
    frame: usize,
    detections: &[DetectionBox<R>],
    person_height_mm: R,
    invert_ratio: bool,
) -> Result<Vec<HeadPoint<R>>> {
    let (camera_ground, camera_height) = ctx.camera_ground();
    let mut points = Vec::with_capacity(detections.len());
    for det in detections {
        let pixel = det.center();
        let raw = GroundPoint::from_pixel(&ctx.camera, pixel, PointSource::Head, ctx.view)?;
        let corrected = correct_head_projection(
            &raw,
            camera_ground,
            camera_height,
            person_height_mm,
            invert_ratio,
        )?;
        points.push(HeadPoint { position: corrected.position(), view: ctx.view, frame });
    }
    Ok(points)
}

/// The direct pipeline end to end: head detection inside movement blobs,
/// ground projection with head correction, cross-view correspondence and
/// the fused head count. View estimate columns carry the per-view
/// detection counts.
#[allow(clippy::too_many_arguments)]
pub fn run_head_counting<R: Real>(
    views: &[ViewContext<R>],
    frames_per_view: &[Vec<GrayFrame>],
    classifiers: &[&dyn WindowClassifier<R>],
    seg: &SegmentationParams,
    scan: &ScanConfig,
    plane: &GroundPlaneSpec<R>,
    correspondence_mask_max: u32,
    single_view_zones: &[Polygon<R>],
    person_height_mm: R,
    invert_ratio: bool,
    ground_truth: Option<&[(usize, usize)]>,
    signed_error: bool,
) -> Result<CountReport<R>> {
    if views.len() != frames_per_view.len() || views.len() != classifiers.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} view contexts, {} frame sequences, {} classifiers",
            views.len(),
            frames_per_view.len(),
            classifiers.len()
        )));
    }
    let frame_count =
        check_synchronized(&frames_per_view.iter().map(|f| f.len()).collect::<Vec<_>>())?;
    if frame_count < 2 {
        return Err(Error::EmptyInput("need at least two frames to difference"));
    }

    let mut rows: Vec<ReportRow<R>> = (1..frame_count)
        .into_par_iter()
        .map(|t| {
            let mut frame_points = Vec::new();
            let mut view_estimates = Vec::with_capacity(views.len());
            for (v, ctx) in views.iter().enumerate() {
                let segmented = segment_frame(
                    &frames_per_view[v][t],
                    &frames_per_view[v][t - 1],
                    &ctx.background,
                    seg,
                )?;
                let detections = detect_heads(
                    &segmented.smoothed,
                    &segmented.blobs,
                    classifiers[v],
                    scan,
                    ctx.view,
                )?;
                view_estimates.push(real(detections.len() as f64));
                frame_points
                    .extend(head_points(ctx, t, &detections, person_height_mm, invert_ratio)?);
            }
            let fused_points =
                correspond_heads(&frame_points, plane, correspondence_mask_max, single_view_zones)?;
            let count = real(count_heads(&fused_points) as f64);
            let ground_truth = ground_truth_value(ground_truth, t);
            Ok(ReportRow {
                frame: t,
                view_estimates,
                fused: count,
                ground_truth,
                abs_error: ground_truth.map(|g: R| (count - g).abs()),
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| r.frame);
    CountReport::new(views.iter().map(|v| v.view).collect(), rows, signed_error)
}
