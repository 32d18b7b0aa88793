//! Crowd estimates from weighted corner statistics and their fusion.
//!
//! Per frame and view, corner observations on the ground plane are tallied
//! per distance region with the region weight applied. A calibrated
//! average-corners-per-person (ACPP) ratio turns weighted tallies into
//! people estimates. With several views, tallies are combined per region
//! before the division, so region by region the best-placed camera can
//! dominate (maximum rule) or the views can average out.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::linalg::Vec2;
use crate::geom::plane::{GroundPlaneSpec, GroundPoint};
use crate::regions::{RegionMap, RegionWeights};
use crate::scalar::{real, Real};
use crate::ViewId;

/// Per-region combination rule across views.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionRule {
    Maximum,
    Minimum,
    Average,
}

impl std::str::FromStr for FusionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(FusionRule::Maximum),
            "min" => Ok(FusionRule::Minimum),
            "avg" => Ok(FusionRule::Average),
            other => Err(Error::InvalidParameter(format!(
                "unknown fusion rule {other:?} (expected max, min or avg)"
            ))),
        }
    }
}

/// Weighted per-region corner tallies for one frame of one view.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameObservation<R> {
    pub frame: usize,
    pub view: ViewId,
    /// Weighted tally per region.
    pub region_tallies: Vec<R>,
    /// Weighted tally of points outside every region (outermost weight).
    pub overflow: R,
    /// How many points landed outside the regions.
    pub overflow_points: usize,
}

impl<R: Real> FrameObservation<R> {
    /// Total weighted tally including overflow.
    pub fn total(&self) -> R {
        let mut sum = R::zero();
        for &t in &self.region_tallies {
            sum += t;
        }
        sum + self.overflow
    }
}

/// Bins ground observations by distance region and applies the region
/// weights. Points beyond the outermost region are tallied separately with
/// the outermost region's weight and reported via `overflow_points`.
pub fn accumulate_observation<R: Real>(
    frame: usize,
    view: ViewId,
    points: &[GroundPoint<R>],
    regions: &RegionMap<R>,
    weights: &RegionWeights<R>,
) -> Result<FrameObservation<R>> {
    if weights.len() != regions.region_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} regions",
            weights.len(),
            regions.region_count()
        )));
    }
    let mut tallies = vec![R::zero(); regions.region_count()];
    let mut overflow = R::zero();
    let mut overflow_points = 0usize;
    for p in points {
        match regions.region_of(p.position()) {
            Some(r) => tallies[r] += p.weight * weights.get(r),
            None => {
                overflow += p.weight * weights.get(weights.len() - 1);
                overflow_points += 1;
            }
        }
    }
    Ok(FrameObservation { frame, view, region_tallies: tallies, overflow, overflow_points })
}

/// Calibrated corners-per-person ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcppModel<R> {
    pub corners_per_person: R,
    /// Training frames that entered the mean.
    pub frames_used: usize,
}

impl<R: Real> AcppModel<R> {
    pub fn new(corners_per_person: R) -> Result<Self> {
        if !(corners_per_person > R::zero()) || !corners_per_person.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "corners-per-person ratio must be positive, got {corners_per_person}"
            )));
        }
        Ok(AcppModel { corners_per_person, frames_used: 0 })
    }
}

/// Averages weighted-tally / ground-truth over training frames of one view.
///
/// `ground_truth` maps frame index to the true person count. Frames whose
/// ground truth is zero cannot contribute a ratio; they are skipped and
/// returned so the caller can warn. Frames missing from the ground truth are
/// an error.
pub fn calibrate_acpp<R: Real>(
    observations: &[FrameObservation<R>],
    ground_truth: &[(usize, usize)],
) -> Result<(AcppModel<R>, Vec<usize>)> {
    if observations.is_empty() {
        return Err(Error::EmptyInput("calibration observations"));
    }
    let gt: BTreeMap<usize, usize> = ground_truth.iter().copied().collect();
    let mut sum = R::zero();
    let mut used = 0usize;
    let mut skipped = Vec::new();
    for obs in observations {
        let count = *gt.get(&obs.frame).ok_or_else(|| {
            Error::Data(format!("no ground truth for frame {}", obs.frame))
        })?;
        if count == 0 {
            skipped.push(obs.frame);
            continue;
        }
        sum += obs.total() / real::<R>(count as f64);
        used += 1;
    }
    if used == 0 {
        return Err(Error::Calibration(
            "no calibration frames with non-zero ground truth".into(),
        ));
    }
    let acpp = sum / real::<R>(used as f64);
    if !(acpp > R::zero()) {
        return Err(Error::Calibration(
            "calibration saw no corners; corners-per-person ratio is zero".into(),
        ));
    }
    Ok((AcppModel { corners_per_person: acpp, frames_used: used }, skipped))
}

/// People estimate from a single view's weighted tallies.
pub fn estimate_single_view<R: Real>(obs: &FrameObservation<R>, model: &AcppModel<R>) -> R {
    obs.total() / model.corners_per_person
}

/// Fuses the same frame's observations from several views: combines tallies
/// per region under the rule, then converts the combined total to people.
///
/// All observations must carry the same region structure. With a single
/// view every rule reduces to [`estimate_single_view`] exactly.
pub fn fuse_frame<R: Real>(
    observations: &[&FrameObservation<R>],
    rule: FusionRule,
    model: &AcppModel<R>,
) -> Result<R> {
    let first = observations.first().ok_or(Error::EmptyInput("fusion observations"))?;
    let region_count = first.region_tallies.len();
    for obs in observations {
        if obs.region_tallies.len() != region_count {
            return Err(Error::DimensionMismatch(format!(
                "view {} has {} regions, expected {region_count}",
                obs.view,
                obs.region_tallies.len()
            )));
        }
        if obs.frame != first.frame {
            return Err(Error::InvalidParameter(format!(
                "fusing observations from different frames ({} and {})",
                first.frame, obs.frame
            )));
        }
    }
    let n_views = real::<R>(observations.len() as f64);
    let combine = |values: &mut dyn Iterator<Item = R>| -> R {
        match rule {
            FusionRule::Maximum => values.fold(R::neg_infinity(), |a, b| a.max(b)),
            FusionRule::Minimum => values.fold(R::infinity(), |a, b| a.min(b)),
            FusionRule::Average => values.fold(R::zero(), |a, b| a + b) / n_views,
        }
    };
    let mut total = R::zero();
    for r in 0..region_count {
        total += combine(&mut observations.iter().map(|o| o.region_tallies[r]));
    }
    let total = total + combine(&mut observations.iter().map(|o| o.overflow));
    Ok(total / model.corners_per_person)
}

/// A head observation projected to the ground plane (millimetres).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadPoint<R> {
    pub position: Vec2<R>,
    pub view: ViewId,
    pub frame: usize,
}

/// Simple polygon on the ground plane, used to mark zones covered by a
/// single camera.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon<R> {
    vertices: Vec<Vec2<R>>,
}

impl<R: Real> Polygon<R> {
    pub fn new(vertices: Vec<Vec2<R>>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        Ok(Polygon { vertices })
    }

    pub fn vertices(&self) -> &[Vec2<R>] {
        &self.vertices
    }

    /// Even-odd ray-cast containment test.
    pub fn contains(&self, p: Vec2<R>) -> bool {
        let mut inside = false;
        let n = self.vertices.len();
        let mut j = n - 1;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[j];
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
                if p.x < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }
}

/// Matches head observations across views on the plane raster.
///
/// Points are compared in plane pixels. Starting from a 3x3 pixel mask and
/// growing by two up to `max_mask`, each unmatched point pairs greedily with
/// the first unmatched point of another view inside its mask; the pair is
/// replaced by its mean ground position. Leftover single-view points
/// survive only inside one of the `single_view_zones`, where no second
/// camera could have confirmed them.
pub fn correspond_heads<R: Real>(
    points: &[HeadPoint<R>],
    plane: &GroundPlaneSpec<R>,
    max_mask: u32,
    single_view_zones: &[Polygon<R>],
) -> Result<Vec<HeadPoint<R>>> {
    if max_mask < 3 || max_mask % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "correspondence mask must be odd and at least 3, got {max_mask}"
        )));
    }
    let pixels: Vec<(i64, i64)> = points
        .iter()
        .map(|p| plane.to_pixel_signed(p.position))
        .collect();
    // Fixed scan order keeps the greedy pairing deterministic.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| (points[i].view, pixels[i].0, pixels[i].1, i));

    let mut matched = vec![false; points.len()];
    let mut fused = Vec::new();
    let mut mask = 3u32;
    while mask <= max_mask {
        let radius = ((mask - 1) / 2) as i64;
        for &i in &order {
            if matched[i] {
                continue;
            }
            for &j in &order {
                if matched[j] || points[j].view == points[i].view {
                    continue;
                }
                let dx = (pixels[i].0 - pixels[j].0).abs();
                let dy = (pixels[i].1 - pixels[j].1).abs();
                if dx <= radius && dy <= radius {
                    matched[i] = true;
                    matched[j] = true;
                    let mean = (points[i].position + points[j].position).scale(real(0.5));
                    fused.push(HeadPoint {
                        position: mean,
                        view: points[i].view.min(points[j].view),
                        frame: points[i].frame,
                    });
                    break;
                }
            }
        }
        mask += 2;
    }
    for &i in &order {
        if !matched[i] && single_view_zones.iter().any(|z| z.contains(points[i].position)) {
            fused.push(points[i]);
        }
    }
    Ok(fused)
}

/// People count from fused head points.
pub fn count_heads<R>(fused: &[HeadPoint<R>]) -> usize {
    fused.len()
}

/// Mean per-frame counting error. The default is the mean absolute error;
/// `signed` averages raw differences instead, letting over- and
/// under-counts cancel.
pub fn aepf<R: Real>(estimates: &[R], ground_truth: &[R], signed: bool) -> Result<R> {
    if estimates.is_empty() {
        return Err(Error::EmptyInput("error metric inputs"));
    }
    if estimates.len() != ground_truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} estimates vs {} ground truth entries",
            estimates.len(),
            ground_truth.len()
        )));
    }
    let mut sum = R::zero();
    for (&e, &g) in estimates.iter().zip(ground_truth) {
        let diff = e - g;
        sum += if signed { diff } else { diff.abs() };
    }
    Ok(sum / real::<R>(estimates.len() as f64))
}

/// One report line: per-view estimates, the fused estimate and ground truth
/// when available.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow<R> {
    pub frame: usize,
    pub view_estimates: Vec<R>,
    pub fused: R,
    pub ground_truth: Option<R>,
    pub abs_error: Option<R>,
}

/// Frame-by-frame counting report plus the aggregated error.
#[derive(Debug, Clone, PartialEq)]
pub struct CountReport<R> {
    pub views: Vec<ViewId>,
    pub rows: Vec<ReportRow<R>>,
    /// Mean per-frame error over rows with ground truth; `None` without any.
    pub aepf: Option<R>,
}

impl<R: Real> CountReport<R> {
    /// Assembles a report and computes the error over rows with ground
    /// truth.
    pub fn new(views: Vec<ViewId>, rows: Vec<ReportRow<R>>, signed: bool) -> Result<Self> {
        let estimates: Vec<R> = rows
            .iter()
            .filter(|r| r.ground_truth.is_some())
            .map(|r| r.fused)
            .collect();
        let gt: Vec<R> = rows.iter().filter_map(|r| r.ground_truth).collect();
        let aepf_value = if estimates.is_empty() {
            None
        } else {
            Some(aepf(&estimates, &gt, signed)?)
        };
        Ok(CountReport { views, rows, aepf: aepf_value })
    }

    /// Serialises as CSV: `frame,view<id>_est...,fused_est,gt,abs_err`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame");
        for v in &self.views {
            write!(out, ",view{v}_est").expect("string write");
        }
        out.push_str(",fused_est,gt,abs_err\n");
        for row in &self.rows {
            write!(out, "{}", row.frame).expect("string write");
            for e in &row.view_estimates {
                write!(out, ",{}", fmt_real(*e)).expect("string write");
            }
            write!(out, ",{}", fmt_real(row.fused)).expect("string write");
            match (row.ground_truth, row.abs_error) {
                (Some(gt), Some(err)) => {
                    writeln!(out, ",{},{}", fmt_real(gt), fmt_real(err)).expect("string write")
                }
                _ => writeln!(out, ",,").expect("string write"),
            }
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

fn fmt_real<R: Real>(v: R) -> String {
    format!("{:.4}", v.to_f64().unwrap_or(f64::NAN))
}

/// Parses `frame,count` ground-truth CSV; a header line is accepted.
pub fn parse_ground_truth(text: &str, context: &str) -> Result<Vec<(usize, usize)>> {
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("frame")) {
            continue;
        }
        let (frame, count) = line.split_once(',').ok_or_else(|| {
            Error::parse(context, format!("line {}: expected frame,count", lineno + 1))
        })?;
        let frame: usize = frame.trim().parse().map_err(|_| {
            Error::parse(context, format!("line {}: bad frame index", lineno + 1))
        })?;
        let count: usize = count.trim().parse().map_err(|_| {
            Error::parse(context, format!("line {}: bad count", lineno + 1))
        })?;
        rows.push((frame, count));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("ground truth"));
    }
    Ok(rows)
}

pub fn load_ground_truth(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ground_truth(&text, &path.display().to_string())
}

/// Writes `frame,count` ground-truth CSV.
pub fn save_ground_truth(path: &Path, rows: &[(usize, usize)]) -> Result<()> {
    let mut out = String::from("frame,count\n");
    for (frame, count) in rows {
        writeln!(out, "{frame},{count}").expect("string write");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::plane::PointSource;
    use crate::regions::RegionMap;
    use approx::assert_relative_eq;

    fn ground_point(x: f64, y: f64) -> GroundPoint<f64> {
        GroundPoint { x, y, weight: 1.0, source: PointSource::Corner, view: 0 }
    }

    fn obs(frame: usize, view: ViewId, tallies: Vec<f64>) -> FrameObservation<f64> {
        FrameObservation { frame, view, region_tallies: tallies, overflow: 0.0, overflow_points: 0 }
    }

    #[test]
    fn accumulation_applies_region_weights() {
        let regions = RegionMap::new(Vec2::new(0.0, 0.0), 1000.0, 3).unwrap();
        let weights = RegionWeights::new(vec![1.0, 2.0, 4.0]).unwrap();
        let points = vec![
            ground_point(500.0, 0.0),  // region 0
            ground_point(1500.0, 0.0), // region 1
            ground_point(1600.0, 0.0), // region 1
            ground_point(9000.0, 0.0), // outside: overflow at weight 4
        ];
        let o = accumulate_observation(7, 1, &points, &regions, &weights).unwrap();
        assert_eq!(o.region_tallies, vec![1.0, 4.0, 0.0]);
        assert_eq!(o.overflow, 4.0);
        assert_eq!(o.overflow_points, 1);
        assert_relative_eq!(o.total(), 9.0);
    }

    #[test]
    fn accumulation_rejects_weight_mismatch() {
        let regions = RegionMap::new(Vec2::new(0.0, 0.0), 1000.0, 3).unwrap();
        let weights = RegionWeights::new(vec![1.0, 2.0]).unwrap();
        assert!(accumulate_observation(0, 0, &[], &regions, &weights).is_err());
    }

    #[test]
    fn acpp_is_mean_ratio() {
        let observations = vec![obs(0, 0, vec![12.0, 8.0]), obs(1, 0, vec![30.0, 0.0])];
        let gt = vec![(0, 4), (1, 10)];
        let (model, skipped) = calibrate_acpp(&observations, &gt).unwrap();
        // (20/4 + 30/10) / 2 = 4.
        assert_relative_eq!(model.corners_per_person, 4.0);
        assert_eq!(model.frames_used, 2);
        assert!(skipped.is_empty());
    }

    #[test]
    fn acpp_skips_zero_ground_truth() {
        let observations = vec![obs(0, 0, vec![20.0]), obs(1, 0, vec![30.0])];
        let gt = vec![(0, 0), (1, 10)];
        let (model, skipped) = calibrate_acpp(&observations, &gt).unwrap();
        assert_relative_eq!(model.corners_per_person, 3.0);
        assert_eq!(skipped, vec![0]);
    }

    #[test]
    fn acpp_errors_on_missing_gt_or_no_corners() {
        let observations = vec![obs(0, 0, vec![20.0])];
        assert!(calibrate_acpp(&observations, &[(5, 3)]).is_err());
        let silent = vec![obs(0, 0, vec![0.0])];
        assert!(calibrate_acpp(&silent, &[(0, 3)]).is_err());
    }

    #[test]
    fn fusion_rules_order() {
        let model = AcppModel::new(2.0).unwrap();
        let a = obs(0, 0, vec![4.0, 0.0]);
        let b = obs(0, 1, vec![2.0, 6.0]);
        let views = [&a, &b];
        let max = fuse_frame(&views, FusionRule::Maximum, &model).unwrap();
        let min = fuse_frame(&views, FusionRule::Minimum, &model).unwrap();
        let avg = fuse_frame(&views, FusionRule::Average, &model).unwrap();
        // Per region max: 4, 6 => 10 / 2 = 5; min: 2, 0 => 1; avg: 3, 3 => 3.
        assert_relative_eq!(max, 5.0);
        assert_relative_eq!(min, 1.0);
        assert_relative_eq!(avg, 3.0);
        assert!(min <= avg && avg <= max);
    }

    #[test]
    fn single_view_fusion_is_exact() {
        let model = AcppModel::new(3.7).unwrap();
        let mut o = obs(0, 0, vec![4.5, 0.25, 13.0]);
        o.overflow = 1.25;
        let single = estimate_single_view(&o, &model);
        for rule in [FusionRule::Maximum, FusionRule::Minimum, FusionRule::Average] {
            assert_eq!(fuse_frame(&[&o], rule, &model).unwrap(), single);
        }
    }

    #[test]
    fn fusion_validates_inputs() {
        let model = AcppModel::new(2.0).unwrap();
        assert!(fuse_frame::<f64>(&[], FusionRule::Average, &model).is_err());
        let a = obs(0, 0, vec![1.0, 2.0]);
        let b = obs(0, 1, vec![1.0]);
        assert!(fuse_frame(&[&a, &b], FusionRule::Average, &model).is_err());
        let c = obs(1, 1, vec![1.0, 2.0]);
        assert!(fuse_frame(&[&a, &c], FusionRule::Average, &model).is_err());
    }

    fn head(x: f64, y: f64, view: ViewId) -> HeadPoint<f64> {
        HeadPoint { position: Vec2::new(x, y), view, frame: 0 }
    }

    #[test]
    fn nearby_heads_fuse_to_mean() {
        let plane = GroundPlaneSpec::<f64>::default();
        // 40 mm apart: same plane pixel at 50 mm/px.
        let points = vec![head(1000.0, 0.0, 0), head(1040.0, 0.0, 1)];
        let fused = correspond_heads(&points, &plane, 9, &[]).unwrap();
        assert_eq!(fused.len(), 1);
        assert_relative_eq!(fused[0].position.x, 1020.0);
    }

    #[test]
    fn same_view_points_never_fuse() {
        let plane = GroundPlaneSpec::<f64>::default();
        let points = vec![head(1000.0, 0.0, 0), head(1040.0, 0.0, 0)];
        let fused = correspond_heads(&points, &plane, 9, &[]).unwrap();
        assert!(fused.is_empty());
    }

    #[test]
    fn mask_growth_extends_reach() {
        let plane = GroundPlaneSpec::<f64>::default();
        // 3 plane pixels apart: outside the 3x3 mask, inside the 9x9 one.
        let points = vec![head(0.0, 0.0, 0), head(150.0, 0.0, 1)];
        assert!(correspond_heads(&points, &plane, 3, &[]).unwrap().is_empty());
        assert_eq!(correspond_heads(&points, &plane, 9, &[]).unwrap().len(), 1);
    }

    #[test]
    fn single_view_zone_keeps_unmatched() {
        let plane = GroundPlaneSpec::<f64>::default();
        let zone = Polygon::new(vec![
            Vec2::new(4000.0, -1000.0),
            Vec2::new(6000.0, -1000.0),
            Vec2::new(6000.0, 1000.0),
            Vec2::new(4000.0, 1000.0),
        ])
        .unwrap();
        let points = vec![head(5000.0, 0.0, 0), head(-5000.0, 0.0, 1)];
        let fused = correspond_heads(&points, &plane, 9, &[zone]).unwrap();
        assert_eq!(fused.len(), 1);
        assert_relative_eq!(fused[0].position.x, 5000.0);
        assert_eq!(count_heads(&fused), 1);
    }

    #[test]
    fn correspondence_validates_mask() {
        let plane = GroundPlaneSpec::<f64>::default();
        assert!(correspond_heads::<f64>(&[], &plane, 4, &[]).is_err());
        assert!(correspond_heads::<f64>(&[], &plane, 1, &[]).is_err());
    }

    #[test]
    fn polygon_containment() {
        let p = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(10.0, 0.0),
            Vec2::new(10.0, 10.0),
            Vec2::new(0.0, 10.0),
        ])
        .unwrap();
        assert!(p.contains(Vec2::new(5.0, 5.0)));
        assert!(!p.contains(Vec2::new(15.0, 5.0)));
        assert!(!p.contains(Vec2::new(-1.0, -1.0)));
        assert!(Polygon::new(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0)]).is_err());
    }

    #[test]
    fn error_metric_examples() {
        assert_relative_eq!(aepf(&[10.0, 12.0], &[10.0, 10.0], false).unwrap(), 1.0);
        assert_relative_eq!(aepf(&[10.0, 12.0], &[10.0, 12.0], false).unwrap(), 0.0);
        // Signed errors cancel.
        assert_relative_eq!(aepf(&[12.0, 8.0], &[10.0, 10.0], true).unwrap(), 0.0);
        assert_relative_eq!(aepf(&[12.0, 8.0], &[10.0, 10.0], false).unwrap(), 2.0);
        assert!(aepf::<f64>(&[], &[], false).is_err());
        assert!(aepf(&[1.0], &[1.0, 2.0], false).is_err());
    }

    #[test]
    fn report_csv_shape() {
        let rows = vec![
            ReportRow {
                frame: 1,
                view_estimates: vec![3.25, 2.75],
                fused: 3.0,
                ground_truth: Some(3.0),
                abs_error: Some(0.0),
            },
            ReportRow {
                frame: 2,
                view_estimates: vec![1.0, 2.0],
                fused: 1.5,
                ground_truth: None,
                abs_error: None,
            },
        ];
        let report = CountReport::new(vec![1, 2], rows, false).unwrap();
        assert_relative_eq!(report.aepf.unwrap(), 0.0);
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "frame,view1_est,view2_est,fused_est,gt,abs_err");
        assert_eq!(lines.next().unwrap(), "1,3.2500,2.7500,3.0000,3.0000,0.0000");
        assert_eq!(lines.next().unwrap(), "2,1.0000,2.0000,1.5000,,");
    }

    #[test]
    fn ground_truth_csv_round_trip() {
        let text = "frame,count\n0,5\n1,6\n12,0\n";
        let rows = parse_ground_truth(text, "t").unwrap();
        assert_eq!(rows, vec![(0, 5), (1, 6), (12, 0)]);
        assert!(parse_ground_truth("frame,count\n", "t").is_err());
        assert!(parse_ground_truth("0;5\n", "t").is_err());
    }
}
