//! Run configuration: flat `key = value` text with `[view.N]` sections.
//!
//! Global keys come first; each `[view.N]` section names the inputs of one
//! camera view. Blank lines and lines starting with `#` are skipped.
//! Unknown keys are errors so typos cannot silently fall back to defaults.
//! Relative paths resolve against the config file's directory.
//!
//! Input paths (frame directories, calibration, background, ground truth,
//! track files, training corpora) must exist when the file loads. Artifact
//! paths (`weights`, `cascade`, `classifier`, `acpp_file`) are produced by
//! one command and read by another, so only the consuming command checks
//! them.

use crate::corners::{CornerConfig, MaskShape};
use crate::counting::{FusionRule, Polygon};
use crate::error::{Error, Result};
use crate::geom::{GroundPlaneSpec, Vec2};
use crate::heads::{BoostConfig, KernelConfig, ScanConfig};
use crate::pipeline::SegmentationParams;
use crate::scalar::real;
use crate::ViewId;
use std::path::{Path, PathBuf};

/// Per-view file locations. Everything is optional at parse time; each
/// command demands the entries it needs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ViewConfig {
    pub view: ViewId,
    /// Directory of numbered PGM or PNG frames.
    pub frames: Option<PathBuf>,
    pub calibration: Option<PathBuf>,
    /// Background PGM with its tolerance sidecar; built from the first
    /// frames when absent.
    pub background: Option<PathBuf>,
    pub ground_truth: Option<PathBuf>,
    /// Calibrated region weights (written by calibrate-weights).
    pub weights: Option<PathBuf>,
    /// Exemplar track for weight calibration.
    pub track: Option<PathBuf>,
    /// Boosted cascade file (written by train-heads).
    pub cascade: Option<PathBuf>,
    /// Kernel classifier file (written by train-heads --kernel).
    pub classifier: Option<PathBuf>,
    /// Head window training corpora.
    pub positives: Option<PathBuf>,
    pub negatives: Option<PathBuf>,
}

impl ViewConfig {
    /// The path behind `key`, or a config error naming what is missing.
    pub fn require(&self, key: &str) -> Result<&Path> {
        let value = match key {
            "frames" => &self.frames,
            "calibration" => &self.calibration,
            "background" => &self.background,
            "ground_truth" => &self.ground_truth,
            "weights" => &self.weights,
            "track" => &self.track,
            "cascade" => &self.cascade,
            "classifier" => &self.classifier,
            "positives" => &self.positives,
            "negatives" => &self.negatives,
            other => {
                return Err(Error::Config(format!("unknown view key {other:?} requested")))
            }
        };
        value.as_deref().ok_or_else(|| {
            Error::Config(format!("view {} does not set `{key}`", self.view))
        })
    }
}

/// The whole run configuration with every knob at its default.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub views: Vec<ViewConfig>,

    pub plane_size: u32,
    pub plane_mm_per_pixel: f64,

    pub region_count: usize,
    pub region_width_mm: f64,

    pub segmentation: SegmentationParams,
    /// Background model tolerance used when building from frames.
    pub background_tolerance: u32,
    /// Leading frames averaged when no background image is given.
    pub background_frames: usize,

    pub corner_score_threshold: f64,
    pub corner_gradient_threshold: f64,
    pub corner_mask_shape: MaskShape,
    pub corner_mask_size: u32,

    pub avg_person_height_mm: f64,
    /// Height of the head above ground for the head pull-back; heads sit
    /// below the crown, so this runs a little under the body height.
    /// Falls back to `avg_person_height_mm` when unset.
    pub head_height_mm: Option<f64>,
    pub signed_error: bool,
    /// Apply the head pull-back ratio upside down (comparison runs only).
    pub invert_head_ratio: bool,
    /// Skip weight calibration and tally with weight 1 everywhere.
    pub uniform_weights: bool,
    /// Skip the half-height corner correction.
    pub disable_projection_correction: bool,

    pub fusion: FusionRule,
    /// Scene-level corners-per-person override; defaults to the mean of the
    /// per-view ratios.
    pub scene_acpp: Option<f64>,
    pub acpp_file: Option<PathBuf>,
    /// Scene-level ground truth (frame,count) the fused estimates are
    /// scored against.
    pub scene_ground_truth: Option<PathBuf>,

    pub head_min_size: u32,
    pub head_max_size: u32,
    pub head_size_step: u32,
    pub head_position_step: u32,
    pub correspondence_mask_max: u32,
    /// Ground polygons where single-view detections survive.
    pub single_view_zones: Vec<Vec<(f64, f64)>>,

    pub stage_false_alarm: Vec<f64>,
    pub min_detection_rate: f64,
    pub max_stages: usize,
    pub max_stage_learners: usize,
    pub feature_stride: u32,
    pub svm_kernel_width: f64,
    pub svm_penalty: f64,

    pub output_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            views: Vec::new(),
            plane_size: 600,
            plane_mm_per_pixel: 50.0,
            region_count: 37,
            region_width_mm: 800.0,
            segmentation: SegmentationParams::default(),
            background_tolerance: 25,
            background_frames: 10,
            corner_score_threshold: 0.1,
            corner_gradient_threshold: 20.0,
            corner_mask_shape: MaskShape::Square,
            corner_mask_size: 5,
            avg_person_height_mm: 1700.0,
            head_height_mm: None,
            signed_error: false,
            invert_head_ratio: false,
            uniform_weights: false,
            disable_projection_correction: false,
            fusion: FusionRule::Average,
            scene_acpp: None,
            acpp_file: None,
            scene_ground_truth: None,
            head_min_size: 9,
            head_max_size: 25,
            head_size_step: 2,
            head_position_step: 1,
            correspondence_mask_max: 9,
            single_view_zones: Vec::new(),
            stage_false_alarm: vec![0.4, 0.45],
            min_detection_rate: 0.995,
            max_stages: 10,
            max_stage_learners: 40,
            feature_stride: 1,
            svm_kernel_width: 4.0,
            svm_penalty: 10.0,
            output_dir: None,
        }
    }
}

fn bad(context: &str, line_no: usize, message: impl std::fmt::Display) -> Error {
    Error::Config(format!("{context}:{line_no}: {message}"))
}

fn parse_num<T: std::str::FromStr>(
    context: &str,
    line_no: usize,
    key: &str,
    value: &str,
) -> Result<T> {
    value.parse().map_err(|_| bad(context, line_no, format!("bad value {value:?} for {key}")))
}

fn parse_bool(context: &str, line_no: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(bad(context, line_no, format!("{key} expects true or false, got {other:?}"))),
    }
}

fn parse_list(context: &str, line_no: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|part| parse_num(context, line_no, key, part.trim()))
        .collect()
}

/// `x,y x,y x,y ...`
fn parse_polygon(context: &str, line_no: usize, value: &str) -> Result<Vec<(f64, f64)>> {
    let mut vertices = Vec::new();
    for token in value.split_whitespace() {
        let (x, y) = token.split_once(',').ok_or_else(|| {
            bad(context, line_no, format!("polygon vertex {token:?} is not x,y"))
        })?;
        vertices.push((
            parse_num(context, line_no, "single_view_zone", x)?,
            parse_num(context, line_no, "single_view_zone", y)?,
        ));
    }
    if vertices.len() < 3 {
        return Err(bad(context, line_no, "a zone polygon needs at least 3 vertices"));
    }
    Ok(vertices)
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base, &path.display().to_string())
    }

    /// Parses and validates. `base` anchors relative paths; `context`
    /// prefixes error messages (normally the file path).
    pub fn parse(text: &str, base: &Path, context: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        let mut current_view: Option<usize> = None;
        let resolve = |value: &str| -> PathBuf {
            let p = Path::new(value);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };

        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(section) = line.strip_prefix('[') {
                let section = section
                    .strip_suffix(']')
                    .ok_or_else(|| bad(context, line_no, "unterminated section header"))?;
                let id = section.strip_prefix("view.").ok_or_else(|| {
                    bad(context, line_no, format!("unknown section [{section}]"))
                })?;
                let view: ViewId = id.parse().map_err(|_| {
                    bad(context, line_no, format!("bad view id {id:?}"))
                })?;
                if cfg.views.iter().any(|v| v.view == view) {
                    return Err(bad(context, line_no, format!("duplicate section [view.{view}]")));
                }
                cfg.views.push(ViewConfig { view, ..ViewConfig::default() });
                current_view = Some(cfg.views.len() - 1);
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                bad(context, line_no, format!("expected key = value, got {line:?}"))
            })?;
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(bad(context, line_no, format!("{key} has no value")));
            }

            if let Some(vi) = current_view {
                let view = &mut cfg.views[vi];
                match key {
                    "frames" => view.frames = Some(resolve(value)),
                    "calibration" => view.calibration = Some(resolve(value)),
                    "background" => view.background = Some(resolve(value)),
                    "ground_truth" => view.ground_truth = Some(resolve(value)),
                    "weights" => view.weights = Some(resolve(value)),
                    "track" => view.track = Some(resolve(value)),
                    "cascade" => view.cascade = Some(resolve(value)),
                    "classifier" => view.classifier = Some(resolve(value)),
                    "positives" => view.positives = Some(resolve(value)),
                    "negatives" => view.negatives = Some(resolve(value)),
                    other => {
                        return Err(bad(context, line_no, format!("unknown view key {other:?}")))
                    }
                }
                continue;
            }

            match key {
                "plane_size" => cfg.plane_size = parse_num(context, line_no, key, value)?,
                "plane_mm_per_pixel" => {
                    cfg.plane_mm_per_pixel = parse_num(context, line_no, key, value)?
                }
                "region_count" => cfg.region_count = parse_num(context, line_no, key, value)?,
                "region_width_mm" => {
                    cfg.region_width_mm = parse_num(context, line_no, key, value)?
                }
                "diff_threshold" => {
                    cfg.segmentation.diff_threshold = parse_num(context, line_no, key, value)?
                }
                "hysteresis_low" => {
                    cfg.segmentation.hysteresis_low = parse_num(context, line_no, key, value)?
                }
                "hysteresis_high" => {
                    cfg.segmentation.hysteresis_high = parse_num(context, line_no, key, value)?
                }
                "min_blob_area" => {
                    cfg.segmentation.min_blob_area = parse_num(context, line_no, key, value)?
                }
                "background_tolerance" => {
                    cfg.background_tolerance = parse_num(context, line_no, key, value)?
                }
                "background_frames" => {
                    cfg.background_frames = parse_num(context, line_no, key, value)?
                }
                "corner_score_threshold" => {
                    cfg.corner_score_threshold = parse_num(context, line_no, key, value)?
                }
                "corner_gradient_threshold" => {
                    cfg.corner_gradient_threshold = parse_num(context, line_no, key, value)?
                }
                "corner_mask_shape" => {
                    cfg.corner_mask_shape =
                        value.parse().map_err(|e| bad(context, line_no, e))?
                }
                "corner_mask_size" => {
                    cfg.corner_mask_size = parse_num(context, line_no, key, value)?
                }
                "avg_person_height_mm" => {
                    cfg.avg_person_height_mm = parse_num(context, line_no, key, value)?
                }
                "head_height_mm" => {
                    cfg.head_height_mm = Some(parse_num(context, line_no, key, value)?)
                }
                "signed_error" => cfg.signed_error = parse_bool(context, line_no, key, value)?,
                "invert_head_ratio" => {
                    cfg.invert_head_ratio = parse_bool(context, line_no, key, value)?
                }
                "uniform_weights" => {
                    cfg.uniform_weights = parse_bool(context, line_no, key, value)?
                }
                "disable_projection_correction" => {
                    cfg.disable_projection_correction =
                        parse_bool(context, line_no, key, value)?
                }
                "fusion" => cfg.fusion = value.parse().map_err(|e| bad(context, line_no, e))?,
                "scene_acpp" => {
                    cfg.scene_acpp = Some(parse_num(context, line_no, key, value)?)
                }
                "acpp_file" => cfg.acpp_file = Some(resolve(value)),
                "scene_ground_truth" => cfg.scene_ground_truth = Some(resolve(value)),
                "head_min_size" => cfg.head_min_size = parse_num(context, line_no, key, value)?,
                "head_max_size" => cfg.head_max_size = parse_num(context, line_no, key, value)?,
                "head_size_step" => {
                    cfg.head_size_step = parse_num(context, line_no, key, value)?
                }
                "head_position_step" => {
                    cfg.head_position_step = parse_num(context, line_no, key, value)?
                }
                "correspondence_mask_max" => {
                    cfg.correspondence_mask_max = parse_num(context, line_no, key, value)?
                }
                "single_view_zone" => {
                    cfg.single_view_zones.push(parse_polygon(context, line_no, value)?)
                }
                "stage_false_alarm" => {
                    cfg.stage_false_alarm = parse_list(context, line_no, key, value)?
                }
                "min_detection_rate" => {
                    cfg.min_detection_rate = parse_num(context, line_no, key, value)?
                }
                "max_stages" => cfg.max_stages = parse_num(context, line_no, key, value)?,
                "max_stage_learners" => {
                    cfg.max_stage_learners = parse_num(context, line_no, key, value)?
                }
                "feature_stride" => {
                    cfg.feature_stride = parse_num(context, line_no, key, value)?
                }
                "svm_kernel_width" => {
                    cfg.svm_kernel_width = parse_num(context, line_no, key, value)?
                }
                "svm_penalty" => cfg.svm_penalty = parse_num(context, line_no, key, value)?,
                "output_dir" => cfg.output_dir = Some(resolve(value)),
                other => {
                    return Err(bad(context, line_no, format!("unknown key {other:?}")))
                }
            }
        }

        cfg.views.sort_by_key(|v| v.view);
        cfg.validate(context)?;
        Ok(cfg)
    }

    fn validate(&self, context: &str) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(format!("{context}: {msg}")));

        if self.plane_size == 0 || !(self.plane_mm_per_pixel > 0.0) {
            return fail("plane size and resolution must be positive".into());
        }
        if self.region_count == 0 || !(self.region_width_mm > 0.0) {
            return fail("region count and width must be positive".into());
        }
        self.segmentation.validate().map_err(|e| Error::Config(format!("{context}: {e}")))?;
        if !matches!(self.corner_mask_size, 3 | 5 | 7) {
            return fail(format!(
                "corner_mask_size {} not one of 3, 5, 7",
                self.corner_mask_size
            ));
        }
        if !(0.0..=1.0).contains(&self.corner_score_threshold) {
            return fail(format!(
                "corner_score_threshold {} outside [0, 1]",
                self.corner_score_threshold
            ));
        }
        if self.corner_gradient_threshold < 0.0 {
            return fail("corner_gradient_threshold must be non-negative".into());
        }
        if !(1000.0..=2500.0).contains(&self.avg_person_height_mm) {
            return fail(format!(
                "avg_person_height_mm {} outside [1000, 2500]",
                self.avg_person_height_mm
            ));
        }
        if let Some(h) = self.head_height_mm {
            if !(1000.0..=2500.0).contains(&h) {
                return fail(format!("head_height_mm {h} outside [1000, 2500]"));
            }
        }
        if let Some(acpp) = self.scene_acpp {
            if !(acpp > 0.0) {
                return fail(format!("scene_acpp {acpp} must be positive"));
            }
        }
        if self.head_min_size < 3 || self.head_min_size > self.head_max_size {
            return fail(format!(
                "head sizes {}..{} invalid (need 3 <= min <= max)",
                self.head_min_size, self.head_max_size
            ));
        }
        if self.head_size_step == 0 || self.head_position_step == 0 {
            return fail("head scan steps must be positive".into());
        }
        if self.correspondence_mask_max < 3 || self.correspondence_mask_max % 2 == 0 {
            return fail(format!(
                "correspondence_mask_max {} must be odd and at least 3",
                self.correspondence_mask_max
            ));
        }
        if self.stage_false_alarm.is_empty()
            || self.stage_false_alarm.iter().any(|f| !(*f > 0.0 && *f <= 1.0))
        {
            return fail("stage_false_alarm entries must lie in (0, 1]".into());
        }
        if !(self.min_detection_rate > 0.0 && self.min_detection_rate <= 1.0) {
            return fail(format!(
                "min_detection_rate {} outside (0, 1]",
                self.min_detection_rate
            ));
        }
        if self.max_stages == 0 || self.max_stage_learners == 0 {
            return fail("cascade limits must be positive".into());
        }
        if self.feature_stride == 0 {
            return fail("feature_stride must be positive".into());
        }
        if !(self.svm_kernel_width > 0.0) || !(self.svm_penalty > 0.0) {
            return fail("kernel classifier parameters must be positive".into());
        }

        if let Some(path) = &self.scene_ground_truth {
            if !path.is_file() {
                return fail(format!(
                    "scene_ground_truth file {} does not exist",
                    path.display()
                ));
            }
        }
        for view in &self.views {
            for (key, path, want_dir) in [
                ("frames", &view.frames, true),
                ("calibration", &view.calibration, false),
                ("background", &view.background, false),
                ("ground_truth", &view.ground_truth, false),
                ("track", &view.track, false),
                ("positives", &view.positives, true),
                ("negatives", &view.negatives, true),
            ] {
                if let Some(path) = path {
                    if want_dir && !path.is_dir() {
                        return fail(format!(
                            "view {} {key} directory {} does not exist",
                            view.view,
                            path.display()
                        ));
                    }
                    if !want_dir && !path.is_file() {
                        return fail(format!(
                            "view {} {key} file {} does not exist",
                            view.view,
                            path.display()
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn view(&self, view: ViewId) -> Result<&ViewConfig> {
        self.views
            .iter()
            .find(|v| v.view == view)
            .ok_or_else(|| Error::Config(format!("no [view.{view}] section configured")))
    }

    pub fn corner_config(&self) -> Result<CornerConfig<f64>> {
        CornerConfig::new(
            self.corner_score_threshold,
            self.corner_gradient_threshold,
            self.corner_mask_shape,
            self.corner_mask_size,
        )
    }

    pub fn plane_spec(&self) -> Result<GroundPlaneSpec<f64>> {
        GroundPlaneSpec::new(self.plane_size, self.plane_mm_per_pixel)
    }

    pub fn scan_config(&self) -> ScanConfig {
        ScanConfig {
            min_size: self.head_min_size,
            max_size: self.head_max_size,
            size_step: self.head_size_step,
            position_step: self.head_position_step,
        }
    }

    pub fn boost_config(&self) -> BoostConfig<f64> {
        BoostConfig {
            stage_false_alarm: self.stage_false_alarm.clone(),
            min_detection_rate: self.min_detection_rate,
            max_stages: self.max_stages,
            max_stage_learners: self.max_stage_learners,
            feature_stride: self.feature_stride,
        }
    }

    pub fn kernel_config(&self) -> KernelConfig<f64> {
        KernelConfig {
            kernel_width: self.svm_kernel_width,
            penalty: self.svm_penalty,
            ..KernelConfig::default()
        }
    }

    pub fn zones(&self) -> Result<Vec<Polygon<f64>>> {
        self.single_view_zones
            .iter()
            .map(|vertices| {
                Polygon::new(
                    vertices.iter().map(|&(x, y)| Vec2::new(real(x), real(y))).collect(),
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_view_inputs(dir: &Path) {
        fs::create_dir_all(dir.join("frames")).unwrap();
        fs::write(dir.join("frames/0000.pgm"), b"P5\n1 1\n255\n\0").unwrap();
        fs::write(dir.join("calibration.txt"), "stub").unwrap();
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let dir = tempfile::tempdir().unwrap();
        write_view_inputs(dir.path());
        let text = "[view.0]\nframes = frames\ncalibration = calibration.txt\n";
        let cfg = PipelineConfig::parse(text, dir.path(), "test").unwrap();
        assert_eq!(cfg.views.len(), 1);
        assert_eq!(cfg.plane_size, 600);
        assert_eq!(cfg.region_count, 37);
        assert_eq!(cfg.corner_mask_size, 5);
        assert_eq!(cfg.stage_false_alarm, vec![0.4, 0.45]);
        assert_eq!(cfg.fusion, FusionRule::Average);
        assert_eq!(
            cfg.views[0].frames.as_deref().unwrap(),
            dir.path().join("frames")
        );
    }

    #[test]
    fn full_config_parses_every_key() {
        let dir = tempfile::tempdir().unwrap();
        write_view_inputs(dir.path());
        fs::write(dir.path().join("gt.csv"), "frame,count\n0,1\n").unwrap();
        fs::write(dir.path().join("track.csv"), "frame,x,y,h\n").unwrap();
        let text = "\
# experiment knobs
plane_size = 400
plane_mm_per_pixel = 25
region_count = 20
region_width_mm = 600
diff_threshold = 12
hysteresis_low = 50
hysteresis_high = 120
min_blob_area = 40
background_tolerance = 20
background_frames = 5
corner_score_threshold = 0.2
corner_gradient_threshold = 15
corner_mask_shape = circular
corner_mask_size = 7
avg_person_height_mm = 1800
head_height_mm = 1650
signed_error = true
invert_head_ratio = true
uniform_weights = true
disable_projection_correction = true
fusion = max
scene_acpp = 3.5
acpp_file = acpp.txt
scene_ground_truth = gt.csv
head_min_size = 11
head_max_size = 21
head_size_step = 2
head_position_step = 2
correspondence_mask_max = 7
single_view_zone = 0,0 100,0 100,100 0,100
single_view_zone = -50,-50 50,-50 0,50
stage_false_alarm = 0.5, 0.3
min_detection_rate = 0.99
max_stages = 5
max_stage_learners = 25
feature_stride = 3
svm_kernel_width = 2.5
svm_penalty = 5
output_dir = out

[view.1]
frames = frames
calibration = calibration.txt
ground_truth = gt.csv
track = track.csv
weights = weights.csv
cascade = cascade.txt
classifier = classifier.txt
";
        let cfg = PipelineConfig::parse(text, dir.path(), "test").unwrap();
        assert_eq!(cfg.plane_size, 400);
        assert_eq!(cfg.corner_mask_shape, MaskShape::Circular);
        assert_eq!(cfg.fusion, FusionRule::Maximum);
        assert_eq!(cfg.scene_acpp, Some(3.5));
        assert_eq!(cfg.scene_ground_truth.as_deref(), Some(dir.path().join("gt.csv").as_path()));
        assert_eq!(cfg.single_view_zones.len(), 2);
        assert_eq!(cfg.stage_false_alarm, vec![0.5, 0.3]);
        assert_eq!(cfg.head_height_mm, Some(1650.0));
        assert!(cfg.signed_error && cfg.invert_head_ratio);
        assert!(cfg.uniform_weights && cfg.disable_projection_correction);
        assert_eq!(cfg.views[0].view, 1);
        // Artifact paths need not exist yet.
        assert!(cfg.views[0].weights.is_some());
        let zones = cfg.zones().unwrap();
        assert_eq!(zones.len(), 2);
        assert!(zones[0].contains(Vec2::new(50.0, 50.0)));
        let scan = cfg.scan_config();
        assert_eq!((scan.min_size, scan.max_size), (11, 21));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = PipelineConfig::parse("plane_siez = 600\n", Path::new("."), "test")
            .unwrap_err();
        assert!(err.is_config());
        assert!(err.to_string().contains("plane_siez"), "{err}");

        let err = PipelineConfig::parse(
            "[view.0]\nframez = x\n",
            Path::new("."),
            "test",
        )
        .unwrap_err();
        assert!(err.to_string().contains("framez"), "{err}");
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        for text in [
            "corner_mask_size = 4\n",
            "avg_person_height_mm = 900\n",
            "avg_person_height_mm = 2600\n",
            "head_height_mm = 900\n",
            "hysteresis_low = 200\nhysteresis_high = 100\n",
            "correspondence_mask_max = 8\n",
            "stage_false_alarm = 0.4, 1.5\n",
            "min_detection_rate = 0\n",
            "head_min_size = 30\nhead_max_size = 20\n",
            "plane_size = 0\n",
            "feature_stride = 0\n",
        ] {
            let err = PipelineConfig::parse(text, Path::new("."), "test").unwrap_err();
            assert!(err.is_config(), "{text:?} should be a config error, got {err:?}");
        }
    }

    #[test]
    fn missing_input_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let text = "[view.0]\nframes = nowhere\ncalibration = nothing.txt\n";
        let err = PipelineConfig::parse(text, dir.path(), "test").unwrap_err();
        assert!(err.is_config());
        assert!(err.to_string().contains("nowhere"), "{err}");
    }

    #[test]
    fn malformed_lines_are_rejected() {
        for text in [
            "plane_size\n",
            "plane_size =\n",
            "[view.0\n",
            "[camera.0]\n",
            "[view.x]\n",
            "single_view_zone = 1,2 3,4\n",
            "single_view_zone = 1;2 3;4 5;6\n",
            "signed_error = yes\n",
        ] {
            let err = PipelineConfig::parse(text, Path::new("."), "test").unwrap_err();
            assert!(err.is_config(), "{text:?} should fail, got {err:?}");
        }
    }

    #[test]
    fn duplicate_views_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_view_inputs(dir.path());
        let text = "[view.0]\nframes = frames\n[view.0]\ncalibration = calibration.txt\n";
        let err = PipelineConfig::parse(text, dir.path(), "test").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn views_sort_by_id_and_lookup_works() {
        let dir = tempfile::tempdir().unwrap();
        write_view_inputs(dir.path());
        let text = "[view.2]\nframes = frames\n[view.1]\ncalibration = calibration.txt\n";
        let cfg = PipelineConfig::parse(text, dir.path(), "test").unwrap();
        assert_eq!(cfg.views[0].view, 1);
        assert_eq!(cfg.views[1].view, 2);
        assert!(cfg.view(2).is_ok());
        assert!(cfg.view(0).is_err());
        assert!(cfg.view(2).unwrap().require("frames").is_ok());
        let err = cfg.view(1).unwrap().require("frames").unwrap_err();
        assert!(err.to_string().contains("does not set"), "{err}");
    }

    #[test]
    fn absolute_paths_pass_through() {
        let dir = tempfile::tempdir().unwrap();
        write_view_inputs(dir.path());
        let frames = dir.path().join("frames");
        let text = format!("[view.0]\nframes = {}\n", frames.display());
        let cfg = PipelineConfig::parse(&text, Path::new("/nonexistent"), "test").unwrap();
        assert_eq!(cfg.views[0].frames.as_deref().unwrap(), frames);
    }
}
