//! Direct head detection.
//!
//! Candidate windows slide over the motion blobs of a frame at a range of
//! scales and are accepted or rejected by a window classifier: either the
//! boosted rectangle-feature cascade or the kernel machine over raw-pixel
//! descriptors. Accepted windows are merged into one box per head.

pub mod boost;
pub mod haar;
pub mod integral;
pub mod pixels;
pub mod svm;

pub use boost::{train_cascade, BoostConfig, Cascade, CascadeStage, NegativeSource, WeakLearner};
pub use haar::{enumerate_features, HaarFeature, HaarPrototype, ScaledHaar, BASE_WINDOW};
pub use integral::IntegralImage;
pub use pixels::{
    extract_descriptor, resample_window, PixelDescriptor, DESCRIPTOR_LEN, DESCRIPTOR_SIDE,
};
pub use svm::{train_kernel_classifier, KernelClassifier, KernelConfig};

use crate::error::{Error, Result};
use crate::frame::GrayFrame;
use crate::geom::Vec2;
use crate::motion::Blob;
use crate::scalar::{real, Real};
use crate::ViewId;

/// Per-frame data shared by all window classifiers.
pub struct FrameContext<'a> {
    pub frame: &'a GrayFrame,
    pub integral: IntegralImage,
}

impl<'a> FrameContext<'a> {
    pub fn new(frame: &'a GrayFrame) -> Self {
        FrameContext { frame, integral: IntegralImage::from_frame(frame) }
    }
}

/// A classifier instantiated for one window size.
pub trait ScaledWindowClassifier<R: Real> {
    fn size(&self) -> u32;
    /// Some(confidence) when the window with top-left (x, y) shows a head.
    /// The window is guaranteed to lie inside the frame.
    fn classify(&self, ctx: &FrameContext<'_>, x: usize, y: usize) -> Option<R>;
}

/// Anything that can judge square windows at several scales.
pub trait WindowClassifier<R: Real>: Sync {
    fn at_scale(&self, size: u32) -> Result<Box<dyn ScaledWindowClassifier<R> + '_>>;
}

struct CascadeAtScale<R> {
    scaled: boost::ScaledCascade<R>,
    size: u32,
}

impl<R: Real> ScaledWindowClassifier<R> for CascadeAtScale<R> {
    fn size(&self) -> u32 {
        self.size
    }

    fn classify(&self, ctx: &FrameContext<'_>, x: usize, y: usize) -> Option<R> {
        self.scaled.classify(&ctx.integral, x, y)
    }
}

impl<R: Real> WindowClassifier<R> for Cascade<R> {
    fn at_scale(&self, size: u32) -> Result<Box<dyn ScaledWindowClassifier<R> + '_>> {
        Ok(Box::new(CascadeAtScale { scaled: self.scale_to(size)?, size }))
    }
}

struct KernelAtScale<'a, R> {
    model: &'a KernelClassifier<R>,
    size: u32,
}

impl<R: Real> ScaledWindowClassifier<R> for KernelAtScale<'_, R> {
    fn size(&self) -> u32 {
        self.size
    }

    fn classify(&self, ctx: &FrameContext<'_>, x: usize, y: usize) -> Option<R> {
        let descriptor = extract_descriptor(ctx.frame, x, y, self.size as usize).ok()?;
        let decision = self.model.decision(&descriptor);
        (decision > R::zero()).then_some(decision)
    }
}

impl<R: Real> WindowClassifier<R> for KernelClassifier<R> {
    fn at_scale(&self, size: u32) -> Result<Box<dyn ScaledWindowClassifier<R> + '_>> {
        if size == 0 {
            return Err(Error::InvalidParameter("window size must be at least 1".into()));
        }
        Ok(Box::new(KernelAtScale { model: self, size }))
    }
}

/// An accepted window. `x`, `y` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionBox<R> {
    pub x: usize,
    pub y: usize,
    pub size: u32,
    pub confidence: R,
    pub view: ViewId,
}

impl<R: Real> DetectionBox<R> {
    /// Continuous centre of the box; the head position used downstream.
    pub fn center(&self) -> Vec2<R> {
        let half = real::<R>(self.size as f64 / 2.0);
        Vec2::new(real::<R>(self.x as f64) + half, real::<R>(self.y as f64) + half)
    }
}

/// Window sweep parameters: square windows from `min_size` to `max_size`
/// stepping `size_step`, positions stepping `position_step` pixels.
#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub min_size: u32,
    pub max_size: u32,
    pub size_step: u32,
    pub position_step: u32,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { min_size: 9, max_size: 25, size_step: 2, position_step: 1 }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_size < 3 {
            return Err(Error::InvalidParameter(format!(
                "minimum window size {} is below 3",
                self.min_size
            )));
        }
        if self.max_size < self.min_size {
            return Err(Error::InvalidParameter(format!(
                "window size range {}..{} is empty",
                self.min_size, self.max_size
            )));
        }
        if self.size_step == 0 || self.position_step == 0 {
            return Err(Error::InvalidParameter("scan steps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn sizes(&self) -> impl Iterator<Item = u32> + '_ {
        (self.min_size..=self.max_size).step_by(self.size_step as usize)
    }
}

/// Slide windows over the frame and keep those the classifier accepts.
/// Only windows whose centre falls in a motion blob are evaluated, so an
/// empty blob list yields no detections.
pub fn scan_windows<R: Real>(
    frame: &GrayFrame,
    blobs: &[Blob],
    classifier: &dyn WindowClassifier<R>,
    scan: &ScanConfig,
    view: ViewId,
) -> Result<Vec<DetectionBox<R>>> {
    scan.validate()?;
    let mut out = Vec::new();
    if blobs.is_empty() {
        return Ok(out);
    }
    let ctx = FrameContext::new(frame);
    for size in scan.sizes() {
        let s = size as usize;
        if s > frame.width() || s > frame.height() {
            continue;
        }
        let scaled = classifier.at_scale(size)?;
        let mut y = 0usize;
        while y + s <= frame.height() {
            let cy = y + s / 2;
            let mut x = 0usize;
            while x + s <= frame.width() {
                let cx = x + s / 2;
                if blobs.iter().any(|b| b.contains(cx, cy)) {
                    if let Some(confidence) = scaled.classify(&ctx, x, y) {
                        out.push(DetectionBox { x, y, size, confidence, view });
                    }
                }
                x += scan.position_step as usize;
            }
            y += scan.position_step as usize;
        }
    }
    Ok(out)
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Merge detections of the same head: boxes whose centres lie within half
/// the larger box's edge are linked, and each linked group collapses to a
/// single box at the confidence-weighted mean centre with the mean size.
pub fn merge_nearby<R: Real>(detections: &[DetectionBox<R>]) -> Vec<DetectionBox<R>> {
    let n = detections.len();
    let mut sets = DisjointSet::new(n);
    for i in 0..n {
        for j in i + 1..n {
            let limit = real::<R>(detections[i].size.max(detections[j].size) as f64 / 2.0);
            if detections[i].center().distance(detections[j].center()) <= limit {
                sets.union(i, j);
            }
        }
    }

    // Group members by root in first-seen order.
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let root = sets.find(i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, members)) => members.push(i),
            None => groups.push((root, vec![i])),
        }
    }

    let mut merged = Vec::with_capacity(groups.len());
    for (_, members) in groups {
        let mut weight_total = R::zero();
        for &i in &members {
            weight_total += detections[i].confidence;
        }
        let uniform = weight_total <= R::zero();
        let mut cx = R::zero();
        let mut cy = R::zero();
        let mut size_sum = R::zero();
        let mut confidence = detections[members[0]].confidence;
        for &i in &members {
            let w = if uniform {
                real::<R>(1.0 / members.len() as f64)
            } else {
                detections[i].confidence / weight_total
            };
            let c = detections[i].center();
            cx += w * c.x;
            cy += w * c.y;
            size_sum += w * real(detections[i].size as f64);
            confidence = confidence.max(detections[i].confidence);
        }
        let size = size_sum.round().to_u32().unwrap_or(1).max(1);
        let half = real::<R>(size as f64 / 2.0);
        let x = (cx - half).round().max(R::zero()).to_usize().unwrap_or(0);
        let y = (cy - half).round().max(R::zero()).to_usize().unwrap_or(0);
        merged.push(DetectionBox { x, y, size, confidence, view: detections[members[0]].view });
    }

    merged.sort_by(|a, b| (a.y, a.x, a.size).cmp(&(b.y, b.x, b.size)));
    merged
}

/// Scan and merge in one call.
pub fn detect_heads<R: Real>(
    frame: &GrayFrame,
    blobs: &[Blob],
    classifier: &dyn WindowClassifier<R>,
    scan: &ScanConfig,
    view: ViewId,
) -> Result<Vec<DetectionBox<R>>> {
    Ok(merge_nearby(&scan_windows(frame, blobs, classifier, scan, view)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    /// Accepts windows whose mean intensity exceeds a cutoff; counts calls.
    struct BrightnessOracle {
        cutoff: f64,
        calls: AtomicUsize,
    }

    struct BrightnessAtScale<'a> {
        oracle: &'a BrightnessOracle,
        size: u32,
    }

    impl ScaledWindowClassifier<f64> for BrightnessAtScale<'_> {
        fn size(&self) -> u32 {
            self.size
        }

        fn classify(&self, ctx: &FrameContext<'_>, x: usize, y: usize) -> Option<f64> {
            self.oracle.calls.fetch_add(1, Ordering::Relaxed);
            let s = self.size as usize;
            let mean = ctx.integral.rect_sum(x, y, s, s) as f64 / (s * s) as f64;
            (mean > self.oracle.cutoff).then_some(mean - self.oracle.cutoff)
        }
    }

    impl WindowClassifier<f64> for BrightnessOracle {
        fn at_scale(&self, size: u32) -> crate::error::Result<Box<dyn ScaledWindowClassifier<f64> + '_>> {
            Ok(Box::new(BrightnessAtScale { oracle: self, size }))
        }
    }

    fn frame_with_square(w: usize, h: usize, x0: usize, y0: usize, side: usize) -> GrayFrame {
        let mut frame = GrayFrame::filled(w, h, 10).unwrap();
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                frame.set(x, y, 240);
            }
        }
        frame
    }

    fn blob_over(x: usize, y: usize, w: usize, h: usize) -> Blob {
        Blob { x, y, width: w, height: h, area: w * h }
    }

    #[test]
    fn finds_planted_bright_square() {
        let frame = frame_with_square(60, 40, 20, 12, 11);
        let blobs = [blob_over(15, 8, 22, 20)];
        let oracle = BrightnessOracle { cutoff: 200.0, calls: AtomicUsize::new(0) };
        let dets = detect_heads(&frame, &blobs, &oracle, &ScanConfig::default(), 1).unwrap();
        assert_eq!(dets.len(), 1, "{dets:?}");
        let d = dets[0];
        let c = d.center();
        assert!((c.x - 25.5).abs() <= 2.0 && (c.y - 17.5).abs() <= 2.0, "{d:?}");
        assert!(d.size >= 9 && d.size <= 13);
        assert_eq!(d.view, 1);
    }

    #[test]
    fn no_blobs_means_no_work() {
        let frame = frame_with_square(40, 40, 10, 10, 11);
        let oracle = BrightnessOracle { cutoff: 200.0, calls: AtomicUsize::new(0) };
        let dets = scan_windows(&frame, &[], &oracle, &ScanConfig::default(), 0).unwrap();
        assert!(dets.is_empty());
        assert_eq!(oracle.calls.load(Ordering::Relaxed), 0);
    }

    #[test]
    fn windows_outside_blobs_are_never_evaluated() {
        let frame = frame_with_square(60, 40, 20, 12, 11);
        let blobs = [blob_over(40, 25, 10, 10)];
        let oracle = BrightnessOracle { cutoff: 200.0, calls: AtomicUsize::new(0) };
        let scan = ScanConfig { min_size: 9, max_size: 9, size_step: 2, position_step: 1 };
        let dets = scan_windows(&frame, &blobs, &oracle, &scan, 0).unwrap();
        assert!(dets.is_empty());
        // Every evaluated centre lies in the blob: 10 * 10 positions at most.
        assert!(oracle.calls.load(Ordering::Relaxed) <= 100);
    }

    #[test]
    fn merge_collapses_overlapping_boxes() {
        let boxes: Vec<DetectionBox<f64>> = vec![
            DetectionBox { x: 10, y: 10, size: 10, confidence: 1.0, view: 0 },
            DetectionBox { x: 12, y: 11, size: 10, confidence: 3.0, view: 0 },
            DetectionBox { x: 40, y: 30, size: 10, confidence: 2.0, view: 0 },
        ];
        let merged = merge_nearby(&boxes);
        assert_eq!(merged.len(), 2);
        // Weighted centre: (15 * 1 + 17 * 3) / 4 = 16.5.
        let first = merged.iter().find(|d| d.x < 30).unwrap();
        assert!((first.center().x - 16.5).abs() <= 0.5);
        assert_eq!(first.confidence, 3.0);
    }

    #[test]
    fn merge_is_single_link() {
        // a-b close, b-c close, a-c far: one cluster all the same.
        let boxes = vec![
            DetectionBox { x: 0, y: 0, size: 10, confidence: 1.0, view: 0 },
            DetectionBox { x: 4, y: 0, size: 10, confidence: 1.0, view: 0 },
            DetectionBox { x: 8, y: 0, size: 10, confidence: 1.0, view: 0 },
        ];
        assert_eq!(merge_nearby(&boxes).len(), 1);
    }

    #[test]
    fn distant_boxes_stay_apart() {
        let boxes = vec![
            DetectionBox { x: 0, y: 0, size: 10, confidence: 1.0, view: 0 },
            DetectionBox { x: 30, y: 0, size: 10, confidence: 1.0, view: 0 },
        ];
        assert_eq!(merge_nearby(&boxes).len(), 2);
    }

    #[test]
    fn scan_config_validation() {
        assert!(ScanConfig { min_size: 2, ..ScanConfig::default() }.validate().is_err());
        assert!(ScanConfig { max_size: 7, ..ScanConfig::default() }.validate().is_err());
        assert!(ScanConfig { size_step: 0, ..ScanConfig::default() }.validate().is_err());
        assert!(ScanConfig::default().validate().is_ok());
    }
}
