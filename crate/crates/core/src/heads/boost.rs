//! Boosted cascade of rectangle-feature stumps.
//!
//! Each stage is a weighted vote over decision stumps picked greedily by
//! adaptive boosting. After every round the stage threshold is lowered to
//! the score quantile that keeps the required fraction of positives, and the
//! stage stops growing once its false-alarm rate on the working negatives
//! drops under the stage target. Negatives that survive a finished stage
//! carry over to the next one, optionally topped up by a bootstrap callback
//! so later stages keep seeing hard examples.

use super::haar::{enumerate_features, HaarFeature, HaarPrototype, ScaledHaar, BASE_WINDOW};
use super::integral::IntegralImage;
use crate::error::{Error, Result};
use crate::frame::GrayFrame;
use crate::scalar::{real, Real};
use std::path::Path;

/// One decision stump: predicts head when `polarity * response` falls below
/// `polarity * threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakLearner<R> {
    pub feature: HaarFeature,
    pub threshold: R,
    pub polarity: i8,
    /// Vote weight, ln(1 / beta) from the boosting round that chose it.
    pub alpha: R,
}

impl<R: Real> WeakLearner<R> {
    #[inline]
    fn fires(&self, response: R) -> bool {
        if self.polarity >= 0 {
            response < self.threshold
        } else {
            response > self.threshold
        }
    }
}

/// A stage accepts a window when the alpha-weighted count of firing stumps
/// reaches `threshold`. The measured training rates are kept for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeStage<R> {
    pub learners: Vec<WeakLearner<R>>,
    pub threshold: R,
    pub false_alarm: R,
    pub detection_rate: R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cascade<R> {
    /// Edge length of the training window; features are expressed in it.
    pub window: u32,
    pub stages: Vec<CascadeStage<R>>,
}

/// A stage with its features resolved for one window size.
struct ScaledStage<R> {
    learners: Vec<(ScaledHaar, R, i8, R)>,
    threshold: R,
}

pub(super) struct ScaledCascade<R> {
    stages: Vec<ScaledStage<R>>,
}

impl<R: Real> ScaledCascade<R> {
    /// None when some stage rejects; otherwise the final stage's margin.
    pub(super) fn classify(&self, ii: &IntegralImage, x: usize, y: usize) -> Option<R> {
        let mut confidence = R::zero();
        for stage in &self.stages {
            let mut score = R::zero();
            for (feature, threshold, polarity, alpha) in &stage.learners {
                let response: R = feature.response(ii, x, y);
                let fires = if *polarity >= 0 { response < *threshold } else { response > *threshold };
                if fires {
                    score += *alpha;
                }
            }
            if score < stage.threshold {
                return None;
            }
            confidence = score - stage.threshold;
        }
        Some(confidence)
    }
}

impl<R: Real> Cascade<R> {
    pub(super) fn scale_to(&self, size: u32) -> Result<ScaledCascade<R>> {
        let mut stages = Vec::with_capacity(self.stages.len());
        for stage in &self.stages {
            let mut learners = Vec::with_capacity(stage.learners.len());
            for l in &stage.learners {
                learners.push((l.feature.scaled(size)?, l.threshold, l.polarity, l.alpha));
            }
            stages.push(ScaledStage { learners, threshold: stage.threshold });
        }
        Ok(ScaledCascade { stages })
    }

    /// Classify a training-window-sized patch. None means rejected.
    pub fn classify_sample(&self, frame: &GrayFrame) -> Result<Option<R>> {
        if frame.width() != self.window as usize || frame.height() != self.window as usize {
            return Err(Error::DimensionMismatch(format!(
                "cascade expects {0}x{0} samples, got {1}x{2}",
                self.window,
                frame.width(),
                frame.height()
            )));
        }
        let ii = IntegralImage::from_frame(frame);
        Ok(self.scale_to(self.window)?.classify(&ii, 0, 0))
    }

    pub fn learner_count(&self) -> usize {
        self.stages.iter().map(|s| s.learners.len()).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("window = {}\n", self.window));
        out.push_str(&format!("stages = {}\n", self.stages.len()));
        for stage in &self.stages {
            out.push_str("stage\n");
            out.push_str(&format!("threshold = {}\n", stage.threshold));
            out.push_str(&format!("false_alarm = {}\n", stage.false_alarm));
            out.push_str(&format!("detection_rate = {}\n", stage.detection_rate));
            out.push_str(&format!("learners = {}\n", stage.learners.len()));
            for l in &stage.learners {
                out.push_str(&format!(
                    "learner = {} {} {} {} {} {} {} {}\n",
                    l.feature.prototype.id(),
                    l.feature.x,
                    l.feature.y,
                    l.feature.unit_w,
                    l.feature.unit_h,
                    l.polarity,
                    l.threshold,
                    l.alpha
                ));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        fn bad(msg: String) -> Error {
            Error::parse("cascade", msg)
        }
        fn take<'a>(lines: &[&'a str], pos: &mut usize) -> Option<&'a str> {
            let l = lines.get(*pos).copied();
            *pos += 1;
            l
        }
        fn expect_kv(lines: &[&str], pos: &mut usize, key: &str) -> Result<String> {
            let line = take(lines, pos).ok_or_else(|| bad(format!("missing '{key}' line")))?;
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected '{key} = ...', got '{line}'")))?;
            if k.trim() != key {
                return Err(bad(format!("expected '{key}', got '{}'", k.trim())));
            }
            Ok(v.trim().to_string())
        }
        fn parse_real<R: Real>(s: &str) -> Result<R> {
            let v: f64 = s.parse().map_err(|_| bad(format!("bad number '{s}'")))?;
            R::from_f64(v).ok_or_else(|| bad(format!("unrepresentable number '{s}'")))
        }
        fn parse_int(s: &str) -> Result<i64> {
            s.parse().map_err(|_| bad(format!("bad integer '{s}'")))
        }

        let lines: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let mut pos = 0usize;

        let window: u32 = expect_kv(&lines, &mut pos, "window")?
            .parse()
            .map_err(|_| bad("bad window size".into()))?;
        if window < 3 {
            return Err(bad(format!("window size {window} is too small")));
        }
        let n_stages: usize = expect_kv(&lines, &mut pos, "stages")?
            .parse()
            .map_err(|_| bad("bad stage count".into()))?;

        let mut stages = Vec::with_capacity(n_stages);
        for _ in 0..n_stages {
            match take(&lines, &mut pos) {
                Some("stage") => {}
                other => return Err(bad(format!("expected 'stage', got {other:?}"))),
            }
            let threshold = parse_real(&expect_kv(&lines, &mut pos, "threshold")?)?;
            let false_alarm = parse_real(&expect_kv(&lines, &mut pos, "false_alarm")?)?;
            let detection_rate = parse_real(&expect_kv(&lines, &mut pos, "detection_rate")?)?;
            let n_learners: usize = expect_kv(&lines, &mut pos, "learners")?
                .parse()
                .map_err(|_| bad("bad learner count".into()))?;
            let mut learners = Vec::with_capacity(n_learners);
            for _ in 0..n_learners {
                let v = expect_kv(&lines, &mut pos, "learner")?;
                let parts: Vec<&str> = v.split_whitespace().collect();
                if parts.len() != 8 {
                    return Err(bad(format!("learner needs 8 fields, got {}", parts.len())));
                }
                let prototype = HaarPrototype::from_id(parse_int(parts[0])? as u32)?;
                let polarity = parse_int(parts[5])? as i8;
                if polarity != 1 && polarity != -1 {
                    return Err(bad(format!("polarity must be 1 or -1, got {polarity}")));
                }
                learners.push(WeakLearner {
                    feature: HaarFeature {
                        prototype,
                        x: parse_int(parts[1])?,
                        y: parse_int(parts[2])?,
                        unit_w: parse_int(parts[3])?,
                        unit_h: parse_int(parts[4])?,
                    },
                    polarity,
                    threshold: parse_real(parts[6])?,
                    alpha: parse_real(parts[7])?,
                });
            }
            stages.push(CascadeStage { learners, threshold, false_alarm, detection_rate });
        }
        if pos < lines.len() {
            return Err(bad("trailing content after last stage".into()));
        }

        let cascade = Cascade { window, stages };
        // Reject geometry that cannot fit the declared window.
        cascade.scale_to(window)?;
        Ok(cascade)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Training controls.
#[derive(Debug, Clone)]
pub struct BoostConfig<R> {
    /// Per-stage false-alarm targets; the last entry repeats for any
    /// stages beyond the list.
    pub stage_false_alarm: Vec<R>,
    /// Minimum fraction of positives each stage must keep.
    pub min_detection_rate: R,
    pub max_stages: usize,
    pub max_stage_learners: usize,
    /// Position stride of the feature enumeration; 1 is exhaustive.
    pub feature_stride: u32,
}

impl<R: Real> Default for BoostConfig<R> {
    fn default() -> Self {
        BoostConfig {
            stage_false_alarm: vec![real(0.4), real(0.45)],
            min_detection_rate: real(0.995),
            max_stages: 10,
            max_stage_learners: 40,
            feature_stride: 1,
        }
    }
}

impl<R: Real> BoostConfig<R> {
    pub fn validate(&self) -> Result<()> {
        if self.stage_false_alarm.is_empty() {
            return Err(Error::InvalidParameter("need at least one false-alarm target".into()));
        }
        for &f in &self.stage_false_alarm {
            if !(f > R::zero() && f < R::one()) {
                return Err(Error::InvalidParameter(format!("false-alarm target {f} not in (0, 1)")));
            }
        }
        if !(self.min_detection_rate > R::zero() && self.min_detection_rate <= R::one()) {
            return Err(Error::InvalidParameter(format!(
                "detection rate {} not in (0, 1]",
                self.min_detection_rate
            )));
        }
        if self.max_stages == 0 || self.max_stage_learners == 0 {
            return Err(Error::InvalidParameter("stage and learner limits must be at least 1".into()));
        }
        if self.feature_stride == 0 {
            return Err(Error::InvalidParameter("feature stride must be at least 1".into()));
        }
        Ok(())
    }

    fn target_for_stage(&self, stage: usize) -> R {
        *self.stage_false_alarm.get(stage).unwrap_or(self.stage_false_alarm.last().unwrap())
    }
}

/// Supplies additional negative windows during training. Called with the
/// cascade built so far and the number of windows wanted; returned windows
/// are re-checked against the cascade, so overshooting is harmless.
pub type NegativeSource<'a, R> = dyn FnMut(&Cascade<R>, usize) -> Result<Vec<GrayFrame>> + 'a;

fn check_sample_size(frame: &GrayFrame, window: u32, what: &str) -> Result<()> {
    if frame.width() != window as usize || frame.height() != window as usize {
        return Err(Error::DimensionMismatch(format!(
            "{what} sample is {}x{}, expected {window}x{window}",
            frame.width(),
            frame.height()
        )));
    }
    Ok(())
}

/// Best stump for one feature under the current weights: sweeps thresholds
/// between consecutive sorted responses, both polarities. Returns
/// (threshold, polarity, weighted error).
fn best_stump<R: Real>(
    values: &[R],
    order: &[u32],
    weights: &[R],
    labels: &[bool],
) -> (R, i8, R) {
    let n = order.len();
    let mut w_pos_total = R::zero();
    let mut w_neg_total = R::zero();
    for i in 0..n {
        if labels[i] {
            w_pos_total += weights[i];
        } else {
            w_neg_total += weights[i];
        }
    }

    let mut w_pos_below = R::zero();
    let mut w_neg_below = R::zero();
    let mut best_err = R::infinity();
    let mut best_threshold = R::zero();
    let mut best_polarity = 1i8;

    for split in 0..=n {
        let threshold = if split == 0 {
            Some(values[order[0] as usize] - R::one())
        } else if split == n {
            Some(values[order[n - 1] as usize] + R::one())
        } else {
            let lo = values[order[split - 1] as usize];
            let hi = values[order[split] as usize];
            // Equal responses cannot be separated here.
            if lo == hi {
                None
            } else {
                Some((lo + hi) / real(2.0))
            }
        };

        if let Some(threshold) = threshold {
            // polarity +1 fires below the threshold.
            let err_pos = (w_pos_total - w_pos_below) + w_neg_below;
            // polarity -1 fires above it.
            let err_neg = w_pos_below + (w_neg_total - w_neg_below);
            if err_pos < best_err {
                best_err = err_pos;
                best_threshold = threshold;
                best_polarity = 1;
            }
            if err_neg < best_err {
                best_err = err_neg;
                best_threshold = threshold;
                best_polarity = -1;
            }
        }

        if split < n {
            let idx = order[split] as usize;
            if labels[idx] {
                w_pos_below += weights[idx];
            } else {
                w_neg_below += weights[idx];
            }
        }
    }

    (best_threshold, best_polarity, best_err)
}

/// Train a cascade on window-sized grayscale patches.
///
/// `negative_source`, when given, refills the working negative set between
/// stages with windows the current cascade still accepts. Training stops
/// early once no negatives survive, since further stages would have nothing
/// to reject.
pub fn train_cascade<R: Real>(
    positives: &[GrayFrame],
    negatives: &[GrayFrame],
    config: &BoostConfig<R>,
    mut negative_source: Option<&mut NegativeSource<'_, R>>,
) -> Result<Cascade<R>> {
    config.validate()?;
    if positives.is_empty() {
        return Err(Error::EmptyInput("no positive training samples"));
    }
    if negatives.is_empty() {
        return Err(Error::EmptyInput("no negative training samples"));
    }
    let window = BASE_WINDOW;
    for p in positives {
        check_sample_size(p, window, "positive")?;
    }
    for n in negatives {
        check_sample_size(n, window, "negative")?;
    }

    let features = enumerate_features(config.feature_stride)?;
    let scaled: Vec<ScaledHaar> =
        features.iter().map(|f| f.scaled(window)).collect::<Result<_>>()?;

    let target_negatives = negatives.len();
    let mut working_negatives: Vec<GrayFrame> = negatives.to_vec();
    let mut cascade = Cascade { window, stages: Vec::new() };

    for stage_idx in 0..config.max_stages {
        if working_negatives.is_empty() {
            break;
        }
        let target_fa = config.target_for_stage(stage_idx);
        let n_pos = positives.len();
        let n_neg = working_negatives.len();
        let n = n_pos + n_neg;

        let integrals: Vec<IntegralImage> = positives
            .iter()
            .chain(working_negatives.iter())
            .map(IntegralImage::from_frame)
            .collect();
        let labels: Vec<bool> = (0..n).map(|i| i < n_pos).collect();

        // Response matrix and per-feature sample order; both are fixed for
        // the whole stage.
        let mut responses: Vec<Vec<R>> = Vec::with_capacity(scaled.len());
        let mut orders: Vec<Vec<u32>> = Vec::with_capacity(scaled.len());
        for feat in &scaled {
            let row: Vec<R> = integrals.iter().map(|ii| feat.response(ii, 0, 0)).collect();
            let mut order: Vec<u32> = (0..n as u32).collect();
            order.sort_by(|&a, &b| {
                row[a as usize].partial_cmp(&row[b as usize]).unwrap().then(a.cmp(&b))
            });
            responses.push(row);
            orders.push(order);
        }

        let mut weights: Vec<R> = labels
            .iter()
            .map(|&pos| {
                if pos {
                    (real::<R>(2.0) * real(n_pos as f64)).recip()
                } else {
                    (real::<R>(2.0) * real(n_neg as f64)).recip()
                }
            })
            .collect();

        let mut learners: Vec<WeakLearner<R>> = Vec::new();
        let mut scores = vec![R::zero(); n];

        let (stage_threshold, false_alarm, detection_rate) = loop {
            let total: R = weights.iter().copied().sum();
            for w in weights.iter_mut() {
                *w /= total;
            }

            let mut best: Option<(usize, R, i8, R)> = None;
            for (f_idx, (row, order)) in responses.iter().zip(&orders).enumerate() {
                let (threshold, polarity, err) = best_stump(row, order, &weights, &labels);
                if best.as_ref().map_or(true, |b| err < b.3) {
                    best = Some((f_idx, threshold, polarity, err));
                }
            }
            let (f_idx, threshold, polarity, err) = best.unwrap();
            if !(err < real(0.5)) {
                return Err(Error::Numerical(format!(
                    "boosting stalled in stage {stage_idx}: best weak learner error {err} \
                     is no better than chance; the sample set cannot be separated"
                )));
            }

            let beta = (err / (R::one() - err)).max(real(1e-10));
            let alpha = -beta.ln();
            let learner = WeakLearner { feature: features[f_idx], threshold, polarity, alpha };

            for i in 0..n {
                let fired = learner.fires(responses[f_idx][i]);
                if fired == labels[i] {
                    weights[i] *= beta;
                }
                if fired {
                    scores[i] += alpha;
                }
            }
            learners.push(learner);

            // Threshold at the positive-score quantile that honours the
            // detection-rate floor.
            let mut pos_scores: Vec<R> = scores[..n_pos].to_vec();
            pos_scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let drop = ((R::one() - config.min_detection_rate) * real(n_pos as f64))
                .floor()
                .to_usize()
                .unwrap_or(0)
                .min(n_pos - 1);
            let stage_threshold = pos_scores[drop];

            let accepted_neg = scores[n_pos..].iter().filter(|&&s| s >= stage_threshold).count();
            let accepted_pos = scores[..n_pos].iter().filter(|&&s| s >= stage_threshold).count();
            let false_alarm = real::<R>(accepted_neg as f64) / real(n_neg as f64);
            let detection_rate = real::<R>(accepted_pos as f64) / real(n_pos as f64);

            if false_alarm <= target_fa || learners.len() >= config.max_stage_learners {
                break (stage_threshold, false_alarm, detection_rate);
            }
        };

        cascade.stages.push(CascadeStage {
            learners,
            threshold: stage_threshold,
            false_alarm,
            detection_rate,
        });

        // Only negatives this stage still accepts stay hard.
        let mut survivors = Vec::new();
        for (i, frame) in working_negatives.iter().enumerate() {
            if scores[n_pos + i] >= stage_threshold {
                survivors.push(frame.clone());
            }
        }
        working_negatives = survivors;

        if let Some(source) = negative_source.as_mut() {
            while working_negatives.len() < target_negatives {
                let want = target_negatives - working_negatives.len();
                let batch = source(&cascade, want)?;
                if batch.is_empty() {
                    break;
                }
                let before = working_negatives.len();
                for frame in batch {
                    check_sample_size(&frame, window, "bootstrapped negative")?;
                    if working_negatives.len() >= target_negatives {
                        break;
                    }
                    if cascade.classify_sample(&frame)?.is_some() {
                        working_negatives.push(frame);
                    }
                }
                // A batch the cascade fully rejects means the source has run
                // dry of hard examples; stop asking.
                if working_negatives.len() == before {
                    break;
                }
            }
        }
    }

    if cascade.stages.is_empty() {
        return Err(Error::EmptyInput("training produced no stages"));
    }
    Ok(cascade)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Bright patch with a dark disc at (cx, cy).
    fn disc_patch(rng: &mut impl Rng, cx: i32, cy: i32) -> GrayFrame {
        let bg = rng.gen_range(150..220u16) as i32;
        let fg = rng.gen_range(20..70u16) as i32;
        let r2 = rng.gen_range(6..12) as i32;
        let mut pixels = Vec::with_capacity(81);
        for y in 0..9i32 {
            for x in 0..9i32 {
                let d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                let v = if d2 <= r2 { fg } else { bg } + rng.gen_range(-8..=8);
                pixels.push(v.clamp(0, 255) as u8);
            }
        }
        GrayFrame::new(9, 9, pixels).unwrap()
    }

    /// Centred dark disc, the shape the detector is meant to learn.
    fn head_like(rng: &mut impl Rng) -> GrayFrame {
        disc_patch(rng, 4, 4)
    }

    fn clutter(rng: &mut impl Rng) -> GrayFrame {
        let mut pixels = Vec::with_capacity(81);
        let base = rng.gen_range(40..200) as i32;
        let slope_x = rng.gen_range(-10..=10);
        let slope_y = rng.gen_range(-10..=10);
        for y in 0..9i32 {
            for x in 0..9i32 {
                let v = base + slope_x * x + slope_y * y + rng.gen_range(-20..=20);
                pixels.push(v.clamp(0, 255) as u8);
            }
        }
        GrayFrame::new(9, 9, pixels).unwrap()
    }

    fn training_sets(seed: u64, n: usize) -> (Vec<GrayFrame>, Vec<GrayFrame>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pos: Vec<GrayFrame> = (0..n).map(|_| head_like(&mut rng)).collect();
        let neg: Vec<GrayFrame> = (0..n).map(|_| clutter(&mut rng)).collect();
        (pos, neg)
    }

    fn fast_config() -> BoostConfig<f64> {
        BoostConfig { feature_stride: 3, max_stages: 2, ..BoostConfig::default() }
    }

    #[test]
    fn learns_separable_toy_problem() {
        let (pos, neg) = training_sets(61, 40);
        let cascade = train_cascade(&pos, &neg, &fast_config(), None).unwrap();
        assert!(!cascade.stages.is_empty());

        for stage in &cascade.stages {
            assert!(stage.detection_rate >= 0.995, "stage detection {}", stage.detection_rate);
            assert!(!stage.learners.is_empty());
            for l in &stage.learners {
                assert!(l.alpha > 0.0);
            }
        }
        // The cascade keeps the positives it was trained on.
        let kept = pos.iter().filter(|p| cascade.classify_sample(p).unwrap().is_some()).count();
        assert!(kept as f64 >= 0.995 * pos.len() as f64);
    }

    #[test]
    fn stage_false_alarms_meet_targets() {
        let (pos, neg) = training_sets(62, 50);
        let cfg = BoostConfig { stage_false_alarm: vec![0.4, 0.45], ..fast_config() };
        let cascade = train_cascade(&pos, &neg, &cfg, None).unwrap();
        for (i, stage) in cascade.stages.iter().enumerate() {
            let target = cfg.stage_false_alarm[i.min(cfg.stage_false_alarm.len() - 1)];
            assert!(
                stage.false_alarm <= target,
                "stage {i} false alarm {} over target {target}",
                stage.false_alarm
            );
        }
    }

    #[test]
    fn single_duplicated_positive_still_trains() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(63);
        let one = head_like(&mut rng);
        let pos: Vec<GrayFrame> = std::iter::repeat(one).take(12).collect();
        let neg: Vec<GrayFrame> = (0..12).map(|_| clutter(&mut rng)).collect();
        let cascade = train_cascade(&pos, &neg, &fast_config(), None).unwrap();
        assert!(cascade.stages[0].learners[0].alpha > 0.0);
        assert!(cascade.classify_sample(&pos[0]).unwrap().is_some());
    }

    #[test]
    fn indistinguishable_classes_error_out() {
        let frame = GrayFrame::filled(9, 9, 128).unwrap();
        let pos = vec![frame.clone(); 8];
        let neg = vec![frame; 8];
        let err = train_cascade(&pos, &neg, &fast_config(), None).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)), "{err}");
    }

    #[test]
    fn bootstrap_refills_negatives() {
        let (pos, neg) = training_sets(64, 30);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(65);
        let mut calls = 0usize;
        // Mimics a real source: scan candidate windows and hand back the
        // ones the current cascade still accepts. Off-centre discs are the
        // hard negatives here.
        let mut source = |c: &Cascade<f64>, want: usize| -> crate::error::Result<Vec<GrayFrame>> {
            calls += 1;
            let mut out = Vec::new();
            for _ in 0..2000 {
                if out.len() >= want {
                    break;
                }
                let candidate = if rng.gen_bool(0.5) {
                    let cx = *[1, 2, 6, 7].iter().nth(rng.gen_range(0..4)).unwrap();
                    let cy = rng.gen_range(1..8);
                    disc_patch(&mut rng, cx, cy)
                } else {
                    clutter(&mut rng)
                };
                if c.classify_sample(&candidate)?.is_some() {
                    out.push(candidate);
                }
            }
            Ok(out)
        };
        let cfg = BoostConfig { max_stages: 3, ..fast_config() };
        let cascade = train_cascade(&pos, &neg, &cfg, Some(&mut source)).unwrap();
        assert!(calls > 0, "bootstrap source never called");
        assert!(cascade.stages.len() > 1, "bootstrapped negatives should enable further stages");
    }

    #[test]
    fn text_round_trip_is_exact() {
        let (pos, neg) = training_sets(66, 30);
        let cascade = train_cascade(&pos, &neg, &fast_config(), None).unwrap();
        let text = cascade.to_text();
        let back = Cascade::<f64>::from_text(&text).unwrap();
        assert_eq!(cascade, back);
    }

    #[test]
    fn malformed_cascade_text_is_rejected() {
        assert!(Cascade::<f64>::from_text("").is_err());
        assert!(Cascade::<f64>::from_text("window = 9\nstages = 1\n").is_err());
        let (pos, neg) = training_sets(67, 20);
        let cascade = train_cascade(&pos, &neg, &fast_config(), None).unwrap();
        let mangled = cascade.to_text().replace("threshold", "treshold");
        assert!(Cascade::<f64>::from_text(&mangled).is_err());
        let trailing = cascade.to_text() + "stage\n";
        assert!(Cascade::<f64>::from_text(&trailing).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let (pos, neg) = training_sets(68, 20);
        let cascade = train_cascade(&pos, &neg, &fast_config(), None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cascade.txt");
        cascade.save(&path).unwrap();
        assert_eq!(Cascade::<f64>::load(&path).unwrap(), cascade);
    }

    #[test]
    fn rejects_wrongly_sized_samples() {
        let good = GrayFrame::filled(9, 9, 10).unwrap();
        let bad = GrayFrame::filled(8, 9, 10).unwrap();
        let err = train_cascade::<f64>(&[good], &[bad], &fast_config(), None).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }
}
