//! Command line front end for the people-counting pipeline.
//!
//! Every command reads a plain-text configuration (see the library's
//! `config` module) except `synth` and `eval`, which work from flags alone.
//! Exit codes: 0 on success, 2 for configuration errors, 3 for data errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crowdcount::config::{PipelineConfig, ViewConfig};
use crowdcount::corners::{detect_corners, MaskShape};
use crowdcount::counting::{aepf, calibrate_acpp, load_ground_truth, FusionRule};
use crowdcount::frame::{BinaryMask, GrayFrame};
use crowdcount::heads::{
    extract_descriptor, resample_window, train_cascade, train_kernel_classifier,
    WindowClassifier, BASE_WINDOW,
};
use crowdcount::imgio;
use crowdcount::motion::{build_background, gaussian_blur, BackgroundModel};
use crowdcount::pipeline::{
    run_head_counting, run_indirect, segment_frame, training_observations, ViewContext,
};
use crowdcount::regions::{
    calibrate_weights, load_weights, save_weights, ExemplarTrack, RegionMap, RegionWeights,
};
use crowdcount::synth::{make_default_scene, write_dataset, DatasetLayout, SceneTruth, SyntheticScene};
use crowdcount::{
    AcppTable64, Cascade64, CornerConfig64, CountReport64, Error, KernelClassifier64, Result,
    TsaiCamera64,
};

#[derive(Parser)]
#[command(
    name = "crowdcount",
    version,
    about = "Multi-camera people counting from calibrated video"
)]
struct Cli {
    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every random choice (training shuffles, synthetic scenes).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Output directory; falls back to the config's output_dir, then ".".
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Fusion rule override: max, min or avg.
    #[arg(long, global = true)]
    fusion: Option<FusionRule>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write motion masks, blend overlays and a blob table per view.
    Segment,
    /// Write detected movement corners per view as CSV.
    Corners,
    /// Calibrate per-region perspective weights from each view's exemplar
    /// track.
    CalibrateWeights,
    /// Calibrate corners-per-person ratios against per-view ground truth.
    CalibrateAcpp,
    /// Count people from weighted corner statistics and write the report.
    Count {
        /// Rerun over mask sizes {3,5,7} x shapes {square,circular} and
        /// write one error row per combination instead of a full report.
        #[arg(long)]
        sweep_masks: bool,
    },
    /// Train a head classifier per view from the configured corpora.
    TrainHeads {
        /// Train the raw-pixel kernel classifier instead of the cascade.
        #[arg(long)]
        kernel: bool,
    },
    /// Count people by detecting heads and fusing them across views.
    CountHeads {
        /// Use the kernel classifier instead of the cascade.
        #[arg(long)]
        kernel: bool,
    },
    /// Render a synthetic dataset with exact ground truth and a ready-made
    /// configuration file.
    Synth {
        #[arg(long, default_value_t = 8)]
        agents: usize,
        #[arg(long, default_value_t = 100)]
        frames: usize,
        /// Also cut head and clutter training windows from the rendering.
        #[arg(long)]
        head_corpus: bool,
    },
    /// Compare a count report against a ground-truth CSV.
    Eval {
        /// Report CSV produced by count or count-heads.
        #[arg(long)]
        report: PathBuf,
        /// Ground-truth CSV (frame,count).
        #[arg(long)]
        ground_truth: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Segment => cmd_segment(cli),
        Command::Corners => cmd_corners(cli),
        Command::CalibrateWeights => cmd_calibrate_weights(cli),
        Command::CalibrateAcpp => cmd_calibrate_acpp(cli),
        Command::Count { sweep_masks } => cmd_count(cli, *sweep_masks),
        Command::TrainHeads { kernel } => cmd_train_heads(cli, *kernel),
        Command::CountHeads { kernel } => cmd_count_heads(cli, *kernel),
        Command::Synth { agents, frames, head_corpus } => {
            cmd_synth(cli, *agents, *frames, *head_corpus)
        }
        Command::Eval { report, ground_truth } => cmd_eval(report, ground_truth),
    }
}

// ---------------------------------------------------------------------------
// shared plumbing

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("this command needs --config <file>".into()))?;
    PipelineConfig::load(path)
}

fn out_dir(cli: &Cli, cfg: Option<&PipelineConfig>) -> Result<PathBuf> {
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."));
    create_dir(&dir)?;
    Ok(dir)
}

fn fusion_rule(cli: &Cli, cfg: &PipelineConfig) -> FusionRule {
    cli.fusion.unwrap_or(cfg.fusion)
}

fn rule_name(rule: FusionRule) -> &'static str {
    match rule {
        FusionRule::Maximum => "max",
        FusionRule::Minimum => "min",
        FusionRule::Average => "avg",
    }
}

fn load_frames(dir: &Path) -> Result<Vec<GrayFrame>> {
    imgio::list_frames(dir)?.iter().map(|p| imgio::read_frame(p)).collect()
}

/// Background model for one view: the configured file, or the mean of the
/// first `background_frames` frames when no file is given.
fn view_background(
    cfg: &PipelineConfig,
    view: &ViewConfig,
    frames: &[GrayFrame],
) -> Result<BackgroundModel> {
    match &view.background {
        Some(path) => imgio::load_background(path),
        None => {
            let n = cfg.background_frames.min(frames.len()).max(1);
            build_background(&frames[..n], cfg.background_tolerance)
        }
    }
}

/// Assembles the per-view pipeline context. Weights come from the view's
/// calibrated file unless `uniform` asks for flat ones.
fn view_context(
    cfg: &PipelineConfig,
    view: &ViewConfig,
    background: &BackgroundModel,
    uniform: bool,
) -> Result<ViewContext<f64>> {
    let camera = TsaiCamera64::load(view.require("calibration")?)?;
    let weights = if uniform {
        RegionWeights::uniform(cfg.region_count)?
    } else {
        let path = view.require("weights")?;
        if !path.is_file() {
            return Err(Error::Config(format!(
                "view {}: weights file {} does not exist; run calibrate-weights \
                 first or set uniform_weights = true",
                view.view,
                path.display()
            )));
        }
        load_weights(path)?.1
    };
    ViewContext::new(view.view, camera, background, cfg.region_width_mm, cfg.region_count, weights)
}

/// Frames and contexts for every configured view, in view order.
/// `force_uniform` is for the head pipeline, which never reads region
/// weights and so should not demand a prior weight calibration.
fn load_views(
    cfg: &PipelineConfig,
    force_uniform: bool,
) -> Result<(Vec<ViewContext<f64>>, Vec<Vec<GrayFrame>>)> {
    if cfg.views.is_empty() {
        return Err(Error::Config("no [view.N] sections configured".into()));
    }
    let uniform = force_uniform || cfg.uniform_weights;
    let mut contexts = Vec::new();
    let mut sequences = Vec::new();
    for view in &cfg.views {
        let frames = load_frames(view.require("frames")?)?;
        let background = view_background(cfg, view, &frames)?;
        contexts.push(view_context(cfg, view, &background, uniform)?);
        sequences.push(frames);
    }
    Ok((contexts, sequences))
}

fn scene_truth(cfg: &PipelineConfig) -> Result<Option<Vec<(usize, usize)>>> {
    cfg.scene_ground_truth.as_deref().map(load_ground_truth).transpose()
}

fn require_two_frames(view: &ViewConfig, frames: &[GrayFrame]) -> Result<()> {
    if frames.len() < 2 {
        return Err(Error::Data(format!(
            "view {}: need at least two frames to difference, found {}",
            view.view,
            frames.len()
        )));
    }
    Ok(())
}

/// Per-view and fused errors against whatever ground truth the report holds.
fn print_report_summary(report: &CountReport64, fused_label: &str, signed: bool) -> Result<()> {
    let with_gt: Vec<_> = report.rows.iter().filter(|r| r.ground_truth.is_some()).collect();
    if with_gt.is_empty() {
        println!(
            "{} frames counted; no ground truth configured, no error computed",
            report.rows.len()
        );
        return Ok(());
    }
    let gt: Vec<f64> = with_gt.iter().filter_map(|r| r.ground_truth).collect();
    for (i, v) in report.views.iter().enumerate() {
        let est: Vec<f64> = with_gt.iter().map(|r| r.view_estimates[i]).collect();
        println!("view {v} AepF = {:.4}", aepf(&est, &gt, signed)?);
    }
    let fused = report.aepf.expect("rows with ground truth imply a fused error");
    println!("fused ({fused_label}) AepF = {fused:.4} over {} frames", with_gt.len());
    Ok(())
}

fn mask_to_frame(mask: &BinaryMask) -> Result<GrayFrame> {
    let mut out = GrayFrame::filled(mask.width(), mask.height(), 0)?;
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) {
                out.set(x, y, 255);
            }
        }
    }
    Ok(out)
}

/// Movement regions brightened halfway to white over the original frame.
fn blend_overlay(frame: &GrayFrame, mask: &BinaryMask) -> Result<GrayFrame> {
    let mut out = frame.clone();
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) {
                out.set(x, y, ((frame.get(x, y) as u32 + 255) / 2) as u8);
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// commands

fn cmd_segment(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = out_dir(cli, Some(&cfg))?;
    for view in &cfg.views {
        let frames = load_frames(view.require("frames")?)?;
        require_two_frames(view, &frames)?;
        let raw = view_background(&cfg, view, &frames)?;
        // Frames are smoothed inside segment_frame; smooth the mean to match.
        let model = BackgroundModel::from_parts(gaussian_blur(raw.mean()), raw.tolerance());

        let view_dir = out.join(format!("view{}", view.view));
        let masks_dir = view_dir.join("masks");
        let overlays_dir = view_dir.join("overlays");
        create_dir(&masks_dir)?;
        create_dir(&overlays_dir)?;

        let mut blobs_csv = String::from("frame,x,y,width,height,area\n");
        let mut blob_count = 0usize;
        for t in 1..frames.len() {
            let seg = segment_frame(&frames[t], &frames[t - 1], &model, &cfg.segmentation)?;
            imgio::write_pgm(
                &masks_dir.join(format!("mask_{t:04}.pgm")),
                &mask_to_frame(&seg.mask)?,
            )?;
            imgio::write_pgm(
                &overlays_dir.join(format!("overlay_{t:04}.pgm")),
                &blend_overlay(&frames[t], &seg.mask)?,
            )?;
            for b in &seg.blobs {
                blobs_csv.push_str(&format!(
                    "{t},{},{},{},{},{}\n",
                    b.x, b.y, b.width, b.height, b.area
                ));
                blob_count += 1;
            }
        }
        write_text(&view_dir.join("blobs.csv"), &blobs_csv)?;
        println!(
            "view {}: {} frames segmented, {} blobs, wrote {}",
            view.view,
            frames.len() - 1,
            blob_count,
            view_dir.display()
        );
    }
    Ok(())
}

fn cmd_corners(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = out_dir(cli, Some(&cfg))?;
    let corner_cfg = cfg.corner_config()?;
    for view in &cfg.views {
        let frames = load_frames(view.require("frames")?)?;
        require_two_frames(view, &frames)?;
        let raw = view_background(&cfg, view, &frames)?;
        let model = BackgroundModel::from_parts(gaussian_blur(raw.mean()), raw.tolerance());

        let mut csv = String::from("frame,x,y,score\n");
        let mut total = 0usize;
        for t in 1..frames.len() {
            let seg = segment_frame(&frames[t], &frames[t - 1], &model, &cfg.segmentation)?;
            let corners = detect_corners(&seg.smoothed, &seg.blobs, &corner_cfg, view.view)?;
            for c in &corners {
                csv.push_str(&format!("{t},{},{},{:.6}\n", c.x, c.y, c.score));
            }
            total += corners.len();
        }
        let path = out.join(format!("view{}_corners.csv", view.view));
        write_text(&path, &csv)?;
        println!(
            "view {}: {} corners over {} frames, wrote {}",
            view.view,
            total,
            frames.len() - 1,
            path.display()
        );
    }
    Ok(())
}

fn cmd_calibrate_weights(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = out_dir(cli, Some(&cfg))?;
    for view in &cfg.views {
        let camera = TsaiCamera64::load(view.require("calibration")?)?;
        camera.validate()?;
        let (camera_ground, _) = camera.ground_position()?;
        let regions = RegionMap::new(camera_ground, cfg.region_width_mm, cfg.region_count)?;
        let track = ExemplarTrack::<f64>::load_csv(view.require("track")?)?;
        let (profile, weights) = calibrate_weights(&track, &camera, &regions)?;
        let path = view
            .weights
            .clone()
            .unwrap_or_else(|| out.join(format!("weights_view{}.csv", view.view)));
        save_weights(&path, &profile, &weights)?;
        println!(
            "view {}: {} regions calibrated from {} track samples, wrote {}",
            view.view,
            weights.len(),
            track.samples.len(),
            path.display()
        );
    }
    Ok(())
}

fn cmd_calibrate_acpp(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = out_dir(cli, Some(&cfg))?;
    let corner_cfg = cfg.corner_config()?;
    let correct = !cfg.disable_projection_correction;

    let mut per_view = Vec::new();
    for view in &cfg.views {
        let frames = load_frames(view.require("frames")?)?;
        let background = view_background(&cfg, view, &frames)?;
        let ctx = view_context(&cfg, view, &background, cfg.uniform_weights)?;
        let observations = training_observations(
            &ctx,
            &frames,
            &cfg.segmentation,
            &corner_cfg,
            cfg.avg_person_height_mm,
            correct,
        )?;
        let gt = load_ground_truth(view.require("ground_truth")?)?;
        let (model, skipped) = calibrate_acpp(&observations, &gt)?;
        println!(
            "view {}: corners per person = {:.4} over {} frames{}",
            view.view,
            model.corners_per_person,
            model.frames_used,
            if skipped.is_empty() {
                String::new()
            } else {
                format!(" ({} frames skipped: empty or no ground truth)", skipped.len())
            }
        );
        per_view.push((view.view, model.corners_per_person));
    }

    let table = AcppTable64::from_views(per_view, cfg.scene_acpp)?;
    let path = cfg.acpp_file.clone().unwrap_or_else(|| out.join("acpp.txt"));
    table.save(&path)?;
    print!("{}", table.to_text());
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_count(cli: &Cli, sweep_masks: bool) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = out_dir(cli, Some(&cfg))?;
    let (contexts, sequences) = load_views(&cfg, false)?;

    let acpp_path = cfg.acpp_file.clone().unwrap_or_else(|| out.join("acpp.txt"));
    if !acpp_path.is_file() {
        return Err(Error::Config(format!(
            "no corners-per-person table at {}; run calibrate-acpp first",
            acpp_path.display()
        )));
    }
    let acpp = AcppTable64::load(&acpp_path)?;
    let gt = scene_truth(&cfg)?;
    let rule = fusion_rule(cli, &cfg);
    let correct = !cfg.disable_projection_correction;

    if sweep_masks {
        let gt = gt.ok_or_else(|| {
            Error::Config("mask sweep needs scene_ground_truth for the error summary".into())
        })?;
        let mut csv = String::from("mask_size,mask_shape,aepf\n");
        for size in [3u32, 5, 7] {
            for shape in [MaskShape::Square, MaskShape::Circular] {
                let corner_cfg = CornerConfig64::new(
                    cfg.corner_score_threshold,
                    cfg.corner_gradient_threshold,
                    shape,
                    size,
                )?;
                let report = run_indirect(
                    &contexts,
                    &sequences,
                    &cfg.segmentation,
                    &corner_cfg,
                    cfg.avg_person_height_mm,
                    correct,
                    &acpp,
                    rule,
                    Some(&gt),
                    cfg.signed_error,
                )?;
                let err = report.aepf.expect("sweep runs with ground truth");
                let shape_name = match shape {
                    MaskShape::Square => "square",
                    MaskShape::Circular => "circular",
                };
                println!("mask {size}x{size} {shape_name}: AepF = {err:.4}");
                csv.push_str(&format!("{size},{shape_name},{err:.4}\n"));
            }
        }
        let path = out.join("mask_sweep.csv");
        write_text(&path, &csv)?;
        println!("wrote {}", path.display());
        return Ok(());
    }

    let report = run_indirect(
        &contexts,
        &sequences,
        &cfg.segmentation,
        &cfg.corner_config()?,
        cfg.avg_person_height_mm,
        correct,
        &acpp,
        rule,
        gt.as_deref(),
        cfg.signed_error,
    )?;
    let path = out.join("count_report.csv");
    report.save_csv(&path)?;
    print_report_summary(&report, rule_name(rule), cfg.signed_error)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_train_heads(cli: &Cli, kernel: bool) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = out_dir(cli, Some(&cfg))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);

    for view in &cfg.views {
        let mut positives = load_frames(view.require("positives")?)?;
        let mut negatives = load_frames(view.require("negatives")?)?;
        if positives.len() < 50 || negatives.len() < 50 {
            return Err(Error::Data(format!(
                "view {}: head corpus too small ({} positives, {} negatives; \
                 need at least 50 per class)",
                view.view,
                positives.len(),
                negatives.len()
            )));
        }
        positives.shuffle(&mut rng);
        negatives.shuffle(&mut rng);

        if kernel {
            let mut samples = Vec::with_capacity(positives.len() + negatives.len());
            for (set, label) in [(&positives, true), (&negatives, false)] {
                for frame in set.iter() {
                    if frame.width() != frame.height() {
                        return Err(Error::Data(format!(
                            "view {}: training sample is {}x{}, expected square",
                            view.view,
                            frame.width(),
                            frame.height()
                        )));
                    }
                    samples.push((extract_descriptor::<f64>(frame, 0, 0, frame.width())?, label));
                }
            }
            let classifier = train_kernel_classifier(&samples, &cfg.kernel_config())?;
            let path = view
                .classifier
                .clone()
                .unwrap_or_else(|| out.join(format!("classifier_view{}.txt", view.view)));
            classifier.save(&path)?;
            println!(
                "view {}: kernel classifier, {} support vectors{}, wrote {}",
                view.view,
                classifier.support_vector_count(),
                if classifier.converged { "" } else { " (stopped at pass limit)" },
                path.display()
            );
        } else {
            // Train on half the negatives; bootstrap later stages from the
            // rest so their false-alarm statistics rest on fresh windows.
            let direct = (negatives.len() / 2).max(50);
            let (train_negs, pool) = negatives.split_at(direct.min(negatives.len()));
            let mut pool_iter = pool.iter();
            let mut source = |_: &Cascade64, want: usize| -> Result<Vec<GrayFrame>> {
                Ok(pool_iter.by_ref().take(want).cloned().collect())
            };
            let cascade = train_cascade(
                &positives,
                train_negs,
                &cfg.boost_config(),
                if pool.is_empty() { None } else { Some(&mut source) },
            )?;
            let path = view
                .cascade
                .clone()
                .unwrap_or_else(|| out.join(format!("cascade_view{}.txt", view.view)));
            cascade.save(&path)?;
            println!(
                "view {}: cascade with {} stages, {} weak learners, wrote {}",
                view.view,
                cascade.stages.len(),
                cascade.learner_count(),
                path.display()
            );
            for (i, stage) in cascade.stages.iter().enumerate() {
                println!(
                    "  stage {i}: {} learners, false alarm {:.3}, detection {:.3}",
                    stage.learners.len(),
                    stage.false_alarm,
                    stage.detection_rate
                );
            }
        }
    }
    Ok(())
}

fn cmd_count_heads(cli: &Cli, kernel: bool) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = out_dir(cli, Some(&cfg))?;
    let (contexts, sequences) = load_views(&cfg, true)?;

    let mut classifiers: Vec<Box<dyn WindowClassifier<f64>>> = Vec::new();
    for view in &cfg.views {
        let configured = if kernel { &view.classifier } else { &view.cascade };
        let fallback = if kernel {
            format!("classifier_view{}.txt", view.view)
        } else {
            format!("cascade_view{}.txt", view.view)
        };
        let path = configured.clone().unwrap_or_else(|| out.join(fallback));
        if !path.is_file() {
            return Err(Error::Config(format!(
                "view {}: model missing at {}; run train-heads first",
                view.view,
                path.display()
            )));
        }
        classifiers.push(if kernel {
            Box::new(KernelClassifier64::load(&path)?)
        } else {
            Box::new(Cascade64::load(&path)?)
        });
    }
    let refs: Vec<&dyn WindowClassifier<f64>> = classifiers.iter().map(|c| c.as_ref()).collect();

    let gt = scene_truth(&cfg)?;
    let report = run_head_counting(
        &contexts,
        &sequences,
        &refs,
        &cfg.segmentation,
        &cfg.scan_config(),
        &cfg.plane_spec()?,
        cfg.correspondence_mask_max,
        &cfg.zones()?,
        cfg.head_height_mm.unwrap_or(cfg.avg_person_height_mm),
        cfg.invert_head_ratio,
        gt.as_deref(),
        cfg.signed_error,
    )?;
    let path = out.join("head_report.csv");
    report.save_csv(&path)?;
    print_report_summary(&report, "correspondence", cfg.signed_error)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_synth(cli: &Cli, agents: usize, frames: usize, head_corpus: bool) -> Result<()> {
    let out = out_dir(cli, None)?;
    let scene = make_default_scene::<f64>(cli.seed, agents, frames)?;
    let tolerance = PipelineConfig::default().background_tolerance;
    let (layout, truth) = write_dataset(&scene, &out, tolerance)?;

    let mut corpus_sizes = Vec::new();
    if head_corpus {
        for v in 0..scene.cameras.len() {
            corpus_sizes.push(emit_head_corpus(&out, &layout, &truth, v, cli.seed)?);
        }
    }

    let config_path = out.join("config.txt");
    write_text(&config_path, &synth_config_text(&scene, &layout, head_corpus))?;
    // The generated file must load cleanly, or the dataset is useless.
    PipelineConfig::load(&config_path)?;

    let counts: Vec<usize> = truth.frames.iter().map(|t| t.scene_count).collect();
    let lo = counts.iter().min().copied().unwrap_or(0);
    let hi = counts.iter().max().copied().unwrap_or(0);
    println!(
        "dataset: {} views, {} agents, {} frames each, scene count {lo}..{hi}",
        scene.cameras.len(),
        agents,
        frames
    );
    for (v, (heads, clutter)) in corpus_sizes.iter().enumerate() {
        println!("view {v}: {heads} head windows, {clutter} clutter windows");
    }
    println!("wrote {}", config_path.display());
    Ok(())
}

fn cmd_eval(report: &Path, ground_truth: &Path) -> Result<()> {
    let text = std::fs::read_to_string(report).map_err(|e| io_err(report, e))?;
    let context = report.display().to_string();
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Data(format!("{context}: report is empty")))?;
    let fused_col = header
        .split(',')
        .position(|c| c.trim() == "fused_est")
        .ok_or_else(|| Error::Data(format!("{context}: no fused_est column")))?;

    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = |what: &str| {
            Error::Data(format!("{context}: line {}: bad {what} {line:?}", i + 2))
        };
        if fields.len() <= fused_col {
            return Err(bad("row width"));
        }
        let frame: usize = fields[0].trim().parse().map_err(|_| bad("frame"))?;
        let fused: f64 = fields[fused_col].trim().parse().map_err(|_| bad("estimate"))?;
        rows.push((frame, fused));
    }

    let gt: BTreeMap<usize, usize> = load_ground_truth(ground_truth)?.into_iter().collect();
    let mut estimates = Vec::new();
    let mut target = Vec::new();
    for (frame, fused) in rows {
        if let Some(&count) = gt.get(&frame) {
            estimates.push(fused);
            target.push(count as f64);
        }
    }
    if estimates.is_empty() {
        return Err(Error::Data("no report frames matched the ground truth".into()));
    }
    println!("frames evaluated: {}", estimates.len());
    println!("AepF = {:.4}", aepf(&estimates, &target, false)?);
    println!("signed AepF = {:.4}", aepf(&estimates, &target, true)?);
    Ok(())
}

// ---------------------------------------------------------------------------
// synth helpers

/// Configuration matching [`write_dataset`]'s layout, with artifact paths
/// (weights, models, report directory) pointing back into the dataset.
fn synth_config_text(scene: &SyntheticScene<f64>, layout: &DatasetLayout, head_corpus: bool) -> String {
    let mut text = String::from(
        "# Generated alongside the synthetic dataset; paths are relative to this file.\n\
         acpp_file = acpp.txt\n\
         scene_ground_truth = ground_truth.csv\n\
         output_dir = out\n",
    );
    if !scene.agents.is_empty() {
        let n = scene.agents.len() as f64;
        let mean_height: f64 = scene.agents.iter().map(|a| a.height_mm).sum::<f64>() / n;
        // Rendered head discs centre at 11/12 of body height; aiming the
        // pull-back there keeps cross-view projections close enough to pair.
        let head_height = mean_height * 11.0 / 12.0;
        text.push_str(&format!(
            "avg_person_height_mm = {mean_height:.0}\n\
             head_height_mm = {head_height:.0}\n\
             correspondence_mask_max = 19\n"
        ));
    }
    for v in 0..layout.view_dirs.len() {
        text.push_str(&format!(
            "\n[view.{v}]\n\
             frames = view{v}/frames\n\
             calibration = view{v}/calibration.txt\n\
             background = view{v}/background.pgm\n\
             ground_truth = view{v}/ground_truth.csv\n\
             weights = view{v}/weights.csv\n\
             cascade = view{v}/cascade.txt\n\
             classifier = view{v}/classifier.txt\n"
        ));
        if layout.track(v).is_file() {
            text.push_str(&format!("track = view{v}/track.csv\n"));
        }
        if head_corpus {
            text.push_str(&format!(
                "positives = view{v}/heads\nnegatives = view{v}/clutter\n"
            ));
        }
    }
    text
}

/// Cuts square windows around every visible rendered head, resampled to the
/// classifier base size, plus an equal number of clutter windows sampled
/// away from heads. Returns (head count, clutter count).
fn emit_head_corpus(
    out: &Path,
    layout: &DatasetLayout,
    truth: &SceneTruth<f64>,
    view: usize,
    seed: u64,
) -> Result<(usize, usize)> {
    const MAX_WINDOWS: usize = 400;
    let frame_paths = imgio::list_frames(&layout.frames_dir(view))?;
    let heads_dir = out.join(format!("view{view}")).join("heads");
    let clutter_dir = out.join(format!("view{view}")).join("clutter");
    create_dir(&heads_dir)?;
    create_dir(&clutter_dir)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x6865_6164 + view as u64));
    let base = BASE_WINDOW as usize;
    let mut heads = 0usize;
    let mut clutter = 0usize;

    for (f, path) in frame_paths.iter().enumerate() {
        if heads >= MAX_WINDOWS {
            break;
        }
        let frame = imgio::read_frame(path)?;
        let states: Vec<_> = truth.frames[f]
            .agents
            .iter()
            .filter_map(|a| {
                let s = &a.views[view];
                match (s.visible, s.head_pixel, s.height_px) {
                    (true, Some(head), Some(height_px)) => Some((head, height_px)),
                    _ => None,
                }
            })
            .collect();

        let mut taken = 0usize;
        for &(head, height_px) in &states {
            if heads >= MAX_WINDOWS {
                break;
            }
            // Window slightly wider than the head disc (diameter ~ height/6).
            let size = ((height_px / 5.0).round() as usize).max(6);
            let x0 = head.x.round() as isize - (size / 2) as isize;
            let y0 = head.y.round() as isize - (size / 2) as isize;
            if x0 < 0 || y0 < 0 {
                continue;
            }
            let (x0, y0) = (x0 as usize, y0 as usize);
            if x0 + size > frame.width() || y0 + size > frame.height() {
                continue;
            }
            let window = resample_window(&frame, x0, y0, size, base)?;
            imgio::write_pgm(&heads_dir.join(format!("head_{heads:05}.pgm")), &window)?;
            heads += 1;
            taken += 1;
        }

        // One clutter window per head window, sampled away from any head so
        // bodies and background both appear in the negative class.
        let mut attempts = 0usize;
        let mut got = 0usize;
        while got < taken && attempts < 200 {
            attempts += 1;
            let size = rng.gen_range(6..=16usize);
            if frame.width() <= size || frame.height() <= size {
                continue;
            }
            let x0 = rng.gen_range(0..frame.width() - size);
            let y0 = rng.gen_range(0..frame.height() - size);
            let cx = x0 as f64 + size as f64 / 2.0;
            let cy = y0 as f64 + size as f64 / 2.0;
            let near_head = states.iter().any(|&(head, height_px)| {
                let r = (height_px / 5.0).max(6.0);
                (cx - head.x).abs() < r && (cy - head.y).abs() < r
            });
            if near_head {
                continue;
            }
            let window = resample_window(&frame, x0, y0, size, base)?;
            imgio::write_pgm(&clutter_dir.join(format!("clutter_{clutter:05}.pgm")), &window)?;
            clutter += 1;
            got += 1;
        }
    }
    Ok((heads, clutter))
}
