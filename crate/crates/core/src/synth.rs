//! Synthetic multi-camera walking scenes with exact ground truth.
//!
//! Agents are rendered as textured billboards: an upright body ellipse with
//! a darker head disc on top, projected through the full camera model and
//! painted far to near. Because the same projection drives both rendering
//! and the recorded truth, pixel positions in the truth are exact, which
//! makes these scenes suitable for end-to-end accuracy checks.
//!
//! All texture and noise comes from counter-based hashes of the scene seed,
//! so identical scenes render identical frames on every run and platform.

use crate::error::{Error, Result};
use crate::frame::GrayFrame;
use crate::geom::{TsaiCamera, Vec2, Vec3};
use crate::imgio;
use crate::motion::BackgroundModel;
use crate::regions::{ExemplarTrack, TrackSample};
use crate::scalar::{real, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};

/// One walking person. Positions are ground-plane millimetres; motion is
/// linear at `velocity` millimetres per frame.
#[derive(Debug, Clone)]
pub struct Agent<R> {
    pub height_mm: R,
    pub start: Vec2<R>,
    pub velocity: Vec2<R>,
    pub body_radius_mm: R,
    /// Base body intensity; the head renders at two fifths of it.
    pub shade: u8,
}

impl<R: Real> Agent<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.height_mm >= real(1000.0) && self.height_mm <= real(2500.0)) {
            return Err(Error::InvalidParameter(format!(
                "agent height {} mm outside 1000..2500",
                self.height_mm
            )));
        }
        if self.velocity.norm() > real(2000.0) {
            return Err(Error::InvalidParameter(format!(
                "agent step {} mm per frame exceeds 2000",
                self.velocity.norm()
            )));
        }
        if !(self.body_radius_mm > R::zero() && self.body_radius_mm < real(600.0)) {
            return Err(Error::InvalidParameter(format!(
                "agent body radius {} mm outside 0..600",
                self.body_radius_mm
            )));
        }
        Ok(())
    }

    pub fn position(&self, frame: usize) -> Vec2<R> {
        self.start + self.velocity.scale(real(frame as f64))
    }
}

/// A fully specified scene: cameras, agents and rendering parameters.
#[derive(Debug, Clone)]
pub struct SyntheticScene<R> {
    pub cameras: Vec<TsaiCamera<R>>,
    pub agents: Vec<Agent<R>>,
    pub frame_count: usize,
    /// Mean floor intensity; static floor texture varies +-15 around it.
    pub background_level: u8,
    /// Per-frame sensor noise amplitude.
    pub noise_amplitude: u8,
    /// Edge length of the body texture cells in millimetres.
    pub texture_cell_mm: R,
    pub seed: u64,
}

/// What one agent looks like in one view for one frame.
#[derive(Debug, Clone)]
pub struct AgentViewState<R> {
    /// The body centre projects inside the frame.
    pub in_view: bool,
    /// In view and the head is not covered by a nearer agent.
    pub visible: bool,
    pub foot_pixel: Option<Vec2<R>>,
    pub head_pixel: Option<Vec2<R>>,
    /// Projected foot-to-crown extent in pixels.
    pub height_px: Option<R>,
}

impl<R> AgentViewState<R> {
    fn hidden() -> Self {
        AgentViewState { in_view: false, visible: false, foot_pixel: None, head_pixel: None, height_px: None }
    }
}

#[derive(Debug, Clone)]
pub struct AgentFrameState<R> {
    pub world: Vec2<R>,
    pub views: Vec<AgentViewState<R>>,
}

#[derive(Debug, Clone)]
pub struct FrameTruth<R> {
    pub agents: Vec<AgentFrameState<R>>,
    /// Agents whose body centre projects into each view.
    pub view_counts: Vec<usize>,
    /// Agents present in at least one view; never below any per-view count.
    /// An agent outside every frustum stays in `agents`, flagged hidden.
    pub scene_count: usize,
}

#[derive(Debug, Clone)]
pub struct SceneTruth<R> {
    pub frames: Vec<FrameTruth<R>>,
}

impl<R: Real> SceneTruth<R> {
    pub fn view_ground_truth(&self, view: usize) -> Vec<(usize, usize)> {
        self.frames.iter().enumerate().map(|(f, t)| (f, t.view_counts[view])).collect()
    }

    pub fn scene_ground_truth(&self) -> Vec<(usize, usize)> {
        self.frames.iter().enumerate().map(|(f, t)| (f, t.scene_count)).collect()
    }

    /// Foot-and-height track of the agent seen unoccluded most often in the
    /// view, for height-profile calibration. None when nobody was visible.
    pub fn exemplar_track(&self, view: usize) -> Option<ExemplarTrack<R>> {
        let agent_count = self.frames.first()?.agents.len();
        let score = |a: usize| {
            self.frames.iter().filter(|t| t.agents[a].views[view].visible).count()
        };
        let best = (0..agent_count).max_by_key(|&a| score(a))?;
        if score(best) == 0 {
            return None;
        }
        let mut samples = Vec::new();
        for (f, t) in self.frames.iter().enumerate() {
            let state = &t.agents[best].views[view];
            if let (true, Some(foot), Some(height)) = (state.visible, state.foot_pixel, state.height_px) {
                samples.push(TrackSample { frame: f, foot_pixel: foot, height_px: height });
            }
        }
        Some(ExemplarTrack { samples })
    }
}

/// Counter-based hash; the basis of all texture and noise.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn hash3(seed: u64, a: i64, b: i64, c: i64) -> u64 {
    mix64(seed ^ mix64(a as u64) ^ mix64((b as u64).rotate_left(21)) ^ mix64((c as u64).rotate_left(42)))
}

/// Signed hash noise in [-amp, amp].
fn hash_noise(seed: u64, a: i64, b: i64, c: i64, amp: i32) -> i32 {
    if amp == 0 {
        return 0;
    }
    (hash3(seed, a, b, c) % (2 * amp as u64 + 1)) as i32 - amp
}

const FLOOR_TEXTURE_AMP: i32 = 15;

/// An agent projected into one view: the body ellipse and head disc in
/// image coordinates, plus everything needed for texture and truth.
struct Billboard<R> {
    depth: R,
    center: Vec2<R>,
    axis_unit: Vec2<R>,
    half_length: R,
    half_width: R,
    head_center: Vec2<R>,
    head_radius: R,
    foot: Vec2<R>,
    mid: Vec2<R>,
    height_px: R,
    body_mm: R,
    radius_mm: R,
    shade: u8,
}

impl<R: Real> Billboard<R> {
    fn body_contains(&self, p: Vec2<R>) -> bool {
        let d = p - self.center;
        let du = d.dot(self.axis_unit);
        let dv = d.dot(Vec2::new(-self.axis_unit.y, self.axis_unit.x));
        let fu = du / self.half_length;
        let fv = dv / self.half_width;
        fu * fu + fv * fv <= R::one()
    }

    fn head_contains(&self, p: Vec2<R>) -> bool {
        p.distance(self.head_center) <= self.head_radius
    }

    fn covers(&self, p: Vec2<R>) -> bool {
        self.body_contains(p) || self.head_contains(p)
    }
}

fn project_billboard<R: Real>(
    camera: &TsaiCamera<R>,
    camera_ground: Vec2<R>,
    pos: Vec2<R>,
    agent: &Agent<R>,
) -> Option<Billboard<R>> {
    let to_agent = pos - camera_ground;
    let dist = to_agent.norm();
    let dir = if dist > real(1e-9) { to_agent.scale(dist.recip()) } else { Vec2::new(R::one(), R::zero()) };
    let perp = Vec2::new(-dir.y, dir.x);

    let height = agent.height_mm;
    let head_r = height / real(12.0);
    let body_h = height - real::<R>(2.0) * head_r;
    let radius = agent.body_radius_mm;

    let project = |x: R, y: R, z: R| camera.world_to_image(Vec3::new(x, y, z)).ok();
    let foot = project(pos.x, pos.y, R::zero())?;
    let top = project(pos.x, pos.y, body_h)?;
    let half = body_h / real(2.0);
    let mid = project(pos.x, pos.y, half)?;
    let mid_off = project(pos.x + perp.x * radius, pos.y + perp.y * radius, half)?;
    let head_z = height - head_r;
    let head_center = project(pos.x, pos.y, head_z)?;
    let head_off = project(pos.x + perp.x * head_r, pos.y + perp.y * head_r, head_z)?;
    let crown = project(pos.x, pos.y, height)?;

    let center = (foot + top).scale(real(0.5));
    let axis = top - center;
    let half_length = axis.norm().max(real(1e-6));
    let axis_unit = axis.scale(half_length.recip());
    let mid_world = Vec3::new(pos.x, pos.y, half);
    let depth = (camera.rotation().mul_vec(mid_world) + camera.translation()).z;

    Some(Billboard {
        depth,
        center,
        axis_unit,
        half_length,
        half_width: mid_off.distance(mid).max(real(0.5)),
        head_center,
        head_radius: head_off.distance(head_center).max(real(0.5)),
        foot,
        mid,
        height_px: crown.distance(foot),
        body_mm: body_h,
        radius_mm: radius,
        shade: agent.shade,
    })
}

fn in_frame<R: Real>(p: Vec2<R>, width: u32, height: u32) -> bool {
    p.x >= R::zero() && p.x < real(width as f64) && p.y >= R::zero() && p.y < real(height as f64)
}

fn paint_billboard<R: Real>(image: &mut GrayFrame, board: &Billboard<R>, agent_seed: u64, cell_mm: R) {
    let (w, h) = (image.width() as i64, image.height() as i64);
    let clamp_box = |c: Vec2<R>, extent: R| -> (i64, i64, i64, i64) {
        let x0 = (c.x - extent).floor().to_i64().unwrap_or(0).max(0);
        let y0 = (c.y - extent).floor().to_i64().unwrap_or(0).max(0);
        let x1 = (c.x + extent).ceil().to_i64().unwrap_or(0).min(w - 1);
        let y1 = (c.y + extent).ceil().to_i64().unwrap_or(0).min(h - 1);
        (x0, y0, x1, y1)
    };

    // Body ellipse with millimetre-anchored texture cells, so the pattern
    // travels with the agent and keeps trackable structure.
    let extent = board.half_length + board.half_width;
    let (x0, y0, x1, y1) = clamp_box(board.center, extent);
    let perp = Vec2::new(-board.axis_unit.y, board.axis_unit.x);
    for py in y0..=y1 {
        for px in x0..=x1 {
            let p = Vec2::new(real::<R>(px as f64), real::<R>(py as f64));
            if !board.body_contains(p) {
                continue;
            }
            let d = p - board.center;
            let along_mm = d.dot(board.axis_unit) / board.half_length * (board.body_mm / real(2.0));
            let across_mm = d.dot(perp) / board.half_width * board.radius_mm;
            let cu = (along_mm / cell_mm).floor().to_i64().unwrap_or(0);
            let cv = (across_mm / cell_mm).floor().to_i64().unwrap_or(0);
            let v = board.shade as i32 + hash_noise(agent_seed, cu, cv, 0, 25);
            image.set(px as usize, py as usize, v.clamp(0, 255) as u8);
        }
    }

    // Head disc, darker and nearly flat.
    let (x0, y0, x1, y1) = clamp_box(board.head_center, board.head_radius);
    let head_shade = (board.shade as i32) * 2 / 5;
    for py in y0..=y1 {
        for px in x0..=x1 {
            let p = Vec2::new(real::<R>(px as f64), real::<R>(py as f64));
            if !board.head_contains(p) {
                continue;
            }
            let v = head_shade + hash_noise(agent_seed ^ 0x68656164, px, py, 1, 6);
            image.set(px as usize, py as usize, v.clamp(0, 255) as u8);
        }
    }
}

impl<R: Real> SyntheticScene<R> {
    pub fn validate(&self) -> Result<()> {
        if self.cameras.is_empty() {
            return Err(Error::EmptyInput("scene has no cameras"));
        }
        if self.frame_count == 0 {
            return Err(Error::InvalidParameter("scene needs at least one frame".into()));
        }
        for camera in &self.cameras {
            camera.validate()?;
            camera.ground_position()?;
        }
        for agent in &self.agents {
            agent.validate()?;
        }
        if !(self.texture_cell_mm > R::zero()) {
            return Err(Error::InvalidParameter("texture cell size must be positive".into()));
        }
        Ok(())
    }

    fn floor_pixel(&self, view: usize, x: i64, y: i64) -> u8 {
        let seed = mix64(self.seed ^ (view as u64).wrapping_mul(0x9e37_79b9));
        let v = self.background_level as i32 + hash_noise(seed, x, y, 2, FLOOR_TEXTURE_AMP);
        v.clamp(0, 255) as u8
    }

    /// The agent-free mean image of a view, the reference for motion
    /// segmentation. Static floor texture included, sensor noise excluded.
    pub fn background(&self, view: usize) -> Result<GrayFrame> {
        let camera = self.cameras.get(view).ok_or_else(|| {
            Error::InvalidParameter(format!("view {view} out of range"))
        })?;
        let (w, h) = (camera.width as usize, camera.height as usize);
        let mut img = GrayFrame::filled(w, h, 0)?;
        for y in 0..h {
            for x in 0..w {
                img.set(x, y, self.floor_pixel(view, x as i64, y as i64));
            }
        }
        Ok(img)
    }

    /// Render every frame of every view along with the exact truth.
    /// Returned frames are indexed `[view][frame]`.
    pub fn render(&self) -> Result<(Vec<Vec<GrayFrame>>, SceneTruth<R>)> {
        self.validate()?;
        let n_views = self.cameras.len();
        let camera_grounds: Vec<Vec2<R>> = self
            .cameras
            .iter()
            .map(|c| c.ground_position().map(|(g, _)| g))
            .collect::<Result<_>>()?;

        let backgrounds: Vec<GrayFrame> =
            (0..n_views).map(|v| self.background(v)).collect::<Result<_>>()?;

        let mut frames: Vec<Vec<GrayFrame>> = (0..n_views).map(|_| Vec::new()).collect();
        let mut truth_frames = Vec::with_capacity(self.frame_count);

        for f in 0..self.frame_count {
            let positions: Vec<Vec2<R>> = self.agents.iter().map(|a| a.position(f)).collect();
            let mut agent_states: Vec<AgentFrameState<R>> = positions
                .iter()
                .map(|&world| AgentFrameState { world, views: Vec::with_capacity(n_views) })
                .collect();
            let mut view_counts = Vec::with_capacity(n_views);

            for (v, camera) in self.cameras.iter().enumerate() {
                let boards: Vec<Option<Billboard<R>>> = self
                    .agents
                    .iter()
                    .zip(&positions)
                    .map(|(agent, &pos)| project_billboard(camera, camera_grounds[v], pos, agent))
                    .collect();

                // Far-to-near paint order; ties broken by agent index.
                let mut order: Vec<usize> =
                    (0..boards.len()).filter(|&i| boards[i].is_some()).collect();
                order.sort_by(|&a, &b| {
                    let da = boards[a].as_ref().unwrap().depth;
                    let db = boards[b].as_ref().unwrap().depth;
                    db.partial_cmp(&da).unwrap().then(a.cmp(&b))
                });

                let mut image = backgrounds[v].clone();
                if self.noise_amplitude > 0 {
                    let noise_seed = mix64(self.seed ^ mix64(f as u64) ^ (v as u64) << 17);
                    for y in 0..image.height() {
                        for x in 0..image.width() {
                            let n = hash_noise(noise_seed, x as i64, y as i64, 3, self.noise_amplitude as i32);
                            let v = image.get(x, y) as i32 + n;
                            image.set(x, y, v.clamp(0, 255) as u8);
                        }
                    }
                }
                for &i in &order {
                    let seed = mix64(self.seed ^ mix64(i as u64 + 1));
                    paint_billboard(&mut image, boards[i].as_ref().unwrap(), seed, self.texture_cell_mm);
                }

                let mut count = 0usize;
                for (i, state) in agent_states.iter_mut().enumerate() {
                    let view_state = match &boards[i] {
                        None => AgentViewState::hidden(),
                        Some(board) => {
                            let in_view = in_frame(board.mid, camera.width, camera.height);
                            let occluded = boards.iter().enumerate().any(|(j, other)| {
                                other.as_ref().map_or(false, |o| {
                                    j != i && o.depth < board.depth && o.covers(board.head_center)
                                })
                            });
                            let head_in = in_frame(board.head_center, camera.width, camera.height);
                            AgentViewState {
                                in_view,
                                visible: in_view && head_in && !occluded,
                                foot_pixel: in_frame(board.foot, camera.width, camera.height)
                                    .then_some(board.foot),
                                head_pixel: head_in.then_some(board.head_center),
                                height_px: Some(board.height_px),
                            }
                        }
                    };
                    if view_state.in_view {
                        count += 1;
                    }
                    state.views.push(view_state);
                }
                view_counts.push(count);
                frames[v].push(image);
            }

            // The scene holds whoever any camera can see, so the scene count
            // is the union of the per-view presence sets.
            let scene_count = agent_states
                .iter()
                .filter(|a| a.views.iter().any(|s| s.in_view))
                .count();
            truth_frames.push(FrameTruth { agents: agent_states, view_counts, scene_count });
        }

        Ok((frames, SceneTruth { frames: truth_frames }))
    }
}

/// Two cameras on the same side of a walkway along the x axis, converging
/// on the requested number of agents crossing the shared field of view.
/// Same-side placement keeps detector localization noise common mode on the
/// ground plane, the way one sites cameras whose outputs must correspond.
/// Agent heights span 1600 to 1850 mm; camera heights sit between 5 and 7 m.
pub fn make_default_scene<R: Real>(seed: u64, agent_count: usize, frame_count: usize) -> Result<SyntheticScene<R>> {
    if frame_count == 0 {
        return Err(Error::InvalidParameter("need at least one frame".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let pitch = real::<R>(0.02);
    let focal = real::<R>(6.0);
    let k = real::<R>(1e-4);
    let cameras = vec![
        TsaiCamera::look_at(
            Vec3::new(real(-3000.0), real(-8000.0), real(6500.0)),
            Vec3::new(R::zero(), R::zero(), R::zero()),
            384,
            288,
            focal,
            k,
            pitch,
        )?,
        TsaiCamera::look_at(
            Vec3::new(real(4000.0), real(-7500.0), real(5500.0)),
            Vec3::new(R::zero(), R::zero(), R::zero()),
            384,
            288,
            focal,
            k,
            pitch,
        )?,
    ];

    // Stagger starts so arrivals spread over roughly three quarters of the
    // sequence.
    let spacing = (350.0 * frame_count as f64 * 0.75 / agent_count as f64).max(900.0);
    let mut agents = Vec::with_capacity(agent_count);
    for i in 0..agent_count {
        agents.push(Agent {
            height_mm: real(rng.gen_range(1600.0..=1850.0)),
            start: Vec2::new(
                real(-4000.0 - spacing * i as f64 - rng.gen_range(0.0..300.0)),
                real(rng.gen_range(-1500.0..=1500.0)),
            ),
            velocity: Vec2::new(real(rng.gen_range(250.0..=500.0)), real(rng.gen_range(-40.0..=40.0))),
            body_radius_mm: real(rng.gen_range(180.0..=240.0)),
            shade: rng.gen_range(40..=100),
        });
    }

    Ok(SyntheticScene {
        cameras,
        agents,
        frame_count,
        background_level: 170,
        noise_amplitude: 3,
        texture_cell_mm: real(150.0),
        seed,
    })
}

/// Everything written by [`write_dataset`].
#[derive(Debug, Clone)]
pub struct DatasetLayout {
    pub view_dirs: Vec<PathBuf>,
    pub scene_ground_truth: PathBuf,
}

impl DatasetLayout {
    pub fn frames_dir(&self, view: usize) -> PathBuf {
        self.view_dirs[view].join("frames")
    }

    pub fn calibration(&self, view: usize) -> PathBuf {
        self.view_dirs[view].join("calibration.txt")
    }

    pub fn background(&self, view: usize) -> PathBuf {
        self.view_dirs[view].join("background.pgm")
    }

    pub fn ground_truth(&self, view: usize) -> PathBuf {
        self.view_dirs[view].join("ground_truth.csv")
    }

    pub fn track(&self, view: usize) -> PathBuf {
        self.view_dirs[view].join("track.csv")
    }
}

/// Render the scene and write it out as a dataset: per-view frame
/// directories, calibration files, background images, ground-truth and
/// exemplar-track tables, plus the scene-level ground truth.
pub fn write_dataset<R: Real>(
    scene: &SyntheticScene<R>,
    out_dir: &Path,
    segmentation_tolerance: u32,
) -> Result<(DatasetLayout, SceneTruth<R>)> {
    let (frames, truth) = scene.render()?;

    let mut view_dirs = Vec::with_capacity(scene.cameras.len());
    for (v, camera) in scene.cameras.iter().enumerate() {
        let view_dir = out_dir.join(format!("view{v}"));
        let frames_dir = view_dir.join("frames");
        std::fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;

        for (f, frame) in frames[v].iter().enumerate() {
            imgio::write_pgm(&frames_dir.join(format!("frame_{f:04}.pgm")), frame)?;
        }
        camera.save(&view_dir.join("calibration.txt"))?;
        let model = BackgroundModel::from_parts(scene.background(v)?, segmentation_tolerance);
        imgio::save_background(&view_dir.join("background.pgm"), &model)?;
        crate::counting::save_ground_truth(
            &view_dir.join("ground_truth.csv"),
            &truth.view_ground_truth(v),
        )?;
        if let Some(track) = truth.exemplar_track(v) {
            track.save_csv(&view_dir.join("track.csv"))?;
        }
        view_dirs.push(view_dir);
    }

    let scene_ground_truth = out_dir.join("ground_truth.csv");
    crate::counting::save_ground_truth(&scene_ground_truth, &truth.scene_ground_truth())?;

    Ok((DatasetLayout { view_dirs, scene_ground_truth }, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::{extract_blobs, morphological_close, segment_motion};
    use crate::frame::StructuringElement;

    fn small_scene() -> SyntheticScene<f64> {
        let mut scene = make_default_scene(7, 3, 24).unwrap();
        // Start agents inside the shared view so even short renders show them.
        for (i, agent) in scene.agents.iter_mut().enumerate() {
            agent.start = Vec2::new(-2500.0 + 1800.0 * i as f64, -900.0 + 850.0 * i as f64);
        }
        scene
    }

    #[test]
    fn rendering_is_deterministic() {
        let scene = small_scene();
        let (frames_a, truth_a) = scene.render().unwrap();
        let (frames_b, truth_b) = scene.render().unwrap();
        for v in 0..frames_a.len() {
            for f in 0..frames_a[v].len() {
                assert_eq!(frames_a[v][f].pixels(), frames_b[v][f].pixels(), "view {v} frame {f}");
            }
        }
        assert_eq!(truth_a.frames.len(), truth_b.frames.len());
        for (ta, tb) in truth_a.frames.iter().zip(&truth_b.frames) {
            assert_eq!(ta.view_counts, tb.view_counts);
            assert_eq!(ta.scene_count, tb.scene_count);
        }
    }

    #[test]
    fn zero_agent_scene_is_background_only() {
        let scene = make_default_scene::<f64>(3, 0, 4).unwrap();
        let (frames, truth) = scene.render().unwrap();
        let background = scene.background(0).unwrap();
        for t in truth.frames.iter() {
            assert_eq!(t.scene_count, 0);
            assert!(t.view_counts.iter().all(|&c| c == 0));
        }
        // Only per-frame sensor noise separates a frame from the background.
        let frame = &frames[0][2];
        for y in 0..frame.height() {
            for x in 0..frame.width() {
                let diff =
                    (frame.get(x, y) as i32 - background.get(x, y) as i32).unsigned_abs();
                assert!(diff <= scene.noise_amplitude as u32);
            }
        }
        assert!(truth.exemplar_track(0).is_none());
    }

    #[test]
    fn different_seeds_give_different_scenes() {
        let a = make_default_scene::<f64>(1, 4, 10).unwrap();
        let b = make_default_scene::<f64>(2, 4, 10).unwrap();
        assert!(a.agents.iter().zip(&b.agents).any(|(p, q)| p.height_mm != q.height_mm));
    }

    #[test]
    fn agent_validation_rejects_bad_parameters() {
        let mut scene = small_scene();
        scene.agents[0].height_mm = 3200.0;
        assert!(scene.validate().is_err());
        let mut scene = small_scene();
        scene.agents[0].velocity = Vec2::new(2500.0, 0.0);
        assert!(scene.validate().is_err());
    }

    #[test]
    fn truth_pixels_are_consistent() {
        let scene = small_scene();
        let (_, truth) = scene.render().unwrap();
        let (w, h) = (384u32, 288u32);
        let mut saw_in_view = false;
        for frame in &truth.frames {
            for agent in &frame.agents {
                for state in &agent.views {
                    if state.in_view {
                        saw_in_view = true;
                        let height = state.height_px.unwrap();
                        assert!(height > 8.0 && height < 150.0, "height {height}");
                    }
                    if let Some(p) = state.head_pixel {
                        assert!(in_frame(p, w, h));
                    }
                    if let Some(p) = state.foot_pixel {
                        assert!(in_frame(p, w, h));
                    }
                    if state.visible {
                        assert!(state.in_view && state.head_pixel.is_some());
                    }
                }
            }
        }
        assert!(saw_in_view, "no agent ever entered a view");
    }

    #[test]
    fn scene_count_is_the_union_of_view_presence() {
        let mut scene = small_scene();
        // Park agent 0 far behind both cameras' fields of view.
        scene.agents[0].start = Vec2::new(-20_000.0, 0.0);
        scene.agents[0].velocity = Vec2::new(0.0, 0.0);
        let (_, truth) = scene.render().unwrap();

        for t in &truth.frames {
            // Out of every frustum: flagged hidden but still in the record.
            assert_eq!(t.agents.len(), scene.agents.len());
            assert!(t.agents[0].views.iter().all(|s| !s.in_view && !s.visible));

            let union = t
                .agents
                .iter()
                .filter(|a| a.views.iter().any(|s| s.in_view))
                .count();
            assert_eq!(t.scene_count, union);
            for &per_view in &t.view_counts {
                assert!(t.scene_count >= per_view);
            }
        }
        assert!(truth.frames[0].scene_count < scene.agents.len());
        assert!(truth.frames[0].scene_count > 0, "remaining agents should be seen");
    }

    #[test]
    fn agents_segment_against_emitted_background() {
        let scene = small_scene();
        let (frames, truth) = scene.render().unwrap();
        let background = scene.background(0).unwrap();
        let model = BackgroundModel::from_parts(background, 25);

        let mask = segment_motion(&frames[0][1], &frames[0][0], &model, 10).unwrap();
        let closed = morphological_close(&mask, &StructuringElement::full());
        let blobs = extract_blobs(&closed, 50);
        let expected = truth.frames[1].view_counts[0];
        assert!(expected > 0, "test scene should have someone in view 0");
        assert!(!blobs.is_empty(), "no motion blobs found");

        // Every in-view agent's body centre must fall in some blob.
        for agent in &truth.frames[1].agents {
            let state = &agent.views[0];
            if state.in_view && state.visible {
                let foot = state.foot_pixel.unwrap();
                let head = state.head_pixel.unwrap();
                let cx = ((foot.x + head.x) / 2.0).round() as usize;
                let cy = ((foot.y + head.y) / 2.0).round() as usize;
                assert!(
                    blobs.iter().any(|b| b.contains(cx, cy)),
                    "agent centre ({cx}, {cy}) not covered by any blob: {blobs:?}"
                );
            }
        }
    }

    #[test]
    fn occlusion_marks_hidden_agents() {
        // Two agents on the line of sight of camera 0 (at x < 0, y < 0
        // looking at the origin): the nearer one hides the farther one.
        // The camera looks down from 6.5 m, so the blocker must stand just
        // in front of the blocked agent for the sight line to clear neither.
        let mut scene = small_scene();
        scene.agents.truncate(2);
        // Camera 0 stands over (-3000, -8000); both agents sit on the ray
        // towards (-700, -1870), the near one at 94% of the far one's range.
        scene.agents[0].start = Vec2::new(-838.0, -2238.0);
        scene.agents[0].velocity = Vec2::new(0.0, 0.0);
        scene.agents[0].height_mm = 1900.0;
        scene.agents[0].body_radius_mm = 180.0;
        scene.agents[1].start = Vec2::new(-700.0, -1870.0);
        scene.agents[1].velocity = Vec2::new(0.0, 0.0);
        scene.agents[1].height_mm = 1550.0;
        scene.agents[1].body_radius_mm = 150.0;
        let (_, truth) = scene.render().unwrap();

        let far = &truth.frames[0].agents[1].views[0];
        assert!(far.in_view, "far agent should project into view 0");
        assert!(!far.visible, "far agent should be occluded in view 0");
        // The perpendicular camera still sees both.
        let far_other = &truth.frames[0].agents[1].views[1];
        assert!(far_other.visible, "far agent should be clear in view 1");
    }

    #[test]
    fn dataset_files_round_trip() {
        let scene = small_scene();
        let dir = tempfile::tempdir().unwrap();
        let (layout, truth) = write_dataset(&scene, dir.path(), 25).unwrap();

        assert_eq!(layout.view_dirs.len(), 2);
        for v in 0..2 {
            let frames = imgio::list_frames(&layout.frames_dir(v)).unwrap();
            assert_eq!(frames.len(), scene.frame_count);
            let camera = crate::geom::TsaiCamera::<f64>::load(&layout.calibration(v)).unwrap();
            assert_eq!(camera.width, 384);
            let model = imgio::load_background(&layout.background(v)).unwrap();
            assert_eq!(model.tolerance(), 25);
            let gt = crate::counting::load_ground_truth(&layout.ground_truth(v)).unwrap();
            assert_eq!(gt.len(), scene.frame_count);
            let track = ExemplarTrack::<f64>::load_csv(&layout.track(v)).unwrap();
            assert!(!track.samples.is_empty());
        }
        let scene_gt = crate::counting::load_ground_truth(&layout.scene_ground_truth).unwrap();
        assert_eq!(scene_gt.len(), truth.frames.len());
    }
}
