//! Perspective camera with radial distortion, Tsai-style parameterisation.
//!
//! World coordinates are millimetres with the ground plane at z = 0 and z up.
//! A world point maps to camera coordinates through Pc = R Pw + t with
//! R = Rz(rz) Ry(ry) Rx(rx), then onto the sensor by perspective division,
//! one-term radial distortion and the pixel grid transform. Distortion is
//! applied in closed form on projection and inverted iteratively on
//! back-projection.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::linalg::{Mat3, Vec2, Vec3};
use crate::scalar::{real, Real};

/// Calibration file keys in canonical order.
const CALIBRATION_KEYS: [&str; 19] = [
    "width", "height", "ncx", "nfx", "dx", "dy", "dpx", "dpy", "f", "k", "cx", "cy", "sx",
    "tx", "ty", "tz", "rx", "ry", "rz",
];

const UNDISTORT_MAX_ITERS: usize = 20;

/// Calibrated camera. Linear units are millimetres, angles radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsaiCamera<R> {
    /// Image size in pixels.
    pub width: u32,
    pub height: u32,
    /// Sensor geometry: sensor element counts and spacings (mm), plus the
    /// effective pixel pitch after frame-grabber resampling.
    pub ncx: R,
    pub nfx: R,
    pub dx: R,
    pub dy: R,
    pub dpx: R,
    pub dpy: R,
    /// Effective focal length (mm).
    pub f: R,
    /// First-order radial distortion coefficient (1/mm^2).
    pub k: R,
    /// Principal point (pixels).
    pub cx: R,
    pub cy: R,
    /// Horizontal scale factor.
    pub sx: R,
    /// Translation of the world origin in camera coordinates (mm).
    pub tx: R,
    pub ty: R,
    pub tz: R,
    /// Euler angles (radians) composing R = Rz(rz) Ry(ry) Rx(rx).
    pub rx: R,
    pub ry: R,
    pub rz: R,
}

impl<R: Real> TsaiCamera<R> {
    /// Validates the physical parameters.
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Config("camera image size must be positive".into()));
        }
        for (name, value) in [
            ("ncx", self.ncx),
            ("nfx", self.nfx),
            ("dx", self.dx),
            ("dy", self.dy),
            ("dpx", self.dpx),
            ("dpy", self.dpy),
            ("f", self.f),
            ("sx", self.sx),
        ] {
            if !(value > R::zero()) || !value.is_finite() {
                return Err(Error::Config(format!(
                    "camera parameter {name} must be positive and finite, got {value}"
                )));
            }
        }
        for (name, value) in [
            ("k", self.k),
            ("cx", self.cx),
            ("cy", self.cy),
            ("tx", self.tx),
            ("ty", self.ty),
            ("tz", self.tz),
            ("rx", self.rx),
            ("ry", self.ry),
            ("rz", self.rz),
        ] {
            if !value.is_finite() {
                return Err(Error::Config(format!(
                    "camera parameter {name} must be finite, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// World-to-camera rotation R = Rz(rz) Ry(ry) Rx(rx).
    pub fn rotation(&self) -> Mat3<R> {
        Mat3::rotation_z(self.rz)
            .mul(&Mat3::rotation_y(self.ry))
            .mul(&Mat3::rotation_x(self.rx))
    }

    #[inline]
    pub fn translation(&self) -> Vec3<R> {
        Vec3::new(self.tx, self.ty, self.tz)
    }

    /// Optical centre in world coordinates: -R^T t.
    pub fn centre(&self) -> Vec3<R> {
        self.rotation().transpose().mul_vec(self.translation()).scale(-R::one())
    }

    /// Ground point under the optical centre and the camera height above the
    /// ground plane. Errors when the centre is not above the plane.
    pub fn ground_position(&self) -> Result<(Vec2<R>, R)> {
        let c = self.centre();
        if !(c.z > R::zero()) {
            return Err(Error::Degenerate(format!(
                "camera centre is not above the ground plane (z = {})",
                c.z
            )));
        }
        Ok((Vec2::new(c.x, c.y), c.z))
    }

    /// Applies one-term radial distortion to undistorted sensor coordinates.
    pub fn distort_sensor(&self, u: Vec2<R>) -> Vec2<R> {
        let r2 = u.x * u.x + u.y * u.y;
        u.scale(R::one() + self.k * r2)
    }

    /// Inverts the radial distortion by fixed-point iteration, to 1e-6 mm or
    /// 20 iterations, whichever comes first.
    pub fn undistort_sensor(&self, d: Vec2<R>) -> Result<Vec2<R>> {
        let tol = real::<R>(1e-6);
        let mut u = d;
        for _ in 0..UNDISTORT_MAX_ITERS {
            let r2 = u.x * u.x + u.y * u.y;
            let next = d.scale(R::one() / (R::one() + self.k * r2));
            let step = (next - u).norm();
            u = next;
            if step < tol {
                return Ok(u);
            }
        }
        Err(Error::Numerical(format!(
            "radial undistortion did not converge for sensor point ({}, {})",
            d.x, d.y
        )))
    }

    /// Distorted sensor coordinates (mm) to pixels.
    #[inline]
    pub fn sensor_to_pixel(&self, d: Vec2<R>) -> Vec2<R> {
        Vec2::new(self.sx * d.x / self.dpx + self.cx, d.y / self.dpy + self.cy)
    }

    /// Pixels to distorted sensor coordinates (mm).
    #[inline]
    pub fn pixel_to_sensor(&self, p: Vec2<R>) -> Vec2<R> {
        Vec2::new((p.x - self.cx) * self.dpx / self.sx, (p.y - self.cy) * self.dpy)
    }

    /// Projects a world point (mm) to pixel coordinates. Errors when the
    /// point is not strictly in front of the camera.
    pub fn world_to_image(&self, w: Vec3<R>) -> Result<Vec2<R>> {
        let pc = self.rotation().mul_vec(w) + self.translation();
        if !(pc.z > R::zero()) {
            return Err(Error::Degenerate(format!(
                "world point ({}, {}, {}) is behind the camera",
                w.x, w.y, w.z
            )));
        }
        let undistorted = Vec2::new(self.f * pc.x / pc.z, self.f * pc.y / pc.z);
        Ok(self.sensor_to_pixel(self.distort_sensor(undistorted)))
    }

    /// Back-projects a pixel onto the ground plane z = 0 (mm). Errors when
    /// the viewing ray is parallel to the plane or meets it behind the
    /// camera.
    pub fn image_to_ground(&self, p: Vec2<R>) -> Result<Vec2<R>> {
        let u = self.undistort_sensor(self.pixel_to_sensor(p))?;
        // Ray through the optical centre with camera-frame direction
        // (u.x / f, u.y / f, 1).
        let rot_t = self.rotation().transpose();
        let centre = rot_t.mul_vec(self.translation()).scale(-R::one());
        let dir = rot_t.mul_vec(Vec3::new(u.x / self.f, u.y / self.f, R::one()));
        if dir.z.abs() < real::<R>(1e-15) {
            return Err(Error::Degenerate(format!(
                "viewing ray through pixel ({}, {}) is parallel to the ground plane",
                p.x, p.y
            )));
        }
        let t = -centre.z / dir.z;
        if !(t > R::zero()) {
            return Err(Error::Degenerate(format!(
                "viewing ray through pixel ({}, {}) meets the ground plane behind the camera",
                p.x, p.y
            )));
        }
        let hit = centre + dir.scale(t);
        Ok(Vec2::new(hit.x, hit.y))
    }

    /// Builds a camera at `eye` looking at `target` with z-up framing, from
    /// the essential intrinsics. Sensor geometry defaults to the pixel pitch
    /// (ncx = nfx = width, dx = dpx, dy = dpy).
    #[allow(clippy::too_many_arguments)]
    pub fn look_at(
        eye: Vec3<R>,
        target: Vec3<R>,
        width: u32,
        height: u32,
        f: R,
        k: R,
        pixel_pitch: R,
    ) -> Result<Self> {
        let forward = (target - eye)
            .normalized()
            .ok_or_else(|| Error::Degenerate("look-at eye and target coincide".into()))?;
        let up = Vec3::new(R::zero(), R::zero(), R::one());
        let right = forward
            .cross(up)
            .normalized()
            .ok_or_else(|| Error::Degenerate("look-at direction is vertical".into()))?;
        let down = forward.cross(right);
        let rot = Mat3::from_rows(
            [right.x, right.y, right.z],
            [down.x, down.y, down.z],
            [forward.x, forward.y, forward.z],
        );
        let (rx, ry, rz) = euler_zyx_angles(&rot);
        let t = rot.mul_vec(eye).scale(-R::one());
        let two = real::<R>(2.0);
        let cam = TsaiCamera {
            width,
            height,
            ncx: real(width as f64),
            nfx: real(width as f64),
            dx: pixel_pitch,
            dy: pixel_pitch,
            dpx: pixel_pitch,
            dpy: pixel_pitch,
            f,
            k,
            cx: real::<R>(width as f64) / two,
            cy: real::<R>(height as f64) / two,
            sx: R::one(),
            tx: t.x,
            ty: t.y,
            tz: t.z,
            rx,
            ry,
            rz,
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Parses the plain-text `key = value` calibration format. All nineteen
    /// keys must appear exactly once; unknown keys are rejected.
    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut values = std::collections::HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("{context}:{}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            if !CALIBRATION_KEYS.contains(&key) {
                return Err(Error::Config(format!(
                    "{context}:{}: unknown calibration key {key:?}",
                    lineno + 1
                )));
            }
            let parsed: f64 = value.trim().parse().map_err(|_| {
                Error::Config(format!(
                    "{context}:{}: bad numeric value {:?} for {key}",
                    lineno + 1,
                    value.trim()
                ))
            })?;
            if values.insert(key, parsed).is_some() {
                return Err(Error::Config(format!(
                    "{context}:{}: duplicate calibration key {key}",
                    lineno + 1
                )));
            }
        }
        let missing: Vec<&str> = CALIBRATION_KEYS
            .iter()
            .filter(|k| !values.contains_key(*k))
            .copied()
            .collect();
        if !missing.is_empty() {
            return Err(Error::Config(format!(
                "{context}: missing calibration keys: {}",
                missing.join(", ")
            )));
        }
        let get = |key: &str| real::<R>(values[key]);
        let dim = |key: &str| -> Result<u32> {
            let v = values[key];
            if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
                return Err(Error::Config(format!(
                    "{context}: {key} must be a non-negative integer, got {v}"
                )));
            }
            Ok(v as u32)
        };
        let cam = TsaiCamera {
            width: dim("width")?,
            height: dim("height")?,
            ncx: get("ncx"),
            nfx: get("nfx"),
            dx: get("dx"),
            dy: get("dy"),
            dpx: get("dpx"),
            dpy: get("dpy"),
            f: get("f"),
            k: get("k"),
            cx: get("cx"),
            cy: get("cy"),
            sx: get("sx"),
            tx: get("tx"),
            ty: get("ty"),
            tz: get("tz"),
            rx: get("rx"),
            ry: get("ry"),
            rz: get("rz"),
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Loads a calibration file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TsaiCamera::parse(&text, &path.display().to_string())
    }

    /// Serialises to the calibration text format, key per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let fields: [(&str, f64); 19] = [
            ("width", self.width as f64),
            ("height", self.height as f64),
            ("ncx", self.ncx.to_f64().unwrap_or(f64::NAN)),
            ("nfx", self.nfx.to_f64().unwrap_or(f64::NAN)),
            ("dx", self.dx.to_f64().unwrap_or(f64::NAN)),
            ("dy", self.dy.to_f64().unwrap_or(f64::NAN)),
            ("dpx", self.dpx.to_f64().unwrap_or(f64::NAN)),
            ("dpy", self.dpy.to_f64().unwrap_or(f64::NAN)),
            ("f", self.f.to_f64().unwrap_or(f64::NAN)),
            ("k", self.k.to_f64().unwrap_or(f64::NAN)),
            ("cx", self.cx.to_f64().unwrap_or(f64::NAN)),
            ("cy", self.cy.to_f64().unwrap_or(f64::NAN)),
            ("sx", self.sx.to_f64().unwrap_or(f64::NAN)),
            ("tx", self.tx.to_f64().unwrap_or(f64::NAN)),
            ("ty", self.ty.to_f64().unwrap_or(f64::NAN)),
            ("tz", self.tz.to_f64().unwrap_or(f64::NAN)),
            ("rx", self.rx.to_f64().unwrap_or(f64::NAN)),
            ("ry", self.ry.to_f64().unwrap_or(f64::NAN)),
            ("rz", self.rz.to_f64().unwrap_or(f64::NAN)),
        ];
        for (key, value) in fields {
            // Rust's float Display picks the shortest round-trip form.
            writeln!(out, "{key} = {value}").expect("string write");
        }
        out
    }

    /// Writes a calibration file.
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Extracts (rx, ry, rz) with R = Rz(rz) Ry(ry) Rx(rx) from a rotation
/// matrix. At gimbal lock (|cos ry| ~ 0) rz is fixed to zero.
pub fn euler_zyx_angles<R: Real>(rot: &Mat3<R>) -> (R, R, R) {
    let m = &rot.m;
    let sy = -m[2][0];
    let cy = (m[2][1] * m[2][1] + m[2][2] * m[2][2]).sqrt();
    if cy < real::<R>(1e-9) {
        let rx = (-m[0][1]).atan2(m[1][1]);
        let ry = sy.atan2(cy);
        (rx, ry, R::zero())
    } else {
        let rx = m[2][1].atan2(m[2][2]);
        let ry = sy.atan2(cy);
        let rz = m[1][0].atan2(m[0][0]);
        (rx, ry, rz)
    }
}
