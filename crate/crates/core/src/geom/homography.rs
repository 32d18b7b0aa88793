//! Plane-to-plane homography estimation by the direct linear transform.
//!
//! Point pairs are Hartley-normalised (zero centroid, mean distance sqrt(2))
//! before assembling the 2k x 9 design matrix; the solution is the
//! eigenvector of A^T A for its smallest eigenvalue. Rank deficiency beyond
//! the expected one-dimensional null space reports a degenerate
//! configuration.

use crate::error::{Error, Result};
use crate::geom::linalg::{symmetric_eigen, Mat3, Vec2};
use crate::scalar::{real, Real};

/// Invertible 3x3 homogeneous plane map, scaled so m[2][2] = 1 whenever that
/// entry is nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography<R> {
    pub m: Mat3<R>,
}

impl<R: Real> Homography<R> {
    /// Wraps and normalises a matrix, rejecting non-invertible ones.
    pub fn new(m: Mat3<R>) -> Result<Self> {
        let eps = real::<R>(1e-12);
        if m.det().abs() <= eps {
            return Err(Error::Degenerate("homography matrix is singular".into()));
        }
        let mut m = m;
        let scale = m.m[2][2];
        if scale.abs() > eps {
            for row in m.m.iter_mut() {
                for cell in row.iter_mut() {
                    *cell /= scale;
                }
            }
        }
        Ok(Homography { m })
    }

    /// Applies the map. Errors when the point lands on the line at infinity.
    pub fn apply(&self, p: Vec2<R>) -> Result<Vec2<R>> {
        let m = &self.m.m;
        let w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
        if w.abs() < real::<R>(1e-15) {
            return Err(Error::Degenerate(format!(
                "point ({}, {}) maps to infinity",
                p.x, p.y
            )));
        }
        Ok(Vec2::new(
            (m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w,
            (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w,
        ))
    }

    pub fn inverse(&self) -> Result<Homography<R>> {
        let inv = self
            .m
            .inverse(real(1e-12))
            .ok_or_else(|| Error::Degenerate("homography matrix is singular".into()))?;
        Homography::new(inv)
    }
}

/// Similarity transform sending a point set to zero centroid and mean
/// distance sqrt(2). Degenerate (coincident) sets are rejected.
fn normalising_transform<R: Real>(points: &[Vec2<R>]) -> Result<Mat3<R>> {
    let n = real::<R>(points.len() as f64);
    let mut centroid = Vec2::zero();
    for p in points {
        centroid = centroid + *p;
    }
    centroid = centroid.scale(R::one() / n);
    let mean_dist = points.iter().map(|p| p.distance(centroid)).sum::<R>() / n;
    if mean_dist < real::<R>(1e-12) {
        return Err(Error::Degenerate(
            "all correspondence points coincide".into(),
        ));
    }
    let s = real::<R>(std::f64::consts::SQRT_2) / mean_dist;
    Ok(Mat3::from_rows(
        [s, R::zero(), -s * centroid.x],
        [R::zero(), s, -s * centroid.y],
        [R::zero(), R::zero(), R::one()],
    ))
}

fn apply_affine<R: Real>(t: &Mat3<R>, p: Vec2<R>) -> Vec2<R> {
    Vec2::new(
        t.m[0][0] * p.x + t.m[0][1] * p.y + t.m[0][2],
        t.m[1][0] * p.x + t.m[1][1] * p.y + t.m[1][2],
    )
}

/// Estimates the homography sending `pairs[i].0` to `pairs[i].1` and reports
/// the root-mean-square transfer residual over the input pairs.
///
/// Requires at least four pairs; configurations whose design matrix keeps
/// more than a one-dimensional null space (e.g. collinear points) are
/// rejected as degenerate.
pub fn estimate_homography<R: Real>(pairs: &[(Vec2<R>, Vec2<R>)]) -> Result<(Homography<R>, R)> {
    if pairs.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "homography estimation needs at least 4 point pairs, got {}",
            pairs.len()
        )));
    }
    let src: Vec<Vec2<R>> = pairs.iter().map(|p| p.0).collect();
    let dst: Vec<Vec2<R>> = pairs.iter().map(|p| p.1).collect();
    let t_src = normalising_transform(&src)?;
    let t_dst = normalising_transform(&dst)?;

    // Accumulate A^T A directly; A has two rows per pair.
    let mut ata = [[R::zero(); 9]; 9];
    let mut add_row = |row: [R; 9]| {
        for i in 0..9 {
            for j in i..9 {
                ata[i][j] += row[i] * row[j];
            }
        }
    };
    for (s, d) in src.iter().zip(dst.iter()) {
        let s = apply_affine(&t_src, *s);
        let d = apply_affine(&t_dst, *d);
        let zero = R::zero();
        let one = R::one();
        add_row([
            -s.x, -s.y, -one, zero, zero, zero, d.x * s.x, d.x * s.y, d.x,
        ]);
        add_row([
            zero, zero, zero, -s.x, -s.y, -one, d.y * s.x, d.y * s.y, d.y,
        ]);
    }
    for i in 0..9 {
        for j in 0..i {
            ata[i][j] = ata[j][i];
        }
    }

    let (values, vectors) = symmetric_eigen::<R, 9>(&ata);
    // One vanishing eigenvalue is the solution; a second one means the
    // correspondences do not pin down the map.
    let scale = values[8].max(R::one());
    if values[1] <= scale * real::<R>(1e-10) {
        return Err(Error::Degenerate(
            "correspondences are rank deficient (collinear or repeated points)".into(),
        ));
    }
    let h = vectors[0];
    let h_norm = Mat3::from_rows(
        [h[0], h[1], h[2]],
        [h[3], h[4], h[5]],
        [h[6], h[7], h[8]],
    );

    // Undo the normalisation: H = T_dst^-1 H_norm T_src.
    let t_dst_inv = t_dst
        .inverse(real(1e-18))
        .ok_or_else(|| Error::Degenerate("normalising transform not invertible".into()))?;
    let h_full = t_dst_inv.mul(&h_norm).mul(&t_src);
    let homography = Homography::new(h_full)?;

    let mut sq_sum = R::zero();
    for (s, d) in src.iter().zip(dst.iter()) {
        let mapped = homography.apply(*s)?;
        let err = mapped.distance(*d);
        sq_sum += err * err;
    }
    let rms = (sq_sum / real::<R>(pairs.len() as f64)).sqrt();
    Ok((homography, rms))
}
