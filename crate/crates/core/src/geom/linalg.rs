//! Small fixed-size linear algebra.
//!
//! Only the pieces the geometry needs: 2/3-vectors, 3x3 matrices and a cyclic
//! Jacobi eigensolver for small symmetric matrices (used by the homography
//! fit). Kept local so everything stays generic over the scalar type.

use crate::scalar::{real, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2<R> {
    pub x: R,
    pub y: R,
}

impl<R: Real> Vec2<R> {
    #[inline]
    pub fn new(x: R, y: R) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Vec2 { x: R::zero(), y: R::zero() }
    }

    #[inline]
    pub fn norm(self) -> R {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dot(self, o: Vec2<R>) -> R {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn scale(self, s: R) -> Self {
        Vec2 { x: self.x * s, y: self.y * s }
    }

    #[inline]
    pub fn distance(self, o: Vec2<R>) -> R {
        (self - o).norm()
    }
}

impl<R: Real> std::ops::Add for Vec2<R> {
    type Output = Vec2<R>;

    fn add(self, o: Vec2<R>) -> Vec2<R> {
        Vec2 { x: self.x + o.x, y: self.y + o.y }
    }
}

impl<R: Real> std::ops::Sub for Vec2<R> {
    type Output = Vec2<R>;

    fn sub(self, o: Vec2<R>) -> Vec2<R> {
        Vec2 { x: self.x - o.x, y: self.y - o.y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3<R> {
    pub x: R,
    pub y: R,
    pub z: R,
}

impl<R: Real> Vec3<R> {
    #[inline]
    pub fn new(x: R, y: R, z: R) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn norm(self) -> R {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    #[inline]
    pub fn dot(self, o: Vec3<R>) -> R {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3<R>) -> Vec3<R> {
        Vec3 {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    #[inline]
    pub fn scale(self, s: R) -> Self {
        Vec3 { x: self.x * s, y: self.y * s, z: self.z * s }
    }

    pub fn normalized(self) -> Option<Vec3<R>> {
        let n = self.norm();
        (n > R::zero()).then(|| self.scale(R::one() / n))
    }
}

impl<R: Real> std::ops::Add for Vec3<R> {
    type Output = Vec3<R>;

    fn add(self, o: Vec3<R>) -> Vec3<R> {
        Vec3 { x: self.x + o.x, y: self.y + o.y, z: self.z + o.z }
    }
}

impl<R: Real> std::ops::Sub for Vec3<R> {
    type Output = Vec3<R>;

    fn sub(self, o: Vec3<R>) -> Vec3<R> {
        Vec3 { x: self.x - o.x, y: self.y - o.y, z: self.z - o.z }
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<R> {
    pub m: [[R; 3]; 3],
}

impl<R: Real> Mat3<R> {
    pub fn identity() -> Self {
        let mut m = [[R::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = R::one();
        }
        Mat3 { m }
    }

    pub fn from_rows(r0: [R; 3], r1: [R; 3], r2: [R; 3]) -> Self {
        Mat3 { m: [r0, r1, r2] }
    }

    pub fn transpose(&self) -> Mat3<R> {
        let mut out = [[R::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[j][i] = self.m[i][j];
            }
        }
        Mat3 { m: out }
    }

    pub fn mul(&self, o: &Mat3<R>) -> Mat3<R> {
        let mut out = [[R::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = R::zero();
                for (k, row) in o.m.iter().enumerate() {
                    acc += self.m[i][k] * row[j];
                }
                out[i][j] = acc;
            }
        }
        Mat3 { m: out }
    }

    pub fn mul_vec(&self, v: Vec3<R>) -> Vec3<R> {
        Vec3 {
            x: self.m[0][0] * v.x + self.m[0][1] * v.y + self.m[0][2] * v.z,
            y: self.m[1][0] * v.x + self.m[1][1] * v.y + self.m[1][2] * v.z,
            z: self.m[2][0] * v.x + self.m[2][1] * v.y + self.m[2][2] * v.z,
        }
    }

    pub fn det(&self) -> R {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse via the adjugate; `None` when |det| <= `eps`.
    pub fn inverse(&self, eps: R) -> Option<Mat3<R>> {
        let d = self.det();
        if d.abs() <= eps {
            return None;
        }
        let m = &self.m;
        let inv_d = R::one() / d;
        let mut out = [[R::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                // Cofactor of (j, i), transposed into (i, j).
                let r0 = (j + 1) % 3;
                let r1 = (j + 2) % 3;
                let c0 = (i + 1) % 3;
                let c1 = (i + 2) % 3;
                out[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) * inv_d;
            }
        }
        Some(Mat3 { m: out })
    }

    pub fn rotation_x(angle: R) -> Mat3<R> {
        let (s, c) = angle.sin_cos();
        Mat3::from_rows(
            [R::one(), R::zero(), R::zero()],
            [R::zero(), c, -s],
            [R::zero(), s, c],
        )
    }

    pub fn rotation_y(angle: R) -> Mat3<R> {
        let (s, c) = angle.sin_cos();
        Mat3::from_rows(
            [c, R::zero(), s],
            [R::zero(), R::one(), R::zero()],
            [-s, R::zero(), c],
        )
    }

    pub fn rotation_z(angle: R) -> Mat3<R> {
        let (s, c) = angle.sin_cos();
        Mat3::from_rows(
            [c, -s, R::zero()],
            [s, c, R::zero()],
            [R::zero(), R::zero(), R::one()],
        )
    }
}

/// Eigendecomposition of a small symmetric matrix by cyclic Jacobi rotations.
///
/// Returns (eigenvalues, eigenvectors) with `vectors[i]` the unit eigenvector
/// for `values[i]`, both ordered ascending by eigenvalue. Convergence to
/// machine precision takes a handful of sweeps for N <= 9.
pub fn symmetric_eigen<R: Real, const N: usize>(a: &[[R; N]; N]) -> ([R; N], [[R; N]; N]) {
    let mut a = *a;
    let mut v = [[R::zero(); N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = R::one();
    }

    let eps = real::<R>(1e-30);
    for _sweep in 0..64 {
        let mut off = R::zero();
        for i in 0..N {
            for j in i + 1..N {
                off += a[i][j] * a[i][j];
            }
        }
        if off <= eps {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                if a[p][q].abs() <= R::zero() {
                    continue;
                }
                // Classic Jacobi rotation annihilating a[p][q].
                let theta = (a[q][q] - a[p][p]) / (real::<R>(2.0) * a[p][q]);
                let t = {
                    let sign = if theta >= R::zero() { R::one() } else { -R::one() };
                    sign / (theta.abs() + (theta * theta + R::one()).sqrt())
                };
                let c = R::one() / (t * t + R::one()).sqrt();
                let s = t * c;

                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: [usize; N] = [0; N];
    for (i, slot) in order.iter_mut().enumerate() {
        *slot = i;
    }
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap_or(std::cmp::Ordering::Equal));

    let mut values = [R::zero(); N];
    let mut vectors = [[R::zero(); N]; N];
    for (rank, &idx) in order.iter().enumerate() {
        values[rank] = a[idx][idx];
        for k in 0..N {
            vectors[rank][k] = v[k][idx];
        }
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matrix_inverse_round_trip() {
        let m = Mat3::from_rows([2.0, 1.0, 0.5], [0.0, 3.0, -1.0], [1.0, 0.0, 4.0]);
        let inv = m.inverse(1e-12).unwrap();
        let id = m.mul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(id.m[i][j], expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let m = Mat3::from_rows([1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]);
        assert!(m.inverse(1e-12).is_none());
    }

    #[test]
    fn rotations_are_orthonormal() {
        for angle in [-1.2f64, 0.0, 0.4, 2.9] {
            for rot in [
                Mat3::rotation_x(angle),
                Mat3::rotation_y(angle),
                Mat3::rotation_z(angle),
            ] {
                let should_be_id = rot.mul(&rot.transpose());
                for i in 0..3 {
                    for j in 0..3 {
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert_relative_eq!(should_be_id.m[i][j], expect, epsilon = 1e-14);
                    }
                }
                assert_relative_eq!(rot.det(), 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // diag(1, 2, 3) conjugated by a rotation keeps its eigenvalues.
        let rot = Mat3::rotation_x(0.7).mul(&Mat3::rotation_z(-0.3));
        let diag = Mat3::from_rows([1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]);
        let sym = rot.mul(&diag).mul(&rot.transpose());
        let (values, vectors) = symmetric_eigen::<f64, 3>(&sym.m);
        assert_relative_eq!(values[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(values[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(values[2], 3.0, epsilon = 1e-12);
        // A v = lambda v for each pair.
        for (lambda, vec) in values.iter().zip(vectors.iter()) {
            let av = sym.mul_vec(Vec3::new(vec[0], vec[1], vec[2]));
            assert_relative_eq!(av.x, lambda * vec[0], epsilon = 1e-10);
            assert_relative_eq!(av.y, lambda * vec[1], epsilon = 1e-10);
            assert_relative_eq!(av.z, lambda * vec[2], epsilon = 1e-10);
        }
    }

    #[test]
    fn jacobi_handles_larger_random_symmetric() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let mut a = [[0.0f64; 9]; 9];
            for i in 0..9 {
                for j in i..9 {
                    let v = rng.gen_range(-1.0..1.0);
                    a[i][j] = v;
                    a[j][i] = v;
                }
            }
            let (values, vectors) = symmetric_eigen::<f64, 9>(&a);
            for w in values.windows(2) {
                assert!(w[0] <= w[1] + 1e-12);
            }
            for (lambda, vec) in values.iter().zip(vectors.iter()) {
                // Unit norm and A v = lambda v.
                let norm: f64 = vec.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert_relative_eq!(norm, 1.0, epsilon = 1e-10);
                for i in 0..9 {
                    let av: f64 = (0..9).map(|j| a[i][j] * vec[j]).sum();
                    assert_relative_eq!(av, lambda * vec[i], epsilon = 1e-9);
                }
            }
        }
    }
}
