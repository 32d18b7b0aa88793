//! Camera and ground-plane geometry.

pub mod camera;
pub mod homography;
pub mod linalg;
pub mod plane;

pub use camera::{euler_zyx_angles, TsaiCamera};
pub use homography::{estimate_homography, Homography};
pub use linalg::{symmetric_eigen, Mat3, Vec2, Vec3};
pub use plane::{GroundPlaneSpec, GroundPoint, PointSource};
