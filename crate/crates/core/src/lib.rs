//! People counting from calibrated multi-camera video.
//!
//! The pipeline, in processing order:
//!
//! 1. [`motion`]: background subtraction combined with frame differencing,
//!    hysteresis binarisation, morphological closing and blob extraction.
//! 2. [`corners`]: eigenvalue-ratio corner detection restricted to movement
//!    blobs, with greedy minimum-distance suppression.
//! 3. [`geom`]: Tsai camera model, plane homographies and the common ground
//!    plane raster all views project into.
//! 4. [`regions`]: concentric distance regions around each camera, per-region
//!    perspective weights and the projection corrections for feature height.
//! 5. [`heads`]: boosted Haar cascade and a raw-pixel kernel classifier for
//!    head detection inside movement blobs.
//! 6. [`counting`]: weighted corner statistics to crowd estimates, per-region
//!    multi-view fusion, head correspondence and the error metric.
//! 7. [`synth`]: deterministic synthetic scene renderer used for end-to-end
//!    validation without recorded footage.
//!
//! [`pipeline`] chains the stages into whole-sequence runs and [`config`]
//! holds the plain-text run configuration the command line reads.
//!
//! Geometry and statistics are generic over the scalar type via [`Real`];
//! concrete f64 aliases for the main types are exported at the crate root.

pub mod config;
pub mod corners;
pub mod counting;
pub mod error;
pub mod frame;
pub mod geom;
pub mod heads;
pub mod imgio;
pub mod motion;
pub mod pipeline;
pub mod regions;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Real;

/// Identifier of one camera view within a scene.
pub type ViewId = u32;

pub type TsaiCamera64 = geom::TsaiCamera<f64>;
pub type TsaiCamera32 = geom::TsaiCamera<f32>;
pub type Homography64 = geom::Homography<f64>;
pub type Homography32 = geom::Homography<f32>;
pub type GroundPoint64 = geom::GroundPoint<f64>;
pub type GroundPlaneSpec64 = geom::GroundPlaneSpec<f64>;
pub type CornerConfig64 = corners::CornerConfig<f64>;
pub type CornerPoint64 = corners::CornerPoint<f64>;
pub type Cascade64 = heads::Cascade<f64>;
pub type KernelClassifier64 = heads::KernelClassifier<f64>;
pub type DetectionBox64 = heads::DetectionBox<f64>;
pub type ViewContext64 = pipeline::ViewContext<f64>;
pub type AcppTable64 = pipeline::AcppTable<f64>;
pub type CountReport64 = counting::CountReport<f64>;
pub type SyntheticScene64 = synth::SyntheticScene<f64>;
