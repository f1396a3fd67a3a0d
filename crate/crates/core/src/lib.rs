//! Geometric feature detection and caging-grasp planning for vine-tomato
//! trusses on a uniform background.
//!
//! Pipeline stages:
//!
//! 1. **imgproc** – a*/hue color segmentation (seeded k-means), morphological
//!    denoising, rotated-rectangle crop.
//! 2. **tomato** – Canny edges on the tomato class, circle Hough transform,
//!    50% segment-overlap filter, volume-weighted center of mass.
//! 3. **skeleton** – topology-preserving thinning, junction/tail graph
//!    extraction, 10 mm spur pruning.
//! 4. **peduncle** – longest curvature-limited path search.
//! 5. **grasp** – caging conditions, junction-clearance space condition,
//!    balance condition, 3D pose and waypoint sequence.
//! 6. **synth** / **eval** – synthetic scene corpus with analytic ground
//!    truth and the TPR/FDR + error metrics used to score detections.
//! 7. **pipeline** – end-to-end orchestration with per-stage timing and
//!    failure accounting.

pub mod config;
pub mod error;
pub mod eval;
pub mod geom;
pub mod grasp;
pub mod imgproc;
pub mod io;
pub mod overlay;
pub mod peduncle;
pub mod pipeline;
pub mod skeleton;
pub mod synth;
pub mod tomato;

pub use config::PipelineConfig;
pub use geom::{Point2, Pose3, RotatedRect};

/// Re-exported image buffer type used as the pipeline input carrier.
pub use image::RgbImage;
