//! Pipeline configuration: every stage parameter in one validated,
//! TOML-loadable structure. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::grasp::{EndEffectorModel, EndpointBoundPolicy, GraspConstraints, PosePlanning, Workspace};
use crate::imgproc::ClassHues;
use crate::peduncle::CurvatureReference;
use crate::tomato::HoughConfig;

/// Whether segmentation thresholds are fitted per image or once on the
/// first (calibration) image of a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    PerImage,
    Calibration,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmentationConfig {
    pub kmeans_seed: u64,
    pub threshold_mode: ThresholdMode,
    pub background_hue_deg: f64,
    pub stem_hue_deg: f64,
    pub tomato_hue_deg: f64,
    pub min_blob_px: usize,
    pub kernel_radius_px: u32,
    pub crop_margin_px: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        let hues = ClassHues::default();
        Self {
            kmeans_seed: 1,
            threshold_mode: ThresholdMode::PerImage,
            background_hue_deg: hues.background_deg,
            stem_hue_deg: hues.stem_deg,
            tomato_hue_deg: hues.tomato_deg,
            min_blob_px: 25,
            kernel_radius_px: 2,
            crop_margin_px: 5.0,
        }
    }
}

impl SegmentationConfig {
    pub fn class_hues(&self) -> ClassHues {
        ClassHues {
            background_deg: self.background_hue_deg,
            stem_deg: self.stem_hue_deg,
            tomato_deg: self.tomato_hue_deg,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TomatoConfig {
    pub radius_min_mm: f64,
    pub radius_max_mm: f64,
    pub min_center_dist_mm: f64,
    pub accumulator_resolution: f64,
    pub edge_sensitivity: f64,
    pub vote_threshold: f64,
}

impl Default for TomatoConfig {
    fn default() -> Self {
        Self {
            radius_min_mm: 12.0,
            radius_max_mm: 24.0,
            min_center_dist_mm: 20.0,
            accumulator_resolution: 1.0,
            edge_sensitivity: 0.25,
            vote_threshold: 0.35,
        }
    }
}

impl TomatoConfig {
    pub fn hough(&self, px_per_mm: f64) -> HoughConfig {
        HoughConfig {
            r_min: self.radius_min_mm * px_per_mm,
            r_max: self.radius_max_mm * px_per_mm,
            min_center_dist: self.min_center_dist_mm * px_per_mm,
            accumulator_resolution: self.accumulator_resolution,
            edge_sensitivity: self.edge_sensitivity,
            vote_threshold: self.vote_threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SkeletonConfig {
    pub prune_len_mm: f64,
}

impl Default for SkeletonConfig {
    fn default() -> Self {
        Self { prune_len_mm: 10.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeduncleConfig {
    pub max_curvature_deg: f64,
    pub curvature_reference: CurvatureReference,
}

impl Default for PeduncleConfig {
    fn default() -> Self {
        Self {
            max_curvature_deg: 45.0,
            curvature_reference: CurvatureReference::WholePath,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraspConfig {
    pub end_effector: EndEffectorModel,
    /// Junction clearance L, mm. Defaults to end-effector width + 20.
    pub clearance_l_mm: Option<f64>,
    /// Extra clearance used during planning to absorb detection error.
    pub junction_safety_margin_mm: f64,
    pub min_peduncle_diameter_mm: f64,
    pub endpoint_bounds: EndpointBoundPolicy,
    /// Reject grasps whose gripper footprint hits tomatoes or other stems.
    pub clearance_check: bool,
    pub planning: PosePlanning,
}

impl Default for GraspConfig {
    fn default() -> Self {
        Self {
            end_effector: EndEffectorModel {
                length_mm: 90.0,
                width_mm: 15.0,
                fingertip_height_mm: 20.0,
                fingertip_thickness_mm: 4.0,
                fingertip_distance_mm: 0.0,
                max_opening_mm: 74.0,
                soft_pad: true,
            },
            clearance_l_mm: None,
            junction_safety_margin_mm: 4.0,
            min_peduncle_diameter_mm: 1.0,
            endpoint_bounds: EndpointBoundPolicy::JunctionsOnly,
            clearance_check: false,
            planning: PosePlanning {
                surface_z_mm: 0.0,
                peduncle_height_mm: 20.0,
                approach_clearance_mm: 50.0,
                lift_height_mm: 80.0,
                place_x_mm: 0.0,
                place_y_mm: 0.0,
                tangent_window_mm: 5.0,
                workspace: Workspace {
                    x_mm: [-2000.0, 2000.0],
                    y_mm: [-2000.0, 2000.0],
                    z_mm: [0.0, 1000.0],
                },
            },
        }
    }
}

impl GraspConfig {
    /// Effective clearance L (spec default: gripper width + 20 mm).
    pub fn clearance_l(&self) -> f64 {
        self.clearance_l_mm
            .unwrap_or(self.end_effector.width_mm + 20.0)
    }

    pub fn constraints(&self, px_per_mm: f64) -> GraspConstraints {
        GraspConstraints {
            clearance_l_mm: self.clearance_l(),
            px_per_mm,
            min_peduncle_diameter_mm: self.min_peduncle_diameter_mm,
            endpoint_bounds: self.endpoint_bounds,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Tomato match radius as a fraction of the scene's mean true radius.
    pub tomato_match_factor: f64,
    pub junction_match_mm: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            tomato_match_factor: 0.5,
            junction_match_mm: 5.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Wall-clock timings make outputs nondeterministic, so serialized
    /// results omit them unless explicitly enabled.
    pub include_timings: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub px_per_mm: PxPerMm,
    pub segmentation: SegmentationConfig,
    pub tomato: TomatoConfig,
    pub skeleton: SkeletonConfig,
    pub peduncle: PeduncleConfig,
    pub grasp: GraspConfig,
    pub eval: EvalConfig,
    pub output: OutputConfig,
}

/// Camera scale calibration (fixed camera height).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PxPerMm {
    pub px_per_mm: f64,
}

impl Default for PxPerMm {
    fn default() -> Self {
        Self { px_per_mm: 2.0 }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn scale(&self) -> f64 {
        self.px_per_mm.px_per_mm
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: String| Err(ConfigError::Invalid(m));
        if self.scale() <= 0.0 {
            return err("px_per_mm must be positive".into());
        }
        if let Err(m) = self.tomato.hough(self.scale()).validate() {
            return err(m);
        }
        if let Err(m) = self.grasp.end_effector.validate() {
            return err(m);
        }
        if let Err(m) = self
            .grasp
            .constraints(self.scale())
            .validate(&self.grasp.end_effector)
        {
            return err(m);
        }
        if self.grasp.junction_safety_margin_mm < 0.0 {
            return err("junction_safety_margin_mm must be non-negative".into());
        }
        if !(0.0 < self.peduncle.max_curvature_deg && self.peduncle.max_curvature_deg <= 90.0) {
            return err("max_curvature_deg must lie in (0, 90]".into());
        }
        if self.skeleton.prune_len_mm < 0.0 {
            return err("prune_len_mm must be non-negative".into());
        }
        if self.segmentation.kernel_radius_px < 1 {
            return err("kernel_radius_px must be at least 1".into());
        }
        if !(0.0 < self.eval.tomato_match_factor) {
            return err("tomato_match_factor must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        PipelineConfig::default().validate().unwrap();
    }

    #[test]
    fn default_clearance_is_width_plus_margin() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.grasp.clearance_l(), cfg.grasp.end_effector.width_mm + 20.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        let toml = "[segmentation]\nnot_a_key = 3\n";
        assert!(PipelineConfig::from_toml(toml).is_err());
    }

    #[test]
    fn partial_toml_overrides_defaults() {
        let toml = "[px_per_mm]\npx_per_mm = 3.5\n\n[skeleton]\nprune_len_mm = 12.0\n";
        let cfg = PipelineConfig::from_toml(toml).unwrap();
        assert_eq!(cfg.scale(), 3.5);
        assert_eq!(cfg.skeleton.prune_len_mm, 12.0);
        assert_eq!(cfg.segmentation.min_blob_px, 25);
    }

    #[test]
    fn invalid_values_rejected() {
        let toml = "[tomato]\nradius_min_mm = 30.0\nradius_max_mm = 10.0\n";
        assert!(matches!(
            PipelineConfig::from_toml(toml),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn config_roundtrips_through_toml() {
        let cfg = PipelineConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back = PipelineConfig::from_toml(&text).unwrap();
        assert_eq!(back.scale(), cfg.scale());
        assert_eq!(back.grasp.clearance_l(), cfg.grasp.clearance_l());
    }
}
