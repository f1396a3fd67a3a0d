//! End-to-end orchestration: segmentation, tomato and peduncle detection,
//! grasp planning, per-stage timing and corpus evaluation.

use std::time::Instant;

use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, ThresholdMode};
use crate::eval::{error_stats, match_points, metrics, ErrorStats, EvalCounts, MatchedPair};
use crate::geom::{Point2, RotatedRect};
use crate::grasp::{self, ArcPolyline, GraspPlan};
use crate::imgproc::{self, LabelMask, SegmentationThresholds};
use crate::peduncle::{self, PeduncleResult};
use crate::skeleton::{self, StemGraph};
use crate::synth::TrussGeometry;
use crate::tomato::{self, TomatoCircle};

pub const SCHEMA_VERSION: u32 = 1;

/// Stage tag carried by every pipeline failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureStage {
    Segmentation,
    Tomato,
    Peduncle,
    Planning,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Failure {
    pub stage: FailureStage,
    pub message: String,
}

/// Wall-clock stage timings, milliseconds.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct StageTimings {
    pub segmentation_ms: f64,
    pub tomato_ms: f64,
    pub peduncle_ms: f64,
    pub planning_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TomatoOut {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeduncleOut {
    pub polyline: Vec<[f64; 2]>,
    pub junctions: Vec<[f64; 2]>,
    pub length_mm: f64,
}

/// Serializable per-image detection result. All coordinates are in the
/// source-image pixel frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Detection {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    pub tomatoes: Vec<TomatoOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub com_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub com_y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peduncle: Option<PeduncleOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grasp: Option<GraspPlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<StageTimings>,
}

/// Intermediate artifacts kept for overlays and evaluation.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub mask: Option<LabelMask>,
    pub crop_rect: Option<RotatedRect>,
    pub cropped_mask: Option<LabelMask>,
    pub graph: Option<StemGraph>,
    /// Peduncle in source-image coordinates.
    pub peduncle: Option<PeduncleResult>,
    pub circles: Vec<TomatoCircle>,
    pub com: Option<Point2>,
    pub candidates: Vec<grasp::CandidateSegment>,
    pub plan: Option<GraspPlan>,
}

/// Full outcome of one pipeline run.
#[derive(Debug)]
pub struct DetectionOutcome {
    pub detection: Detection,
    pub timings: StageTimings,
    pub artifacts: Artifacts,
}

fn map_peduncle(p: &PeduncleResult, rect: &RotatedRect) -> PeduncleResult {
    PeduncleResult {
        path: p.path.clone(),
        junctions: p.junctions.iter().map(|&j| rect.crop_to_image(j)).collect(),
        polyline: grasp::smooth_polyline(
            &p.polyline
                .iter()
                .map(|&q| rect.crop_to_image(q))
                .collect::<Vec<_>>(),
            3,
        ),
    }
}

/// Run the full pipeline on one image. Stages follow the detection order:
/// image processing, tomato detection, peduncle detection, grasp planning.
/// The first failing stage is recorded and later stages are skipped.
pub fn detect_image(
    img: &RgbImage,
    cfg: &PipelineConfig,
    thresholds: Option<&SegmentationThresholds>,
) -> DetectionOutcome {
    let px_per_mm = cfg.scale();
    let mut timings = StageTimings::default();
    let mut artifacts = Artifacts::default();
    let mut detection = Detection {
        schema_version: SCHEMA_VERSION,
        image: None,
        tomatoes: Vec::new(),
        com_x: None,
        com_y: None,
        peduncle: None,
        grasp: None,
        failure: None,
        timings_ms: None,
    };
    let total_start = Instant::now();
    let fail = |detection: &mut Detection, stage, message: String| {
        detection.failure = Some(Failure { stage, message });
    };

    // Stage 1: segmentation, denoising, crop.
    let seg_start = Instant::now();
    let planes = imgproc::compute_channels(img);
    let fitted;
    let thr = match thresholds {
        Some(t) => t,
        None => {
            match imgproc::fit_thresholds(
                &planes,
                cfg.segmentation.kmeans_seed,
                &cfg.segmentation.class_hues(),
            ) {
                Ok(t) => {
                    fitted = t;
                    &fitted
                }
                Err(e) => {
                    fail(&mut detection, FailureStage::Segmentation, e.to_string());
                    timings.segmentation_ms = seg_start.elapsed().as_secs_f64() * 1e3;
                    timings.total_ms = total_start.elapsed().as_secs_f64() * 1e3;
                    return DetectionOutcome {
                        detection,
                        timings,
                        artifacts,
                    };
                }
            }
        }
    };
    let mask = imgproc::denoise(
        &imgproc::segment(&planes, thr),
        cfg.segmentation.min_blob_px,
        cfg.segmentation.kernel_radius_px,
    );
    let crop_result = imgproc::crop(&mask, cfg.segmentation.crop_margin_px);
    artifacts.mask = Some(mask);
    let (cropped, rect) = match crop_result {
        Ok(v) => v,
        Err(e) => {
            fail(&mut detection, FailureStage::Segmentation, e.to_string());
            timings.segmentation_ms = seg_start.elapsed().as_secs_f64() * 1e3;
            timings.total_ms = total_start.elapsed().as_secs_f64() * 1e3;
            return DetectionOutcome {
                detection,
                timings,
                artifacts,
            };
        }
    };
    artifacts.crop_rect = Some(rect);
    artifacts.cropped_mask = Some(cropped.clone());
    timings.segmentation_ms = seg_start.elapsed().as_secs_f64() * 1e3;

    // Stage 2: tomato detection on the cropped mask.
    let tomato_start = Instant::now();
    let hough_cfg = cfg.tomato.hough(px_per_mm);
    let edges = tomato::detect_edges(&cropped, hough_cfg.edge_sensitivity);
    let circles_crop = tomato::filter_overlap(tomato::hough_circles(&edges, &hough_cfg), &cropped);
    let circles: Vec<TomatoCircle> = circles_crop
        .iter()
        .map(|c| TomatoCircle {
            center: rect.crop_to_image(c.center),
            radius: c.radius,
            votes: c.votes,
        })
        .collect();
    detection.tomatoes = circles
        .iter()
        .map(|c| TomatoOut {
            cx: c.center.x,
            cy: c.center.y,
            r: c.radius,
        })
        .collect();
    artifacts.circles = circles.clone();
    let com = match tomato::center_of_mass(&circles) {
        Ok(c) => {
            detection.com_x = Some(c.com.x);
            detection.com_y = Some(c.com.y);
            artifacts.com = Some(c.com);
            Some(c)
        }
        Err(_) => None,
    };
    timings.tomato_ms = tomato_start.elapsed().as_secs_f64() * 1e3;

    if com.is_none() {
        fail(
            &mut detection,
            FailureStage::Tomato,
            "no tomatoes detected".into(),
        );
        timings.total_ms = total_start.elapsed().as_secs_f64() * 1e3;
        return DetectionOutcome {
            detection,
            timings,
            artifacts,
        };
    }
    let com = com.unwrap();

    // Stage 3: peduncle detection.
    let ped_start = Instant::now();
    let ped_crop = skeletonize_and_search(&cropped, cfg, px_per_mm);
    let (graph, ped_crop) = match ped_crop {
        Ok(v) => v,
        Err(msg) => {
            fail(&mut detection, FailureStage::Peduncle, msg);
            timings.peduncle_ms = ped_start.elapsed().as_secs_f64() * 1e3;
            timings.total_ms = total_start.elapsed().as_secs_f64() * 1e3;
            return DetectionOutcome {
                detection,
                timings,
                artifacts,
            };
        }
    };
    let ped_img = map_peduncle(&ped_crop, &rect);
    detection.peduncle = Some(PeduncleOut {
        polyline: ped_img.polyline.iter().map(|p| [p.x, p.y]).collect(),
        junctions: ped_img.junctions.iter().map(|p| [p.x, p.y]).collect(),
        length_mm: ped_img.path.length / px_per_mm,
    });
    timings.peduncle_ms = ped_start.elapsed().as_secs_f64() * 1e3;

    // Stage 4: grasp planning in the source-image frame.
    let plan_start = Instant::now();
    let gc = cfg.grasp.constraints(px_per_mm);
    let mut gc_planning = gc.clone();
    // Plan against a slightly larger clearance to absorb detection error.
    gc_planning.clearance_l_mm = gc.clearance_l_mm + cfg.grasp.junction_safety_margin_mm;
    let dissolved: Vec<Point2> = graph
        .dissolved_junctions
        .iter()
        .map(|&p| rect.crop_to_image(p))
        .collect();
    let cands = grasp::candidate_segments(&ped_img, &gc_planning, &dissolved);
    artifacts.candidates = cands.clone();

    let diameter_mm = grasp::estimate_peduncle_diameter(&cropped, &ped_crop, px_per_mm);
    let planning_result = (|| -> Result<GraspPlan, String> {
        if !grasp::check_soft_caging(diameter_mm, &cfg.grasp.end_effector) {
            return Err(format!(
                "soft caging unsatisfied: peduncle diameter {diameter_mm:.1} mm \
                 not above fingertip distance {:.1} mm",
                cfg.grasp.end_effector.fingertip_distance_mm
            ));
        }
        let (s, _) = if cfg.grasp.clearance_check {
            select_with_clearance(&cands, &com, &ped_img, &gc, cfg, &circles)
                .map_err(|e| e.to_string())?
        } else {
            grasp::select_grasp(&cands, &com, &ped_img, &gc).map_err(|e| e.to_string())?
        };
        grasp::plan_pose(
            s,
            &ped_img,
            &cfg.grasp.end_effector,
            &cfg.grasp.planning,
            &gc,
            None,
        )
        .map_err(|e| e.to_string())
    })();
    match planning_result {
        Ok(plan) => {
            artifacts.plan = Some(plan.clone());
            detection.grasp = Some(plan);
        }
        Err(msg) => fail(&mut detection, FailureStage::Planning, msg),
    }
    artifacts.peduncle = Some(ped_img);
    timings.planning_ms = plan_start.elapsed().as_secs_f64() * 1e3;
    timings.total_ms = total_start.elapsed().as_secs_f64() * 1e3;
    if cfg.output.include_timings {
        detection.timings_ms = Some(timings);
    }
    DetectionOutcome {
        detection,
        timings,
        artifacts,
    }
}

fn skeletonize_and_search(
    cropped: &LabelMask,
    cfg: &PipelineConfig,
    px_per_mm: f64,
) -> Result<(StemGraph, PeduncleResult), String> {
    let skel = skeleton::skeletonize(cropped).map_err(|e| e.to_string())?;
    let graph = skeleton::prune_spurs(
        &skeleton::build_graph(&skel),
        cfg.skeleton.prune_len_mm,
        px_per_mm,
    );
    let result = peduncle::find_peduncle(
        &graph,
        cfg.peduncle.max_curvature_deg.to_radians(),
        cfg.peduncle.curvature_reference,
    )
    .map_err(|e| e.to_string())?;
    Ok((graph, result))
}

/// Clearance-checked selection: try candidate minima in order of distance
/// to the center of mass until one footprint is unobstructed.
fn select_with_clearance(
    cands: &[grasp::CandidateSegment],
    com: &tomato::TrussCenterOfMass,
    ped: &PeduncleResult,
    gc: &grasp::GraspConstraints,
    cfg: &PipelineConfig,
    circles: &[TomatoCircle],
) -> Result<(f64, Point2), crate::error::GraspError> {
    let mut per_candidate: Vec<(f64, f64, Point2)> = Vec::new();
    for c in cands {
        let one = [*c];
        if let Ok((s, p)) = grasp::select_grasp(&one, com, ped, gc) {
            per_candidate.push((p.dist(com.com), s, p));
        }
    }
    per_candidate.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let arc = ArcPolyline::new(&ped.polyline, gc.px_per_mm);
    for (_, s, p) in per_candidate {
        let yaw = grasp::tangent_at(&arc, s, cfg.grasp.planning.tangent_window_mm);
        if grasp::gripper_clear(p, yaw, &cfg.grasp.end_effector, gc, circles, &[]) {
            return Ok((s, p));
        }
    }
    Err(crate::error::GraspError::NoValidGrasp)
}

/// Detect a batch. In calibration threshold mode the first image fits the
/// segmentation thresholds and the rest reuse them.
pub fn detect_batch(
    images: &[(String, RgbImage)],
    cfg: &PipelineConfig,
) -> Vec<DetectionOutcome> {
    let mut calibrated: Option<SegmentationThresholds> = None;
    if cfg.segmentation.threshold_mode == ThresholdMode::Calibration {
        if let Some((_, first)) = images.first() {
            let planes = imgproc::compute_channels(first);
            calibrated = imgproc::fit_thresholds(
                &planes,
                cfg.segmentation.kmeans_seed,
                &cfg.segmentation.class_hues(),
            )
            .ok();
        }
    }
    images
        .iter()
        .map(|(name, img)| {
            let mut out = detect_image(img, cfg, calibrated.as_ref());
            out.detection.image = Some(name.clone());
            out
        })
        .collect()
}

/// Per-feature evaluation block of the corpus report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureReport {
    pub counts: EvalCounts,
    pub location_error: ErrorStats,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraspReport {
    pub scenes: usize,
    pub planned: usize,
    pub yield_rate: f64,
    /// Plans whose grasp point clears every true junction by at least L and
    /// has true junctions on both sides.
    pub valid_against_truth: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuntimeReport {
    pub mean_ms: f64,
    pub std_ms: f64,
    pub median_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneFailure {
    pub scene: usize,
    pub stage: FailureStage,
    pub message: String,
}

/// Corpus evaluation report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub scenes: usize,
    pub tomato: FeatureReport,
    pub radius_error: ErrorStats,
    pub junction: FeatureReport,
    pub com_error: ErrorStats,
    pub grasp: GraspReport,
    pub failures: Vec<SceneFailure>,
    /// Matching thresholds used, for reproducibility.
    pub tomato_match_factor: f64,
    pub junction_match_mm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime: Option<RuntimeReport>,
}

/// Run detection on every scene and score it against the analytic truth.
pub fn evaluate_corpus(
    scenes: &[(RgbImage, TrussGeometry)],
    cfg: &PipelineConfig,
) -> EvalReport {
    let px_per_mm = cfg.scale();
    let mut tomato_tp = 0;
    let mut tomato_fp = 0;
    let mut tomato_fn = 0;
    let mut center_pairs: Vec<MatchedPair> = Vec::new();
    let mut radius_pairs: Vec<MatchedPair> = Vec::new();
    let mut junction_tp = 0;
    let mut junction_fp = 0;
    let mut junction_fn = 0;
    let mut junction_pairs: Vec<MatchedPair> = Vec::new();
    let mut com_pairs: Vec<MatchedPair> = Vec::new();
    let mut failures = Vec::new();
    let mut planned = 0usize;
    let mut valid_truth = 0usize;
    let mut latencies: Vec<f64> = Vec::new();

    for (idx, (img, truth)) in scenes.iter().enumerate() {
        let outcome = detect_image(img, cfg, None);
        latencies.push(outcome.timings.total_ms);
        if let Some(f) = &outcome.detection.failure {
            failures.push(SceneFailure {
                scene: idx,
                stage: f.stage,
                message: f.message.clone(),
            });
        }

        // Tomatoes.
        let detected: Vec<Point2> = outcome
            .artifacts
            .circles
            .iter()
            .map(|c| c.center)
            .collect();
        let truth_pts: Vec<Point2> = truth.tomatoes.iter().map(|t| t.center).collect();
        let mean_r = if truth.tomatoes.is_empty() {
            0.0
        } else {
            truth.tomatoes.iter().map(|t| t.radius).sum::<f64>() / truth.tomatoes.len() as f64
        };
        let max_dist = cfg.eval.tomato_match_factor * mean_r;
        let (pairs, fps, fns) = match_points(&detected, &truth_pts, max_dist);
        tomato_tp += pairs.len();
        tomato_fp += fps.len();
        tomato_fn += fns.len();
        for p in &pairs {
            center_pairs.push(*p);
            let dr = (outcome.artifacts.circles[p.detected].radius
                - truth.tomatoes[p.truth].radius)
                .abs();
            radius_pairs.push(MatchedPair {
                detected: p.detected,
                truth: p.truth,
                dist_px: dr,
            });
        }

        // Center of mass.
        if let Some(com) = outcome.artifacts.com {
            com_pairs.push(MatchedPair {
                detected: 0,
                truth: 0,
                dist_px: com.dist(truth.com),
            });
        }

        // Junctions.
        if let Some(ped) = &outcome.artifacts.peduncle {
            let jd: Vec<Point2> = ped.junctions.clone();
            let (jp, jfp, jfn) =
                match_points(&jd, &truth.junctions, cfg.eval.junction_match_mm * px_per_mm);
            junction_tp += jp.len();
            junction_fp += jfp.len();
            junction_fn += jfn.len();
            junction_pairs.extend(jp);
        } else {
            junction_fn += truth.junctions.len();
        }

        // Grasp validity against the analytic truth.
        if let Some(plan) = &outcome.artifacts.plan {
            planned += 1;
            if grasp_valid_against_truth(plan, truth, cfg.grasp.clearance_l()) {
                valid_truth += 1;
            }
        }
    }

    latencies.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let runtime = if cfg.output.include_timings && !latencies.is_empty() {
        let n = latencies.len();
        let mean = latencies.iter().sum::<f64>() / n as f64;
        let var = latencies.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / n as f64;
        Some(RuntimeReport {
            mean_ms: mean,
            std_ms: var.sqrt(),
            median_ms: latencies[n / 2],
        })
    } else {
        None
    };

    EvalReport {
        schema_version: SCHEMA_VERSION,
        scenes: scenes.len(),
        tomato: FeatureReport {
            counts: metrics(tomato_tp, tomato_fp, tomato_fn),
            location_error: error_stats(&center_pairs, px_per_mm),
        },
        radius_error: error_stats(&radius_pairs, px_per_mm),
        junction: FeatureReport {
            counts: metrics(junction_tp, junction_fp, junction_fn),
            location_error: error_stats(&junction_pairs, px_per_mm),
        },
        com_error: error_stats(&com_pairs, px_per_mm),
        grasp: GraspReport {
            scenes: scenes.len(),
            planned,
            yield_rate: if scenes.is_empty() {
                0.0
            } else {
                planned as f64 / scenes.len() as f64
            },
            valid_against_truth: valid_truth,
        },
        failures,
        tomato_match_factor: cfg.eval.tomato_match_factor,
        junction_match_mm: cfg.eval.junction_match_mm,
        runtime,
    }
}

/// Check a plan against the analytic truth: the grasp point, projected onto
/// the true peduncle, must keep at least L of arc distance from every true
/// junction and have true junctions on both sides.
pub fn grasp_valid_against_truth(
    plan: &GraspPlan,
    truth: &TrussGeometry,
    clearance_l_mm: f64,
) -> bool {
    let arc = ArcPolyline::new(&truth.peduncle_px, truth.px_per_mm);
    let s = arc.arc_of(plan.point_px);
    let mut arcs = truth.junction_arcs_mm.clone();
    arcs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if arcs.is_empty() {
        return false;
    }
    let before = arcs.iter().any(|&a| a <= s);
    let after = arcs.iter().any(|&a| a >= s);
    let min_clear = arcs
        .iter()
        .map(|a| (a - s).abs())
        .fold(f64::INFINITY, f64::min);
    before && after && min_clear >= clearance_l_mm
}

/// Human-readable summary table of an evaluation report.
pub fn render_table(report: &EvalReport) -> String {
    fn rate(v: &Option<f64>) -> String {
        v.map_or("-".into(), |r| format!("{:.1}%", r * 100.0))
    }
    let mut s = String::new();
    s.push_str(&format!("scenes: {}\n", report.scenes));
    s.push_str(&format!(
        "{:<10} {:>4} {:>4} {:>4} {:>7} {:>7} {:>16}\n",
        "feature", "TP", "FP", "FN", "TPR", "FDR", "err mean±std mm"
    ));
    for (name, f) in [("tomato", &report.tomato), ("junction", &report.junction)] {
        s.push_str(&format!(
            "{:<10} {:>4} {:>4} {:>4} {:>7} {:>7} {:>10.2}±{:.2}\n",
            name,
            f.counts.true_positives,
            f.counts.false_positives,
            f.counts.false_negatives,
            rate(&f.counts.tpr),
            rate(&f.counts.fdr),
            f.location_error.mean_abs_mm,
            f.location_error.std_mm,
        ));
    }
    s.push_str(&format!(
        "radius error: {:.2}±{:.2} mm (n={})\n",
        report.radius_error.mean_abs_mm, report.radius_error.std_mm, report.radius_error.n
    ));
    s.push_str(&format!(
        "center of mass error: {:.2}±{:.2} mm (n={})\n",
        report.com_error.mean_abs_mm, report.com_error.std_mm, report.com_error.n
    ));
    s.push_str(&format!(
        "grasp pose yield: {:.1}% ({}/{}), valid against truth: {}\n",
        report.grasp.yield_rate * 100.0,
        report.grasp.planned,
        report.grasp.scenes,
        report.grasp.valid_against_truth,
    ));
    if let Some(rt) = &report.runtime {
        s.push_str(&format!(
            "runtime per image: {:.0}±{:.0} ms (median {:.0} ms)\n",
            rt.mean_ms, rt.std_ms, rt.median_ms
        ));
    }
    if !report.failures.is_empty() {
        s.push_str(&format!("failures ({}):\n", report.failures.len()));
        for f in &report.failures {
            s.push_str(&format!("  scene {}: {:?}: {}\n", f.scene, f.stage, f.message));
        }
    }
    s
}
