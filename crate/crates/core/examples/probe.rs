//! Scratch diagnostics for the realistic-corpus grasp criterion.

use truss_core::config::PipelineConfig;
use truss_core::grasp::ArcPolyline;
use truss_core::pipeline::{detect_image, grasp_valid_against_truth};
use truss_core::synth::{self, Difficulty};

fn main() {
    let cfg = PipelineConfig::default();
    let clearance = cfg.grasp.clearance_l();
    let scenes = synth::corpus(84, 5005, Difficulty::Realistic);
    let mut bad = 0;
    for (i, (_, img, truth)) in scenes.iter().enumerate() {
        let outcome = detect_image(img, &cfg, None);
        let Some(plan) = outcome.artifacts.plan.as_ref() else {
            println!("scene {i}: no plan: {:?}", outcome.detection.failure);
            continue;
        };
        if grasp_valid_against_truth(plan, &truth.geom, clearance) {
            continue;
        }
        bad += 1;
        let arc = ArcPolyline::new(&truth.geom.peduncle_px, truth.geom.px_per_mm);
        let s = arc.arc_of(plan.point_px);
        let mut arcs = truth.geom.junction_arcs_mm.clone();
        arcs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let min_clear = arcs
            .iter()
            .map(|a| (a - s).abs())
            .fold(f64::INFINITY, f64::min);
        let ped = outcome.artifacts.peduncle.as_ref().unwrap();
        let det_junctions = ped.junctions.len();
        // Distance from the plan point to the true peduncle polyline.
        let off_polyline = truth
            .geom
            .peduncle_px
            .iter()
            .map(|p| p.dist(plan.point_px))
            .fold(f64::INFINITY, f64::min);
        println!(
            "scene {i}: planned s_truth={s:.1} mm, min clearance {min_clear:.1} (need {clearance}), \
             junctions true={} det={det_junctions}, truth arcs {:?}, point-to-truth-polyline {off_polyline:.1}px, plan s_det={:.1}",
            truth.geom.junctions.len(),
            arcs.iter().map(|a| (a * 10.0).round() / 10.0).collect::<Vec<_>>(),
            plan.s_mm,
        );
        if bad > 12 {
            break;
        }
    }
    println!("total invalid: {bad}");
}
