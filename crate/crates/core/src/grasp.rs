//! Geometry-based caging grasp synthesis on the detected peduncle.
//!
//! The rigid-part caging condition holds when the enclosed section has a
//! junction on each side; the soft-part condition holds when the peduncle
//! diameter exceeds the closed fingertip distance. The space condition
//! shrinks every inter-junction interval by the clearance L, and the
//! balance condition picks the point of the surviving intervals closest to
//! the truss center of mass.

use serde::{Deserialize, Serialize};

use crate::error::GraspError;
use crate::geom::{fold_half_turn, Point2, Pose3, RotatedRect};
use crate::imgproc::{morph, Label, LabelMask};
use crate::peduncle::PeduncleResult;
use crate::tomato::{TomatoCircle, TrussCenterOfMass};

/// Parallel-gripper geometry, millimetres.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndEffectorModel {
    /// Gripper length l: finger span direction, across the peduncle.
    pub length_mm: f64,
    /// Gripper width w: along the peduncle.
    pub width_mm: f64,
    /// Fingertip height h_tip.
    pub fingertip_height_mm: f64,
    /// Fingertip thickness t_tip.
    pub fingertip_thickness_mm: f64,
    /// Controllable fingertip distance d_tip at full closure.
    pub fingertip_distance_mm: f64,
    pub max_opening_mm: f64,
    /// Fingers carry deformable pads (soft-part caging).
    pub soft_pad: bool,
}

impl EndEffectorModel {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("length_mm", self.length_mm),
            ("width_mm", self.width_mm),
            ("fingertip_height_mm", self.fingertip_height_mm),
            ("fingertip_thickness_mm", self.fingertip_thickness_mm),
        ] {
            if v <= 0.0 {
                return Err(format!("end effector {name} must be positive"));
            }
        }
        if self.fingertip_distance_mm < 0.0 {
            return Err("fingertip_distance_mm must be non-negative".into());
        }
        if self.fingertip_distance_mm > self.max_opening_mm {
            return Err("fingertip_distance_mm exceeds max_opening_mm".into());
        }
        Ok(())
    }
}

/// Whether peduncle-path endpoints may act as caging bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointBoundPolicy {
    /// Only detected junctions bound a caging section.
    JunctionsOnly,
    /// A path endpoint qualifies when a pruned junction sat there.
    PrunedJunction,
}

/// Space- and balance-condition parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraspConstraints {
    /// Minimum arc distance L from junctions, mm.
    pub clearance_l_mm: f64,
    pub px_per_mm: f64,
    pub min_peduncle_diameter_mm: f64,
    pub endpoint_bounds: EndpointBoundPolicy,
}

impl GraspConstraints {
    pub fn validate(&self, ee: &EndEffectorModel) -> Result<(), String> {
        if self.clearance_l_mm <= ee.width_mm {
            return Err(format!(
                "clearance L ({} mm) must exceed the end effector width ({} mm)",
                self.clearance_l_mm, ee.width_mm
            ));
        }
        if self.px_per_mm <= 0.0 {
            return Err("px_per_mm must be positive".into());
        }
        Ok(())
    }
}

/// An arc-length interval of the peduncle that satisfies the space and
/// rigid-caging conditions, with its bounding arcs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CandidateSegment {
    pub start_mm: f64,
    pub end_mm: f64,
    pub lower_bound_mm: f64,
    pub upper_bound_mm: f64,
}

/// Planned grasp: point, orientation, height and the waypoint sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraspPlan {
    /// Grasp point in source-image pixels.
    pub point_px: Point2,
    /// Arc position along the peduncle, mm.
    pub s_mm: f64,
    /// Peduncle tangent at the grasp point.
    pub yaw_rad: f64,
    /// Grasp height above the robot base frame, mm.
    pub z_mm: f64,
    pub pose: Pose3,
    /// Pre-grasp, grasp, lift, place.
    pub waypoints: Vec<Pose3>,
}

/// Pose construction parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosePlanning {
    pub surface_z_mm: f64,
    /// Constant peduncle height above the surface, measured beforehand.
    pub peduncle_height_mm: f64,
    pub approach_clearance_mm: f64,
    pub lift_height_mm: f64,
    pub place_x_mm: f64,
    pub place_y_mm: f64,
    /// Arc half-window for the tangent estimate, mm.
    pub tangent_window_mm: f64,
    pub workspace: Workspace,
}

/// Axis-aligned workspace bounds, mm.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workspace {
    pub x_mm: [f64; 2],
    pub y_mm: [f64; 2],
    pub z_mm: [f64; 2],
}

impl Workspace {
    fn contains(&self, x: f64, y: f64, z: f64) -> bool {
        x >= self.x_mm[0]
            && x <= self.x_mm[1]
            && y >= self.y_mm[0]
            && y <= self.y_mm[1]
            && z >= self.z_mm[0]
            && z <= self.z_mm[1]
    }
}

/// Arc-length parametrization of a pixel polyline.
pub struct ArcPolyline {
    points: Vec<Point2>,
    cum_mm: Vec<f64>,
}

impl ArcPolyline {
    pub fn new(points: &[Point2], px_per_mm: f64) -> Self {
        let mut cum = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in points.windows(2) {
            acc += w[0].dist(w[1]) / px_per_mm;
            cum.push(acc);
        }
        Self {
            points: points.to_vec(),
            cum_mm: cum,
        }
    }

    pub fn total_mm(&self) -> f64 {
        *self.cum_mm.last().unwrap_or(&0.0)
    }

    /// Interpolated point at arc position `s` (clamped to the polyline).
    pub fn point_at(&self, s_mm: f64) -> Point2 {
        if self.points.len() == 1 || s_mm <= 0.0 {
            return self.points[0];
        }
        if s_mm >= self.total_mm() {
            return *self.points.last().unwrap();
        }
        let i = match self
            .cum_mm
            .binary_search_by(|c| c.partial_cmp(&s_mm).unwrap())
        {
            Ok(i) => return self.points[i],
            Err(i) => i - 1,
        };
        let seg = self.cum_mm[i + 1] - self.cum_mm[i];
        let t = if seg > 0.0 { (s_mm - self.cum_mm[i]) / seg } else { 0.0 };
        let a = self.points[i];
        let b = self.points[i + 1];
        Point2::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)
    }

    /// Arc position of the polyline point nearest to `p`.
    pub fn arc_of(&self, p: Point2) -> f64 {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, q) in self.points.iter().enumerate() {
            let d = q.dist_sq(p);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        self.cum_mm[best]
    }
}

/// Box-smooth a polyline (endpoints pinned). Skeleton polylines are
/// 8-connected staircases whose raw arc length overestimates the true
/// curve length by up to 8%; smoothing removes most of that bias before
/// arc-length-based planning.
pub fn smooth_polyline(points: &[Point2], half_window: usize) -> Vec<Point2> {
    if points.len() <= 2 || half_window == 0 {
        return points.to_vec();
    }
    let n = points.len();
    (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                return points[i];
            }
            let lo = i.saturating_sub(half_window);
            let hi = (i + half_window).min(n - 1);
            let count = (hi - lo + 1) as f64;
            let sx: f64 = points[lo..=hi].iter().map(|p| p.x).sum();
            let sy: f64 = points[lo..=hi].iter().map(|p| p.y).sum();
            Point2::new(sx / count, sy / count)
        })
        .collect()
}

/// Arc positions of the peduncle junctions, ascending.
pub fn junction_arcs(p: &PeduncleResult, px_per_mm: f64) -> Vec<f64> {
    let arc = ArcPolyline::new(&p.polyline, px_per_mm);
    let mut arcs: Vec<f64> = p.junctions.iter().map(|&j| arc.arc_of(j)).collect();
    arcs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    arcs
}

/// Rigid-part caging: a junction exists on each side of the interval.
pub fn check_rigid_caging(p: &PeduncleResult, start_mm: f64, end_mm: f64, px_per_mm: f64) -> bool {
    let arcs = junction_arcs(p, px_per_mm);
    const EPS: f64 = 1e-6;
    arcs.iter().any(|&a| a <= start_mm + EPS) && arcs.iter().any(|&a| a >= end_mm - EPS)
}

/// Soft-part caging: the peduncle is thicker than the closed fingertip gap.
pub fn check_soft_caging(peduncle_diameter_mm: f64, ee: &EndEffectorModel) -> bool {
    peduncle_diameter_mm > ee.fingertip_distance_mm
}

/// Mean stem thickness along the peduncle polyline, estimated from the
/// distance transform of the stem class.
pub fn estimate_peduncle_diameter(mask: &LabelMask, p: &PeduncleResult, px_per_mm: f64) -> f64 {
    let stem = mask.class_mask(Label::Stem);
    let dt = morph::distance_transform(&stem);
    let w = stem.width() as i64;
    let h = stem.height() as i64;
    let mut sum = 0.0;
    let mut n = 0usize;
    for pt in &p.polyline {
        let x = pt.x.round() as i64;
        let y = pt.y.round() as i64;
        if x < 0 || y < 0 || x >= w || y >= h {
            continue;
        }
        let d = dt[(y * w + x) as usize] as f64;
        if d > 0.0 {
            sum += (2.0 * d - 1.0).max(0.0);
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64 / px_per_mm
    }
}

/// Inter-junction intervals shrunk by L at both ends; empty intervals are
/// discarded and every survivor satisfies rigid caging by construction.
pub fn candidate_segments(
    p: &PeduncleResult,
    gc: &GraspConstraints,
    dissolved_junctions: &[Point2],
) -> Vec<CandidateSegment> {
    let arc = ArcPolyline::new(&p.polyline, gc.px_per_mm);
    let mut bounds = junction_arcs(p, gc.px_per_mm);

    if gc.endpoint_bounds == EndpointBoundPolicy::PrunedJunction {
        // An endpoint with a pruned junction nearby may bound a cage.
        let tol_px = 3.0 * gc.px_per_mm;
        for s in [0.0, arc.total_mm()] {
            let pt = arc.point_at(s);
            if dissolved_junctions.iter().any(|d| d.dist(pt) <= tol_px) {
                bounds.push(s);
            }
        }
        bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }

    let mut out = Vec::new();
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let start = lo + gc.clearance_l_mm;
        let end = hi - gc.clearance_l_mm;
        if end - start < 0.0 {
            continue;
        }
        let junction_backed = check_rigid_caging(p, start, end, gc.px_per_mm);
        let endpoint_backed = gc.endpoint_bounds == EndpointBoundPolicy::PrunedJunction;
        if junction_backed || endpoint_backed {
            out.push(CandidateSegment {
                start_mm: start,
                end_mm: end,
                lower_bound_mm: lo,
                upper_bound_mm: hi,
            });
        }
    }
    out
}

/// Sampling step of the balance-condition search: 0.1 px of arc.
pub fn balance_step_mm(px_per_mm: f64) -> f64 {
    0.1 / px_per_mm
}

/// Balance condition: the point of any candidate interval closest to the
/// truss center of mass (Euclidean image-plane distance, sub-pixel sampled).
pub fn select_grasp(
    cands: &[CandidateSegment],
    com: &TrussCenterOfMass,
    p: &PeduncleResult,
    gc: &GraspConstraints,
) -> Result<(f64, Point2), GraspError> {
    if cands.is_empty() {
        return Err(GraspError::NoValidGrasp);
    }
    let arc = ArcPolyline::new(&p.polyline, gc.px_per_mm);
    let step = balance_step_mm(gc.px_per_mm);
    let mut best: Option<(f64, f64, Point2)> = None; // (dist_sq, s, point)
    for c in cands {
        let span = c.end_mm - c.start_mm;
        let n = (span / step).ceil().max(1.0) as usize;
        for i in 0..=n {
            let s = c.start_mm + span * i as f64 / n as f64;
            let pt = arc.point_at(s);
            let d = pt.dist_sq(com.com);
            if best.as_ref().map_or(true, |(bd, _, _)| d < *bd) {
                best = Some((d, s, pt));
            }
        }
    }
    let (_, s, pt) = best.unwrap();
    Ok((s, pt))
}

/// Local tangent of the peduncle at arc position `s`, estimated by a
/// central difference over the given half-window.
pub fn tangent_at(arc: &ArcPolyline, s_mm: f64, window_mm: f64) -> f64 {
    let a = arc.point_at((s_mm - window_mm).max(0.0));
    let b = arc.point_at((s_mm + window_mm).min(arc.total_mm()));
    if a.dist_sq(b) < 1e-18 {
        0.0
    } else {
        fold_half_turn((b.y - a.y).atan2(b.x - a.x))
    }
}

/// Build the 3D grasp pose and waypoint sequence for the grasp point at
/// `s_mm`. Pixel coordinates convert to millimetres through the crop
/// transform (when the detection ran on a cropped raster) and `px_per_mm`.
pub fn plan_pose(
    s_mm: f64,
    p: &PeduncleResult,
    ee: &EndEffectorModel,
    planning: &PosePlanning,
    gc: &GraspConstraints,
    crop: Option<&RotatedRect>,
) -> Result<GraspPlan, GraspError> {
    let arc = ArcPolyline::new(&p.polyline, gc.px_per_mm);
    let point_crop = arc.point_at(s_mm);
    let yaw = tangent_at(&arc, s_mm, planning.tangent_window_mm);
    let point_px = crop.map_or(point_crop, |r| r.crop_to_image(point_crop));

    let x = point_px.x / gc.px_per_mm;
    let y = point_px.y / gc.px_per_mm;
    // Fingertips span fingertip_height below the tool point; center the
    // peduncle in that span.
    let z = planning.surface_z_mm + planning.peduncle_height_mm + ee.fingertip_height_mm / 2.0;
    if !planning.workspace.contains(x, y, z) {
        return Err(GraspError::OutOfWorkspace { x, y, z });
    }

    let grasp = Pose3 { x, y, z, yaw };
    let pre_grasp = Pose3 {
        z: z + planning.approach_clearance_mm,
        ..grasp
    };
    let lift = Pose3 {
        z: z + planning.lift_height_mm,
        ..grasp
    };
    let place = Pose3 {
        x: planning.place_x_mm,
        y: planning.place_y_mm,
        z,
        yaw,
    };
    Ok(GraspPlan {
        point_px,
        s_mm,
        yaw_rad: yaw,
        z_mm: z,
        pose: grasp,
        waypoints: vec![pre_grasp, grasp, lift, place],
    })
}

/// Optional clearance check (extension, off by default): the gripper
/// footprint at the grasp must not intersect any tomato circle or any stem
/// polyline that is not part of the peduncle.
pub fn gripper_clear(
    point_px: Point2,
    yaw: f64,
    ee: &EndEffectorModel,
    gc: &GraspConstraints,
    tomatoes: &[TomatoCircle],
    other_stem_polylines: &[Vec<Point2>],
) -> bool {
    // Footprint: width w along the peduncle tangent, length l across it.
    let half_u = ee.width_mm / 2.0 * gc.px_per_mm;
    let half_v = ee.length_mm / 2.0 * gc.px_per_mm;
    let to_local = |p: Point2| -> Point2 { p.sub(point_px).rotated(-yaw) };

    for c in tomatoes {
        let l = to_local(c.center);
        let dx = (l.x.abs() - half_u).max(0.0);
        let dy = (l.y.abs() - half_v).max(0.0);
        if dx * dx + dy * dy <= c.radius * c.radius {
            return false;
        }
    }
    for poly in other_stem_polylines {
        for &p in poly {
            let l = to_local(p);
            if l.x.abs() <= half_u && l.y.abs() <= half_v {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::peduncle::{GraphPath, PeduncleResult};

    fn ee() -> EndEffectorModel {
        EndEffectorModel {
            length_mm: 90.0,
            width_mm: 15.0,
            fingertip_height_mm: 20.0,
            fingertip_thickness_mm: 4.0,
            fingertip_distance_mm: 0.0,
            max_opening_mm: 74.0,
            soft_pad: true,
        }
    }

    fn gc(l: f64) -> GraspConstraints {
        GraspConstraints {
            clearance_l_mm: l,
            px_per_mm: 1.0,
            min_peduncle_diameter_mm: 2.0,
            endpoint_bounds: EndpointBoundPolicy::JunctionsOnly,
        }
    }

    fn planning() -> PosePlanning {
        PosePlanning {
            surface_z_mm: 0.0,
            peduncle_height_mm: 20.0,
            approach_clearance_mm: 50.0,
            lift_height_mm: 80.0,
            place_x_mm: 260.0,
            place_y_mm: 40.0,
            tangent_window_mm: 5.0,
            workspace: Workspace {
                x_mm: [-1000.0, 1000.0],
                y_mm: [-1000.0, 1000.0],
                z_mm: [0.0, 500.0],
            },
        }
    }

    /// Straight horizontal peduncle (px == mm here) with junctions at the
    /// given arc positions.
    fn straight_peduncle(len: f64, junction_arcs: &[f64]) -> PeduncleResult {
        let n = len as usize;
        let polyline: Vec<Point2> = (0..=n).map(|i| Point2::new(i as f64, 0.0)).collect();
        PeduncleResult {
            path: GraphPath {
                vertices: vec![],
                edges: vec![],
                length: len,
                orientation: Some(0.0),
            },
            junctions: junction_arcs.iter().map(|&s| Point2::new(s, 0.0)).collect(),
            polyline,
        }
    }

    #[test]
    fn rigid_caging_between_junctions() {
        let p = straight_peduncle(200.0, &[20.0, 100.0, 180.0]);
        assert!(check_rigid_caging(&p, 40.0, 80.0, 1.0));
        // Beyond the last junction toward the bare tail.
        assert!(!check_rigid_caging(&p, 185.0, 195.0, 1.0));
        let two = straight_peduncle(200.0, &[50.0, 150.0]);
        assert!(check_rigid_caging(&two, 95.0, 105.0, 1.0));
    }

    #[test]
    fn soft_caging_threshold() {
        assert!(check_soft_caging(6.0, &ee()));
        let mut open = ee();
        open.fingertip_distance_mm = 3.0;
        assert!(!check_soft_caging(2.0, &open));
        assert!(!check_soft_caging(3.0, &open), "strict inequality at the boundary");
    }

    #[test]
    fn candidate_interval_arithmetic() {
        let p = straight_peduncle(240.0, &[0.0, 80.0, 200.0]);
        let cands = candidate_segments(&p, &gc(30.0), &[]);
        assert_eq!(cands.len(), 2);
        assert!((cands[0].start_mm - 30.0).abs() < 1e-9);
        assert!((cands[0].end_mm - 50.0).abs() < 1e-9);
        assert!((cands[1].start_mm - 110.0).abs() < 1e-9);
        assert!((cands[1].end_mm - 170.0).abs() < 1e-9);
    }

    #[test]
    fn hundred_mm_gap_gives_forty_mm_candidate() {
        let p = straight_peduncle(160.0, &[30.0, 130.0]);
        let cands = candidate_segments(&p, &gc(30.0), &[]);
        assert_eq!(cands.len(), 1);
        let c = &cands[0];
        assert!((c.end_mm - c.start_mm - 40.0).abs() < 1e-9);
        assert!(((c.start_mm + c.end_mm) / 2.0 - 80.0).abs() < 1e-9, "centered");
    }

    #[test]
    fn too_close_junctions_give_nothing() {
        let p = straight_peduncle(120.0, &[30.0, 80.0]);
        assert!(candidate_segments(&p, &gc(30.0), &[]).is_empty());
    }

    #[test]
    fn select_grasp_midpoint_symmetry() {
        let p = straight_peduncle(160.0, &[30.0, 130.0]);
        let cands = candidate_segments(&p, &gc(30.0), &[]);
        let com = TrussCenterOfMass {
            com: Point2::new(80.0, 40.0),
            count: 3,
        };
        let (s, pt) = select_grasp(&cands, &com, &p, &gc(30.0)).unwrap();
        assert!((s - 80.0).abs() < 0.11, "s = {s}");
        assert!((pt.x - 80.0).abs() < 0.11);
    }

    #[test]
    fn select_grasp_clamps_to_interval_end() {
        let p = straight_peduncle(160.0, &[30.0, 130.0]);
        let cands = candidate_segments(&p, &gc(30.0), &[]);
        let com = TrussCenterOfMass {
            com: Point2::new(150.0, 10.0),
            count: 3,
        };
        let (s, _) = select_grasp(&cands, &com, &p, &gc(30.0)).unwrap();
        assert!((s - 100.0).abs() < 1e-9, "clamped to the interval end, s = {s}");
    }

    #[test]
    fn select_grasp_prefers_the_nearer_candidate() {
        let p = straight_peduncle(300.0, &[0.0, 90.0, 300.0]);
        let cands = candidate_segments(&p, &gc(30.0), &[]);
        assert_eq!(cands.len(), 2);
        let com = TrussCenterOfMass {
            com: Point2::new(200.0, 30.0),
            count: 4,
        };
        let (s, _) = select_grasp(&cands, &com, &p, &gc(30.0)).unwrap();
        assert!(s >= cands[1].start_mm - 1e-9 && s <= cands[1].end_mm + 1e-9);
        assert!((s - 200.0).abs() < 0.11);
    }

    #[test]
    fn select_grasp_matches_dense_sampling_oracle() {
        let p = straight_peduncle(240.0, &[10.0, 120.0, 230.0]);
        let constraints = gc(32.0);
        let cands = candidate_segments(&p, &constraints, &[]);
        let com = TrussCenterOfMass {
            com: Point2::new(137.3, 55.1),
            count: 5,
        };
        let (s, pt) = select_grasp(&cands, &com, &p, &constraints).unwrap();
        // Independent dense sweep at 0.1 px steps.
        let arc = ArcPolyline::new(&p.polyline, constraints.px_per_mm);
        let mut best = f64::INFINITY;
        let mut best_s = 0.0;
        for c in &cands {
            let mut s_probe = c.start_mm;
            while s_probe <= c.end_mm + 1e-12 {
                let d = arc.point_at(s_probe).dist(com.com);
                if d < best {
                    best = d;
                    best_s = s_probe;
                }
                s_probe += 0.1;
            }
        }
        assert!((pt.dist(com.com) - best) <= 1e-9 + 0.1, "distance within one step");
        assert!((s - best_s).abs() <= 0.1 + 1e-9);
    }

    #[test]
    fn pose_arithmetic_and_waypoints() {
        let p = straight_peduncle(160.0, &[30.0, 130.0]);
        let plan = plan_pose(80.0, &p, &ee(), &planning(), &gc(30.0), None).unwrap();
        assert!(plan.yaw_rad.abs() < 1e-9, "horizontal peduncle has yaw 0");
        // z = surface + peduncle height + half fingertip span.
        assert!((plan.z_mm - (20.0 + 10.0)).abs() < 1e-9);
        assert_eq!(plan.waypoints.len(), 4);
        let [pre, grasp, lift, place] = [
            plan.waypoints[0],
            plan.waypoints[1],
            plan.waypoints[2],
            plan.waypoints[3],
        ];
        assert!(pre.z > grasp.z);
        assert!(lift.z > grasp.z);
        assert_eq!((pre.x, pre.y), (grasp.x, grasp.y));
        for wp in &plan.waypoints {
            assert_eq!(wp.yaw, plan.yaw_rad);
        }
        assert_eq!((place.x, place.y), (260.0, 40.0));
    }

    #[test]
    fn sloped_peduncle_yaw() {
        let angle = 30f64.to_radians();
        let polyline: Vec<Point2> = (0..=200)
            .map(|i| Point2::new(i as f64 * angle.cos(), i as f64 * angle.sin()))
            .collect();
        let p = PeduncleResult {
            path: GraphPath {
                vertices: vec![],
                edges: vec![],
                length: 200.0,
                orientation: Some(angle),
            },
            junctions: vec![polyline[30], polyline[170]],
            polyline,
        };
        let plan = plan_pose(100.0, &p, &ee(), &planning(), &gc(30.0), None).unwrap();
        assert!((plan.yaw_rad - angle).abs() < 0.05, "yaw = {}", plan.yaw_rad);
    }

    #[test]
    fn workspace_violation_is_rejected() {
        let p = straight_peduncle(160.0, &[30.0, 130.0]);
        let mut tight = planning();
        tight.workspace.x_mm = [0.0, 10.0];
        let err = plan_pose(80.0, &p, &ee(), &tight, &gc(30.0), None).unwrap_err();
        assert!(matches!(err, GraspError::OutOfWorkspace { .. }));
    }

    #[test]
    fn translation_equivariance() {
        let p = straight_peduncle(160.0, &[30.0, 130.0]);
        let com = TrussCenterOfMass {
            com: Point2::new(70.0, 25.0),
            count: 3,
        };
        let constraints = gc(30.0);
        let cands = candidate_segments(&p, &constraints, &[]);
        let (s0, pt0) = select_grasp(&cands, &com, &p, &constraints).unwrap();

        let shift = Point2::new(13.0, -7.0);
        let shifted = PeduncleResult {
            path: p.path.clone(),
            junctions: p.junctions.iter().map(|j| j.add(shift)).collect(),
            polyline: p.polyline.iter().map(|q| q.add(shift)).collect(),
        };
        let com2 = TrussCenterOfMass {
            com: com.com.add(shift),
            count: 3,
        };
        let cands2 = candidate_segments(&shifted, &constraints, &[]);
        let (s1, pt1) = select_grasp(&cands2, &com2, &shifted, &constraints).unwrap();
        assert!((s0 - s1).abs() < 1e-9);
        assert!(pt1.dist(pt0.add(shift)) < 1e-9);
        let yaw0 = tangent_at(&ArcPolyline::new(&p.polyline, 1.0), s0, 5.0);
        let yaw1 = tangent_at(&ArcPolyline::new(&shifted.polyline, 1.0), s1, 5.0);
        assert!((yaw0 - yaw1).abs() < 1e-9);
    }

    #[test]
    fn emitted_grasps_respect_clearance_and_caging() {
        let p = straight_peduncle(240.0, &[10.0, 120.0, 230.0]);
        let constraints = gc(32.0);
        let cands = candidate_segments(&p, &constraints, &[]);
        let com = TrussCenterOfMass {
            com: Point2::new(60.0, 80.0),
            count: 4,
        };
        let (s, _) = select_grasp(&cands, &com, &p, &constraints).unwrap();
        let arcs = junction_arcs(&p, constraints.px_per_mm);
        let min_clearance = arcs
            .iter()
            .map(|a| (a - s).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(min_clearance >= constraints.clearance_l_mm - 1e-9);
        assert!(check_rigid_caging(&p, s, s, constraints.px_per_mm));
    }

    #[test]
    fn pruned_junction_can_bound_a_segment() {
        // Single detected junction at 100; the path start carries a
        // dissolved junction, enabling the leading interval.
        let p = straight_peduncle(200.0, &[100.0]);
        let mut constraints = gc(30.0);
        assert!(candidate_segments(&p, &constraints, &[]).is_empty());
        constraints.endpoint_bounds = EndpointBoundPolicy::PrunedJunction;
        let dissolved = vec![Point2::new(0.5, 0.0)];
        let cands = candidate_segments(&p, &constraints, &dissolved);
        assert_eq!(cands.len(), 1);
        assert!((cands[0].start_mm - 30.0).abs() < 1e-9);
        assert!((cands[0].end_mm - 70.0).abs() < 1e-9);
    }

    #[test]
    fn gripper_clearance_detects_blocking_tomato() {
        let constraints = gc(30.0);
        let tomato = TomatoCircle::new(Point2::new(0.0, 30.0), 25.0);
        assert!(!gripper_clear(
            Point2::new(0.0, 0.0),
            0.0,
            &ee(),
            &constraints,
            &[tomato],
            &[],
        ));
        let far = TomatoCircle::new(Point2::new(0.0, 90.0), 25.0);
        assert!(gripper_clear(
            Point2::new(0.0, 0.0),
            0.0,
            &ee(),
            &constraints,
            &[far],
            &[],
        ));
    }
}
