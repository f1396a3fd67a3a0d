//! Debug overlay rendering: class masks, detected circles with the crossed
//! center-of-mass marker, the stem graph, the peduncle, and the grasp plan.

use image::{Rgb, RgbImage};

use crate::geom::{Point2, RotatedRect};
use crate::grasp::{CandidateSegment, GraspPlan};
use crate::imgproc::{Label, LabelMask};
use crate::peduncle::PeduncleResult;
use crate::skeleton::StemGraph;
use crate::tomato::TomatoCircle;

pub const DARK_GREEN: Rgb<u8> = Rgb([0, 100, 0]);
pub const PURPLE: Rgb<u8> = Rgb([150, 40, 190]);
pub const RED: Rgb<u8> = Rgb([230, 30, 30]);
pub const BLACK: Rgb<u8> = Rgb([0, 0, 0]);
pub const WHITE: Rgb<u8> = Rgb([255, 255, 255]);
pub const YELLOW: Rgb<u8> = Rgb([250, 220, 40]);

fn put(img: &mut RgbImage, x: i64, y: i64, color: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, color);
    }
}

pub fn draw_line(img: &mut RgbImage, a: Point2, b: Point2, color: Rgb<u8>) {
    let n = a.dist(b).ceil().max(1.0) as usize;
    for i in 0..=n {
        let t = i as f64 / n as f64;
        put(
            img,
            (a.x + (b.x - a.x) * t).round() as i64,
            (a.y + (b.y - a.y) * t).round() as i64,
            color,
        );
    }
}

pub fn draw_polyline(img: &mut RgbImage, pts: &[Point2], color: Rgb<u8>) {
    for w in pts.windows(2) {
        draw_line(img, w[0], w[1], color);
    }
}

pub fn draw_disk(img: &mut RgbImage, c: Point2, r: f64, color: Rgb<u8>) {
    for dy in -(r.ceil() as i64)..=(r.ceil() as i64) {
        for dx in -(r.ceil() as i64)..=(r.ceil() as i64) {
            if (dx * dx + dy * dy) as f64 <= r * r {
                put(img, c.x.round() as i64 + dx, c.y.round() as i64 + dy, color);
            }
        }
    }
}

/// Dashed circle outline, the tomato presentation style.
pub fn draw_dashed_circle(img: &mut RgbImage, c: Point2, r: f64, color: Rgb<u8>) {
    let steps = (2.0 * std::f64::consts::PI * r).ceil().max(16.0) as usize;
    for i in 0..steps {
        // 6 px on, 4 px off around the circumference.
        if i % 10 >= 6 {
            continue;
        }
        let a = i as f64 / steps as f64 * std::f64::consts::TAU;
        put(
            img,
            (c.x + r * a.cos()).round() as i64,
            (c.y + r * a.sin()).round() as i64,
            color,
        );
    }
}

/// Crossed circle: the center-of-mass marker.
pub fn draw_crossed_circle(img: &mut RgbImage, c: Point2, r: f64, color: Rgb<u8>) {
    let steps = (2.0 * std::f64::consts::PI * r).ceil().max(16.0) as usize;
    for i in 0..steps {
        let a = i as f64 / steps as f64 * std::f64::consts::TAU;
        put(
            img,
            (c.x + r * a.cos()).round() as i64,
            (c.y + r * a.sin()).round() as i64,
            color,
        );
    }
    let d = r * std::f64::consts::FRAC_1_SQRT_2;
    draw_line(img, Point2::new(c.x - d, c.y - d), Point2::new(c.x + d, c.y + d), color);
    draw_line(img, Point2::new(c.x - d, c.y + d), Point2::new(c.x + d, c.y - d), color);
}

/// Color-coded class mask.
pub fn mask_image(mask: &LabelMask) -> RgbImage {
    let mut img = RgbImage::new(mask.width(), mask.height());
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            let color = match mask.get(x, y) {
                Label::Background => Rgb([40, 40, 120]),
                Label::Stem => Rgb([60, 180, 60]),
                Label::Tomato => Rgb([200, 50, 40]),
            };
            img.put_pixel(x, y, color);
        }
    }
    img
}

/// Source image with the crop rectangle outline.
pub fn crop_overlay(img: &RgbImage, rect: &RotatedRect) -> RgbImage {
    let mut out = img.clone();
    let c = rect.corners();
    for i in 0..4 {
        draw_line(&mut out, c[i], c[(i + 1) % 4], YELLOW);
    }
    out
}

/// Detected tomatoes (dashed circles) and the center of mass (crossed).
pub fn tomato_overlay(img: &RgbImage, circles: &[TomatoCircle], com: Option<Point2>) -> RgbImage {
    let mut out = img.clone();
    for c in circles {
        draw_dashed_circle(&mut out, c.center, c.radius, WHITE);
    }
    if let Some(c) = com {
        draw_crossed_circle(&mut out, c, 10.0, WHITE);
    }
    out
}

/// Stem graph: dark-green edges, purple junctions, red tails.
pub fn graph_overlay(img: &RgbImage, graph: &StemGraph) -> RgbImage {
    let mut out = img.clone();
    for e in &graph.edges {
        draw_polyline(&mut out, &e.polyline, DARK_GREEN);
    }
    for v in &graph.vertices {
        if v.is_junction() {
            draw_disk(&mut out, v.pos, 3.0, PURPLE);
        } else if v.is_tail() {
            draw_disk(&mut out, v.pos, 3.0, RED);
        }
    }
    out
}

/// Identified peduncle with its junctions.
pub fn peduncle_overlay(img: &RgbImage, ped: &PeduncleResult) -> RgbImage {
    let mut out = img.clone();
    draw_polyline(&mut out, &ped.polyline, DARK_GREEN);
    for j in &ped.junctions {
        draw_disk(&mut out, *j, 3.0, PURPLE);
    }
    out
}

/// Grasp plan: black candidate segments, red grasp box, crossed CoM.
pub fn grasp_overlay(
    img: &RgbImage,
    ped: &PeduncleResult,
    candidates: &[CandidateSegment],
    plan: Option<&GraspPlan>,
    com: Option<Point2>,
    px_per_mm: f64,
) -> RgbImage {
    let mut out = img.clone();
    let arc = crate::grasp::ArcPolyline::new(&ped.polyline, px_per_mm);
    for c in candidates {
        let step = 0.5 / px_per_mm;
        let mut s = c.start_mm;
        while s <= c.end_mm {
            let p = arc.point_at(s);
            put(&mut out, p.x.round() as i64, p.y.round() as i64, BLACK);
            put(&mut out, p.x.round() as i64, p.y.round() as i64 + 1, BLACK);
            s += step;
        }
    }
    if let Some(c) = com {
        draw_crossed_circle(&mut out, c, 10.0, WHITE);
    }
    if let Some(plan) = plan {
        // Gripper footprint rectangle, width along the peduncle.
        let hu = 7.5 * px_per_mm; // half width (w/2 = 7.5 mm default scale)
        let hv = 20.0 * px_per_mm;
        let (s, c) = plan.yaw_rad.sin_cos();
        let axis_u = Point2::new(c, s);
        let axis_v = Point2::new(-s, c);
        let p = plan.point_px;
        let corners = [
            p.add(axis_u.scale(hu)).add(axis_v.scale(hv)),
            p.add(axis_u.scale(hu)).add(axis_v.scale(-hv)),
            p.add(axis_u.scale(-hu)).add(axis_v.scale(-hv)),
            p.add(axis_u.scale(-hu)).add(axis_v.scale(hv)),
        ];
        for i in 0..4 {
            draw_line(&mut out, corners[i], corners[(i + 1) % 4], RED);
        }
    }
    out
}
