//! Minimum-area rotated bounding rectangle over the foreground and the
//! axis-aligned re-rendering of the rotated crop.

use super::mask::{Label, LabelMask};
use crate::error::ImgprocError;
use crate::geom::{fold_half_turn, Point2, RotatedRect};

/// Andrew monotone-chain convex hull; input points are deduplicated and
/// sorted internally. Returns the hull in counterclockwise order.
fn convex_hull(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| -> i64 {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(pts.len() * 2);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Minimum-area rotated rectangle over all non-background pixels, grown by
/// `margin_px` on every side. Ties in area resolve toward the angle nearest
/// zero so axis-aligned content yields angle 0.
pub fn min_area_rect(mask: &LabelMask, margin_px: f64) -> Result<RotatedRect, ImgprocError> {
    let mut pts = Vec::new();
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) != Label::Background {
                pts.push((x as i64, y as i64));
            }
        }
    }
    if pts.is_empty() {
        return Err(ImgprocError::EmptyForeground);
    }

    let hull = convex_hull(pts);
    // Candidate orientations: one per hull edge, folded to a half turn,
    // plus 0 so degenerate hulls stay axis-aligned.
    let mut angles = vec![0.0f64];
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        if a == b {
            continue;
        }
        angles.push(fold_half_turn(((b.1 - a.1) as f64).atan2((b.0 - a.0) as f64)));
    }

    let mut best: Option<(f64, f64, RotatedRect)> = None; // (area, |angle|, rect)
    for &angle in &angles {
        let (s, c) = angle.sin_cos();
        let mut min_u = f64::INFINITY;
        let mut max_u = f64::NEG_INFINITY;
        let mut min_v = f64::INFINITY;
        let mut max_v = f64::NEG_INFINITY;
        for &(x, y) in &hull {
            let (xf, yf) = (x as f64, y as f64);
            let u = c * xf + s * yf;
            let v = -s * xf + c * yf;
            min_u = min_u.min(u);
            max_u = max_u.max(u);
            min_v = min_v.min(v);
            max_v = max_v.max(v);
        }
        // Pixel centers span the extent; +1 accounts for the pixel footprint.
        let width = max_u - min_u + 1.0 + 2.0 * margin_px;
        let height = max_v - min_v + 1.0 + 2.0 * margin_px;
        let area = width * height;
        let mid_u = (min_u + max_u) / 2.0;
        let mid_v = (min_v + max_v) / 2.0;
        let center = Point2::new(c * mid_u - s * mid_v, s * mid_u + c * mid_v);
        let rect = RotatedRect {
            center,
            width,
            height,
            angle,
        };
        let better = match &best {
            None => true,
            Some((ba, babs, _)) => {
                area < ba - 1e-9 || ((area - ba).abs() <= 1e-9 && angle.abs() < *babs - 1e-12)
            }
        };
        if better {
            best = Some((area, angle.abs(), rect));
        }
    }
    Ok(best.unwrap().2)
}

/// Crop the mask to its minimum-area rotated rectangle. The returned mask is
/// the axis-aligned re-rendering (nearest-neighbor) of the rotated region;
/// the rect maps crop coordinates back to source coordinates.
pub fn crop(mask: &LabelMask, margin_px: f64) -> Result<(LabelMask, RotatedRect), ImgprocError> {
    let rect = min_area_rect(mask, margin_px)?;
    let out_w = rect.width.ceil().max(1.0) as u32;
    let out_h = rect.height.ceil().max(1.0) as u32;
    let mut out = LabelMask::filled(out_w, out_h, Label::Background);
    for v in 0..out_h {
        for u in 0..out_w {
            let src = rect.crop_to_image(Point2::new(u as f64, v as f64));
            let sx = src.x.round();
            let sy = src.y.round();
            if sx >= 0.0 && sy >= 0.0 && (sx as u32) < mask.width() && (sy as u32) < mask.height() {
                out.set(u, v, mask.get(sx as u32, sy as u32));
            }
        }
    }
    Ok((out, rect))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_aligned_square() {
        let mut mask = LabelMask::filled(100, 100, Label::Background);
        for y in 20..70 {
            for x in 30..80 {
                mask.set(x, y, Label::Tomato);
            }
        }
        let (cropped, rect) = crop(&mask, 5.0).unwrap();
        assert!(rect.angle.abs() < 1e-9);
        // 50 px extent + 2 * 5 margin.
        assert!((rect.width - 60.0).abs() < 1e-6, "w = {}", rect.width);
        assert!((rect.height - 60.0).abs() < 1e-6);
        assert_eq!((cropped.width(), cropped.height()), (60, 60));
        assert!(cropped.count(Label::Tomato) >= 50 * 50 - 200);
    }

    #[test]
    fn rotated_foreground_recovers_angle() {
        let mut mask = LabelMask::filled(200, 200, Label::Background);
        let angle = 30f64.to_radians();
        let (s, c) = angle.sin_cos();
        // Rasterize a 120x30 bar rotated by 30 degrees around (100, 100).
        for y in 0..200 {
            for x in 0..200 {
                let dx = x as f64 - 100.0;
                let dy = y as f64 - 100.0;
                let u = c * dx + s * dy;
                let v = -s * dx + c * dy;
                if u.abs() <= 60.0 && v.abs() <= 15.0 {
                    mask.set(x, y, Label::Stem);
                }
            }
        }
        let (_, rect) = crop(&mask, 2.0).unwrap();
        let err = (fold_half_turn(rect.angle - angle)).abs();
        assert!(err < 3f64.to_radians(), "angle {} vs 30 deg", rect.angle.to_degrees());
    }

    #[test]
    fn empty_mask_errors() {
        let mask = LabelMask::filled(10, 10, Label::Background);
        assert!(matches!(crop(&mask, 5.0), Err(ImgprocError::EmptyForeground)));
    }

    #[test]
    fn crop_preserves_foreground_content() {
        let mut mask = LabelMask::filled(80, 80, Label::Background);
        for y in 10..30 {
            for x in 50..70 {
                mask.set(x, y, Label::Stem);
            }
        }
        let (cropped, rect) = crop(&mask, 3.0).unwrap();
        assert_eq!(
            cropped.count(Label::Stem),
            20 * 20,
            "axis-aligned crop must preserve pixel counts"
        );
        // A known stem pixel maps into the crop and back.
        let p = Point2::new(55.0, 15.0);
        let q = rect.image_to_crop(p);
        let r = rect.crop_to_image(q);
        assert!(p.dist(r) < 0.5);
    }
}
