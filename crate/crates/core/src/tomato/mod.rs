//! Tomato detection: Canny edges on the tomato class, circle Hough
//! transform, the 50% segment-overlap filter, and the volume-weighted truss
//! center of mass.

mod canny;
mod hough;

pub use canny::canny;
pub use hough::{hough_circles, HoughConfig};

use serde::{Deserialize, Serialize};

use crate::error::TomatoError;
use crate::geom::Point2;
use crate::imgproc::{BinaryImage, Label, LabelMask};

/// A detected tomato: circle center and radius in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TomatoCircle {
    pub center: Point2,
    pub radius: f64,
    /// Accumulator votes backing the detection (0 for synthetic truth).
    #[serde(default)]
    pub votes: u32,
}

impl TomatoCircle {
    pub fn new(center: Point2, radius: f64) -> Self {
        Self {
            center,
            radius,
            votes: 0,
        }
    }
}

/// The truss center of mass with the tomato count that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrussCenterOfMass {
    pub com: Point2,
    pub count: usize,
}

/// Edge pixels of the tomato class.
pub fn detect_edges(mask: &LabelMask, edge_sensitivity: f64) -> BinaryImage {
    canny(&mask.class_mask(Label::Tomato), edge_sensitivity)
}

/// Fraction of the circle's raster area (in-bounds pixels only) labeled as
/// tomato.
pub fn overlap_fraction(circle: &TomatoCircle, mask: &LabelMask) -> f64 {
    let r = circle.radius;
    let r2 = r * r;
    let x0 = (circle.center.x - r).floor().max(0.0) as u32;
    let x1 = (circle.center.x + r).ceil().min(mask.width() as f64 - 1.0) as u32;
    let y0 = (circle.center.y - r).floor().max(0.0) as u32;
    let y1 = (circle.center.y + r).ceil().min(mask.height() as f64 - 1.0) as u32;
    let mut area = 0u64;
    let mut hit = 0u64;
    for y in y0..=y1 {
        for x in x0..=x1 {
            let dx = x as f64 - circle.center.x;
            let dy = y as f64 - circle.center.y;
            if dx * dx + dy * dy <= r2 {
                area += 1;
                if mask.get(x, y) == Label::Tomato {
                    hit += 1;
                }
            }
        }
    }
    if area == 0 {
        0.0
    } else {
        hit as f64 / area as f64
    }
}

/// Keep circles overlapping the tomato segment by at least 50%.
pub fn filter_overlap(circles: Vec<TomatoCircle>, mask: &LabelMask) -> Vec<TomatoCircle> {
    circles
        .into_iter()
        .filter(|c| overlap_fraction(c, mask) >= 0.5)
        .collect()
}

/// Truss center of mass: tomato mass scales with the volume of a sphere of
/// the same radius, so centers are weighted by radius cubed.
pub fn center_of_mass(circles: &[TomatoCircle]) -> Result<TrussCenterOfMass, TomatoError> {
    if circles.is_empty() {
        return Err(TomatoError::NoTomatoes);
    }
    let mut wsum = 0.0;
    let mut acc = Point2::new(0.0, 0.0);
    for c in circles {
        let w = c.radius * c.radius * c.radius;
        wsum += w;
        acc = acc.add(c.center.scale(w));
    }
    Ok(TrussCenterOfMass {
        com: acc.scale(1.0 / wsum),
        count: circles.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgproc::{Label, LabelMask};

    fn mask_with_disk(w: u32, h: u32, cx: f64, cy: f64, r: f64) -> LabelMask {
        let mut m = LabelMask::filled(w, h, Label::Background);
        for y in 0..h {
            for x in 0..w {
                if (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r {
                    m.set(x, y, Label::Tomato);
                }
            }
        }
        m
    }

    #[test]
    fn circle_inside_tomato_kept() {
        let m = mask_with_disk(100, 100, 50.0, 50.0, 40.0);
        let c = TomatoCircle::new(Point2::new(50.0, 50.0), 20.0);
        assert!((overlap_fraction(&c, &m) - 1.0).abs() < 1e-12);
        assert_eq!(filter_overlap(vec![c], &m).len(), 1);
    }

    #[test]
    fn circle_on_background_discarded() {
        let m = LabelMask::filled(100, 100, Label::Background);
        let c = TomatoCircle::new(Point2::new(50.0, 50.0), 20.0);
        assert_eq!(overlap_fraction(&c, &m), 0.0);
        assert!(filter_overlap(vec![c], &m).is_empty());
    }

    #[test]
    fn half_plane_boundary_follows_pixel_count_oracle() {
        // Tomato fills x >= 50; circle centered on the boundary.
        let mut m = LabelMask::filled(100, 100, Label::Background);
        for y in 0..100 {
            for x in 50..100 {
                m.set(x, y, Label::Tomato);
            }
        }
        let c = TomatoCircle::new(Point2::new(50.0, 50.0), 20.0);
        // Independent pixel-count oracle.
        let (mut area, mut hit) = (0u64, 0u64);
        for y in 0..100u32 {
            for x in 0..100u32 {
                if (x as f64 - 50.0).powi(2) + (y as f64 - 50.0).powi(2) <= 400.0 {
                    area += 1;
                    if x >= 50 {
                        hit += 1;
                    }
                }
            }
        }
        let oracle = hit as f64 / area as f64;
        let measured = overlap_fraction(&c, &m);
        assert!((measured - oracle).abs() < 1e-12);
        assert_eq!(filter_overlap(vec![c], &m).len(), usize::from(oracle >= 0.5));
        // The boundary column counts as tomato, so the kept decision is >= 0.5.
        assert!(oracle >= 0.5);
    }

    #[test]
    fn filter_overlap_is_monotone_in_the_mask() {
        let big = mask_with_disk(80, 80, 40.0, 40.0, 30.0);
        let small = mask_with_disk(80, 80, 40.0, 40.0, 18.0);
        for k in 0..30 {
            let c = TomatoCircle::new(
                Point2::new(20.0 + k as f64, 40.0),
                10.0 + (k % 7) as f64,
            );
            let kept_small = overlap_fraction(&c, &small) >= 0.5;
            let kept_big = overlap_fraction(&c, &big) >= 0.5;
            // Shrinking the region can only lose circles, never gain them.
            assert!(!kept_small || kept_big);
        }
    }

    #[test]
    fn com_single_tomato_is_identity() {
        let c = center_of_mass(&[TomatoCircle::new(Point2::new(10.0, 20.0), 5.0)]).unwrap();
        assert_eq!(c.com, Point2::new(10.0, 20.0));
        assert_eq!(c.count, 1);
    }

    #[test]
    fn com_equal_radii_is_midpoint() {
        let c = center_of_mass(&[
            TomatoCircle::new(Point2::new(0.0, 0.0), 3.0),
            TomatoCircle::new(Point2::new(10.0, 0.0), 3.0),
        ])
        .unwrap();
        assert!((c.com.x - 5.0).abs() < 1e-12);
        assert!(c.com.y.abs() < 1e-12);
    }

    #[test]
    fn com_volume_weighting_hand_case() {
        // Radii 1 and 2 give weights 1 and 8: (0*1 + 9*8) / 9 = 8.
        let c = center_of_mass(&[
            TomatoCircle::new(Point2::new(0.0, 0.0), 1.0),
            TomatoCircle::new(Point2::new(9.0, 0.0), 2.0),
        ])
        .unwrap();
        assert!((c.com.x - 8.0).abs() < 1e-12);
    }

    #[test]
    fn com_empty_errors() {
        assert_eq!(center_of_mass(&[]), Err(TomatoError::NoTomatoes));
    }
}
