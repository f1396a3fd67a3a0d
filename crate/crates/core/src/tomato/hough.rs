//! Circle Hough transform over the edge raster: a full (cx, cy, r)
//! accumulator with perimeter-normalized votes and greedy non-maximum
//! suppression on the center distance.

use serde::{Deserialize, Serialize};

use super::TomatoCircle;
use crate::geom::Point2;
use crate::imgproc::BinaryImage;

/// Parameters of the circle Hough transform.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoughConfig {
    /// Minimum circle radius, px.
    pub r_min: f64,
    /// Maximum circle radius, px.
    pub r_max: f64,
    /// Minimum distance between accepted circle centers, px.
    pub min_center_dist: f64,
    /// Center-grid step of the accumulator, px (>= 1).
    pub accumulator_resolution: f64,
    /// Strong-edge gradient threshold for the Canny stage.
    pub edge_sensitivity: f64,
    /// Fraction of a circle's perimeter votes required to accept a peak.
    pub vote_threshold: f64,
}

impl HoughConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.r_min > 0.0 && self.r_min < self.r_max) {
            return Err(format!("require 0 < r_min < r_max, got {} / {}", self.r_min, self.r_max));
        }
        if self.min_center_dist <= 0.0 {
            return Err("min_center_dist must be positive".into());
        }
        if self.accumulator_resolution < 1.0 {
            return Err("accumulator_resolution must be >= 1".into());
        }
        if !(0.0 < self.vote_threshold && self.vote_threshold <= 1.0) {
            return Err("vote_threshold must be in (0, 1]".into());
        }
        Ok(())
    }
}

/// Perimeter offsets of a rasterized circle of radius `r`.
fn circle_offsets(r: u32) -> Vec<(i32, i32)> {
    let steps = ((2.0 * std::f64::consts::PI * r as f64) * 2.0).ceil() as usize;
    let mut offs: Vec<(i32, i32)> = (0..steps)
        .map(|i| {
            let a = i as f64 / steps as f64 * std::f64::consts::TAU;
            (
                (r as f64 * a.cos()).round() as i32,
                (r as f64 * a.sin()).round() as i32,
            )
        })
        .collect();
    offs.sort_unstable();
    offs.dedup();
    offs
}

#[derive(Debug, Clone, Copy)]
struct Peak {
    score: f64,
    votes: u32,
    r: u32,
    cx: u32, // accumulator grid coordinates
    cy: u32,
}

/// Detect circles in the edge image, strongest votes first, with radii in
/// `[r_min, r_max]` and centers at least `min_center_dist` apart.
pub fn hough_circles(edges: &BinaryImage, cfg: &HoughConfig) -> Vec<TomatoCircle> {
    let res = cfg.accumulator_resolution;
    let aw = (edges.width() as f64 / res).ceil() as u32;
    let ah = (edges.height() as f64 / res).ceil() as u32;
    if aw == 0 || ah == 0 {
        return Vec::new();
    }
    let edge_px: Vec<(i32, i32)> = edges
        .on_pixels()
        .map(|(x, y)| (x as i32, y as i32))
        .collect();
    if edge_px.is_empty() {
        return Vec::new();
    }

    let r_lo = cfg.r_min.ceil() as u32;
    let r_hi = cfg.r_max.floor() as u32;
    let mut peaks: Vec<Peak> = Vec::new();
    let mut acc = vec![0u32; (aw * ah) as usize];

    for r in r_lo..=r_hi {
        acc.iter_mut().for_each(|v| *v = 0);
        let offs = circle_offsets(r);
        for &(ex, ey) in &edge_px {
            for &(dx, dy) in &offs {
                let cx = ex - dx;
                let cy = ey - dy;
                if cx < 0 || cy < 0 {
                    continue;
                }
                let gx = (cx as f64 / res) as u32;
                let gy = (cy as f64 / res) as u32;
                if gx < aw && gy < ah {
                    acc[(gy * aw + gx) as usize] += 1;
                }
            }
        }
        let needed = (cfg.vote_threshold * offs.len() as f64).ceil() as u32;
        for gy in 0..ah {
            for gx in 0..aw {
                let votes = acc[(gy * aw + gx) as usize];
                if votes >= needed.max(1) {
                    peaks.push(Peak {
                        score: votes as f64 / offs.len() as f64,
                        votes,
                        r,
                        cx: gx,
                        cy: gy,
                    });
                }
            }
        }
    }

    // Strongest first; ties prefer the smaller radius, then raster order.
    peaks.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then(a.r.cmp(&b.r))
            .then(a.cy.cmp(&b.cy))
            .then(a.cx.cmp(&b.cx))
    });

    let mut kept: Vec<TomatoCircle> = Vec::new();
    let min_d2 = cfg.min_center_dist * cfg.min_center_dist;
    for p in peaks {
        let center = Point2::new(p.cx as f64 * res, p.cy as f64 * res);
        if kept.iter().any(|k| k.center.dist_sq(center) < min_d2) {
            continue;
        }
        kept.push(TomatoCircle {
            center,
            radius: p.r as f64,
            votes: p.votes,
        });
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tomato::canny;
    use crate::imgproc::BinaryImage;

    fn cfg() -> HoughConfig {
        HoughConfig {
            r_min: 20.0,
            r_max: 50.0,
            min_center_dist: 40.0,
            accumulator_resolution: 1.0,
            edge_sensitivity: 0.25,
            vote_threshold: 0.35,
        }
    }

    fn disk_mut(img: &mut BinaryImage, cx: f64, cy: f64, r: f64) {
        for y in 0..img.height() {
            for x in 0..img.width() {
                if (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r {
                    img.set(x, y, true);
                }
            }
        }
    }

    #[test]
    fn no_edges_no_circles() {
        let edges = BinaryImage::new(100, 100);
        assert!(hough_circles(&edges, &cfg()).is_empty());
    }

    #[test]
    fn single_clean_circle() {
        let mut img = BinaryImage::new(200, 160);
        disk_mut(&mut img, 100.0, 80.0, 35.0);
        let edges = canny(&img, 0.25);
        let circles = hough_circles(&edges, &cfg());
        assert_eq!(circles.len(), 1, "got {circles:?}");
        let c = &circles[0];
        assert!(c.center.dist(Point2::new(100.0, 80.0)) <= 2.0, "center {:?}", c.center);
        assert!((c.radius - 35.0).abs() <= 2.0, "radius {}", c.radius);
    }

    #[test]
    fn five_separated_circles() {
        let mut img = BinaryImage::new(640, 480);
        let truth = [
            (100.0, 100.0, 30.0),
            (250.0, 120.0, 40.0),
            (420.0, 100.0, 25.0),
            (150.0, 330.0, 45.0),
            (450.0, 340.0, 35.0),
        ];
        for &(x, y, r) in &truth {
            disk_mut(&mut img, x, y, r);
        }
        let edges = canny(&img, 0.25);
        let circles = hough_circles(&edges, &cfg());
        assert_eq!(circles.len(), 5, "got {}", circles.len());
        // Greedy matching: every ground-truth circle has one detection.
        for &(x, y, r) in &truth {
            let hit = circles.iter().any(|c| {
                c.center.dist(Point2::new(x, y)) <= 3.0 && (c.radius - r).abs() <= 3.0
            });
            assert!(hit, "no detection for ({x},{y},{r})");
        }
    }
}
