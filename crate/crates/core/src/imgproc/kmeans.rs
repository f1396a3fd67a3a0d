//! Seeded k-means (k = 3) over the (a*, hue) feature pairs, producing the
//! segmentation thresholds.
//!
//! Hue lives on a circle, so both the distance metric and the centroid
//! update treat the hue dimension circularly. Features are normalized to
//! [0, 1] so neither channel dominates.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::color::ChannelPlanes;
use super::mask::{Label, LabelMask};
use crate::error::ImgprocError;

/// Reference hues (degrees) used to assign fitted clusters to classes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClassHues {
    pub background_deg: f64,
    pub stem_deg: f64,
    pub tomato_deg: f64,
}

impl Default for ClassHues {
    fn default() -> Self {
        // Blue belt, green stem, red tomato.
        Self {
            background_deg: 220.0,
            stem_deg: 110.0,
            tomato_deg: 0.0,
        }
    }
}

/// Fitted segmentation model: three centroids in normalized (a*, hue)
/// space with a class per centroid. The scalar splits are diagnostics
/// derived from the centroids; classification is nearest-centroid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentationThresholds {
    /// Normalized (a*, hue) centroids.
    pub centroids: [[f64; 2]; 3],
    pub classes: [Label; 3],
    /// Diagnostic split in a* units between the tomato centroid and its
    /// nearest neighbor along a*.
    pub a_star_split: f64,
    /// Diagnostic split in hue degrees.
    pub hue_split_deg: f64,
    /// True when the tomato class sits above the a* split.
    pub tomato_above_a_split: bool,
    /// True when the tomato class sits below the hue split.
    pub tomato_below_hue_split: bool,
}

pub const KMEANS_MAX_ITER: usize = 100;
pub const KMEANS_TOL: f64 = 1e-4;

#[inline]
fn norm_a(a: f64) -> f64 {
    (a + 128.0) / 256.0
}

#[inline]
fn norm_hue(h: f64) -> f64 {
    (h / 360.0).rem_euclid(1.0)
}

/// Circular difference of two normalized hues, in [0, 0.5].
#[inline]
fn hue_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

#[inline]
fn feat_dist_sq(p: [f64; 2], q: [f64; 2]) -> f64 {
    let da = p[0] - q[0];
    let dh = hue_diff(p[1], q[1]);
    da * da + dh * dh
}

fn circular_mean(hues: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for h in hues {
        let ang = h * std::f64::consts::TAU;
        s += ang.sin();
        c += ang.cos();
    }
    if s == 0.0 && c == 0.0 {
        return 0.0;
    }
    (s.atan2(c) / std::f64::consts::TAU).rem_euclid(1.0)
}

/// Lloyd iterations with k-means++ seeding on the normalized features.
fn kmeans3(points: &[[f64; 2]], seed: u64) -> [[f64; 2]; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = [[0.0; 2]; 3];

    // k-means++ seeding.
    centroids[0] = points[rng.random_range(0..points.len())];
    for k in 1..3 {
        let d2: Vec<f64> = points
            .iter()
            .map(|p| {
                (0..k)
                    .map(|j| feat_dist_sq(*p, centroids[j]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            centroids[k] = points[rng.random_range(0..points.len())];
            continue;
        }
        let mut target = rng.random_range(0.0..total);
        let mut chosen = points.len() - 1;
        for (i, w) in d2.iter().enumerate() {
            target -= w;
            if target <= 0.0 {
                chosen = i;
                break;
            }
        }
        centroids[k] = points[chosen];
    }

    let mut assignment = vec![0usize; points.len()];
    for _ in 0..KMEANS_MAX_ITER {
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, c) in centroids.iter().enumerate() {
                let d = feat_dist_sq(*p, *c);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            assignment[i] = best;
        }

        let mut moved: f64 = 0.0;
        for j in 0..3 {
            let members = || {
                points
                    .iter()
                    .zip(&assignment)
                    .filter(move |(_, &a)| a == j)
                    .map(|(p, _)| p)
            };
            let count = members().count();
            let new_c = if count == 0 {
                // Re-seed an empty cluster on the point farthest from its
                // current centroid; keeps the run deterministic.
                let far = points
                    .iter()
                    .enumerate()
                    .max_by(|(_, p), (_, q)| {
                        let dp = feat_dist_sq(**p, centroids[assignment[0]]);
                        let dq = feat_dist_sq(**q, centroids[assignment[0]]);
                        dp.partial_cmp(&dq).unwrap()
                    })
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                points[far]
            } else {
                let mean_a = members().map(|p| p[0]).sum::<f64>() / count as f64;
                let mean_h = circular_mean(members().map(|p| p[1]));
                [mean_a, mean_h]
            };
            let da = new_c[0] - centroids[j][0];
            let dh = hue_diff(new_c[1], centroids[j][1]);
            moved = moved.max((da * da + dh * dh).sqrt());
            centroids[j] = new_c;
        }
        if moved < KMEANS_TOL {
            break;
        }
    }
    centroids
}

/// Assign each centroid the class whose reference hue lies nearest on the
/// hue circle. Assignments are independent, so in degenerate scenes two
/// centroids can share a class and the remaining class stays empty.
fn classify_centroids(centroids: &[[f64; 2]; 3], hues: &ClassHues) -> [Label; 3] {
    let refs = [
        (Label::Background, norm_hue(hues.background_deg)),
        (Label::Stem, norm_hue(hues.stem_deg)),
        (Label::Tomato, norm_hue(hues.tomato_deg)),
    ];
    let mut out = [Label::Background; 3];
    for (i, c) in centroids.iter().enumerate() {
        let mut best = Label::Background;
        let mut best_d = f64::INFINITY;
        for (label, r) in refs {
            let d = hue_diff(c[1], r);
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        out[i] = best;
    }
    out
}

/// Fit the segmentation thresholds on the feature planes.
pub fn fit_thresholds(
    planes: &ChannelPlanes,
    seed: u64,
    hues: &ClassHues,
) -> Result<SegmentationThresholds, ImgprocError> {
    let points: Vec<[f64; 2]> = planes
        .a_star
        .iter()
        .zip(&planes.hue)
        .map(|(&a, &h)| [norm_a(a as f64), norm_hue(h as f64)])
        .collect();

    let mut distinct: Vec<(u32, u32)> = planes
        .a_star
        .iter()
        .zip(&planes.hue)
        .map(|(a, h)| (a.to_bits(), h.to_bits()))
        .collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(ImgprocError::DegenerateInput {
            distinct: distinct.len(),
        });
    }

    let centroids = kmeans3(&points, seed);
    let classes = classify_centroids(&centroids, hues);

    // Diagnostic splits relative to the centroid most tomato-like in hue.
    let tomato_idx = (0..3)
        .min_by(|&i, &j| {
            let di = hue_diff(centroids[i][1], norm_hue(hues.tomato_deg));
            let dj = hue_diff(centroids[j][1], norm_hue(hues.tomato_deg));
            di.partial_cmp(&dj).unwrap()
        })
        .unwrap();
    let other_idx = (0..3)
        .filter(|&i| i != tomato_idx)
        .min_by(|&i, &j| {
            let di = (centroids[i][0] - centroids[tomato_idx][0]).abs();
            let dj = (centroids[j][0] - centroids[tomato_idx][0]).abs();
            di.partial_cmp(&dj).unwrap()
        })
        .unwrap();
    let a_t = centroids[tomato_idx][0] * 256.0 - 128.0;
    let a_o = centroids[other_idx][0] * 256.0 - 128.0;
    let h_t = centroids[tomato_idx][1] * 360.0;
    let h_o = centroids[other_idx][1] * 360.0;

    Ok(SegmentationThresholds {
        centroids,
        classes,
        a_star_split: (a_t + a_o) / 2.0,
        hue_split_deg: (h_t + h_o) / 2.0,
        tomato_above_a_split: a_t > a_o,
        tomato_below_hue_split: h_t < h_o,
    })
}

/// Classify every pixel by its nearest centroid. Pixelwise-pure: the label
/// of a pixel depends only on that pixel's features.
pub fn segment(planes: &ChannelPlanes, thr: &SegmentationThresholds) -> LabelMask {
    let labels = planes
        .a_star
        .iter()
        .zip(&planes.hue)
        .map(|(&a, &h)| {
            let p = [norm_a(a as f64), norm_hue(h as f64)];
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, c) in thr.centroids.iter().enumerate() {
                let d = feat_dist_sq(p, *c);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            thr.classes[best]
        })
        .collect();
    LabelMask::from_labels(planes.width, planes.height, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgproc::color::compute_channels;
    use image::{Rgb, RgbImage};

    fn three_blob_image() -> RgbImage {
        let mut img = RgbImage::from_pixel(60, 20, Rgb([20, 40, 200]));
        for y in 0..20 {
            for x in 20..40 {
                img.put_pixel(x, y, Rgb([30, 180, 40]));
            }
            for x in 40..60 {
                img.put_pixel(x, y, Rgb([210, 25, 30]));
            }
        }
        img
    }

    #[test]
    fn three_blobs_map_to_three_classes() {
        let img = three_blob_image();
        let planes = compute_channels(&img);
        let thr = fit_thresholds(&planes, 7, &ClassHues::default()).unwrap();
        let mask = segment(&planes, &thr);
        for y in 0..20 {
            assert_eq!(mask.get(5, y), Label::Background);
            assert_eq!(mask.get(25, y), Label::Stem);
            assert_eq!(mask.get(45, y), Label::Tomato);
        }
    }

    #[test]
    fn uniform_image_is_degenerate() {
        let img = RgbImage::from_pixel(10, 10, Rgb([20, 40, 200]));
        let planes = compute_channels(&img);
        let err = fit_thresholds(&planes, 7, &ClassHues::default()).unwrap_err();
        assert!(matches!(err, ImgprocError::DegenerateInput { .. }));
    }

    #[test]
    fn two_color_scene_leaves_stem_empty() {
        // Background plus tomato only; slight per-pixel jitter so the
        // feature set is not degenerate.
        let mut img = RgbImage::from_pixel(40, 20, Rgb([20, 40, 200]));
        for y in 0..20 {
            for x in 0..40 {
                let j = ((x * 7 + y * 13) % 5) as u8;
                if x >= 20 {
                    img.put_pixel(x, y, Rgb([205 + j, 25, 30]));
                } else {
                    img.put_pixel(x, y, Rgb([20, 40 + j, 200]));
                }
            }
        }
        let planes = compute_channels(&img);
        let thr = fit_thresholds(&planes, 7, &ClassHues::default()).unwrap();
        let mask = segment(&planes, &thr);
        assert_eq!(mask.count(Label::Stem), 0);
        assert!(mask.count(Label::Tomato) >= 399);
        assert!(mask.count(Label::Background) >= 399);
    }

    #[test]
    fn deterministic_per_seed() {
        let img = three_blob_image();
        let planes = compute_channels(&img);
        let a = fit_thresholds(&planes, 42, &ClassHues::default()).unwrap();
        let b = fit_thresholds(&planes, 42, &ClassHues::default()).unwrap();
        assert_eq!(a.centroids, b.centroids);
        assert_eq!(a.classes, b.classes);
    }

    #[test]
    fn segment_is_pixelwise_pure() {
        let img = three_blob_image();
        let planes = compute_channels(&img);
        let thr = fit_thresholds(&planes, 7, &ClassHues::default()).unwrap();
        let mask = segment(&planes, &thr);
        // Re-classifying any single pixel in isolation gives the same label.
        for y in (0..20).step_by(3) {
            for x in (0..60).step_by(5) {
                let idx = (y * 60 + x) as usize;
                let single = ChannelPlanes {
                    width: 1,
                    height: 1,
                    a_star: vec![planes.a_star[idx]],
                    hue: vec![planes.hue[idx]],
                };
                let one = segment(&single, &thr);
                assert_eq!(one.get(0, 0), mask.get(x, y));
            }
        }
    }
}
