//! Topology-preserving thinning of the stem raster down to a one-pixel-wide
//! skeleton.
//!
//! Directional sub-passes (N, S, E, W) peel one border layer per pass so the
//! skeleton stays centered. Candidate border pixels are snapshotted at the
//! start of each pass, but each deletion is re-validated against the live
//! image with the Yokoi connectivity number, so every single removal is a
//! simple point: foreground 8-connectivity and background 4-connectivity are
//! preserved exactly.

use crate::imgproc::BinaryImage;

/// Neighbor offsets ordered counterclockwise starting at east.
const NBR: [(i64, i64); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

#[inline]
fn neighbors(img: &BinaryImage, x: i64, y: i64) -> [bool; 8] {
    let mut n = [false; 8];
    for (k, (dx, dy)) in NBR.iter().enumerate() {
        n[k] = img.get_i(x + dx, y + dy);
    }
    n
}

/// Yokoi connectivity number for 8-connected foreground. A value of 1 means
/// removing the pixel keeps the local foreground in one piece and does not
/// merge background regions.
#[inline]
fn connectivity_number(n: &[bool; 8]) -> u32 {
    let b = |k: usize| -> u32 { u32::from(!n[k % 8]) };
    let mut c = 0;
    for k in [0usize, 2, 4, 6] {
        c += b(k) - b(k) * b(k + 1) * b(k + 2);
    }
    c
}

#[inline]
fn neighbor_count(n: &[bool; 8]) -> u32 {
    n.iter().map(|&v| u32::from(v)).sum()
}

/// Thin the binary image to a skeleton. Endpoints (single-neighbor pixels)
/// are preserved; isolated pixels survive as-is.
pub fn thin(img: &BinaryImage) -> BinaryImage {
    let mut cur = img.clone();
    let (w, h) = (cur.width() as i64, cur.height() as i64);
    // Border directions checked per sub-pass: N, S, E, W.
    let dirs = [(0i64, -1i64), (0, 1), (1, 0), (-1, 0)];
    loop {
        let mut deleted = false;
        for &(dx, dy) in &dirs {
            // Snapshot this pass's border pixels so a single pass removes at
            // most one layer from this side.
            let mut candidates = Vec::new();
            for y in 0..h {
                for x in 0..w {
                    if cur.get(x as u32, y as u32) && !cur.get_i(x + dx, y + dy) {
                        candidates.push((x, y));
                    }
                }
            }
            for (x, y) in candidates {
                let n = neighbors(&cur, x, y);
                if neighbor_count(&n) >= 2 && connectivity_number(&n) == 1 {
                    cur.set(x as u32, y as u32, false);
                    deleted = true;
                }
            }
        }
        if !deleted {
            return cur;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgproc::morph::component_count;

    fn from_rows(rows: &[&str]) -> BinaryImage {
        let h = rows.len() as u32;
        let w = rows[0].len() as u32;
        let mut img = BinaryImage::new(w, h);
        for (y, row) in rows.iter().enumerate() {
            for (x, c) in row.chars().enumerate() {
                if c == '1' {
                    img.set(x as u32, y as u32, true);
                }
            }
        }
        img
    }

    fn has_2x2_block(img: &BinaryImage) -> bool {
        for y in 0..img.height().saturating_sub(1) {
            for x in 0..img.width().saturating_sub(1) {
                if img.get(x, y) && img.get(x + 1, y) && img.get(x, y + 1) && img.get(x + 1, y + 1)
                {
                    return true;
                }
            }
        }
        false
    }

    #[test]
    fn wide_bar_thins_to_centered_line() {
        let mut img = BinaryImage::new(40, 11);
        for y in 3..8 {
            for x in 2..38 {
                img.set(x, y, true);
            }
        }
        let skel = thin(&img);
        assert_eq!(component_count(&skel), 1);
        assert!(!has_2x2_block(&skel));
        // Single-pixel horizontal line on the middle row of the bar.
        let rows: Vec<u32> = skel.on_pixels().map(|(_, y)| y).collect();
        assert!(rows.iter().all(|&y| y == 5), "rows {rows:?}");
        // End erosion is bounded by the bar half-width.
        let xs: Vec<u32> = skel.on_pixels().map(|(x, _)| x).collect();
        let (min_x, max_x) = (*xs.iter().min().unwrap(), *xs.iter().max().unwrap());
        assert!(min_x <= 5 && max_x >= 34, "extent {min_x}..{max_x}");
    }

    #[test]
    fn plus_sign_keeps_a_degree_four_pixel() {
        let mut img = BinaryImage::new(31, 31);
        for k in 3..28 {
            for t in 13..18 {
                img.set(k, t, true);
                img.set(t, k, true);
            }
        }
        let skel = thin(&img);
        assert_eq!(component_count(&skel), 1);
        assert!(!has_2x2_block(&skel));
        let degree4 = skel.on_pixels().any(|(x, y)| {
            let n = neighbors(&skel, x as i64, y as i64);
            neighbor_count(&n) == 4
        });
        assert!(degree4, "expected a crossing pixel with four branches");
    }

    #[test]
    fn thinning_preserves_component_count() {
        let img = from_rows(&[
            "1111110000000000",
            "1111110000111100",
            "1111110000111100",
            "0000000000111100",
            "0011000000000000",
            "0011000001111111",
            "0011000001111111",
        ]);
        let before = component_count(&img);
        let skel = thin(&img);
        assert_eq!(component_count(&skel), before);
        assert!(skel.count_on() <= img.count_on());
    }

    /// Background components under 4-connectivity (the dual of 8-connected
    /// foreground); counts holes.
    fn background_components_4(img: &BinaryImage) -> usize {
        let (w, h) = (img.width() as i64, img.height() as i64);
        let mut seen = vec![false; (w * h) as usize];
        let mut count = 0;
        for sy in 0..h {
            for sx in 0..w {
                let sidx = (sy * w + sx) as usize;
                if img.get(sx as u32, sy as u32) || seen[sidx] {
                    continue;
                }
                count += 1;
                let mut stack = vec![(sx, sy)];
                seen[sidx] = true;
                while let Some((x, y)) = stack.pop() {
                    for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        let nidx = (ny * w + nx) as usize;
                        if !img.get(nx as u32, ny as u32) && !seen[nidx] {
                            seen[nidx] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn ring_keeps_its_hole() {
        // An annulus must thin to a cycle: one foreground component and the
        // enclosed hole still separated from the outside.
        let mut img = BinaryImage::new(41, 41);
        for y in 0..41 {
            for x in 0..41 {
                let d = ((x as f64 - 20.0).powi(2) + (y as f64 - 20.0).powi(2)).sqrt();
                if (8.0..=15.0).contains(&d) {
                    img.set(x, y, true);
                }
            }
        }
        assert_eq!(background_components_4(&img), 2);
        let skel = thin(&img);
        assert_eq!(component_count(&skel), 1);
        assert_eq!(background_components_4(&skel), 2, "hole collapsed");
        assert!(!has_2x2_block(&skel));
    }
}
