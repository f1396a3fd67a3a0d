//! Binary morphology with a disk structuring element, connected-component
//! labeling and a chamfer distance transform.

use super::mask::BinaryImage;

/// Offsets of the disk structuring element of the given radius.
pub fn disk_offsets(radius: u32) -> Vec<(i64, i64)> {
    let r = radius as i64;
    let r2 = r * r;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r2 {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Erosion; `border_on` controls whether out-of-bounds samples count as
/// foreground (used by closing so it stays extensive at image borders).
pub fn erode(img: &BinaryImage, offsets: &[(i64, i64)], border_on: bool) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let mut out = BinaryImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            if !img.get(x, y) {
                continue;
            }
            let mut keep = true;
            for &(dx, dy) in offsets {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                let v = if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    border_on
                } else {
                    img.get(nx as u32, ny as u32)
                };
                if !v {
                    keep = false;
                    break;
                }
            }
            if keep {
                out.set(x, y, true);
            }
        }
    }
    out
}

pub fn dilate(img: &BinaryImage, offsets: &[(i64, i64)]) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let mut out = BinaryImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            if !img.get(x, y) {
                continue;
            }
            for &(dx, dy) in offsets {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx >= 0 && ny >= 0 && nx < w as i64 && ny < h as i64 {
                    out.set(nx as u32, ny as u32, true);
                }
            }
        }
    }
    out
}

pub fn open(img: &BinaryImage, radius: u32) -> BinaryImage {
    let offs = disk_offsets(radius);
    dilate(&erode(img, &offs, false), &offs)
}

pub fn close(img: &BinaryImage, radius: u32) -> BinaryImage {
    let offs = disk_offsets(radius);
    erode(&dilate(img, &offs), &offs, true)
}

/// 8-connected components in raster-scan order. Returns per-pixel component
/// ids (usize::MAX for background) and the size of each component.
pub fn connected_components(img: &BinaryImage) -> (Vec<usize>, Vec<usize>) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut ids = vec![usize::MAX; (w * h) as usize];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let idx = (y * w + x) as usize;
            if !img.get(x as u32, y as u32) || ids[idx] != usize::MAX {
                continue;
            }
            let comp = sizes.len();
            let mut size = 0usize;
            stack.push((x, y));
            ids[idx] = comp;
            while let Some((cx, cy)) = stack.pop() {
                size += 1;
                for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (nx, ny) = (cx + dx, cy + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        let nidx = (ny * w + nx) as usize;
                        if img.get(nx as u32, ny as u32) && ids[nidx] == usize::MAX {
                            ids[nidx] = comp;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            sizes.push(size);
        }
    }
    (ids, sizes)
}

pub fn component_count(img: &BinaryImage) -> usize {
    connected_components(img).1.len()
}

/// Remove 8-connected components smaller than `min_px`.
pub fn remove_small(img: &BinaryImage, min_px: usize) -> BinaryImage {
    let (ids, sizes) = connected_components(img);
    let (w, h) = (img.width(), img.height());
    let mut out = BinaryImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let idx = (y * w + x) as usize;
            if img.get(x, y) && sizes[ids[idx]] >= min_px {
                out.set(x, y, true);
            }
        }
    }
    out
}

/// Two-pass chamfer distance transform (weights 1, sqrt(2)): distance from
/// each on-pixel to the nearest off-pixel. Off-pixels get 0.
pub fn distance_transform(img: &BinaryImage) -> Vec<f32> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    const SQRT2: f32 = std::f32::consts::SQRT_2;
    let big = (w + h) as f32;
    let mut dist: Vec<f32> = (0..w * h)
        .map(|i| {
            if img.get((i % w) as u32, (i / w) as u32) {
                big
            } else {
                0.0
            }
        })
        .collect();

    let at = |d: &Vec<f32>, x: i64, y: i64| -> f32 {
        if x < 0 || y < 0 || x >= w || y >= h {
            0.0
        } else {
            d[(y * w + x) as usize]
        }
    };

    for y in 0..h {
        for x in 0..w {
            let idx = (y * w + x) as usize;
            if dist[idx] == 0.0 {
                continue;
            }
            let mut d = dist[idx];
            d = d.min(at(&dist, x - 1, y) + 1.0);
            d = d.min(at(&dist, x, y - 1) + 1.0);
            d = d.min(at(&dist, x - 1, y - 1) + SQRT2);
            d = d.min(at(&dist, x + 1, y - 1) + SQRT2);
            dist[idx] = d;
        }
    }
    for y in (0..h).rev() {
        for x in (0..w).rev() {
            let idx = (y * w + x) as usize;
            if dist[idx] == 0.0 {
                continue;
            }
            let mut d = dist[idx];
            d = d.min(at(&dist, x + 1, y) + 1.0);
            d = d.min(at(&dist, x, y + 1) + 1.0);
            d = d.min(at(&dist, x + 1, y + 1) + SQRT2);
            d = d.min(at(&dist, x - 1, y + 1) + SQRT2);
            dist[idx] = d;
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn open_removes_single_pixel() {
        let img = from_rows(&["000", "010", "000"]);
        assert!(open(&img, 1).is_empty());
    }

    #[test]
    fn close_fills_single_hole() {
        let img = from_rows(&[
            "11111", //
            "11111", //
            "11011", //
            "11111", //
            "11111",
        ]);
        let closed = close(&img, 1);
        assert!(closed.get(2, 2));
        assert_eq!(closed.count_on(), 25);
    }

    #[test]
    fn components_and_small_removal() {
        let img = from_rows(&[
            "1100000", //
            "1100000", //
            "0000010", //
            "0111000",
        ]);
        let (_, sizes) = connected_components(&img);
        assert_eq!(sizes.len(), 3);
        let filtered = remove_small(&img, 3);
        assert_eq!(filtered.count_on(), 7); // 4-blob + 3-bar survive
        assert!(!filtered.get(5, 2));
    }

    #[test]
    fn distance_transform_of_column() {
        let img = from_rows(&["111", "111", "111"]);
        let d = distance_transform(&img);
        // Center pixel is one step from the border-adjacent off region.
        assert!((d[4] - 2.0).abs() < 1e-6);
        assert!((d[0] - 1.0).abs() < 1e-6);
    }
}
