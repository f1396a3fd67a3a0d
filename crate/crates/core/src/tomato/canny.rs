//! Canny edge detection on the binary tomato raster: Gaussian blur, Sobel
//! gradients, non-maximum suppression and hysteresis.

use crate::imgproc::BinaryImage;

fn gaussian_kernel(sigma: f64, radius: i64) -> Vec<f64> {
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

fn blur(img: &BinaryImage, sigma: f64) -> Vec<f64> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let radius = (3.0 * sigma).ceil() as i64;
    let kernel = gaussian_kernel(sigma, radius);
    let src: Vec<f64> = img.data().iter().map(|&v| if v { 1.0 } else { 0.0 }).collect();

    // Separable convolution with edge clamping.
    let mut tmp = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kv) in kernel.iter().enumerate() {
                let sx = (x + i as i64 - radius).clamp(0, w - 1);
                acc += kv * src[(y * w + sx) as usize];
            }
            tmp[(y * w + x) as usize] = acc;
        }
    }
    let mut out = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kv) in kernel.iter().enumerate() {
                let sy = (y + i as i64 - radius).clamp(0, h - 1);
                acc += kv * tmp[(sy * w + x) as usize];
            }
            out[(y * w + x) as usize] = acc;
        }
    }
    out
}

/// Edge pixels of the binary image. `high` is the strong-edge gradient
/// threshold on the blurred unit image; the weak threshold is half of it.
pub fn canny(img: &BinaryImage, high: f64) -> BinaryImage {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let out_empty = BinaryImage::new(img.width(), img.height());
    if img.is_empty() || w < 3 || h < 3 {
        return out_empty;
    }
    let low = high / 2.0;
    let smooth = blur(img, 1.4);

    let at = |v: &Vec<f64>, x: i64, y: i64| -> f64 {
        let cx = x.clamp(0, w - 1);
        let cy = y.clamp(0, h - 1);
        v[(cy * w + cx) as usize]
    };

    let mut mag = vec![0.0; smooth.len()];
    let mut dir = vec![0u8; smooth.len()];
    for y in 0..h {
        for x in 0..w {
            let gx = at(&smooth, x + 1, y - 1) + 2.0 * at(&smooth, x + 1, y)
                + at(&smooth, x + 1, y + 1)
                - at(&smooth, x - 1, y - 1)
                - 2.0 * at(&smooth, x - 1, y)
                - at(&smooth, x - 1, y + 1);
            let gy = at(&smooth, x - 1, y + 1) + 2.0 * at(&smooth, x, y + 1)
                + at(&smooth, x + 1, y + 1)
                - at(&smooth, x - 1, y - 1)
                - 2.0 * at(&smooth, x, y - 1)
                - at(&smooth, x + 1, y - 1);
            let idx = (y * w + x) as usize;
            mag[idx] = (gx * gx + gy * gy).sqrt();
            // Quantize gradient direction into 4 sectors.
            let angle = gy.atan2(gx).to_degrees().rem_euclid(180.0);
            dir[idx] = if !(22.5..157.5).contains(&angle) {
                0 // horizontal gradient -> compare E/W
            } else if angle < 67.5 {
                1 // diagonal /
            } else if angle < 112.5 {
                2 // vertical gradient -> compare N/S
            } else {
                3 // diagonal \
            };
        }
    }

    // Non-maximum suppression.
    let mut strong = Vec::new();
    let mut state = vec![0u8; mag.len()]; // 0 none, 1 weak, 2 strong
    for y in 0..h {
        for x in 0..w {
            let idx = (y * w + x) as usize;
            let m = mag[idx];
            if m < low {
                continue;
            }
            // Image y grows downward: a gradient angle of 45 degrees points
            // down-right, so sector 1 compares the (+1,+1)/(-1,-1) pair.
            let (d1, d2) = match dir[idx] {
                0 => ((x - 1, y), (x + 1, y)),
                1 => ((x + 1, y + 1), (x - 1, y - 1)),
                2 => ((x, y - 1), (x, y + 1)),
                _ => ((x + 1, y - 1), (x - 1, y + 1)),
            };
            let n1 = if d1.0 < 0 || d1.1 < 0 || d1.0 >= w || d1.1 >= h {
                0.0
            } else {
                mag[(d1.1 * w + d1.0) as usize]
            };
            let n2 = if d2.0 < 0 || d2.1 < 0 || d2.0 >= w || d2.1 >= h {
                0.0
            } else {
                mag[(d2.1 * w + d2.0) as usize]
            };
            // Strict on one side so plateaus thin to a single pixel.
            if m > n1 && m >= n2 {
                if m >= high {
                    state[idx] = 2;
                    strong.push((x, y));
                } else {
                    state[idx] = 1;
                }
            }
        }
    }

    // Hysteresis: weak pixels connected to strong ones survive.
    let mut out = BinaryImage::new(img.width(), img.height());
    let mut stack = strong;
    while let Some((x, y)) = stack.pop() {
        if out.get(x as u32, y as u32) {
            continue;
        }
        out.set(x as u32, y as u32, true);
        for dy in -1..=1i64 {
            for dx in -1..=1i64 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let nidx = (ny * w + nx) as usize;
                if state[nidx] != 0 && !out.get(nx as u32, ny as u32) {
                    stack.push((nx, ny));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(w: u32, h: u32, cx: f64, cy: f64, r: f64) -> BinaryImage {
        let mut img = BinaryImage::new(w, h);
        for y in 0..h {
            for x in 0..w {
                let d = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                if d <= r * r {
                    img.set(x, y, true);
                }
            }
        }
        img
    }

    #[test]
    fn empty_input_gives_empty_edges() {
        let img = BinaryImage::new(50, 50);
        assert!(canny(&img, 0.25).is_empty());
    }

    #[test]
    fn disk_edges_trace_the_circle() {
        let (cx, cy, r) = (60.0, 55.0, 40.0);
        let img = disk(120, 110, cx, cy, r);
        let edges = canny(&img, 0.25);
        assert!(edges.count_on() > 100, "expected a dense ring");
        for (x, y) in edges.on_pixels() {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            assert!((d - r).abs() <= 2.0, "edge pixel ({x},{y}) at radius {d}");
        }
    }

    #[test]
    fn tangent_disks_leave_edges_near_both_circles() {
        let mut img = disk(200, 100, 50.0, 50.0, 30.0);
        let other = disk(200, 100, 110.0, 50.0, 30.0);
        for (x, y) in other.on_pixels() {
            img.set(x, y, true);
        }
        let edges = canny(&img, 0.25);
        for (x, y) in edges.on_pixels() {
            let d1 = ((x as f64 - 50.0).powi(2) + (y as f64 - 50.0).powi(2)).sqrt();
            let d2 = ((x as f64 - 110.0).powi(2) + (y as f64 - 50.0).powi(2)).sqrt();
            let near1 = (d1 - 30.0).abs() <= 2.5;
            let near2 = (d2 - 30.0).abs() <= 2.5;
            assert!(near1 || near2, "stray edge at ({x},{y})");
        }
    }
}
