//! Color-channel extraction: the a* component of CIE L*a*b* (D65 white
//! point) and the HSV hue component, the two features the segmentation
//! clusters on.

use image::RgbImage;

/// The two scalar feature planes derived from an RGB image.
#[derive(Debug, Clone)]
pub struct ChannelPlanes {
    pub width: u32,
    pub height: u32,
    /// a* in conventional Lab units (roughly -128..127).
    pub a_star: Vec<f32>,
    /// Hue in degrees [0, 360); achromatic pixels map to 0.
    pub hue: Vec<f32>,
}

fn srgb_to_linear(c: u8) -> f64 {
    let c = c as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// a* of the sRGB color (r, g, b) under the D65 white point.
pub fn a_star(r: u8, g: u8, b: u8) -> f64 {
    let (rl, gl, bl) = (srgb_to_linear(r), srgb_to_linear(g), srgb_to_linear(b));
    // sRGB -> XYZ, D65, Y normalized to 1.
    let x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
    let y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
    const XN: f64 = 0.95047;
    const YN: f64 = 1.0;
    500.0 * (lab_f(x / XN) - lab_f(y / YN))
}

/// HSV hue of (r, g, b) in degrees [0, 360); 0 for achromatic pixels.
pub fn hue_deg(r: u8, g: u8, b: u8) -> f64 {
    let (rf, gf, bf) = (r as f64, g as f64, b as f64);
    let max = rf.max(gf).max(bf);
    let min = rf.min(gf).min(bf);
    let delta = max - min;
    if delta == 0.0 {
        return 0.0;
    }
    let h = if max == rf {
        60.0 * ((gf - bf) / delta)
    } else if max == gf {
        60.0 * ((bf - rf) / delta + 2.0)
    } else {
        60.0 * ((rf - gf) / delta + 4.0)
    };
    h.rem_euclid(360.0)
}

/// Compute both feature planes for an image.
pub fn compute_channels(img: &RgbImage) -> ChannelPlanes {
    let (width, height) = img.dimensions();
    let n = (width * height) as usize;
    let mut a_plane = Vec::with_capacity(n);
    let mut h_plane = Vec::with_capacity(n);
    for p in img.pixels() {
        let [r, g, b] = p.0;
        a_plane.push(a_star(r, g, b) as f32);
        h_plane.push(hue_deg(r, g, b) as f32);
    }
    ChannelPlanes {
        width,
        height,
        a_star: a_plane,
        hue: h_plane,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_is_achromatic() {
        // The sRGB matrix rows sum to the white point only to ~7 digits,
        // so gray lands at a* = 0 within that precision.
        assert!(a_star(128, 128, 128).abs() < 1e-3);
        assert_eq!(hue_deg(128, 128, 128), 0.0);
    }

    #[test]
    fn pure_red() {
        assert!(a_star(255, 0, 0) > 0.0);
        assert_eq!(hue_deg(255, 0, 0), 0.0);
    }

    #[test]
    fn pure_green_matches_reference_tables() {
        // sRGB (0,255,0) in CIE L*a*b* (D65): a* = -86.18 approximately.
        let a = a_star(0, 255, 0);
        assert!(a < 0.0);
        assert!((a - (-86.18)).abs() < 0.1, "a* = {a}");
        assert!((hue_deg(0, 255, 0) - 120.0).abs() < 1e-9);
    }

    #[test]
    fn pure_blue_hue() {
        assert!((hue_deg(0, 0, 255) - 240.0).abs() < 1e-9);
    }

    #[test]
    fn channels_plane_dimensions() {
        let img = RgbImage::from_pixel(7, 5, image::Rgb([10, 200, 30]));
        let ch = compute_channels(&img);
        assert_eq!(ch.a_star.len(), 35);
        assert_eq!(ch.hue.len(), 35);
        assert_eq!((ch.width, ch.height), (7, 5));
    }
}
