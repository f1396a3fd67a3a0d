//! Image processing: color segmentation into background / stem / tomato,
//! morphological denoising and the rotated-rectangle crop.

pub mod color;
pub mod crop;
pub mod kmeans;
pub mod mask;
pub mod morph;

pub use color::{compute_channels, ChannelPlanes};
pub use crop::{crop, min_area_rect};
pub use kmeans::{fit_thresholds, segment, ClassHues, SegmentationThresholds};
pub use mask::{BinaryImage, Label, LabelMask};

/// Denoise a label mask: per-class binary opening then closing with a disk
/// structuring element, then removal of connected components smaller than
/// `min_blob_px`. Removed pixels become background. Where the cleaned stem
/// and tomato rasters overlap, tomato wins.
pub fn denoise(mask: &LabelMask, min_blob_px: usize, kernel_radius: u32) -> LabelMask {
    let mut out = LabelMask::filled(mask.width(), mask.height(), Label::Background);
    for label in [Label::Stem, Label::Tomato] {
        let bin = mask.class_mask(label);
        if bin.is_empty() {
            continue;
        }
        let cleaned = morph::remove_small(&morph::close(&morph::open(&bin, kernel_radius), kernel_radius), min_blob_px);
        for (x, y) in cleaned.on_pixels() {
            out.set(x, y, label);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isolated_pixel_removed() {
        let mut m = LabelMask::filled(9, 9, Label::Background);
        m.set(4, 4, Label::Tomato);
        let d = denoise(&m, 2, 1);
        assert_eq!(d.count(Label::Tomato), 0);
    }

    #[test]
    fn solid_square_loses_at_most_a_perimeter_band() {
        let mut m = LabelMask::filled(70, 70, Label::Background);
        for y in 10..60 {
            for x in 10..60 {
                m.set(x, y, Label::Tomato);
            }
        }
        let before = m.count(Label::Tomato);
        let d = denoise(&m, 25, 2);
        let after = d.count(Label::Tomato);
        // Area loss bounded by a perimeter band of the kernel radius.
        let band = 4 * 50 * 2;
        assert!(after <= before);
        assert!(before - after <= band, "lost {} px", before - after);
        // Interior unchanged.
        for y in 15..55 {
            for x in 15..55 {
                assert_eq!(d.get(x, y), Label::Tomato);
            }
        }
    }

    #[test]
    fn one_pixel_hole_filled_by_closing() {
        let mut m = LabelMask::filled(40, 40, Label::Background);
        for y in 5..35 {
            for x in 5..35 {
                m.set(x, y, Label::Stem);
            }
        }
        m.set(20, 20, Label::Background);
        let before_stem = m.count(Label::Stem);
        let d = denoise(&m, 25, 2);
        assert_eq!(d.get(20, 20), Label::Stem);
        assert!(d.count(Label::Stem) >= before_stem - 4 * 30 * 2);
    }

    #[test]
    fn denoise_is_idempotent() {
        // Structured scene: bar + blobs + speckle noise.
        let mut m = LabelMask::filled(90, 60, Label::Background);
        for y in 20..28 {
            for x in 5..85 {
                m.set(x, y, Label::Stem);
            }
        }
        for (cx, cy) in [(25i64, 45i64), (60, 42)] {
            for y in 0..60i64 {
                for x in 0..90i64 {
                    if (x - cx).pow(2) + (y - cy).pow(2) <= 100 {
                        m.set(x as u32, y as u32, Label::Tomato);
                    }
                }
            }
        }
        for k in 0..40u32 {
            let x = (k * 37 + 11) % 90;
            let y = (k * 53 + 7) % 60;
            let label = if k % 2 == 0 { Label::Stem } else { Label::Tomato };
            if m.get(x, y) == Label::Background {
                m.set(x, y, label);
            }
        }
        let once = denoise(&m, 25, 2);
        let twice = denoise(&once, 25, 2);
        assert_eq!(once, twice);
    }
}
