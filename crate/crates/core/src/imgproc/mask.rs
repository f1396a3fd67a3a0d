//! Raster containers: the three-class label mask and plain binary images.

use serde::{Deserialize, Serialize};

/// Pixel class of the segmented scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Background,
    Stem,
    Tomato,
}

/// Per-pixel class map. Same dimensions as the source image; every pixel
/// carries exactly one label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    width: u32,
    height: u32,
    labels: Vec<Label>,
}

impl LabelMask {
    pub fn filled(width: u32, height: u32, label: Label) -> Self {
        Self {
            width,
            height,
            labels: vec![label; (width * height) as usize],
        }
    }

    pub fn from_labels(width: u32, height: u32, labels: Vec<Label>) -> Self {
        assert_eq!(labels.len(), (width * height) as usize);
        Self { width, height, labels }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Label {
        self.labels[(y * self.width + x) as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, label: Label) {
        self.labels[(y * self.width + x) as usize] = label;
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Binary image of one class.
    pub fn class_mask(&self, label: Label) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            data: self.labels.iter().map(|&l| l == label).collect(),
        }
    }
}

/// Boolean raster used by morphology, edge detection and thinning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![false; (width * height) as usize],
        }
    }

    pub fn from_data(width: u32, height: u32, data: Vec<bool>) -> Self {
        assert_eq!(data.len(), (width * height) as usize);
        Self { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[(y * self.width + x) as usize]
    }

    /// Out-of-bounds coordinates read as background.
    #[inline]
    pub fn get_i(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            false
        } else {
            self.data[(y as u32 * self.width + x as u32) as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.data[(y * self.width + x) as usize] = v;
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count_on(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&v| v)
    }

    /// Iterate over on-pixel coordinates in raster order.
    pub fn on_pixels(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(move |(i, _)| (i as u32 % w, i as u32 / w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_mask_roundtrip_counts() {
        let mut m = LabelMask::filled(4, 3, Label::Background);
        m.set(1, 1, Label::Stem);
        m.set(2, 1, Label::Tomato);
        m.set(3, 2, Label::Tomato);
        assert_eq!(m.count(Label::Background), 9);
        assert_eq!(m.class_mask(Label::Stem).count_on(), 1);
        assert_eq!(m.class_mask(Label::Tomato).count_on(), 2);
    }

    #[test]
    fn out_of_bounds_reads_background() {
        let mut b = BinaryImage::new(2, 2);
        b.set(0, 0, true);
        assert!(b.get_i(0, 0));
        assert!(!b.get_i(-1, 0));
        assert!(!b.get_i(0, 2));
    }
}
