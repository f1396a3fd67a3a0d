//! Stem skeletonization and the junction/tail graph extracted from it.

pub mod graph;
mod thin;

pub use graph::{build_graph, prune_spurs, GraphEdge, StemGraph, Vertex};
pub use thin::thin;

use crate::error::SkeletonError;
use crate::imgproc::{BinaryImage, Label, LabelMask};

/// One-pixel-wide representation of the stem segment.
#[derive(Debug, Clone)]
pub struct Skeleton {
    image: BinaryImage,
}

impl Skeleton {
    pub fn from_image(image: BinaryImage) -> Self {
        Self { image }
    }

    pub fn image(&self) -> &BinaryImage {
        &self.image
    }

    pub fn width(&self) -> u32 {
        self.image.width()
    }

    pub fn height(&self) -> u32 {
        self.image.height()
    }
}

/// Thin the stem class of the mask to a skeleton.
pub fn skeletonize(mask: &LabelMask) -> Result<Skeleton, SkeletonError> {
    let stem = mask.class_mask(Label::Stem);
    if stem.is_empty() {
        return Err(SkeletonError::EmptyStem);
    }
    Ok(Skeleton {
        image: thin(&stem),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stem_errors() {
        let mask = LabelMask::filled(10, 10, Label::Background);
        assert!(matches!(skeletonize(&mask), Err(SkeletonError::EmptyStem)));
    }

    #[test]
    fn bar_skeletonizes() {
        let mut mask = LabelMask::filled(30, 11, Label::Background);
        for y in 3..8 {
            for x in 2..28 {
                mask.set(x, y, Label::Stem);
            }
        }
        let skel = skeletonize(&mask).unwrap();
        assert!(skel.image().count_on() > 10);
        assert!(skel.image().count_on() < 60);
    }
}
