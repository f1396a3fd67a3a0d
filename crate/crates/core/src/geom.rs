//! Planar points, poses and the rotated-rectangle crop transform shared by
//! the detection and planning stages.

use serde::{Deserialize, Serialize};

/// A 2D point in image coordinates (pixels, x right, y down) or in
/// millimetres depending on context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Self) -> f64 {
        self.dist_sq(other).sqrt()
    }

    pub fn dist_sq(self, other: Self) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// Rotate around the origin by `angle` radians (positive = x toward y).
    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }

    pub fn add(self, other: Self) -> Self {
        Self::new(self.x + other.x, self.y + other.y)
    }

    pub fn sub(self, other: Self) -> Self {
        Self::new(self.x - other.x, self.y - other.y)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

/// A planar pose with height: (x, y, z) in millimetres plus yaw in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
}

/// Rectangle with arbitrary in-plane rotation. Records the crop transform so
/// coordinates measured on the cropped raster can be mapped back to the
/// source image.
///
/// Crop-frame convention: the pixel grid of the cropped raster has its
/// origin at one rectangle corner, u along the rectangle's `angle` direction
/// and v along the perpendicular.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatedRect {
    pub center: Point2,
    /// Extent along the `angle` direction.
    pub width: f64,
    /// Extent perpendicular to the `angle` direction.
    pub height: f64,
    /// Radians in (-pi/2, pi/2].
    pub angle: f64,
}

impl RotatedRect {
    /// Map a point in crop-raster coordinates to source-image coordinates.
    pub fn crop_to_image(&self, p: Point2) -> Point2 {
        let centered = Point2::new(p.x - self.width / 2.0, p.y - self.height / 2.0);
        centered.rotated(self.angle).add(self.center)
    }

    /// Map a point in source-image coordinates to crop-raster coordinates.
    pub fn image_to_crop(&self, p: Point2) -> Point2 {
        let centered = p.sub(self.center).rotated(-self.angle);
        Point2::new(centered.x + self.width / 2.0, centered.y + self.height / 2.0)
    }

    /// The four corners in source-image coordinates.
    pub fn corners(&self) -> [Point2; 4] {
        [
            self.crop_to_image(Point2::new(0.0, 0.0)),
            self.crop_to_image(Point2::new(self.width, 0.0)),
            self.crop_to_image(Point2::new(self.width, self.height)),
            self.crop_to_image(Point2::new(0.0, self.height)),
        ]
    }
}

/// Fold an angle into the half-turn interval (-pi/2, pi/2].
///
/// Line orientations are undirected, so angles that differ by pi describe
/// the same line.
pub fn fold_half_turn(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(std::f64::consts::PI);
    if t > std::f64::consts::FRAC_PI_2 {
        t -= std::f64::consts::PI;
    }
    // rem_euclid can return exactly pi for inputs like -1e-18.
    if t <= -std::f64::consts::FRAC_PI_2 {
        t += std::f64::consts::PI;
    }
    t
}
