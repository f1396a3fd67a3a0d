//! Error types for the detection and planning stages.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ImgprocError {
    /// Fewer than three distinct feature values; k-means cannot fit.
    #[error("degenerate input: only {distinct} distinct feature value(s)")]
    DegenerateInput { distinct: usize },
    /// No non-background pixels to crop around.
    #[error("no foreground pixels")]
    EmptyForeground,
}

#[derive(Debug, Error, PartialEq)]
pub enum TomatoError {
    #[error("no tomatoes detected")]
    NoTomatoes,
}

#[derive(Debug, Error, PartialEq)]
pub enum SkeletonError {
    #[error("stem class is empty")]
    EmptyStem,
}

#[derive(Debug, Error, PartialEq)]
pub enum PeduncleError {
    #[error("stem graph has no edges")]
    NoStem,
    /// Source and destination vertices coincide.
    #[error("degenerate edge: endpoints coincide")]
    DegenerateEdge,
}

#[derive(Debug, Error, PartialEq)]
pub enum GraspError {
    #[error("no valid grasp candidate")]
    NoValidGrasp,
    #[error("grasp pose ({x:.1}, {y:.1}, {z:.1}) mm outside workspace")]
    OutOfWorkspace { x: f64, y: f64, z: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("scene spec violation: {0}")]
    SpecViolation(String),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to parse config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}
