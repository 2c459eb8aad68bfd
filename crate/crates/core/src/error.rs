use thiserror::Error;

use crate::geometry::SegmentConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PccError {
    #[error("invalid robot description: {0}")]
    InvalidRobot(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("target ({x:.6}, {y:.6}, {z:.6}) is unreachable by a single arc")]
    Unreachable { x: f64, y: f64, z: f64 },

    /// The closed-form inversion succeeded but the result violates the segment limits.
    #[error("analytic solution outside segment limits: {reason}")]
    OutOfRange { raw: SegmentConfig, reason: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("secondary task requires a planar robot")]
    NonPlanar,

    #[error("integration failed at t = {time:.6} s: {reason}")]
    IntegrationFailure {
        time: f64,
        reason: String,
        q: Vec<f64>,
        qdot: Vec<f64>,
    },

    #[error("trajectory error: {0}")]
    Trajectory(String),
}

pub type Result<T> = std::result::Result<T, PccError>;
