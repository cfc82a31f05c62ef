//! Errors for the geometric operations.

use thiserror::Error;

/// Failure modes of the pure geometry layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    /// Statistical outlier removal needs strictly more points than neighbors.
    #[error("insufficient points for neighborhood statistics (need more than {k}, got {got})")]
    InsufficientNeighborhood { k: usize, got: usize },
    /// A sampling operation was given fewer points than the sample size.
    #[error("insufficient points (need at least {needed}, got {got})")]
    InsufficientPoints { needed: usize, got: usize },
    /// Plane fit on fewer than 3 points or a rank-deficient configuration.
    #[error("degenerate sample")]
    DegenerateSample,
    /// Every RANSAC candidate sample was degenerate.
    #[error("no valid plane hypothesis")]
    NoPlaneHypothesis,
    /// Alpha shape input with fewer than 3 distinct points or all collinear.
    #[error("degenerate point set")]
    DegeneratePointSet,
    /// A point coordinate was NaN or infinite.
    #[error("non-finite coordinate")]
    NonFinite,
    /// Operation on an empty cluster.
    #[error("empty cluster")]
    EmptyCluster,
    /// An index referenced a point outside the cloud.
    #[error("index {index} out of bounds for cloud of {len} points")]
    IndexOutOfBounds { index: usize, len: usize },
    /// Index list passed to `IndexSet` was not strictly increasing.
    #[error("indices not strictly increasing")]
    UnsortedIndices,
    /// A cluster status tried to move backwards or re-resolve.
    #[error("cluster status may only move forward from Proposed")]
    InvalidStatusTransition,
    /// A configuration value was outside its documented range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}
