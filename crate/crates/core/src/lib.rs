//! ora-core — geometric core of the ora on-road anomaly detection pipeline.
//!
//! Unknown objects on the road are found by proposing lidar clusters and
//! ruling them out with closed-set models, in sequence:
//!
//! 1. **Road points** – the camera road mask is lifted into lidar space by
//!    projecting points into it ([`camera::lift_road_mask`]).
//! 2. **Plane** – the road plane is re-estimated from the lifted points with
//!    RANSAC ([`plane::ransac_plane`]), then statistical outliers are removed
//!    ([`pointcloud::remove_statistical_outliers`]).
//! 3. **Surface** – an alpha shape over the flattened road points gives a
//!    containment test for "standing on the road" ([`surface`]).
//! 4. **Proposals** – on-road points are clustered with DBSCAN
//!    ([`cluster::dbscan`]); every cluster starts out unknown.
//! 5. **Gates** – clusters covered by a 3D detection are known; the rest are
//!    projected into the image and handed to a 2D open-set classifier.
//!    Whatever survives both gates is an anomaly ([`pipeline::run_scene`]).
//!
//! Neural components (segmenter, 3D detector, 2D classifier) sit behind the
//! traits in [`backend`]; [`oracle`] provides ground-truth-backed
//! implementations for the synthetic scenes produced by [`synth`], and
//! [`eval`] scores pipeline output against that ground truth.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature for embedded use. File formats, IO, and the CLI live in the
//! companion `ora` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod backend;
pub mod camera;
pub mod cluster;
pub mod delaunay;
pub mod error;
pub mod eval;
mod float;
mod grid;
pub mod oracle;
pub mod pipeline;
pub mod plane;
pub mod pointcloud;
pub mod predicates;
pub mod surface;
pub mod synth;

pub use backend::{
    BackendError, ClassificationResult, Classifier2d, Detection3D, Detector3d, KnownClassList,
    RoadSegmenter,
};
pub use camera::{Box2D, Box3D, CalibratedCamera, RoadMask};
pub use cluster::{dbscan, Cluster, ClusterStatus, DbscanConfig};
pub use error::GeometryError;
pub use eval::{evaluate, iou_3d, EvalReport, MatchConfig};
pub use pipeline::{run_scene, PipelineConfig, SceneResult, StageLog};
pub use plane::{fit_plane_least_squares, ransac_plane, Plane, RansacConfig};
pub use pointcloud::{crop_front, remove_statistical_outliers, IndexSet, Point3, PointCloud};
pub use surface::{build_alpha_shape, on_road_points, Point2, RoadSurface};
pub use synth::{generate, scenario_suite, GroundTruth, SceneSpec};

