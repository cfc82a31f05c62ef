//! End-to-end scene pipeline: mask lifting, plane fit, outlier removal,
//! surface reconstruction, containment, clustering, and the two gates.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{
    BackendError, Classifier2d, ClassificationResult, Detection3D, Detector3d, KnownClassList,
    RoadSegmenter,
};
use crate::camera::{box3d_to_box2d, cluster_to_box3d, lift_road_mask, Box2D, Box3D,
    CalibratedCamera};
use crate::cluster::{dbscan, Cluster, ClusterStatus, DbscanConfig};
use crate::error::GeometryError;
use crate::plane::{ransac_plane, RansacConfig};
use crate::pointcloud::{crop_front, remove_statistical_outliers, IndexSet, PointCloud};
use crate::surface::{build_alpha_shape, on_road_points, Point2, RoadSurface};

/// Signed height band above the fitted road plane for proposal points:
/// below the minimum is road skin, above the maximum is overhang.
pub const DEFAULT_HEIGHT_BAND: (f64, f64) = (0.2, 4.0);

/// All pipeline parameters. The defaults reproduce the published
/// parameterization, so an empty config file runs the reference setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub ransac: RansacConfig,
    pub dbscan: DbscanConfig,
    /// Alpha-shape circumradius bound, meters.
    pub alpha: f64,
    /// Neighbors for statistical outlier removal.
    pub outlier_k: usize,
    /// Standard-deviation multiplier for outlier removal.
    pub outlier_ratio: f64,
    /// (min, max) height above the plane for on-road proposal points.
    pub height_band: (f64, f64),
    /// Fraction of cluster points a single detection must cover.
    pub known_fraction: f64,
    /// Clusters whose max class probability falls below this are anomalies.
    pub anomaly_threshold: f64,
    /// Detections below this score are ignored by the 3D gate.
    pub min_detection_score: f64,
    /// Projected boxes smaller than this (px²) are dropped before
    /// classification.
    pub min_box_area: f64,
    pub classes: KnownClassList,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            ransac: RansacConfig::default(),
            dbscan: DbscanConfig::default(),
            alpha: 10.0,
            outlier_k: 20,
            outlier_ratio: 8.0,
            height_band: DEFAULT_HEIGHT_BAND,
            known_fraction: 0.5,
            anomaly_threshold: 0.25,
            min_detection_score: 0.0,
            min_box_area: 400.0,
            classes: KnownClassList::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        self.ransac.validate()?;
        self.dbscan.validate()?;
        self.classes.validate()?;
        if !(self.alpha > 0.0) {
            return Err(GeometryError::InvalidConfig("alpha must be > 0"));
        }
        if self.outlier_k < 1 {
            return Err(GeometryError::InvalidConfig("outlier_k must be >= 1"));
        }
        if !(self.outlier_ratio > 0.0) {
            return Err(GeometryError::InvalidConfig("outlier_ratio must be > 0"));
        }
        if !(self.height_band.0 < self.height_band.1) {
            return Err(GeometryError::InvalidConfig(
                "height_band min must be below max",
            ));
        }
        if !(0.0..=1.0).contains(&self.known_fraction) {
            return Err(GeometryError::InvalidConfig(
                "known_fraction must be in [0, 1]",
            ));
        }
        if !(0.0..=1.0).contains(&self.anomaly_threshold) {
            return Err(GeometryError::InvalidConfig(
                "anomaly_threshold must be in [0, 1]",
            ));
        }
        if !(0.0..=1.0).contains(&self.min_detection_score) {
            return Err(GeometryError::InvalidConfig(
                "min_detection_score must be in [0, 1]",
            ));
        }
        if !(self.min_box_area >= 0.0) {
            return Err(GeometryError::InvalidConfig("min_box_area must be >= 0"));
        }
        Ok(())
    }
}

/// Per-stage point/cluster counts for one scene.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageLog {
    /// Points in front of the ego vehicle.
    pub cropped: usize,
    /// Cropped points that land on road mask pixels.
    pub road_candidates: usize,
    /// RANSAC road-plane inliers.
    pub road_inliers: usize,
    /// Road inliers surviving statistical outlier removal.
    pub road_points_clean: usize,
    /// Non-road points standing on the surface within the height band.
    pub on_road: usize,
    /// DBSCAN clusters proposed.
    pub proposals: usize,
    pub known_3d: usize,
    pub known_2d: usize,
    pub anomalies: usize,
}

impl StageLog {
    /// Accumulate counts across scenes.
    pub fn add(&mut self, other: &StageLog) {
        self.cropped += other.cropped;
        self.road_candidates += other.road_candidates;
        self.road_inliers += other.road_inliers;
        self.road_points_clean += other.road_points_clean;
        self.on_road += other.on_road;
        self.proposals += other.proposals;
        self.known_3d += other.known_3d;
        self.known_2d += other.known_2d;
        self.anomalies += other.anomalies;
    }
}

/// One resolved proposal with the boxes computed for it. `box3`/`box2` are
/// only present for clusters that reached the 2D stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterOutcome {
    pub cluster: Cluster,
    pub box3: Option<Box3D>,
    pub box2: Option<Box2D>,
}

/// A final anomaly verdict: cluster index plus its lidar box and, when the
/// projection succeeded, its image box.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnomalyRecord {
    pub cluster: usize,
    pub box3: Box3D,
    pub box2: Option<Box2D>,
}

/// Full per-scene output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneResult {
    pub scene_id: String,
    pub clusters: Vec<ClusterOutcome>,
    pub anomalies: Vec<AnomalyRecord>,
    /// RANSAC road inliers (before outlier removal), for inspection tools.
    pub road_inliers: IndexSet,
    pub stage_log: StageLog,
    /// Set when the scene had too little road geometry to run; the result
    /// then carries no proposals.
    pub degenerate: Option<String>,
}

/// The three neural components behind their interfaces.
pub struct BackendSet<'a> {
    pub segmenter: &'a dyn RoadSegmenter,
    pub detector: &'a dyn Detector3d,
    pub classifier: &'a dyn Classifier2d,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("{stage} stage: {source}")]
    Backend {
        stage: &'static str,
        #[source]
        source: BackendError,
    },
    #[error("{stage} stage: {source}")]
    Geometry {
        stage: &'static str,
        #[source]
        source: GeometryError,
    },
    #[error("road mask is {mask_w}x{mask_h} but the camera image is {cam_w}x{cam_h}")]
    MaskDimensions {
        mask_w: u32,
        mask_h: u32,
        cam_w: u32,
        cam_h: u32,
    },
}

/// True iff some single detection with sufficient score covers at least
/// `known_fraction` of the cluster members (boundary inclusive, no pooling
/// across detections).
pub fn gate_known_3d(
    cloud: &PointCloud,
    cluster: &Cluster,
    detections: &[Detection3D],
    known_fraction: f64,
    min_score: f64,
) -> bool {
    matching_detection(cloud, cluster, detections, known_fraction, min_score).is_some()
}

fn matching_detection<'a>(
    cloud: &PointCloud,
    cluster: &Cluster,
    detections: &'a [Detection3D],
    known_fraction: f64,
    min_score: f64,
) -> Option<&'a Detection3D> {
    let size = cluster.members.len();
    if size == 0 {
        return None;
    }
    detections
        .iter()
        .filter(|det| det.score >= min_score)
        .find(|det| {
            let inside = cluster
                .members
                .iter()
                .filter(|&i| det.bbox.contains_point(cloud.points[i]))
                .count();
            inside as f64 / size as f64 >= known_fraction
        })
}

/// Threshold rule of the 2D gate: known iff the max probability reaches
/// `threshold` (inclusive); the label is the argmax, ties to the earlier
/// class-list entry.
pub fn decide_anomaly(result: &ClassificationResult, threshold: f64) -> (bool, Option<&str>) {
    let (label, prob) = result.max();
    if prob < threshold {
        (true, None)
    } else {
        (false, Some(label))
    }
}

/// Run the full pipeline on one scene.
pub fn run_scene(
    scene_id: &str,
    cloud: &PointCloud,
    cam: &CalibratedCamera,
    backends: &BackendSet<'_>,
    config: &PipelineConfig,
) -> Result<SceneResult, PipelineError> {
    run_scene_detailed(scene_id, cloud, cam, backends, config).map(|(result, _)| result)
}

/// Like [`run_scene`], also returning the reconstructed road surface for
/// inspection tooling (absent when the scene degenerated).
pub fn run_scene_detailed(
    scene_id: &str,
    cloud: &PointCloud,
    cam: &CalibratedCamera,
    backends: &BackendSet<'_>,
    config: &PipelineConfig,
) -> Result<(SceneResult, Option<RoadSurface>), PipelineError> {
    config
        .validate()
        .map_err(|source| PipelineError::Geometry {
            stage: "config",
            source,
        })?;

    let mut log = StageLog::default();
    let degenerate = |log: StageLog, road_inliers: IndexSet, reason: String| {
        (
            SceneResult {
                scene_id: scene_id.to_string(),
                clusters: Vec::new(),
                anomalies: Vec::new(),
                road_inliers,
                stage_log: log,
                degenerate: Some(reason),
            },
            None,
        )
    };

    // (1) front crop
    let cropped = crop_front(cloud);
    log.cropped = cropped.len();

    // (2) road mask lifted into lidar space
    let mask = backends
        .segmenter
        .road_mask(scene_id)
        .map_err(|source| PipelineError::Backend {
            stage: "segmentation",
            source,
        })?;
    if mask.width != cam.width || mask.height != cam.height {
        return Err(PipelineError::MaskDimensions {
            mask_w: mask.width,
            mask_h: mask.height,
            cam_w: cam.width,
            cam_h: cam.height,
        });
    }
    let road_candidates = lift_road_mask(cam, &mask, cloud, &cropped);
    log.road_candidates = road_candidates.len();

    // (3) RANSAC road plane
    if road_candidates.len() < config.ransac.sample_size {
        return Ok(degenerate(
            log,
            IndexSet::empty(),
            "too few road candidates for plane estimation".into(),
        ));
    }
    let (plane, road_inliers) = match ransac_plane(cloud, &road_candidates, &config.ransac) {
        Ok(v) => v,
        Err(e) if is_degenerate_geometry(&e) => {
            return Ok(degenerate(log, IndexSet::empty(), e.to_string()))
        }
        Err(source) => {
            return Err(PipelineError::Geometry {
                stage: "plane-fit",
                source,
            })
        }
    };
    log.road_inliers = road_inliers.len();

    // (4) statistical outlier removal on the road inliers
    let cleaned = match remove_statistical_outliers(
        cloud,
        &road_inliers,
        config.outlier_k,
        config.outlier_ratio,
    ) {
        Ok(v) => v,
        Err(e) if is_degenerate_geometry(&e) => {
            return Ok(degenerate(log, road_inliers, e.to_string()))
        }
        Err(source) => {
            return Err(PipelineError::Geometry {
                stage: "outlier-removal",
                source,
            })
        }
    };
    log.road_points_clean = cleaned.len();

    // (5) alpha shape over the flattened cleaned road points
    let flattened: Vec<Point2> = cleaned
        .iter()
        .map(|i| Point2::new(cloud.points[i].x, cloud.points[i].y))
        .collect();
    let surface = match build_alpha_shape(&flattened, config.alpha) {
        Ok(s) => s,
        Err(e) if is_degenerate_geometry(&e) => {
            return Ok(degenerate(log, road_inliers, e.to_string()))
        }
        Err(source) => {
            return Err(PipelineError::Geometry {
                stage: "surface",
                source,
            })
        }
    };

    // (6) containment of non-road points (cropped minus road inliers)
    let non_road = cropped.difference(&road_inliers);
    let on_road = on_road_points(cloud, &non_road, &surface, &plane, config.height_band);
    log.on_road = on_road.len();

    // (7) proposals
    let mut clusters = dbscan(cloud, &on_road, &config.dbscan);
    log.proposals = clusters.len();

    // (8) 3D gate
    let detections = backends
        .detector
        .detect(scene_id, cloud)
        .map_err(|source| PipelineError::Backend {
            stage: "detection-3d",
            source,
        })?;
    for det in &detections {
        det.validate().map_err(|source| PipelineError::Geometry {
            stage: "detection-3d",
            source,
        })?;
    }

    let mut outcomes: Vec<ClusterOutcome> = Vec::with_capacity(clusters.len());
    let mut anomalies: Vec<AnomalyRecord> = Vec::new();
    for (idx, cluster) in clusters.drain(..).enumerate() {
        let mut cluster = cluster;
        if let Some(det) = matching_detection(
            cloud,
            &cluster,
            &detections,
            config.known_fraction,
            config.min_detection_score,
        ) {
            let (label, score) = (det.label.clone(), det.score);
            cluster
                .resolve(ClusterStatus::Known3D, Some(label), Some(score))
                .expect("fresh proposal");
            log.known_3d += 1;
            outcomes.push(ClusterOutcome {
                cluster,
                box3: None,
                box2: None,
            });
            continue;
        }

        // (9) 2D gate
        let box3 = cluster_to_box3d(cloud, &cluster).map_err(|source| {
            PipelineError::Geometry {
                stage: "projection",
                source,
            }
        })?;
        let box2 = box3d_to_box2d(cam, &box3, config.min_box_area, idx);
        match box2 {
            None => {
                // Lidar-only anomaly: not visible enough in the image.
                cluster
                    .resolve(ClusterStatus::Anomaly, None, None)
                    .expect("fresh proposal");
                log.anomalies += 1;
                anomalies.push(AnomalyRecord {
                    cluster: idx,
                    box3,
                    box2: None,
                });
                outcomes.push(ClusterOutcome {
                    cluster,
                    box3: Some(box3),
                    box2: None,
                });
            }
            Some(b2) => {
                let classification = backends
                    .classifier
                    .classify(scene_id, &b2, &config.classes)
                    .map_err(|source| PipelineError::Backend {
                        stage: "classification-2d",
                        source,
                    })?;
                let (is_anomaly, label) =
                    decide_anomaly(&classification, config.anomaly_threshold);
                if is_anomaly {
                    cluster
                        .resolve(ClusterStatus::Anomaly, None, None)
                        .expect("fresh proposal");
                    log.anomalies += 1;
                    anomalies.push(AnomalyRecord {
                        cluster: idx,
                        box3,
                        box2: Some(b2),
                    });
                } else {
                    let label = label.map(ToString::to_string);
                    let score = classification.max().1;
                    cluster
                        .resolve(ClusterStatus::Known2D, label, Some(score))
                        .expect("fresh proposal");
                    log.known_2d += 1;
                }
                outcomes.push(ClusterOutcome {
                    cluster,
                    box3: Some(box3),
                    box2: Some(b2),
                });
            }
        }
    }

    Ok((
        SceneResult {
            scene_id: scene_id.to_string(),
            clusters: outcomes,
            anomalies,
            road_inliers,
            stage_log: log,
            degenerate: None,
        },
        Some(surface),
    ))
}

fn is_degenerate_geometry(e: &GeometryError) -> bool {
    matches!(
        e,
        GeometryError::InsufficientPoints { .. }
            | GeometryError::InsufficientNeighborhood { .. }
            | GeometryError::NoPlaneHypothesis
            | GeometryError::DegenerateSample
            | GeometryError::DegeneratePointSet
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::Point3;
    use alloc::vec;

    fn cluster_of_n(n: usize) -> (PointCloud, Cluster) {
        let pts: Vec<Point3> = (0..n).map(|i| Point3::new(i as f64 * 0.1, 0.0, 0.5)).collect();
        let cloud = PointCloud::new(pts);
        let cluster = Cluster::proposed(IndexSet::full(n));
        (cloud, cluster)
    }

    fn box_over_first(k: usize) -> Detection3D {
        // Covers points 0..k (spacing 0.1 starting at x = 0).
        let half = (k as f64 - 1.0) * 0.1 / 2.0;
        Detection3D {
            bbox: Box3D {
                center: Point3::new(half, 0.0, 0.5),
                dims: [(k as f64 - 1.0) * 0.1 + 0.05, 0.5, 0.5],
                yaw: 0.0,
            },
            label: "car".into(),
            score: 0.9,
        }
    }

    #[test]
    fn gate_at_exactly_half() {
        let (cloud, cluster) = cluster_of_n(30);
        assert!(gate_known_3d(&cloud, &cluster, &[box_over_first(15)], 0.5, 0.0));
        assert!(!gate_known_3d(&cloud, &cluster, &[box_over_first(14)], 0.5, 0.0));
    }

    #[test]
    fn gate_does_not_pool_across_boxes() {
        let (cloud, cluster) = cluster_of_n(30);
        // Two disjoint boxes covering 10 points each: no single box reaches 15.
        let mut right = box_over_first(10);
        right.bbox.center.x += 2.0; // covers 20..30
        let left = box_over_first(10);
        let boxes = vec![left.clone(), right];
        assert!(!gate_known_3d(&cloud, &cluster, &boxes, 0.5, 0.0));
        // Pooled they cover 20/30; a single 20-box passes.
        assert!(gate_known_3d(&cloud, &cluster, &[box_over_first(20)], 0.5, 0.0));
    }

    #[test]
    fn gate_respects_min_score() {
        let (cloud, cluster) = cluster_of_n(30);
        let mut det = box_over_first(30);
        det.score = 0.1;
        assert!(gate_known_3d(&cloud, &cluster, &[det.clone()], 0.5, 0.0));
        assert!(!gate_known_3d(&cloud, &cluster, &[det], 0.5, 0.2));
    }

    #[test]
    fn decide_anomaly_threshold_boundary() {
        let classes = KnownClassList {
            labels: vec!["a".into(), "b".into(), "c".into(), "d".into(), "e".into()],
            prompt_template: "{label}".into(),
        };
        // Max exactly at the threshold: known.
        let at = ClassificationResult::new(&classes, vec![0.25, 0.25, 0.25, 0.25, 0.0]).unwrap();
        assert_eq!(decide_anomaly(&at, 0.25), (false, Some("a")));
        // Max strictly below: anomaly.
        let below =
            ClassificationResult::new(&classes, vec![0.2499, 0.2499, 0.2499, 0.2499, 0.0004])
                .unwrap();
        assert_eq!(decide_anomaly(&below, 0.25), (true, None));
    }

    #[test]
    fn decide_anomaly_clear_max_and_uniform() {
        let classes = KnownClassList::default();
        let mut probs = vec![0.1 / 15.0; 16];
        probs[0] = 0.9;
        let clear = ClassificationResult::new(&classes, probs).unwrap();
        assert_eq!(decide_anomaly(&clear, 0.25), (false, Some("car")));
        let uniform = ClassificationResult::uniform(&classes);
        assert_eq!(decide_anomaly(&uniform, 0.25), (true, None));
        // Threshold 0 never flags classified clusters.
        assert_eq!(decide_anomaly(&uniform, 0.0), (false, Some("car")));
    }

    #[test]
    fn config_defaults_are_published_values() {
        let c = PipelineConfig::default();
        assert_eq!(c.ransac.iterations, 500);
        assert_eq!(c.ransac.sample_size, 10);
        assert_eq!(c.ransac.inlier_distance_m, 0.5);
        assert_eq!(c.dbscan.epsilon, 1.0);
        assert_eq!(c.dbscan.min_cluster_size, 30);
        assert_eq!(c.alpha, 10.0);
        assert_eq!(c.outlier_k, 20);
        assert_eq!(c.outlier_ratio, 8.0);
        assert_eq!(c.height_band, (0.2, 4.0));
        assert_eq!(c.known_fraction, 0.5);
        assert_eq!(c.anomaly_threshold, 0.25);
        assert_eq!(c.min_detection_score, 0.0);
        assert_eq!(c.min_box_area, 400.0);
        assert_eq!(c.classes.labels.len(), 16);
        c.validate().unwrap();
    }
}
