//! Ground-truth-backed backends for synthetic scenes.
//!
//! These stand in for the neural components when evaluating the geometry:
//! the segmenter returns the rendered ground-truth mask, the detector
//! returns the planted known-object boxes (never anomalies), and the
//! classifier recognizes whichever planted object dominates the query box.
//! Both detector and classifier can be degraded with a seeded miss rate.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backend::{
    BackendError, ClassificationResult, Classifier2d, Detection3D, Detector3d, KnownClassList,
    RoadSegmenter,
};
use crate::camera::{box3d_to_box2d, Box2D, CalibratedCamera, RoadMask};
use crate::pointcloud::PointCloud;
use crate::synth::{GroundTruth, GtKind};

/// Stable string hash used to derive per-scene RNG streams.
fn fnv1a(s: &str) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for b in s.as_bytes() {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn scene_rng(seed: u64, scene_id: &str, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a(scene_id).rotate_left(1) ^ salt)
}

fn check_scene(component: &'static str, expected: &str, got: &str) -> Result<(), BackendError> {
    if expected != got {
        return Err(BackendError::new(
            component,
            alloc::format!("oracle holds scene '{expected}', asked for '{got}'"),
        ));
    }
    Ok(())
}

/// Returns the mask rendered from the scene's ground-truth road geometry.
pub struct OracleSegmenter {
    scene_id: String,
    mask: RoadMask,
}

impl OracleSegmenter {
    pub fn new(scene_id: impl Into<String>, mask: RoadMask) -> Self {
        Self {
            scene_id: scene_id.into(),
            mask,
        }
    }
}

impl RoadSegmenter for OracleSegmenter {
    fn road_mask(&self, scene_id: &str) -> Result<RoadMask, BackendError> {
        check_scene("segmenter", &self.scene_id, scene_id)?;
        Ok(self.mask.clone())
    }
}

/// Emits the ground-truth boxes of planted *known* objects, each dropped
/// independently with probability `miss_rate` (seeded, per-call stateless).
/// Never emits a box for a planted anomaly.
pub struct OracleDetector3d {
    scene_id: String,
    boxes: Vec<Detection3D>,
    miss_rate: f64,
    seed: u64,
}

impl OracleDetector3d {
    pub fn new(
        scene_id: impl Into<String>,
        truth: &GroundTruth,
        miss_rate: f64,
        seed: u64,
    ) -> Self {
        let boxes = truth
            .objects
            .iter()
            .filter_map(|o| match &o.kind {
                GtKind::Known { label } => Some(Detection3D {
                    bbox: o.bbox,
                    label: label.clone(),
                    score: 1.0,
                }),
                GtKind::Anomaly => None,
            })
            .collect();
        Self {
            scene_id: scene_id.into(),
            boxes,
            miss_rate,
            seed,
        }
    }
}

impl Detector3d for OracleDetector3d {
    fn detect(
        &self,
        scene_id: &str,
        _cloud: &PointCloud,
    ) -> Result<Vec<Detection3D>, BackendError> {
        check_scene("detector3d", &self.scene_id, scene_id)?;
        let mut rng = scene_rng(self.seed, scene_id, 0x0d37);
        Ok(self
            .boxes
            .iter()
            .filter(|_| rng.random::<f64>() >= self.miss_rate)
            .cloned()
            .collect())
    }
}

/// Classifies a query box by the planted object whose projected box overlaps
/// it most: a known object yields 0.9 on its label (rest uniform), an
/// anomaly or an empty box yields the uniform distribution. A `miss_rate`
/// turns known objects uniform as well, mimicking classifier failures.
pub struct OracleClassifier2d {
    scene_id: String,
    camera: CalibratedCamera,
    /// (projected ground-truth box, known label or None for anomalies).
    objects: Vec<(Option<Box2D>, Option<String>)>,
    miss_rate: f64,
    seed: u64,
}

impl OracleClassifier2d {
    pub fn new(
        scene_id: impl Into<String>,
        truth: &GroundTruth,
        camera: &CalibratedCamera,
        miss_rate: f64,
        seed: u64,
    ) -> Self {
        let objects = truth
            .objects
            .iter()
            .map(|o| {
                let projected = box3d_to_box2d(camera, &o.bbox, 0.0, usize::MAX);
                let label = match &o.kind {
                    GtKind::Known { label } => Some(label.clone()),
                    GtKind::Anomaly => None,
                };
                (projected, label)
            })
            .collect();
        Self {
            scene_id: scene_id.into(),
            camera: camera.clone(),
            objects,
            miss_rate,
            seed,
        }
    }

    fn dominant(&self, bbox: &Box2D) -> Option<&(Option<Box2D>, Option<String>)> {
        let mut best: Option<(f64, usize)> = None;
        for (i, (projected, _)) in self.objects.iter().enumerate() {
            let Some(p) = projected else { continue };
            let overlap = bbox.intersection_area(p);
            if overlap > 0.0 && best.is_none_or(|(b, _)| overlap > b) {
                best = Some((overlap, i));
            }
        }
        best.map(|(_, i)| &self.objects[i])
    }
}

impl Classifier2d for OracleClassifier2d {
    fn classify(
        &self,
        scene_id: &str,
        bbox: &Box2D,
        classes: &KnownClassList,
    ) -> Result<ClassificationResult, BackendError> {
        check_scene("classifier2d", &self.scene_id, scene_id)?;
        if bbox.x_min < 0.0
            || bbox.y_min < 0.0
            || bbox.x_max > self.camera.width as f64
            || bbox.y_max > self.camera.height as f64
        {
            return Err(BackendError::new(
                "classifier2d",
                "query box outside the image",
            ));
        }
        let label = match self.dominant(bbox) {
            Some((_, Some(label))) => {
                let mut rng =
                    scene_rng(self.seed, scene_id, 0xc1a5 ^ bbox.source_cluster as u64);
                if rng.random::<f64>() < self.miss_rate {
                    None
                } else {
                    Some(label.clone())
                }
            }
            _ => None,
        };
        let n = classes.labels.len();
        match label.and_then(|l| classes.index_of(&l)) {
            Some(idx) if n > 1 => {
                let mut probs = alloc::vec![0.1 / (n as f64 - 1.0); n];
                probs[idx] = 0.9;
                ClassificationResult::new(classes, probs).map_err(|e| {
                    BackendError::new("classifier2d", e.to_string())
                })
            }
            Some(_) => Ok(ClassificationResult::new(classes, alloc::vec![1.0]).expect("one label")),
            None => Ok(ClassificationResult::uniform(classes)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, scenario_suite, SceneSpec};

    fn scene_b() -> (SceneSpec, crate::synth::SceneOutput) {
        let spec = scenario_suite().remove(1);
        let out = generate(&spec).unwrap();
        (spec, out)
    }

    #[test]
    fn detector_perfect_recall_and_no_anomaly_boxes() {
        let (spec, out) = scene_b();
        let det = OracleDetector3d::new(&spec.name, &out.truth, 0.0, 7);
        let boxes = det.detect(&spec.name, &out.cloud).unwrap();
        // Scene b plants two cars and one anomaly.
        assert_eq!(boxes.len(), 2);
        assert!(boxes.iter().all(|b| b.label == "car"));
        let again = det.detect(&spec.name, &out.cloud).unwrap();
        assert_eq!(boxes.len(), again.len());
    }

    #[test]
    fn detector_scene_mismatch() {
        let (spec, out) = scene_b();
        let det = OracleDetector3d::new(&spec.name, &out.truth, 0.0, 7);
        assert!(det.detect("other", &out.cloud).is_err());
    }

    #[test]
    fn detector_miss_rate_one_drops_everything() {
        let (spec, out) = scene_b();
        let det = OracleDetector3d::new(&spec.name, &out.truth, 0.9999999, 7);
        assert!(det.detect(&spec.name, &out.cloud).unwrap().is_empty());
    }

    #[test]
    fn classifier_known_vs_anomaly_distributions() {
        let (spec, out) = scene_b();
        let classes = KnownClassList::default();
        let cls = OracleClassifier2d::new(&spec.name, &out.truth, &out.camera, 0.0, 7);
        // Query box over the first car's ground-truth projection.
        let car_box = box3d_to_box2d(&out.camera, &out.truth.objects[0].bbox, 0.0, 0).unwrap();
        let r = cls.classify(&spec.name, &car_box, &classes).unwrap();
        assert_eq!(r.max().0, "car");
        assert!((r.max().1 - 0.9).abs() < 1e-12);
        assert!((r.sum() - 1.0).abs() < 1e-9);

        // Query box over the anomaly: uniform.
        let anomaly_idx = out
            .truth
            .objects
            .iter()
            .position(|o| o.kind == GtKind::Anomaly)
            .unwrap();
        let abox =
            box3d_to_box2d(&out.camera, &out.truth.objects[anomaly_idx].bbox, 0.0, 1).unwrap();
        let r = cls.classify(&spec.name, &abox, &classes).unwrap();
        let expected = 1.0 / 16.0;
        assert!((r.max().1 - expected).abs() < 1e-12);
    }

    #[test]
    fn classifier_empty_region_is_uniform() {
        let (spec, out) = scene_b();
        let classes = KnownClassList::default();
        let cls = OracleClassifier2d::new(&spec.name, &out.truth, &out.camera, 0.0, 7);
        let empty = Box2D {
            x_min: 0.0,
            y_min: 0.0,
            x_max: 4.0,
            y_max: 4.0,
            source_cluster: 0,
        };
        let r = cls.classify(&spec.name, &empty, &classes).unwrap();
        assert!((r.max().1 - 1.0 / 16.0).abs() < 1e-12);
    }
}
