//! Interfaces for the three neural components: road segmenter, 3D detector,
//! and 2D open-set classifier.
//!
//! Keeping them behind traits lets the pipeline run against file-backed
//! precomputed outputs, ground-truth oracles (see [`crate::oracle`]), or a
//! real model adapter, without touching the geometry.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera::{Box2D, Box3D, RoadMask};
use crate::error::GeometryError;
use crate::pointcloud::PointCloud;

/// A backend failure, tagged with the component that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{component} backend: {message}")]
pub struct BackendError {
    pub component: &'static str,
    pub message: String,
}

impl BackendError {
    pub fn new(component: &'static str, message: impl Into<String>) -> Self {
        Self {
            component,
            message: message.into(),
        }
    }
}

/// One 3D detection from the closed-set lidar detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection3D {
    pub bbox: Box3D,
    pub label: String,
    pub score: f64,
}

impl Detection3D {
    pub fn validate(&self) -> Result<(), GeometryError> {
        self.bbox.validate()?;
        if !(0.0..=1.0).contains(&self.score) {
            return Err(GeometryError::InvalidConfig(
                "detection score must be in [0, 1]",
            ));
        }
        Ok(())
    }
}

/// The classes treated as non-anomalous, plus the zero-shot prompt template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownClassList {
    pub labels: Vec<String>,
    #[serde(rename = "prompt")]
    pub prompt_template: String,
}

impl Default for KnownClassList {
    fn default() -> Self {
        let labels = [
            "car",
            "traffic light",
            "person",
            "truck",
            "bus",
            "fire hydrant",
            "bicycle",
            "handbag",
            "backpack",
            "parking meter",
            "stop sign",
            "umbrella",
            "motorcycle",
            "tree",
            "pole",
            "bush",
        ];
        Self {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            prompt_template: "A photo of a {label} on a street".to_string(),
        }
    }
}

impl KnownClassList {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.labels.is_empty() {
            return Err(GeometryError::InvalidConfig("class list must be nonempty"));
        }
        for (i, a) in self.labels.iter().enumerate() {
            if self.labels[i + 1..].contains(a) {
                return Err(GeometryError::InvalidConfig("class labels must be unique"));
            }
        }
        if self.prompt_template.matches("{label}").count() != 1 {
            return Err(GeometryError::InvalidConfig(
                "prompt template must contain exactly one {label} placeholder",
            ));
        }
        Ok(())
    }

    /// Instantiate the prompt for one label.
    pub fn prompt_for(&self, label: &str) -> String {
        self.prompt_template.replace("{label}", label)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// A probability distribution over a known-class list, in list order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    entries: Vec<(String, f64)>,
}

impl ClassificationResult {
    /// Probabilities must be non-negative, aligned with `classes.labels`,
    /// and sum to 1 within 1e-6.
    pub fn new(classes: &KnownClassList, probs: Vec<f64>) -> Result<Self, GeometryError> {
        if probs.len() != classes.labels.len() {
            return Err(GeometryError::InvalidConfig(
                "distribution length must match class list",
            ));
        }
        let mut sum = 0.0;
        for &p in &probs {
            if !(p >= 0.0) {
                return Err(GeometryError::InvalidConfig(
                    "probabilities must be non-negative",
                ));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-6 {
            return Err(GeometryError::InvalidConfig("probabilities must sum to 1"));
        }
        Ok(Self {
            entries: classes.labels.iter().cloned().zip(probs).collect(),
        })
    }

    /// Uniform distribution over the class list.
    pub fn uniform(classes: &KnownClassList) -> Self {
        let n = classes.labels.len();
        Self {
            entries: classes
                .labels
                .iter()
                .cloned()
                .map(|l| (l, 1.0 / n as f64))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    /// Highest-probability entry; ties go to the earlier label.
    pub fn max(&self) -> (&str, f64) {
        let mut best = 0;
        for i in 1..self.entries.len() {
            if self.entries[i].1 > self.entries[best].1 {
                best = i;
            }
        }
        (&self.entries[best].0, self.entries[best].1)
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }
}

/// Produces the binary road mask for a scene's camera image.
pub trait RoadSegmenter {
    fn road_mask(&self, scene_id: &str) -> Result<RoadMask, BackendError>;
}

/// Closed-set 3D object detector over the scene point cloud.
pub trait Detector3d {
    fn detect(&self, scene_id: &str, cloud: &PointCloud)
        -> Result<Vec<Detection3D>, BackendError>;
}

/// Zero-shot 2D classifier over an image crop.
pub trait Classifier2d {
    fn classify(
        &self,
        scene_id: &str,
        bbox: &Box2D,
        classes: &KnownClassList,
    ) -> Result<ClassificationResult, BackendError>;
}
