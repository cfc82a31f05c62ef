//! Quantitative evaluation of pipeline output against synthetic ground
//! truth: greedy IoU matching of predicted anomaly boxes to planted ones.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera::Box3D;
use crate::error::GeometryError;
use crate::pipeline::{SceneResult, StageLog};
use crate::synth::{GroundTruth, GtKind};

/// Matching parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    /// Minimum axis-aligned 3D IoU for a prediction to claim a truth box.
    pub iou_3d_threshold: f64,
    /// Ground-truth anomalies with fewer on-road lidar points than this are
    /// excluded from recall denominators (physically undetectable).
    pub min_gt_points: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            iou_3d_threshold: 0.3,
            min_gt_points: 30,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.iou_3d_threshold > 0.0 && self.iou_3d_threshold <= 1.0) {
            return Err(GeometryError::InvalidConfig(
                "iou_3d_threshold must be in (0, 1]",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no ground truth for scene '{0}'")]
    MissingTruth(String),
    #[error("no result for scene '{0}'")]
    MissingResult(String),
    #[error("invalid matching config: {0}")]
    Config(GeometryError),
}

/// Counts for one scene.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneEval {
    pub scene_id: String,
    pub scenario_tag: Option<String>,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Aggregate counts with derived rates; rates are `None` for 0/0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalTotals {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

impl EvalTotals {
    fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        Self {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagEval {
    pub tag: String,
    #[serde(flatten)]
    pub totals: EvalTotals,
}

/// Full evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_scene: Vec<SceneEval>,
    pub per_tag: Vec<TagEval>,
    pub totals: EvalTotals,
    /// Stage counters summed over all evaluated scenes.
    pub stage_totals: StageLog,
}

/// Axis-aligned 3D IoU: yawed boxes are first replaced by their
/// axis-aligned hulls.
pub fn iou_3d(a: &Box3D, b: &Box3D) -> f64 {
    let (a_min, a_max) = a.aabb();
    let (b_min, b_max) = b.aabb();
    let dx = (a_max.x.min(b_max.x) - a_min.x.max(b_min.x)).max(0.0);
    let dy = (a_max.y.min(b_max.y) - a_min.y.max(b_min.y)).max(0.0);
    let dz = (a_max.z.min(b_max.z) - a_min.z.max(b_min.z)).max(0.0);
    let inter = dx * dy * dz;
    let vol = |min: crate::pointcloud::Point3, max: crate::pointcloud::Point3| {
        (max.x - min.x) * (max.y - min.y) * (max.z - min.z)
    };
    let union = vol(a_min, a_max) + vol(b_min, b_max) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Score pipeline results against ground truth.
///
/// Per scene: predictions are the anomaly boxes of the result, truths are
/// the planted anomalies at or above the visibility floor. Pairs are
/// matched greedily by descending IoU (ties by lower prediction index, then
/// lower truth index), one-to-one, accepting matches with IoU at or above
/// the threshold. Results and truths are aligned by `scene_id`; both
/// directions must match up.
pub fn evaluate(
    results: &[SceneResult],
    truths: &[GroundTruth],
    config: &MatchConfig,
) -> Result<EvalReport, EvalError> {
    config.validate().map_err(EvalError::Config)?;
    let truth_by_id: BTreeMap<&str, &GroundTruth> =
        truths.iter().map(|t| (t.scene_id.as_str(), t)).collect();
    for t in truths {
        if !results.iter().any(|r| r.scene_id == t.scene_id) {
            return Err(EvalError::MissingResult(t.scene_id.clone()));
        }
    }

    let mut per_scene = Vec::with_capacity(results.len());
    let mut stage_totals = StageLog::default();
    for result in results {
        let truth = truth_by_id
            .get(result.scene_id.as_str())
            .ok_or_else(|| EvalError::MissingTruth(result.scene_id.clone()))?;
        let (tp, fp, fn_) = match_scene(result, truth, config);
        stage_totals.add(&result.stage_log);
        per_scene.push(SceneEval {
            scene_id: result.scene_id.clone(),
            scenario_tag: truth.scenario_tag.clone(),
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
        });
    }

    let mut tag_counts: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for s in &per_scene {
        tp += s.true_positives;
        fp += s.false_positives;
        fn_ += s.false_negatives;
        let tag = s.scenario_tag.clone().unwrap_or_else(|| "untagged".to_string());
        let e = tag_counts.entry(tag).or_insert((0, 0, 0));
        e.0 += s.true_positives;
        e.1 += s.false_positives;
        e.2 += s.false_negatives;
    }
    let per_tag = tag_counts
        .into_iter()
        .map(|(tag, (tp, fp, fn_))| TagEval {
            tag,
            totals: EvalTotals::from_counts(tp, fp, fn_),
        })
        .collect();

    Ok(EvalReport {
        per_scene,
        per_tag,
        totals: EvalTotals::from_counts(tp, fp, fn_),
        stage_totals,
    })
}

fn match_scene(
    result: &SceneResult,
    truth: &GroundTruth,
    config: &MatchConfig,
) -> (usize, usize, usize) {
    let predictions: Vec<&Box3D> = result.anomalies.iter().map(|a| &a.box3).collect();
    let eligible: Vec<&Box3D> = truth
        .objects
        .iter()
        .filter(|o| o.kind == GtKind::Anomaly && o.stats.on_road_points >= config.min_gt_points)
        .map(|o| &o.bbox)
        .collect();

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (pi, p) in predictions.iter().enumerate() {
        for (ti, t) in eligible.iter().enumerate() {
            let iou = iou_3d(p, t);
            if iou >= config.iou_3d_threshold {
                pairs.push((iou, pi, ti));
            }
        }
    }
    // Descending IoU, ties by lower prediction index, then lower truth index.
    pairs.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut pred_used = alloc::vec![false; predictions.len()];
    let mut truth_used = alloc::vec![false; eligible.len()];
    let mut tp = 0;
    for (_, pi, ti) in pairs {
        if !pred_used[pi] && !truth_used[ti] {
            pred_used[pi] = true;
            truth_used[ti] = true;
            tp += 1;
        }
    }
    (tp, predictions.len() - tp, eligible.len() - tp)
}
