//! Point-cloud data types, front-view cropping, and statistical outlier
//! removal.
//!
//! Operations never reorder a cloud; filtering returns an [`IndexSet`] of
//! surviving indices so that downstream stages can always refer back to the
//! original points.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::float::use_float_ext;
use crate::grid::VoxelGrid;

use_float_ext!();

/// A 3D point (or direction) in the ego/lidar frame: x forward, y left,
/// z up, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ZERO: Point3 = Point3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn scale(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn dot(self, o: Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Point3) -> Point3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Unit vector in the same direction; `None` for (near-)zero vectors.
    pub fn normalized(self) -> Option<Point3> {
        let n = self.norm();
        if n < 1e-300 {
            None
        } else {
            Some(self.scale(1.0 / n))
        }
    }

    pub fn distance(self, o: Point3) -> f64 {
        self.sub(o).norm()
    }

    pub fn distance_sq(self, o: Point3) -> f64 {
        let d = self.sub(o);
        d.dot(d)
    }
}

/// An ordered set of 3D points with optional per-point intensity.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    /// Unitless, non-negative; same length as `points` when present.
    pub intensity: Option<Vec<f32>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Self {
        Self {
            points,
            intensity: None,
        }
    }

    pub fn with_intensity(points: Vec<Point3>, intensity: Vec<f32>) -> Result<Self, GeometryError> {
        if intensity.len() != points.len() {
            return Err(GeometryError::InvalidConfig(
                "intensity length must match point count",
            ));
        }
        Ok(Self {
            points,
            intensity: Some(intensity),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Strictly increasing list of indices into a specific [`PointCloud`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSet {
    indices: Vec<usize>,
}

impl IndexSet {
    /// Build from an already strictly-increasing list.
    pub fn new(indices: Vec<usize>) -> Result<Self, GeometryError> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GeometryError::UnsortedIndices);
        }
        Ok(Self { indices })
    }

    /// Build from indices in arbitrary order; sorts and rejects duplicates.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Result<Self, GeometryError> {
        indices.sort_unstable();
        Self::new(indices)
    }

    pub fn empty() -> Self {
        Self {
            indices: Vec::new(),
        }
    }

    /// All indices of a cloud with `len` points.
    pub fn full(len: usize) -> Self {
        Self {
            indices: (0..len).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// Validate every index against a cloud size.
    pub fn check_bounds(&self, len: usize) -> Result<(), GeometryError> {
        match self.indices.last() {
            Some(&last) if last >= len => Err(GeometryError::IndexOutOfBounds { index: last, len }),
            _ => Ok(()),
        }
    }

    /// Indices in `self` but not in `other`.
    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        let mut out = Vec::with_capacity(self.indices.len());
        let mut o = other.indices.iter().peekable();
        for &i in &self.indices {
            while let Some(&&j) = o.peek() {
                if j < i {
                    o.next();
                } else {
                    break;
                }
            }
            if o.peek() != Some(&&i) {
                out.push(i);
            }
        }
        IndexSet { indices: out }
    }

    /// Indices present in both sets.
    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        let mut out = Vec::new();
        let (mut a, mut b) = (0, 0);
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                core::cmp::Ordering::Less => a += 1,
                core::cmp::Ordering::Greater => b += 1,
                core::cmp::Ordering::Equal => {
                    out.push(self.indices[a]);
                    a += 1;
                    b += 1;
                }
            }
        }
        IndexSet { indices: out }
    }

    /// Gather the referenced points.
    pub fn gather(&self, cloud: &PointCloud) -> Vec<Point3> {
        self.indices.iter().map(|&i| cloud.points[i]).collect()
    }
}

impl FromIterator<usize> for IndexSet {
    /// Collects indices that are already in strictly increasing order.
    /// Panics otherwise; use [`IndexSet::from_unsorted`] for arbitrary input.
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let indices: Vec<usize> = iter.into_iter().collect();
        IndexSet::new(indices).expect("indices must be strictly increasing")
    }
}

/// Keep only points in front of the ego vehicle (x > 0).
///
/// Points at exactly x = 0 count as "behind or at the ego center" and are
/// dropped. An empty cloud yields an empty set.
pub fn crop_front(cloud: &PointCloud) -> IndexSet {
    cloud
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.x > 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Remove sparse far points from `subset` by neighborhood statistics.
///
/// For every subset point the mean distance to its `k` nearest neighbors
/// within the subset is computed (ties at the k-th distance broken by lower
/// point index). Points whose mean distance exceeds `mean + ratio * std_dev`
/// of those per-point means are dropped. One-sided: only large distances are
/// outliers. Defaults used by the pipeline are `k = 20`, `ratio = 8`.
pub fn remove_statistical_outliers(
    cloud: &PointCloud,
    subset: &IndexSet,
    k: usize,
    ratio: f64,
) -> Result<IndexSet, GeometryError> {
    if k < 1 {
        return Err(GeometryError::InvalidConfig("outlier k must be >= 1"));
    }
    if !(ratio > 0.0) {
        return Err(GeometryError::InvalidConfig("outlier ratio must be > 0"));
    }
    subset.check_bounds(cloud.len())?;
    let n = subset.len();
    if n <= k {
        return Err(GeometryError::InsufficientNeighborhood { k, got: n });
    }

    let pts = subset.gather(cloud);
    let grid = VoxelGrid::build(&pts, VoxelGrid::knn_cell_size(&pts, k));

    let mean_dists: Vec<f64> = (0..n)
        .map(|i| {
            let mut acc = 0.0;
            grid.for_knn(&pts, i, k, |d_sq| acc += d_sq.sqrt());
            acc / k as f64
        })
        .collect();

    let mean = mean_dists.iter().sum::<f64>() / n as f64;
    let var = mean_dists
        .iter()
        .map(|d| (d - mean) * (d - mean))
        .sum::<f64>()
        / n as f64;
    let threshold = mean + ratio * var.sqrt();

    Ok(subset
        .iter()
        .zip(mean_dists.iter())
        .filter(|(_, &d)| d <= threshold)
        .map(|(idx, _)| idx)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crop_front_sign_test() {
        let cloud = PointCloud::new(vec![
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(-1.0, 0.0, 0.0),
            Point3::new(0.0, 0.0, 0.0),
        ]);
        let set = crop_front(&cloud);
        assert_eq!(set.as_slice(), &[0]);
    }

    #[test]
    fn crop_front_identity_when_all_forward() {
        let cloud = PointCloud::new(vec![
            Point3::new(0.5, -2.0, 1.0),
            Point3::new(3.0, 0.0, -1.0),
        ]);
        assert_eq!(crop_front(&cloud), IndexSet::full(2));
    }

    #[test]
    fn crop_front_empty_cloud() {
        assert!(crop_front(&PointCloud::new(Vec::new())).is_empty());
    }

    #[test]
    fn crop_front_idempotent() {
        let cloud = PointCloud::new(vec![
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(-1.0, 2.0, 0.0),
            Point3::new(2.0, -1.0, 3.0),
        ]);
        let once = crop_front(&cloud);
        // Re-cropping the surviving points must not change the set.
        let survivors = PointCloud::new(once.gather(&cloud));
        let twice = crop_front(&survivors);
        assert_eq!(twice, IndexSet::full(survivors.len()));
    }

    #[test]
    fn outliers_need_more_points_than_k() {
        let cloud = PointCloud::new(vec![Point3::ZERO; 5]);
        let subset = IndexSet::full(5);
        let err = remove_statistical_outliers(&cloud, &subset, 5, 8.0).unwrap_err();
        assert_eq!(err, GeometryError::InsufficientNeighborhood { k: 5, got: 5 });
    }

    #[test]
    fn outliers_regular_grid_kept_whole() {
        // Interior-symmetric configuration: all per-point means identical,
        // sigma ~ 0, nothing exceeds the threshold.
        let mut pts = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                pts.push(Point3::new(i as f64, j as f64, 0.0));
            }
        }
        let cloud = PointCloud::new(pts);
        let subset = IndexSet::full(cloud.len());
        let kept = remove_statistical_outliers(&cloud, &subset, 3, 8.0).unwrap();
        assert_eq!(kept, subset);
    }

    #[test]
    fn outliers_far_point_removed() {
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                pts.push(Point3::new(i as f64, j as f64, 0.0));
            }
        }
        pts.push(Point3::new(1000.0, 0.0, 0.0));
        let cloud = PointCloud::new(pts);
        let subset = IndexSet::full(cloud.len());
        let kept = remove_statistical_outliers(&cloud, &subset, 5, 2.0).unwrap();
        assert_eq!(kept.len(), 100);
        assert!(!kept.contains(100));
    }

    #[test]
    fn index_set_rejects_unsorted() {
        assert!(IndexSet::new(vec![0, 2, 1]).is_err());
        assert!(IndexSet::new(vec![1, 1]).is_err());
        assert!(IndexSet::new(vec![0, 1, 5]).is_ok());
    }

    #[test]
    fn index_set_difference_and_intersection() {
        let a = IndexSet::new(vec![0, 1, 3, 5, 8]).unwrap();
        let b = IndexSet::new(vec![1, 2, 5, 9]).unwrap();
        assert_eq!(a.difference(&b).as_slice(), &[0, 3, 8]);
        assert_eq!(a.intersection(&b).as_slice(), &[1, 5]);
    }
}
