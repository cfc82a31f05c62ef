//! Road-plane re-estimation: total-least-squares plane fit and RANSAC.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::float::use_float_ext;
use crate::pointcloud::{IndexSet, Point3, PointCloud};

use_float_ext!();

/// Implicit plane `{ p : normal · p + offset = 0 }` with unit normal.
///
/// Canonical orientation: `normal.z >= 0` ("up"). Fits that come out the
/// other way are negated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub normal: Point3,
    pub offset: f64,
}

impl Plane {
    /// Construct and canonicalize; the normal is renormalized.
    pub fn new(normal: Point3, offset: f64) -> Result<Self, GeometryError> {
        let n = normal.norm();
        if !n.is_finite() || n < 1e-12 {
            return Err(GeometryError::DegenerateSample);
        }
        let mut plane = Plane {
            normal: normal.scale(1.0 / n),
            offset: offset / n,
        };
        plane.canonicalize();
        Ok(plane)
    }

    fn canonicalize(&mut self) {
        if self.normal.z < 0.0 {
            self.normal = self.normal.scale(-1.0);
            self.offset = -self.offset;
        }
        // Normalize -0.0 so serialized output is stable.
        self.normal.x += 0.0;
        self.normal.y += 0.0;
        self.normal.z += 0.0;
        self.offset += 0.0;
    }

    /// Signed distance along the (upward) normal; positive is above the road.
    pub fn signed_distance(&self, p: Point3) -> f64 {
        self.normal.dot(p) + self.offset
    }

    pub fn distance(&self, p: Point3) -> f64 {
        self.signed_distance(p).abs()
    }
}

/// RANSAC parameters for [`ransac_plane`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacConfig {
    pub iterations: usize,
    pub sample_size: usize,
    pub inlier_distance_m: f64,
    #[serde(rename = "seed")]
    pub rng_seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            sample_size: 10,
            inlier_distance_m: 0.5,
            rng_seed: 0,
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.iterations < 1 {
            return Err(GeometryError::InvalidConfig("ransac iterations must be >= 1"));
        }
        if self.sample_size < 3 {
            return Err(GeometryError::InvalidConfig("ransac sample_size must be >= 3"));
        }
        if !(self.inlier_distance_m > 0.0) {
            return Err(GeometryError::InvalidConfig(
                "ransac inlier_distance_m must be > 0",
            ));
        }
        Ok(())
    }
}

/// Total-least-squares plane through a point sample.
///
/// Minimizes the sum of squared orthogonal distances: the normal is the
/// eigenvector of the smallest eigenvalue of the centered covariance, and the
/// plane passes through the centroid. Errors on fewer than 3 points and on
/// rank-deficient (collinear or coincident) configurations.
pub fn fit_plane_least_squares(points: &[Point3]) -> Result<Plane, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::DegenerateSample);
    }
    let n = points.len() as f64;
    let mut centroid = Point3::ZERO;
    for p in points {
        centroid = centroid.add(*p);
    }
    let centroid = centroid.scale(1.0 / n);

    let mut cov = [[0.0f64; 3]; 3];
    for p in points {
        let d = p.sub(centroid);
        let v = [d.x, d.y, d.z];
        for i in 0..3 {
            for j in i..3 {
                cov[i][j] += v[i] * v[j];
            }
        }
    }
    cov[1][0] = cov[0][1];
    cov[2][0] = cov[0][2];
    cov[2][1] = cov[1][2];

    let (eigenvalues, eigenvectors) = symmetric_eigen3(cov);
    // Ascending eigenvalues; rank-deficiency when the two smallest spreads
    // vanish relative to the largest.
    let (l0, l1, l2) = (eigenvalues[0], eigenvalues[1], eigenvalues[2]);
    if !(l2 > 0.0) || l1 <= l2 * 1e-12 {
        return Err(GeometryError::DegenerateSample);
    }
    let _ = l0;
    let normal = Point3::new(eigenvectors[0][0], eigenvectors[1][0], eigenvectors[2][0]);
    let offset = -normal.dot(centroid);
    Plane::new(normal, offset)
}

/// RANSAC plane estimation over `subset`.
///
/// For each of `iterations` rounds a `sample_size`-point candidate plane is
/// fit with [`fit_plane_least_squares`]; the candidate with the most subset
/// points within `inlier_distance_m` (orthogonal, both sides) wins, ties
/// broken by earliest iteration. Degenerate samples are skipped.
/// Deterministic for a fixed `rng_seed`.
pub fn ransac_plane(
    cloud: &PointCloud,
    subset: &IndexSet,
    config: &RansacConfig,
) -> Result<(Plane, IndexSet), GeometryError> {
    config.validate()?;
    subset.check_bounds(cloud.len())?;
    if subset.len() < config.sample_size {
        return Err(GeometryError::InsufficientPoints {
            needed: config.sample_size,
            got: subset.len(),
        });
    }

    let pts = subset.gather(cloud);
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut sample = Vec::with_capacity(config.sample_size);
    let mut best: Option<(usize, Plane)> = None;

    for _ in 0..config.iterations {
        sample.clear();
        sample.extend(
            rand::seq::index::sample(&mut rng, pts.len(), config.sample_size)
                .into_iter()
                .map(|i| pts[i]),
        );
        let candidate = match fit_plane_least_squares(&sample) {
            Ok(plane) => plane,
            Err(_) => continue,
        };
        let count = pts
            .iter()
            .filter(|p| candidate.distance(**p) <= config.inlier_distance_m)
            .count();
        if best.as_ref().map_or(true, |(b, _)| count > *b) {
            best = Some((count, candidate));
        }
    }

    let (_, plane) = best.ok_or(GeometryError::NoPlaneHypothesis)?;
    let inliers: IndexSet = subset
        .iter()
        .filter(|&i| plane.distance(cloud.points[i]) <= config.inlier_distance_m)
        .collect();
    Ok((plane, inliers))
}

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// matrix columns.
fn symmetric_eigen3(m: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut a = m;
    let mut v = [[0.0; 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    for _sweep in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
        if off <= f64::EPSILON * f64::EPSILON * diag.max(1e-300) {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = if theta >= 0.0 {
                1.0 / (theta + (1.0 + theta * theta).sqrt())
            } else {
                1.0 / (theta - (1.0 + theta * theta).sqrt())
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;
            // Rotate rows/columns p and q.
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| {
        a[i][i]
            .partial_cmp(&a[j][j])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let values = [a[order[0]][order[0]], a[order[1]][order[1]], a[order[2]][order[2]]];
    let mut vectors = [[0.0; 3]; 3];
    for (col, &o) in order.iter().enumerate() {
        for r in 0..3 {
            vectors[r][col] = v[r][o];
        }
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn fit_exact_xy_plane() {
        let pts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let plane = fit_plane_least_squares(&pts).unwrap();
        assert!((plane.normal.z - 1.0).abs() < 1e-12);
        assert!(plane.normal.x.abs() < 1e-12 && plane.normal.y.abs() < 1e-12);
        assert!(plane.offset.abs() < 1e-12);
    }

    #[test]
    fn fit_z_equals_one() {
        let pts = vec![
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(1.0, 0.0, 1.0),
            Point3::new(0.0, 1.0, 1.0),
            Point3::new(1.0, 1.0, 1.0),
        ];
        let plane = fit_plane_least_squares(&pts).unwrap();
        assert!((plane.normal.z - 1.0).abs() < 1e-12);
        assert!((plane.offset - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_degenerate() {
        assert_eq!(
            fit_plane_least_squares(&[Point3::ZERO, Point3::new(1.0, 0.0, 0.0)]),
            Err(GeometryError::DegenerateSample)
        );
        // Collinear.
        let pts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 1.0),
            Point3::new(2.0, 2.0, 2.0),
            Point3::new(3.0, 3.0, 3.0),
        ];
        assert_eq!(
            fit_plane_least_squares(&pts),
            Err(GeometryError::DegenerateSample)
        );
        // All identical.
        assert_eq!(
            fit_plane_least_squares(&[Point3::ZERO; 5]),
            Err(GeometryError::DegenerateSample)
        );
    }

    #[test]
    fn canonical_orientation_points_up() {
        let plane = Plane::new(Point3::new(0.0, 0.0, -2.0), 4.0).unwrap();
        assert!((plane.normal.z - 1.0).abs() < 1e-12);
        assert!((plane.offset - (-2.0)).abs() < 1e-12);
    }

    #[test]
    fn eigen3_known_diagonal() {
        let (vals, _) = symmetric_eigen3([[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]);
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        assert!((vals[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ransac_identical_plane_full_inliers() {
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..5 {
                pts.push(Point3::new(i as f64, j as f64, 2.0));
            }
        }
        let cloud = PointCloud::new(pts);
        let subset = IndexSet::full(cloud.len());
        let (plane, inliers) =
            ransac_plane(&cloud, &subset, &RansacConfig::default()).unwrap();
        assert_eq!(inliers, subset);
        assert!((plane.normal.z - 1.0).abs() < 1e-9);
        assert!((plane.offset - (-2.0)).abs() < 1e-9);
    }

    #[test]
    fn ransac_subset_too_small() {
        let cloud = PointCloud::new(vec![Point3::ZERO; 5]);
        let subset = IndexSet::full(5);
        assert_eq!(
            ransac_plane(&cloud, &subset, &RansacConfig::default()),
            Err(GeometryError::InsufficientPoints { needed: 10, got: 5 })
        );
    }

    #[test]
    fn ransac_deterministic() {
        let mut pts = Vec::new();
        for i in 0..30 {
            pts.push(Point3::new(i as f64 * 0.3, (i % 7) as f64, 0.01 * (i % 3) as f64));
        }
        let cloud = PointCloud::new(pts);
        let subset = IndexSet::full(cloud.len());
        let cfg = RansacConfig {
            rng_seed: 42,
            ..Default::default()
        };
        let a = ransac_plane(&cloud, &subset, &cfg).unwrap();
        let b = ransac_plane(&cloud, &subset, &cfg).unwrap();
        assert_eq!(a.0.normal, b.0.normal);
        assert_eq!(a.0.offset, b.0.offset);
        assert_eq!(a.1, b.1);
    }
}
