//! Uniform voxel grid for exact neighbor queries.
//!
//! Acceleration only: results are bit-identical to a brute-force scan because
//! candidate selection always compares the same `(distance², index)` pairs.

use alloc::vec::Vec;

use crate::float::use_float_ext;
use crate::pointcloud::Point3;

use_float_ext!();

type CellKey = (i64, i64, i64);

pub(crate) struct VoxelGrid {
    cell: f64,
    /// (cell key, point position) sorted by key, then position.
    entries: Vec<(CellKey, u32)>,
    key_min: CellKey,
    key_max: CellKey,
}

impl VoxelGrid {
    pub fn build(points: &[Point3], cell: f64) -> Self {
        let cell = if cell.is_finite() && cell > 0.0 {
            cell
        } else {
            1.0
        };
        let mut entries: Vec<(CellKey, u32)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (Self::key_for(p, cell), i as u32))
            .collect();
        entries.sort_unstable();
        let mut key_min = (i64::MAX, i64::MAX, i64::MAX);
        let mut key_max = (i64::MIN, i64::MIN, i64::MIN);
        for &(k, _) in &entries {
            key_min = (key_min.0.min(k.0), key_min.1.min(k.1), key_min.2.min(k.2));
            key_max = (key_max.0.max(k.0), key_max.1.max(k.1), key_max.2.max(k.2));
        }
        Self {
            cell,
            entries,
            key_min,
            key_max,
        }
    }

    fn key_for(p: &Point3, cell: f64) -> CellKey {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    }

    fn cell_entries(&self, key: CellKey) -> &[(CellKey, u32)] {
        let lo = self.entries.partition_point(|&(k, _)| k < key);
        let hi = self.entries[lo..].partition_point(|&(k, _)| k == key) + lo;
        &self.entries[lo..hi]
    }

    /// Heuristic cell size for k-NN queries: aims at ~k points per cell.
    pub fn knn_cell_size(points: &[Point3], k: usize) -> f64 {
        let n = points.len();
        if n == 0 {
            return 1.0;
        }
        let mut min = points[0];
        let mut max = points[0];
        for p in points {
            min = Point3::new(min.x.min(p.x), min.y.min(p.y), min.z.min(p.z));
            max = Point3::new(max.x.max(p.x), max.y.max(p.y), max.z.max(p.z));
        }
        let mut e = [max.x - min.x, max.y - min.y, max.z - min.z];
        e.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
        let target = k.max(1) as f64 / n as f64;
        let cell = if e[2] > 1e-9 {
            (e[0] * e[1] * e[2] * target).cbrt()
        } else if e[1] > 1e-9 {
            (e[0] * e[1] * target).sqrt()
        } else if e[0] > 1e-9 {
            e[0] * target
        } else {
            1.0
        };
        if cell.is_finite() && cell > 0.0 {
            // Keep ring expansion from degenerating on huge aspect ratios.
            cell.max(e[0] / 4096.0)
        } else {
            1.0
        }
    }

    /// Visit the squared distances of the `k` nearest neighbors of point
    /// `query` (excluding itself), exactly as a brute-force scan ordered by
    /// `(distance², index)` would select them.
    pub fn for_knn<F: FnMut(f64)>(&self, points: &[Point3], query: usize, k: usize, mut visit: F) {
        let q = points[query];
        let center = Self::key_for(&q, self.cell);
        let max_ring = self.max_ring(center);
        // Best-k kept sorted ascending by (d², index).
        let mut best: Vec<(f64, u32)> = Vec::with_capacity(k + 1);
        for ring in 0..=max_ring {
            self.for_ring_cells(center, ring, |key| {
                for &(_, i) in self.cell_entries(key) {
                    if i as usize == query {
                        continue;
                    }
                    let d_sq = q.distance_sq(points[i as usize]);
                    let cand = (d_sq, i);
                    if best.len() < k {
                        let pos = best.partition_point(|&b| b < cand);
                        best.insert(pos, cand);
                    } else if cand < best[k - 1] {
                        let pos = best.partition_point(|&b| b < cand);
                        best.insert(pos, cand);
                        best.pop();
                    }
                }
            });
            if best.len() == k {
                let lim = ring as f64 * self.cell;
                if best[k - 1].0 < lim * lim {
                    break;
                }
            }
        }
        for &(d_sq, _) in best.iter() {
            visit(d_sq);
        }
    }

    /// Visit every point position within `eps` (inclusive) of `query`,
    /// including `query` itself, in ascending index order.
    pub fn for_neighbors_within<F: FnMut(usize)>(
        &self,
        points: &[Point3],
        query: usize,
        eps: f64,
        mut visit: F,
    ) {
        let q = points[query];
        let center = Self::key_for(&q, self.cell);
        let reach = (eps / self.cell).ceil() as i64;
        let eps_sq = eps * eps;
        let mut hits: Vec<u32> = Vec::new();
        for ring in 0..=reach.min(self.max_ring(center)) {
            self.for_ring_cells(center, ring, |key| {
                for &(_, i) in self.cell_entries(key) {
                    if q.distance_sq(points[i as usize]) <= eps_sq {
                        hits.push(i);
                    }
                }
            });
        }
        hits.sort_unstable();
        for i in hits {
            visit(i as usize);
        }
    }

    fn max_ring(&self, center: CellKey) -> i64 {
        if self.entries.is_empty() {
            return 0;
        }
        let dx = (center.0 - self.key_min.0).abs().max((self.key_max.0 - center.0).abs());
        let dy = (center.1 - self.key_min.1).abs().max((self.key_max.1 - center.1).abs());
        let dz = (center.2 - self.key_min.2).abs().max((self.key_max.2 - center.2).abs());
        dx.max(dy).max(dz)
    }

    /// Iterate the cells at exactly Chebyshev distance `ring` from `center`.
    fn for_ring_cells<F: FnMut(CellKey)>(&self, center: CellKey, ring: i64, mut f: F) {
        if ring == 0 {
            f(center);
            return;
        }
        for dz in -ring..=ring {
            if dz.abs() == ring {
                for dx in -ring..=ring {
                    for dy in -ring..=ring {
                        f((center.0 + dx, center.1 + dy, center.2 + dz));
                    }
                }
            } else {
                for dx in -ring..=ring {
                    if dx.abs() == ring {
                        for dy in -ring..=ring {
                            f((center.0 + dx, center.1 + dy, center.2 + dz));
                        }
                    } else {
                        f((center.0 + dx, center.1 - ring, center.2 + dz));
                        f((center.0 + dx, center.1 + ring, center.2 + dz));
                    }
                }
            }
        }
    }
}
