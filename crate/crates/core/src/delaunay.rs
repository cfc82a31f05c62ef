//! Incremental Delaunay triangulation (Bowyer–Watson).
//!
//! Built on the exact predicates in [`crate::predicates`], so degenerate
//! inputs (grids, cocircular rings, collinear runs — all common in flattened
//! lidar data) are handled without inconsistent cavities. Points strictly on
//! a circumcircle are treated as "not in conflict", which yields one valid
//! Delaunay triangulation of the input.
//!
//! Exact duplicate points are merged onto their first occurrence; an input
//! whose distinct points are all collinear produces zero triangles.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::GeometryError;
use crate::predicates::{in_circumcircle, orient2d};

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Tri {
    /// Vertex indices, counter-clockwise.
    v: [u32; 3],
    /// `nb[i]` is the neighbor across the edge opposite `v[i]`.
    nb: [u32; 3],
    alive: bool,
}

/// A Delaunay triangulation of the distinct input points.
pub struct Triangulation {
    /// Triangles as CCW triples of indices into the original input slice.
    /// Duplicate input points are represented by their first occurrence.
    pub triangles: Vec<[usize; 3]>,
}

/// Triangulate a set of 2D points.
///
/// Errors on non-finite coordinates or fewer than 3 points. An all-collinear
/// input is not an error here; it yields an empty triangle list.
pub fn triangulate(points: &[[f64; 2]]) -> Result<Triangulation, GeometryError> {
    for p in points {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(GeometryError::NonFinite);
        }
    }

    // Merge exact duplicates (treating -0.0 as 0.0) onto first occurrences.
    let mut seen: BTreeMap<(u64, u64), u32> = BTreeMap::new();
    let mut unique: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let key = ((p[0] + 0.0).to_bits(), (p[1] + 0.0).to_bits());
        seen.entry(key).or_insert_with(|| {
            unique.push(i);
            (unique.len() - 1) as u32
        });
    }
    let n = unique.len();
    if n < 3 {
        return Err(GeometryError::DegeneratePointSet);
    }

    let mut bw = Bowyer::new(points, &unique);
    for u in 0..n as u32 {
        bw.insert(u);
    }
    Ok(Triangulation {
        triangles: bw.finish(&unique),
    })
}

struct Bowyer {
    /// Unique point coordinates, then the three super-triangle vertices.
    pts: Vec<[f64; 2]>,
    tris: Vec<Tri>,
    free: Vec<u32>,
    last: u32,
    // Scratch buffers reused across insertions.
    conflict: Vec<u32>,
    in_conflict: Vec<bool>,
}

impl Bowyer {
    fn new(points: &[[f64; 2]], unique: &[usize]) -> Self {
        let mut pts: Vec<[f64; 2]> = unique.iter().map(|&i| points[i]).collect();
        let (mut min, mut max) = ([f64::MAX; 2], [f64::MIN; 2]);
        for p in &pts {
            for a in 0..2 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        let cx = 0.5 * (min[0] + max[0]);
        let cy = 0.5 * (min[1] + max[1]);
        // Far enough that any triangle whose circumcircle reaches a super
        // vertex is a sliver below downstream area tolerances.
        let r = (max[0] - min[0]).max(max[1] - min[1]).max(1.0) * 1e10;
        let n = pts.len() as u32;
        pts.push([cx - 2.0 * r, cy - r]);
        pts.push([cx + 2.0 * r, cy - r]);
        pts.push([cx, cy + 2.0 * r]);
        let root = Tri {
            v: [n, n + 1, n + 2],
            nb: [NONE; 3],
            alive: true,
        };
        Self {
            pts,
            tris: alloc::vec![root],
            free: Vec::new(),
            last: 0,
            conflict: Vec::new(),
            in_conflict: Vec::new(),
        }
    }

    fn insert(&mut self, u: u32) {
        let p = self.pts[u as usize];
        let start = self.locate(p);
        self.collect_conflicts(start, p);

        // Boundary edges of the cavity: (a, b, outer neighbor).
        let mut boundary: Vec<(u32, u32, u32)> = Vec::new();
        for &t in &self.conflict {
            let tri = self.tris[t as usize];
            for i in 0..3 {
                let nb = tri.nb[i];
                if nb == NONE || !self.in_conflict[nb as usize] {
                    boundary.push((tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb));
                }
            }
        }

        // Retire the cavity and fan out new triangles from p.
        for &t in &self.conflict {
            self.tris[t as usize].alive = false;
            self.in_conflict[t as usize] = false;
            self.free.push(t);
        }
        self.conflict.clear();

        let mut by_first: BTreeMap<u32, u32> = BTreeMap::new();
        let mut created: Vec<u32> = Vec::with_capacity(boundary.len());
        for &(a, b, outer) in &boundary {
            let id = self.alloc(Tri {
                v: [a, b, u],
                nb: [NONE, NONE, outer],
            alive: true,
            });
            if outer != NONE {
                let o = &mut self.tris[outer as usize];
                for j in 0..3 {
                    if (o.v[(j + 1) % 3], o.v[(j + 2) % 3]) == (b, a) {
                        o.nb[j] = id;
                    }
                }
            }
            by_first.insert(a, id);
            created.push(id);
        }
        // Stitch the fan: triangle [a, b, p] meets [b, c, p] along edge (b, p).
        for &id in &created {
            let b = self.tris[id as usize].v[1];
            let next = by_first[&b];
            self.tris[id as usize].nb[0] = next; // edge (b, p)
            self.tris[next as usize].nb[1] = id; // edge (p, b) on the other side
        }
        self.last = created[0];
    }

    fn locate(&self, p: [f64; 2]) -> u32 {
        let mut cur = self.last;
        let limit = 4 * self.tris.len() + 64;
        let mut steps = 0;
        'walk: loop {
            steps += 1;
            if steps > limit {
                return self.locate_exhaustive(p);
            }
            let tri = self.tris[cur as usize];
            for i in 0..3 {
                let a = self.pts[tri.v[(i + 1) % 3] as usize];
                let b = self.pts[tri.v[(i + 2) % 3] as usize];
                if orient2d(a, b, p) < 0 {
                    debug_assert!(tri.nb[i] != NONE, "walked outside the super triangle");
                    cur = tri.nb[i];
                    continue 'walk;
                }
            }
            return cur;
        }
    }

    fn locate_exhaustive(&self, p: [f64; 2]) -> u32 {
        for (id, tri) in self.tris.iter().enumerate() {
            if !tri.alive {
                continue;
            }
            let inside = (0..3).all(|i| {
                let a = self.pts[tri.v[(i + 1) % 3] as usize];
                let b = self.pts[tri.v[(i + 2) % 3] as usize];
                orient2d(a, b, p) >= 0
            });
            if inside {
                return id as u32;
            }
        }
        unreachable!("point not covered by any triangle");
    }

    fn collect_conflicts(&mut self, start: u32, p: [f64; 2]) {
        self.in_conflict.resize(self.tris.len(), false);
        debug_assert!(
            self.tri_conflicts(start, p),
            "containing triangle must conflict with a non-duplicate point"
        );
        self.conflict.push(start);
        self.in_conflict[start as usize] = true;
        let mut head = 0;
        while head < self.conflict.len() {
            let t = self.conflict[head];
            head += 1;
            let nbs = self.tris[t as usize].nb;
            for nb in nbs {
                if nb == NONE || self.in_conflict[nb as usize] {
                    continue;
                }
                if self.tri_conflicts(nb, p) {
                    self.conflict.push(nb);
                    self.in_conflict[nb as usize] = true;
                }
            }
        }
    }

    fn tri_conflicts(&self, t: u32, p: [f64; 2]) -> bool {
        let v = self.tris[t as usize].v;
        in_circumcircle(
            self.pts[v[0] as usize],
            self.pts[v[1] as usize],
            self.pts[v[2] as usize],
            p,
        ) > 0
    }

    fn alloc(&mut self, tri: Tri) -> u32 {
        if let Some(id) = self.free.pop() {
            self.tris[id as usize] = tri;
            self.in_conflict[id as usize] = false;
            id
        } else {
            self.tris.push(tri);
            self.tris.len() as u32 - 1
        }
    }

    fn finish(self, unique: &[usize]) -> Vec<[usize; 3]> {
        let n = unique.len() as u32;
        let mut out = Vec::new();
        for tri in &self.tris {
            if tri.alive && tri.v.iter().all(|&v| v < n) {
                out.push([
                    unique[tri.v[0] as usize],
                    unique[tri.v[1] as usize],
                    unique[tri.v[2] as usize],
                ]);
            }
        }
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri_area(points: &[[f64; 2]], t: [usize; 3]) -> f64 {
        let (a, b, c) = (points[t[0]], points[t[1]], points[t[2]]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    }

    /// Delaunay check: no input point strictly inside any circumcircle.
    fn assert_delaunay(points: &[[f64; 2]], tris: &[[usize; 3]]) {
        for t in tris {
            for (i, p) in points.iter().enumerate() {
                if t.contains(&i) {
                    continue;
                }
                assert!(
                    in_circumcircle(points[t[0]], points[t[1]], points[t[2]], *p) <= 0,
                    "point {i} inside circumcircle of {t:?}"
                );
            }
        }
    }

    #[test]
    fn square_two_triangles() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let t = triangulate(&pts).unwrap();
        assert_eq!(t.triangles.len(), 2);
        let area: f64 = t.triangles.iter().map(|&t| tri_area(&pts, t)).sum();
        assert!((area - 1.0).abs() < 1e-12);
        assert_delaunay(&pts, &t.triangles);
    }

    #[test]
    fn collinear_yields_no_triangles() {
        let pts = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        let t = triangulate(&pts).unwrap();
        assert!(t.triangles.is_empty());
    }

    #[test]
    fn duplicates_are_merged() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 1.0], [1.0, 0.0]];
        let t = triangulate(&pts).unwrap();
        assert_eq!(t.triangles.len(), 1);
        assert_eq!(t.triangles[0], [0, 1, 3]);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            triangulate(&[[0.0, 0.0], [1.0, 0.0]]),
            Err(GeometryError::DegeneratePointSet)
        ));
    }

    #[test]
    fn regular_grid_is_fully_covered() {
        // 2500 cocircular quadruples; exercises the exact predicate path.
        let mut pts = Vec::new();
        for i in 0..50 {
            for j in 0..50 {
                pts.push([i as f64, j as f64]);
            }
        }
        let t = triangulate(&pts).unwrap();
        // Any triangulation of a convex k x k grid has 2(k-1)^2 triangles.
        assert_eq!(t.triangles.len(), 2 * 49 * 49);
        let area: f64 = t.triangles.iter().map(|&t| tri_area(&pts, t)).sum();
        assert!((area - 49.0 * 49.0).abs() < 1e-9);
        for tri in &t.triangles {
            assert!(tri_area(&pts, *tri) > 0.0, "triangles must stay CCW");
        }
    }

    #[test]
    fn cocircular_ring() {
        // Points exactly-ish on a circle plus the center.
        let mut pts = alloc::vec![[0.0, 0.0]];
        for k in 0..36 {
            let ang = (k as f64) * core::f64::consts::PI / 18.0;
            pts.push([10.0 * ang.cos(), 10.0 * ang.sin()]);
        }
        let t = triangulate(&pts).unwrap();
        assert_eq!(t.triangles.len(), 36);
        assert_delaunay(&pts, &t.triangles);
    }

    #[test]
    fn random_points_are_delaunay() {
        let mut state = 42u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let pts: Vec<[f64; 2]> = (0..300)
            .map(|_| [next() * 100.0, next() * 40.0])
            .collect();
        let t = triangulate(&pts).unwrap();
        assert_delaunay(&pts, &t.triangles);
        for tri in &t.triangles {
            assert!(tri_area(&pts, *tri) > 0.0);
        }
    }
}
