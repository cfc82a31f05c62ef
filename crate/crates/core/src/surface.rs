//! Road-surface reconstruction: alpha shape over flattened road points and
//! point-on-road containment.
//!
//! The alpha shape keeps exactly the Delaunay triangles whose circumradius is
//! at most `alpha`, so `alpha -> infinity` recovers the convex hull and
//! `alpha -> 0` empties the shape.

use alloc::string::String;
use alloc::vec::Vec;

use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::delaunay;
use crate::error::GeometryError;
use crate::float::use_float_ext;
use crate::plane::Plane;
use crate::pointcloud::{IndexSet, PointCloud};
use crate::predicates::orient2d;

use_float_ext!();

/// A flattened (z dropped) point in the ego frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn coords(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// Alpha-shape triangle set over flattened road points.
///
/// Immutable after construction; containment queries are safe to run
/// concurrently.
#[derive(Debug, Clone)]
pub struct RoadSurface {
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    alpha: f64,
    index: TriangleGrid,
}

impl RoadSurface {
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    /// Retained triangles as CCW index triples into `vertices`.
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Total area of the retained triangles.
    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                triangle_area(
                    self.vertices[t[0]],
                    self.vertices[t[1]],
                    self.vertices[t[2]],
                )
            })
            .sum()
    }

    /// True iff `p` lies inside or on the boundary of a retained triangle.
    ///
    /// Uses exact orientation predicates, so points exactly on an edge or
    /// vertex count as contained.
    pub fn contains(&self, p: Point2) -> bool {
        if !p.is_finite() {
            return false;
        }
        let q = p.coords();
        self.index.candidates(p, |t| {
            let [a, b, c] = self.triangles[t];
            point_in_triangle(
                self.vertices[a].coords(),
                self.vertices[b].coords(),
                self.vertices[c].coords(),
                q,
            )
        })
    }

    /// Plain-text debug export: one `v x y` line per vertex, one `t i j k`
    /// line per retained triangle.
    pub fn to_debug_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {}", v.x, v.y);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "t {} {} {}", t[0], t[1], t[2]);
        }
        out
    }
}

/// Inclusive point-in-triangle test with exact predicates; (a, b, c) CCW.
fn point_in_triangle(a: [f64; 2], b: [f64; 2], c: [f64; 2], p: [f64; 2]) -> bool {
    orient2d(a, b, p) >= 0 && orient2d(b, c, p) >= 0 && orient2d(c, a, p) >= 0
}

fn triangle_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
}

fn edge_len(p: Point2, q: Point2) -> f64 {
    let dx = q.x - p.x;
    let dy = q.y - p.y;
    (dx * dx + dy * dy).sqrt()
}

fn circumradius(a: Point2, b: Point2, c: Point2) -> f64 {
    let area = triangle_area(a, b, c).abs();
    if area <= 0.0 {
        f64::INFINITY
    } else {
        edge_len(b, c) * edge_len(a, c) * edge_len(a, b) / (4.0 * area)
    }
}

/// Build the alpha shape of a flattened point set.
///
/// Computes the Delaunay triangulation and retains the triangles with
/// circumradius `<= alpha`. Errors on fewer than 3 distinct points, an
/// all-collinear configuration, non-finite input, or `alpha <= 0`.
pub fn build_alpha_shape(points: &[Point2], alpha: f64) -> Result<RoadSurface, GeometryError> {
    if !(alpha > 0.0) {
        return Err(GeometryError::InvalidConfig("alpha must be > 0"));
    }
    for p in points {
        if !p.is_finite() {
            return Err(GeometryError::NonFinite);
        }
    }
    let coords: Vec<[f64; 2]> = points.iter().map(|p| p.coords()).collect();
    let triangulation = delaunay::triangulate(&coords)?;
    if triangulation.triangles.is_empty() {
        // >= 3 points but no triangles: the distinct points are collinear.
        return Err(GeometryError::DegeneratePointSet);
    }

    let triangles: Vec<[usize; 3]> = triangulation
        .triangles
        .into_iter()
        .filter(|&[a, b, c]| circumradius(points[a], points[b], points[c]) <= alpha)
        .collect();

    let index = TriangleGrid::build(points, &triangles);
    Ok(RoadSurface {
        vertices: points.to_vec(),
        triangles,
        alpha,
        index,
    })
}

/// Select the candidate points that stand on the road.
///
/// A candidate passes when its flattened (x, y) is contained in the surface
/// and its signed height above `plane` lies within `height_band`
/// (inclusive). The band keeps the road skin itself (below `min`) and
/// overhanging structures (above `max`) out of the proposals.
pub fn on_road_points(
    cloud: &PointCloud,
    candidates: &IndexSet,
    surface: &RoadSurface,
    plane: &Plane,
    height_band: (f64, f64),
) -> IndexSet {
    let (min_above, max_above) = height_band;
    candidates
        .iter()
        .filter(|&i| {
            let p = cloud.points[i];
            let h = plane.signed_distance(p);
            h >= min_above && h <= max_above && surface.contains(Point2::new(p.x, p.y))
        })
        .collect()
}

/// Uniform grid over triangle bounding boxes for containment queries.
#[derive(Debug, Clone)]
struct TriangleGrid {
    min: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    /// `cells[cy * nx + cx]` holds indices into the triangle list.
    cells: Vec<Vec<u32>>,
}

impl TriangleGrid {
    fn build(points: &[Point2], triangles: &[[usize; 3]]) -> Self {
        let (mut min, mut max) = ([f64::MAX; 2], [f64::MIN; 2]);
        for p in points {
            min[0] = min[0].min(p.x);
            min[1] = min[1].min(p.y);
            max[0] = max[0].max(p.x);
            max[1] = max[1].max(p.y);
        }
        if points.is_empty() {
            (min, max) = ([0.0; 2], [1.0; 2]);
        }
        let ext = [(max[0] - min[0]).max(1e-9), (max[1] - min[1]).max(1e-9)];
        // Aim for a few triangles per cell, bounded grid size.
        let target = (triangles.len().max(1) as f64).sqrt().ceil();
        let nx = (target.min(1024.0) as usize).max(1);
        let ny = nx;
        let cell = (ext[0] / nx as f64).max(ext[1] / ny as f64).max(1e-12);
        let nx = ((ext[0] / cell).ceil() as usize + 1).clamp(1, 2048);
        let ny = ((ext[1] / cell).ceil() as usize + 1).clamp(1, 2048);
        let mut cells = alloc::vec![Vec::new(); nx * ny];
        for (t_idx, t) in triangles.iter().enumerate() {
            let xs = [points[t[0]].x, points[t[1]].x, points[t[2]].x];
            let ys = [points[t[0]].y, points[t[1]].y, points[t[2]].y];
            let x0 = Self::clamp_cell((xs.iter().cloned().fold(f64::MAX, f64::min) - min[0]) / cell, nx);
            let x1 = Self::clamp_cell((xs.iter().cloned().fold(f64::MIN, f64::max) - min[0]) / cell, nx);
            let y0 = Self::clamp_cell((ys.iter().cloned().fold(f64::MAX, f64::min) - min[1]) / cell, ny);
            let y1 = Self::clamp_cell((ys.iter().cloned().fold(f64::MIN, f64::max) - min[1]) / cell, ny);
            for cy in y0..=y1 {
                for cx in x0..=x1 {
                    cells[cy * nx + cx].push(t_idx as u32);
                }
            }
        }
        Self {
            min,
            cell,
            nx,
            ny,
            cells,
        }
    }

    fn clamp_cell(v: f64, n: usize) -> usize {
        if v.is_nan() || v < 0.0 {
            0
        } else {
            (v as usize).min(n - 1)
        }
    }

    /// Run `test` over the triangles whose bounding box covers `p`'s cell.
    fn candidates<F: FnMut(usize) -> bool>(&self, p: Point2, mut test: F) -> bool {
        let fx = (p.x - self.min[0]) / self.cell;
        let fy = (p.y - self.min[1]) / self.cell;
        if fx < 0.0 || fy < 0.0 {
            return false;
        }
        let (cx, cy) = (fx as usize, fy as usize);
        if cx >= self.nx || cy >= self.ny {
            return false;
        }
        self.cells[cy * self.nx + cx]
            .iter()
            .any(|&t| test(t as usize))
    }
}
