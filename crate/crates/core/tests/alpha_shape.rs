//! Alpha-shape limits, monotonicity, and containment against independent
//! oracles.

use ora_core::{build_alpha_shape, on_road_points, IndexSet, Plane, Point2, Point3, PointCloud};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ── independent convex-hull oracle (Andrew monotone chain) ─────────────

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn convex_hull_area(points: &[Point2]) -> f64 {
    let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [p.x, p.y]).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let n = pts.len();
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * n);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    let mut area = 0.0;
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        area += a[0] * b[1] - b[0] * a[1];
    }
    area.abs() * 0.5
}

/// Uniform random points in an L-shaped region.
fn l_shaped_points(seed: u64, n: usize) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let x = rng.random::<f64>() * 30.0;
        let y = rng.random::<f64>() * 30.0;
        // L: full bottom bar plus left column.
        if y <= 10.0 || x <= 10.0 {
            pts.push(Point2::new(x, y));
        }
    }
    pts
}

#[test]
fn huge_alpha_matches_convex_hull_area() {
    for seed in 0..5u64 {
        let pts = l_shaped_points(seed, 500);
        let surface = build_alpha_shape(&pts, 1e6).unwrap();
        let hull = convex_hull_area(&pts);
        let rel = (surface.area() - hull).abs() / hull;
        assert!(rel < 1e-9, "seed {seed}: relative error {rel}");
    }
}

#[test]
fn alpha_10_is_concave_but_below_hull() {
    let pts = l_shaped_points(99, 500);
    let small = build_alpha_shape(&pts, 10.0).unwrap();
    let hull = convex_hull_area(&pts);
    assert!(small.area() <= hull + 1e-9);
    // The L's notch (~20x20 triangle-ish) must not be fully bridged.
    assert!(small.area() < hull * 0.99);
}

#[test]
fn triangle_sets_are_monotone_in_alpha() {
    for seed in [3u64, 17] {
        let pts = l_shaped_points(seed, 400);
        let alphas = [1.0, 5.0, 10.0, 100.0];
        let mut previous: Option<Vec<[usize; 3]>> = None;
        for alpha in alphas {
            let surface = build_alpha_shape(&pts, alpha).unwrap();
            let mut tris = surface.triangles().to_vec();
            tris.sort_unstable();
            if let Some(prev) = &previous {
                for t in prev {
                    assert!(
                        tris.binary_search(t).is_ok(),
                        "alpha {alpha}: lost triangle {t:?} kept at smaller alpha"
                    );
                }
            }
            previous = Some(tris);
        }
    }
}

#[test]
fn circumradius_invariant_holds() {
    let pts = l_shaped_points(5, 300);
    let alpha = 4.0;
    let surface = build_alpha_shape(&pts, alpha).unwrap();
    for t in surface.triangles() {
        let (a, b, c) = (
            surface.vertices()[t[0]],
            surface.vertices()[t[1]],
            surface.vertices()[t[2]],
        );
        let (la, lb, lc) = (
            ((b.x - c.x).powi(2) + (b.y - c.y).powi(2)).sqrt(),
            ((a.x - c.x).powi(2) + (a.y - c.y).powi(2)).sqrt(),
            ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt(),
        );
        let area = 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)).abs();
        let r = la * lb * lc / (4.0 * area);
        assert!(r <= alpha * (1.0 + 1e-12), "triangle with circumradius {r}");
    }
}

// ── containment oracle ─────────────────────────────────────────────────

fn dist_point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len_sq = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len_sq > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let d = [ap[0] - t * ab[0], ap[1] - t * ab[1]];
    (d[0] * d[0] + d[1] * d[1]).sqrt()
}

/// Sign-based brute-force point-in-any-triangle oracle, plus the distance
/// of the query to the nearest triangle edge (for rejection sampling).
fn oracle_contains(surface: &ora_core::RoadSurface, p: [f64; 2]) -> (bool, f64) {
    let mut inside = false;
    let mut min_edge = f64::INFINITY;
    for t in surface.triangles() {
        let v = [
            surface.vertices()[t[0]],
            surface.vertices()[t[1]],
            surface.vertices()[t[2]],
        ];
        let q = [[v[0].x, v[0].y], [v[1].x, v[1].y], [v[2].x, v[2].y]];
        let d0 = cross(q[0], q[1], p);
        let d1 = cross(q[1], q[2], p);
        let d2 = cross(q[2], q[0], p);
        if d0 >= 0.0 && d1 >= 0.0 && d2 >= 0.0 {
            inside = true;
        }
        for e in 0..3 {
            min_edge = min_edge.min(dist_point_segment(p, q[e], q[(e + 1) % 3]));
        }
    }
    (inside, min_edge)
}

#[test]
fn contains_agrees_with_brute_force_oracle() {
    let pts = l_shaped_points(31, 400);
    let surface = build_alpha_shape(&pts, 8.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut checked = 0;
    while checked < 10_000 {
        let p = [
            rng.random::<f64>() * 36.0 - 3.0,
            rng.random::<f64>() * 36.0 - 3.0,
        ];
        let (want, edge_dist) = oracle_contains(&surface, p);
        if edge_dist < 1e-9 {
            continue; // too close to an edge for a float oracle
        }
        let got = surface.contains(Point2::new(p[0], p[1]));
        assert_eq!(got, want, "disagreement at {p:?}");
        checked += 1;
    }
}

// ── on-road selection ──────────────────────────────────────────────────

fn flat_road_surface() -> ora_core::RoadSurface {
    // Regular grid covering x in [0, 20], y in [-5, 5].
    let mut pts = Vec::new();
    for i in 0..=20 {
        for j in 0..=10 {
            pts.push(Point2::new(i as f64, j as f64 - 5.0));
        }
    }
    build_alpha_shape(&pts, 10.0).unwrap()
}

#[test]
fn on_road_cube_is_selected() {
    let surface = flat_road_surface();
    let plane = Plane::new(Point3::new(0.0, 0.0, 1.0), 0.0).unwrap();
    // 1 m cube of points centered at (5, 0, 0.5).
    let mut pts = Vec::new();
    for i in 0..5 {
        for j in 0..5 {
            for k in 0..5 {
                pts.push(Point3::new(
                    4.5 + i as f64 * 0.25,
                    -0.5 + j as f64 * 0.25,
                    0.25 + k as f64 * 0.125,
                ));
            }
        }
    }
    let cloud = PointCloud::new(pts);
    let candidates = IndexSet::full(cloud.len());
    let kept = on_road_points(&cloud, &candidates, &surface, &plane, (0.2, 4.0));
    assert_eq!(kept, candidates, "whole cube stands on the road");
}

#[test]
fn off_surface_and_out_of_band_points_excluded() {
    let surface = flat_road_surface();
    let plane = Plane::new(Point3::new(0.0, 0.0, 1.0), 0.0).unwrap();
    let cloud = PointCloud::new(vec![
        Point3::new(5.0, 0.0, 1.0),   // on road
        Point3::new(50.0, 0.0, 1.0),  // outside the surface
        Point3::new(5.0, 0.0, 0.05),  // below the band (road skin)
        Point3::new(5.0, 0.0, 4.5),   // above the band (overhang)
        Point3::new(5.0, 0.0, 0.2),   // exactly at the lower bound: kept
        Point3::new(5.0, 0.0, 4.0),   // exactly at the upper bound: kept
    ]);
    let candidates = IndexSet::full(cloud.len());
    let kept = on_road_points(&cloud, &candidates, &surface, &plane, (0.2, 4.0));
    assert_eq!(kept.as_slice(), &[0, 4, 5]);
}

#[test]
fn points_above_surface_hole_excluded() {
    // Two separated grid patches: the gap is too wide for alpha = 2 and the
    // point above the gap must not be contained.
    let mut pts = Vec::new();
    for i in 0..=10 {
        for j in 0..=10 {
            pts.push(Point2::new(i as f64 * 0.5, j as f64 * 0.5));
        }
    }
    for i in 0..=10 {
        for j in 0..=10 {
            pts.push(Point2::new(20.0 + i as f64 * 0.5, j as f64 * 0.5));
        }
    }
    let surface = build_alpha_shape(&pts, 2.0).unwrap();
    let plane = Plane::new(Point3::new(0.0, 0.0, 1.0), 0.0).unwrap();
    let cloud = PointCloud::new(vec![
        Point3::new(2.5, 2.5, 1.0),  // over the left patch
        Point3::new(12.5, 2.5, 1.0), // over the gap
    ]);
    let kept = on_road_points(
        &cloud,
        &IndexSet::full(2),
        &surface,
        &plane,
        (0.2, 4.0),
    );
    assert_eq!(kept.as_slice(), &[0]);
}
