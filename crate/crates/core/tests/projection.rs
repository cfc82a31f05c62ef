//! Camera projection round trips and mask lifting against synthetic ground
//! truth.

use ora_core::camera::{box3d_to_box2d, lift_road_mask, CalibratedCamera, RoadMask};
use ora_core::synth::{generate, CameraSpec, PointLabel, SceneSpec};
use ora_core::{crop_front, IndexSet, Point3, PointCloud};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_camera(rng: &mut ChaCha8Rng) -> CalibratedCamera {
    let spec = CameraSpec {
        position: Point3::new(
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
            1.0 + rng.random::<f64>(),
        ),
        yaw_deg: rng.random::<f64>() * 60.0 - 30.0,
        pitch_deg: rng.random::<f64>() * 20.0 - 10.0,
        fx: 200.0 + rng.random::<f64>() * 400.0,
        fy: 200.0 + rng.random::<f64>() * 400.0,
        ..Default::default()
    };
    spec.build().unwrap()
}

#[test]
fn round_trip_within_micrometer() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut checked = 0;
    while checked < 10_000 {
        let cam = random_camera(&mut rng);
        let p = Point3::new(
            rng.random::<f64>() * 80.0 - 10.0,
            rng.random::<f64>() * 40.0 - 20.0,
            rng.random::<f64>() * 8.0 - 1.0,
        );
        let Some(proj) = cam.project(p) else { continue };
        let back = cam.back_project(proj.u, proj.v, proj.depth);
        assert!(
            back.distance(p) < 1e-6,
            "round trip error {} at {p:?}",
            back.distance(p)
        );
        checked += 1;
    }
}

#[test]
fn lift_is_monotone_in_the_mask() {
    let spec = SceneSpec::default();
    let out = generate(&spec).unwrap();
    let cropped = crop_front(&out.cloud);

    // Shrink the mask by clearing a stripe; lifted set must shrink too.
    let mut smaller = out.mask.clone();
    for v in 0..smaller.height {
        for u in 0..smaller.width / 3 {
            smaller.set(u, v, false);
        }
    }
    let full = lift_road_mask(&out.camera, &out.mask, &out.cloud, &cropped);
    let sub = lift_road_mask(&out.camera, &smaller, &out.cloud, &cropped);
    assert!(sub.len() < full.len());
    for i in sub.iter() {
        assert!(full.contains(i), "monotonicity violated at {i}");
    }
    // And the lift never leaves the queried subset.
    for i in full.iter() {
        assert!(cropped.contains(i));
    }
}

/// Against the generator's ground truth: lifted points are exactly the road
/// points, up to pixels within one pixel of a mask boundary (where nearest-
/// integer rounding may disagree with the pixel-center sample).
#[test]
fn lift_matches_ground_truth_away_from_boundaries() {
    let spec = SceneSpec {
        name: "lift_gt".into(),
        ..Default::default()
    };
    let out = generate(&spec).unwrap();
    let cropped = crop_front(&out.cloud);
    let lifted = lift_road_mask(&out.camera, &out.mask, &out.cloud, &cropped);

    let near_mask_boundary = |mask: &RoadMask, px: i64, py: i64| -> bool {
        let center = mask.is_road(px, py);
        for dy in -1..=1i64 {
            for dx in -1..=1i64 {
                let (nx, ny) = (px + dx, py + dy);
                if nx < 0 || ny < 0 || nx >= mask.width as i64 || ny >= mask.height as i64 {
                    return true; // image border counts as boundary
                }
                if mask.is_road(nx, ny) != center {
                    return true;
                }
            }
        }
        false
    };

    let mut checked = 0;
    for i in cropped.iter() {
        let Some(proj) = out.camera.project(out.cloud.points[i]) else {
            assert!(!lifted.contains(i));
            continue;
        };
        let (px, py) = (proj.u.round() as i64, proj.v.round() as i64);
        if px < 0 || py < 0 || px >= out.mask.width as i64 || py >= out.mask.height as i64 {
            assert!(!lifted.contains(i));
            continue;
        }
        if near_mask_boundary(&out.mask, px, py) {
            continue;
        }
        let is_road_point = matches!(out.truth.label_of(i), PointLabel::Road);
        assert_eq!(
            lifted.contains(i),
            is_road_point,
            "point {i} projects to ({px},{py}) away from any boundary"
        );
        checked += 1;
    }
    assert!(checked > 1000, "test must exercise interior pixels");
}

#[test]
fn cluster_box_cannot_shrink_by_more_than_padding() {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let pts: Vec<Point3> = (0..60)
        .map(|_| {
            Point3::new(
                5.0 + rng.random::<f64>() * 2.0,
                rng.random::<f64>() * 1.5,
                rng.random::<f64>(),
            )
        })
        .collect();
    let cloud = PointCloud::new(pts);
    let cluster = ora_core::Cluster::proposed(IndexSet::full(cloud.len()));
    let bbox = ora_core::camera::cluster_to_box3d(&cloud, &cluster).unwrap();
    for i in cluster.members.iter() {
        assert!(bbox.contains_point(cloud.points[i]));
    }
    // Shrinking every dimension by 0.21 m must expel at least one member
    // (the padding is exactly 0.1 m per side).
    let shrunk = ora_core::camera::Box3D {
        center: bbox.center,
        dims: [
            bbox.dims[0] - 0.21,
            bbox.dims[1] - 0.21,
            bbox.dims[2] - 0.21,
        ],
        yaw: 0.0,
    };
    assert!(cluster
        .members
        .iter()
        .any(|i| !shrunk.contains_point(cloud.points[i])));
}

#[test]
fn projected_box_contains_member_corner_projections() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..200 {
        let cam = random_camera(&mut rng);
        let bbox = ora_core::camera::Box3D {
            center: Point3::new(
                rng.random::<f64>() * 30.0 + 2.0,
                rng.random::<f64>() * 10.0 - 5.0,
                rng.random::<f64>() * 2.0,
            ),
            dims: [
                0.5 + rng.random::<f64>() * 3.0,
                0.5 + rng.random::<f64>() * 2.0,
                0.5 + rng.random::<f64>() * 2.0,
            ],
            yaw: rng.random::<f64>() * 3.0 - 1.5,
        };
        let Some(b2) = box3d_to_box2d(&cam, &bbox, 0.0, 0) else {
            continue;
        };
        for corner in bbox.corners() {
            if let Some(p) = cam.project(corner) {
                // After clipping, every visible corner projection clamped to
                // the image must stay inside the rectangle.
                let u = p.u.clamp(0.0, cam.width as f64);
                let v = p.v.clamp(0.0, cam.height as f64);
                assert!(u >= b2.x_min - 1e-9 && u <= b2.x_max + 1e-9);
                assert!(v >= b2.y_min - 1e-9 && v <= b2.y_max + 1e-9);
            }
        }
    }
}
