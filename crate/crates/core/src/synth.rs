//! Procedural generation of paired lidar/camera scenes with ground truth.
//!
//! An idealized spinning lidar (uniform azimuth grid x fixed elevation set)
//! is ray-cast against a ground plane and rigid primitives; the road mask is
//! rendered by casting camera pixel rays against the same geometry, so
//! object pixels occlude the road exactly like a real segmenter labeling
//! objects as non-road. Everything is deterministic per seed.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera::{Box3D, CalibratedCamera, RoadMask};
use crate::float::use_float_ext;
use crate::pipeline::DEFAULT_HEIGHT_BAND;
use crate::plane::Plane;
use crate::pointcloud::{Point3, PointCloud};
use crate::surface::Point2;

use_float_ext!();

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("invalid pose: {0}")]
    InvalidPose(String),
    #[error("invalid scene spec: {0}")]
    InvalidSpec(String),
}

/// Idealized spinning-lidar parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LidarSpec {
    pub channels: usize,
    pub azimuth_resolution_deg: f64,
    pub max_range: f64,
    /// Per-ray Bernoulli dropout probability.
    pub dropout_rate: f64,
    pub min_elevation_deg: f64,
    pub max_elevation_deg: f64,
    /// Sensor origin height above the ego frame's ground, meters.
    pub sensor_height: f64,
    /// Gaussian range noise; 0 disables the draw entirely.
    pub range_noise_sigma: f64,
}

impl Default for LidarSpec {
    fn default() -> Self {
        Self {
            channels: 64,
            azimuth_resolution_deg: 0.2,
            max_range: 75.0,
            dropout_rate: 0.02,
            min_elevation_deg: -22.5,
            max_elevation_deg: 7.0,
            sensor_height: 2.0,
            range_noise_sigma: 0.0,
        }
    }
}

/// Pinhole camera pose and intrinsics; pose is given in the ego frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraSpec {
    pub position: Point3,
    /// Rotation about +z, degrees; 0 looks along +x.
    pub yaw_deg: f64,
    /// Elevation above the horizon, degrees; negative pitches down.
    pub pitch_deg: f64,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for CameraSpec {
    fn default() -> Self {
        Self {
            position: Point3::new(0.0, 0.0, 1.8),
            yaw_deg: 0.0,
            pitch_deg: 0.0,
            fx: 300.0,
            fy: 300.0,
            cx: 479.5,
            cy: 319.5,
            width: 960,
            height: 640,
        }
    }
}

impl CameraSpec {
    /// Build the calibrated camera: +z forward, +x right, +y down.
    pub fn build(&self) -> Result<CalibratedCamera, SynthError> {
        let yaw = self.yaw_deg.to_radians();
        let pitch = self.pitch_deg.to_radians();
        let forward = Point3::new(
            pitch.cos() * yaw.cos(),
            pitch.cos() * yaw.sin(),
            pitch.sin(),
        );
        let right = forward
            .cross(Point3::new(0.0, 0.0, 1.0))
            .normalized()
            .ok_or_else(|| SynthError::InvalidSpec("camera looks straight up/down".into()))?;
        let down = forward.cross(right);
        // Rows of R are the camera axes expressed in the ego frame.
        let rotation = [
            [right.x, right.y, right.z],
            [down.x, down.y, down.z],
            [forward.x, forward.y, forward.z],
        ];
        let c = self.position;
        let translation = Point3::new(
            -(rotation[0][0] * c.x + rotation[0][1] * c.y + rotation[0][2] * c.z),
            -(rotation[1][0] * c.x + rotation[1][1] * c.y + rotation[1][2] * c.z),
            -(rotation[2][0] * c.x + rotation[2][1] * c.y + rotation[2][2] * c.z),
        );
        CalibratedCamera::new(
            self.fx,
            self.fy,
            self.cx,
            self.cy,
            rotation,
            translation,
            self.width,
            self.height,
        )
        .map_err(|e| SynthError::InvalidSpec(alloc::format!("camera: {e}")))
    }
}

/// Ground geometry: a 2D polygon marking road, on the plane
/// `z = z0 + slope.0 * x + slope.1 * y` (tilt capped at 5 degrees).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoadSpec {
    pub polygon: Vec<Point2>,
    pub z: f64,
    pub slope: (f64, f64),
}

impl Default for RoadSpec {
    fn default() -> Self {
        Self {
            polygon: alloc::vec![
                Point2::new(3.0, -7.0),
                Point2::new(60.0, -7.0),
                Point2::new(60.0, 7.0),
                Point2::new(3.0, 7.0),
            ],
            z: 0.0,
            slope: (0.0, 0.0),
        }
    }
}

impl RoadSpec {
    pub fn height_at(&self, x: f64, y: f64) -> f64 {
        self.z + self.slope.0 * x + self.slope.1 * y
    }

    /// The ground plane in implicit form.
    pub fn plane(&self) -> Plane {
        Plane::new(Point3::new(-self.slope.0, -self.slope.1, 1.0), -self.z)
            .expect("slope-form normal cannot be degenerate")
    }
}

/// Solid primitives objects are assembled from. Positions refer to the
/// center of the primitive's footprint at its base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Primitive {
    Cuboid { dims: [f64; 3] },
    Cylinder { radius: f64, height: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitivePlacement {
    /// Offset from the object position, rotated by the object yaw.
    pub offset: Point3,
    pub primitive: Primitive,
}

/// Object geometry: a single primitive or a rigid composite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ObjectShape {
    Cuboid { dims: [f64; 3] },
    Cylinder { radius: f64, height: f64 },
    Composite(Vec<PrimitivePlacement>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownObject {
    pub shape: ObjectShape,
    /// Base-center position in the ego frame.
    pub position: Point3,
    pub yaw: f64,
    pub class_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyObject {
    pub shape: ObjectShape,
    pub position: Point3,
    pub yaw: f64,
}

/// Full description of a synthetic scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneSpec {
    pub name: String,
    /// Evaluation scenario class this scene exercises ("a".."h").
    pub scenario_tag: Option<String>,
    pub rng_seed: u64,
    pub road: RoadSpec,
    pub known_objects: Vec<KnownObject>,
    pub anomalies: Vec<AnomalyObject>,
    pub lidar: LidarSpec,
    pub camera: CameraSpec,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            name: "scene".into(),
            scenario_tag: None,
            rng_seed: 0,
            road: RoadSpec::default(),
            known_objects: Vec::new(),
            anomalies: Vec::new(),
            lidar: LidarSpec::default(),
            camera: CameraSpec::default(),
        }
    }
}

/// Per-point ground-truth label encoding in [`GroundTruth::point_labels`].
pub const LABEL_ROAD: i32 = -1;
pub const LABEL_BACKGROUND: i32 = -2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointLabel {
    Road,
    Background,
    /// Index into [`GroundTruth::objects`].
    Object(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GtKind {
    Known { label: String },
    Anomaly,
}

/// Visibility statistics for one planted object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GtObjectStats {
    /// Lidar points whose first hit is this object.
    pub lidar_points: usize,
    /// Of those, points inside the road polygon with height above the
    /// ground-truth plane inside the default proposal band.
    pub on_road_points: usize,
    /// Camera pixels whose first hit is this object.
    pub pixel_area: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtObject {
    pub kind: GtKind,
    pub bbox: Box3D,
    pub stats: GtObjectStats,
}

/// Exact ground truth emitted alongside each generated scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub scene_id: String,
    pub scenario_tag: Option<String>,
    pub road_polygon: Vec<Point2>,
    pub plane: Plane,
    pub objects: Vec<GtObject>,
    /// One label per cloud point: -1 road, -2 background, else object index.
    pub point_labels: Vec<i32>,
}

impl GroundTruth {
    pub fn label_of(&self, point: usize) -> PointLabel {
        match self.point_labels[point] {
            LABEL_ROAD => PointLabel::Road,
            LABEL_BACKGROUND => PointLabel::Background,
            i => PointLabel::Object(i as usize),
        }
    }
}

/// Everything `generate` produces for one scene.
#[derive(Debug, Clone)]
pub struct SceneOutput {
    pub cloud: PointCloud,
    pub mask: RoadMask,
    pub camera: CalibratedCamera,
    pub truth: GroundTruth,
}

// ── world primitives ───────────────────────────────────────────────────

#[derive(Debug, Clone, Copy)]
enum WorldPrim {
    /// Reuses the box math: center, dims, yaw.
    Cuboid(Box3D),
    Cylinder {
        cx: f64,
        cy: f64,
        z0: f64,
        z1: f64,
        radius: f64,
    },
}

impl WorldPrim {
    fn aabb(&self) -> (Point3, Point3) {
        match self {
            WorldPrim::Cuboid(b) => b.aabb(),
            WorldPrim::Cylinder {
                cx,
                cy,
                z0,
                z1,
                radius,
            } => (
                Point3::new(cx - radius, cy - radius, *z0),
                Point3::new(cx + radius, cy + radius, *z1),
            ),
        }
    }

    fn contains(&self, p: Point3) -> bool {
        match self {
            WorldPrim::Cuboid(b) => b.contains_point(p),
            WorldPrim::Cylinder {
                cx,
                cy,
                z0,
                z1,
                radius,
            } => {
                let dx = p.x - cx;
                let dy = p.y - cy;
                p.z >= *z0 && p.z <= *z1 && dx * dx + dy * dy <= radius * radius
            }
        }
    }

    /// First entry parameter of the ray `o + t d`, `t > eps`, if any.
    fn ray_hit(&self, o: Point3, d: Point3) -> Option<f64> {
        const EPS: f64 = 1e-9;
        match self {
            WorldPrim::Cuboid(b) => {
                // Slab test in the yaw-aligned box frame.
                let (s, c) = (b.yaw.sin(), b.yaw.cos());
                let rel = o.sub(b.center);
                let ox = c * rel.x + s * rel.y;
                let oy = -s * rel.x + c * rel.y;
                let oz = rel.z;
                let dx = c * d.x + s * d.y;
                let dy = -s * d.x + c * d.y;
                let dz = d.z;
                let mut t_enter = f64::NEG_INFINITY;
                let mut t_exit = f64::INFINITY;
                for (op, dp, half) in [
                    (ox, dx, b.dims[0] / 2.0),
                    (oy, dy, b.dims[1] / 2.0),
                    (oz, dz, b.dims[2] / 2.0),
                ] {
                    if dp.abs() < 1e-15 {
                        if op.abs() > half {
                            return None;
                        }
                        continue;
                    }
                    let t1 = (-half - op) / dp;
                    let t2 = (half - op) / dp;
                    let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
                    t_enter = t_enter.max(lo);
                    t_exit = t_exit.min(hi);
                    if t_enter > t_exit {
                        return None;
                    }
                }
                (t_enter > EPS).then_some(t_enter)
            }
            WorldPrim::Cylinder {
                cx,
                cy,
                z0,
                z1,
                radius,
            } => {
                let mut best: Option<f64> = None;
                let mut consider = |t: f64| {
                    if t > EPS && best.is_none_or(|b| t < b) {
                        best = Some(t);
                    }
                };
                // Side surface.
                let ox = o.x - cx;
                let oy = o.y - cy;
                let a = d.x * d.x + d.y * d.y;
                if a > 1e-15 {
                    let b_half = ox * d.x + oy * d.y;
                    let c0 = ox * ox + oy * oy - radius * radius;
                    let disc = b_half * b_half - a * c0;
                    if disc >= 0.0 {
                        let sq = disc.sqrt();
                        for t in [(-b_half - sq) / a, (-b_half + sq) / a] {
                            let z = o.z + t * d.z;
                            if z >= *z0 && z <= *z1 {
                                consider(t);
                            }
                        }
                    }
                }
                // Caps.
                if d.z.abs() > 1e-15 {
                    for zc in [*z0, *z1] {
                        let t = (zc - o.z) / d.z;
                        let x = o.x + t * d.x - cx;
                        let y = o.y + t * d.y - cy;
                        if x * x + y * y <= radius * radius {
                            consider(t);
                        }
                    }
                }
                best
            }
        }
    }
}

fn rotate_z(p: Point3, yaw: f64) -> Point3 {
    let (s, c) = (yaw.sin(), yaw.cos());
    Point3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z)
}

/// Expand an object into world primitives.
fn world_prims(shape: &ObjectShape, position: Point3, yaw: f64) -> Vec<WorldPrim> {
    let place = |offset: Point3, primitive: Primitive| -> WorldPrim {
        let base = position.add(rotate_z(offset, yaw));
        match primitive {
            Primitive::Cuboid { dims } => WorldPrim::Cuboid(Box3D {
                center: Point3::new(base.x, base.y, base.z + dims[2] / 2.0),
                dims,
                yaw: normalize_yaw(yaw),
            }),
            Primitive::Cylinder { radius, height } => WorldPrim::Cylinder {
                cx: base.x,
                cy: base.y,
                z0: base.z,
                z1: base.z + height,
                radius,
            },
        }
    };
    match shape {
        ObjectShape::Cuboid { dims } => {
            alloc::vec![place(Point3::ZERO, Primitive::Cuboid { dims: *dims })]
        }
        ObjectShape::Cylinder { radius, height } => alloc::vec![place(
            Point3::ZERO,
            Primitive::Cylinder {
                radius: *radius,
                height: *height,
            }
        )],
        ObjectShape::Composite(parts) => parts
            .iter()
            .map(|p| place(p.offset, p.primitive))
            .collect(),
    }
}

fn normalize_yaw(yaw: f64) -> f64 {
    let mut y = yaw % core::f64::consts::TAU;
    if y > core::f64::consts::PI {
        y -= core::f64::consts::TAU;
    } else if y <= -core::f64::consts::PI {
        y += core::f64::consts::TAU;
    }
    y
}

/// Ground-truth box of one object: exact for single cuboids, axis-aligned
/// bounds otherwise.
fn gt_box(prims: &[WorldPrim]) -> Box3D {
    if let [WorldPrim::Cuboid(b)] = prims {
        return *b;
    }
    let (mut min, mut max) = prims[0].aabb();
    for p in &prims[1..] {
        let (lo, hi) = p.aabb();
        min = Point3::new(min.x.min(lo.x), min.y.min(lo.y), min.z.min(lo.z));
        max = Point3::new(max.x.max(hi.x), max.y.max(hi.y), max.z.max(hi.z));
    }
    Box3D {
        center: min.add(max).scale(0.5),
        dims: [
            (max.x - min.x).max(1e-6),
            (max.y - min.y).max(1e-6),
            (max.z - min.z).max(1e-6),
        ],
        yaw: 0.0,
    }
}

/// Even-odd point-in-polygon test on the flattened ground.
pub fn point_in_polygon(polygon: &[Point2], x: f64, y: f64) -> bool {
    let n = polygon.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (polygon[i].x, polygon[i].y);
        let (xj, yj) = (polygon[j].x, polygon[j].y);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn polygon_area(polygon: &[Point2]) -> f64 {
    let n = polygon.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc.abs() * 0.5
}

fn validate(spec: &SceneSpec) -> Result<(), SynthError> {
    let l = &spec.lidar;
    if l.channels < 1 {
        return Err(SynthError::InvalidSpec(
            "lidar needs at least one channel".into(),
        ));
    }
    if !(l.azimuth_resolution_deg > 0.0 && l.azimuth_resolution_deg <= 360.0) {
        return Err(SynthError::InvalidSpec(
            "azimuth resolution out of range".into(),
        ));
    }
    if !(l.max_range > 0.0) {
        return Err(SynthError::InvalidSpec("max range must be positive".into()));
    }
    if !(0.0..1.0).contains(&l.dropout_rate) {
        return Err(SynthError::InvalidSpec(
            "dropout rate must be in [0, 1)".into(),
        ));
    }
    if !(l.range_noise_sigma >= 0.0) {
        return Err(SynthError::InvalidSpec(
            "range noise sigma must be >= 0".into(),
        ));
    }
    if l.channels > 1 && !(l.min_elevation_deg < l.max_elevation_deg) {
        return Err(SynthError::InvalidSpec("elevation range is empty".into()));
    }
    if spec.road.polygon.len() < 3 || polygon_area(&spec.road.polygon) <= 1e-9 {
        return Err(SynthError::InvalidSpec("road polygon is degenerate".into()));
    }
    for p in &spec.road.polygon {
        if !p.is_finite() {
            return Err(SynthError::InvalidSpec(
                "road polygon has non-finite vertex".into(),
            ));
        }
    }
    let tilt = spec
        .road
        .slope
        .0
        .hypot(spec.road.slope.1)
        .atan2(1.0)
        .to_degrees();
    if tilt > 5.0 + 1e-9 {
        return Err(SynthError::InvalidSpec("road tilt exceeds 5 degrees".into()));
    }
    for o in &spec.known_objects {
        if o.class_label.is_empty() {
            return Err(SynthError::InvalidSpec(
                "known object without class label".into(),
            ));
        }
    }
    Ok(())
}

fn validate_prims(spec: &SceneSpec, prims: &[(usize, WorldPrim)]) -> Result<(), SynthError> {
    let sensor = Point3::new(0.0, 0.0, spec.lidar.sensor_height);
    for (obj, prim) in prims {
        let (lo, hi) = prim.aabb();
        if !(lo.is_finite() && hi.is_finite())
            || hi.x - lo.x <= 0.0
            || hi.y - lo.y <= 0.0
            || hi.z - lo.z <= 0.0
        {
            return Err(SynthError::InvalidPose(alloc::format!(
                "object {obj} has degenerate geometry"
            )));
        }
        // Below the (possibly tilted) road plane?
        for (x, y) in [(lo.x, lo.y), (hi.x, lo.y), (lo.x, hi.y), (hi.x, hi.y)] {
            if lo.z < spec.road.height_at(x, y) - 1e-6 {
                return Err(SynthError::InvalidPose(alloc::format!(
                    "object {obj} extends below the road plane"
                )));
            }
        }
        if prim.contains(sensor) {
            return Err(SynthError::InvalidPose(alloc::format!(
                "object {obj} encloses the lidar sensor"
            )));
        }
    }
    Ok(())
}

/// Generate one scene: lidar cloud, road mask, camera, ground truth.
pub fn generate(spec: &SceneSpec) -> Result<SceneOutput, SynthError> {
    validate(spec)?;
    let camera = spec.camera.build()?;

    let mut prims: Vec<(usize, WorldPrim)> = Vec::new();
    let mut objects: Vec<(GtKind, Box3D)> = Vec::new();
    for o in &spec.known_objects {
        let ps = world_prims(&o.shape, o.position, o.yaw);
        let idx = objects.len();
        objects.push((
            GtKind::Known {
                label: o.class_label.clone(),
            },
            gt_box(&ps),
        ));
        prims.extend(ps.into_iter().map(|p| (idx, p)));
    }
    for a in &spec.anomalies {
        let ps = world_prims(&a.shape, a.position, a.yaw);
        let idx = objects.len();
        objects.push((GtKind::Anomaly, gt_box(&ps)));
        prims.extend(ps.into_iter().map(|p| (idx, p)));
    }
    validate_prims(spec, &prims)?;

    // ── lidar pass ──
    let l = &spec.lidar;
    let origin = Point3::new(0.0, 0.0, l.sensor_height);
    let plane = spec.road.plane();
    let n_az = (360.0 / l.azimuth_resolution_deg).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let noise = (l.range_noise_sigma > 0.0)
        .then(|| rand_distr::Normal::new(0.0, l.range_noise_sigma).expect("sigma validated"));

    let mut points = Vec::new();
    let mut labels: Vec<i32> = Vec::new();
    for ch in 0..l.channels {
        let el = if l.channels == 1 {
            l.min_elevation_deg
        } else {
            l.min_elevation_deg
                + (l.max_elevation_deg - l.min_elevation_deg) * ch as f64
                    / (l.channels - 1) as f64
        }
        .to_radians();
        for k in 0..n_az {
            let az = (k as f64 * l.azimuth_resolution_deg).to_radians();
            // Draws happen for every ray so the stream does not depend on
            // the scene geometry.
            let dropped = rng.random::<f64>() < l.dropout_rate;
            let range_noise = noise.map_or(0.0, |n| rng.sample(n));
            let dir = Point3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin());

            let mut best: Option<(f64, i32)> = None;
            let denom = plane.normal.dot(dir);
            if denom.abs() > 1e-15 {
                let t = -(plane.normal.dot(origin) + plane.offset) / denom;
                if t > 1e-9 {
                    best = Some((t, i32::MIN)); // label resolved after polygon test
                }
            }
            for (obj, prim) in &prims {
                if let Some(t) = prim.ray_hit(origin, dir) {
                    if best.is_none_or(|(bt, _)| t < bt) {
                        best = Some((t, *obj as i32));
                    }
                }
            }
            if dropped {
                continue;
            }
            let Some((t, raw_label)) = best else { continue };
            let t = t + range_noise;
            if t <= 0.0 || t > l.max_range {
                continue;
            }
            let p = origin.add(dir.scale(t));
            let label = if raw_label == i32::MIN {
                if point_in_polygon(&spec.road.polygon, p.x, p.y) {
                    LABEL_ROAD
                } else {
                    LABEL_BACKGROUND
                }
            } else {
                raw_label
            };
            points.push(p);
            labels.push(label);
        }
    }

    // ── camera pass: road mask + per-object pixel areas ──
    let mut mask = RoadMask::new_filled(camera.width, camera.height, false);
    let mut pixel_area = alloc::vec![0usize; objects.len()];
    for v in 0..camera.height {
        for u in 0..camera.width {
            let (o, d) = camera.pixel_ray(u as f64, v as f64);
            let mut t_plane = f64::INFINITY;
            let denom = plane.normal.dot(d);
            if denom.abs() > 1e-15 {
                let t = -(plane.normal.dot(o) + plane.offset) / denom;
                if t > 1e-9 {
                    t_plane = t;
                }
            }
            let mut t_obj = f64::INFINITY;
            let mut obj_idx = usize::MAX;
            for (obj, prim) in &prims {
                if let Some(t) = prim.ray_hit(o, d) {
                    if t < t_obj {
                        t_obj = t;
                        obj_idx = *obj;
                    }
                }
            }
            if t_obj < t_plane {
                pixel_area[obj_idx] += 1;
            } else if t_plane.is_finite() {
                let hit = o.add(d.scale(t_plane));
                if point_in_polygon(&spec.road.polygon, hit.x, hit.y) {
                    mask.set(u, v, true);
                }
            }
        }
    }

    // ── ground-truth stats ──
    let mut lidar_points = alloc::vec![0usize; objects.len()];
    let mut on_road_points = alloc::vec![0usize; objects.len()];
    let (band_lo, band_hi) = DEFAULT_HEIGHT_BAND;
    for (p, &label) in points.iter().zip(labels.iter()) {
        if label >= 0 {
            let obj = label as usize;
            lidar_points[obj] += 1;
            let h = plane.signed_distance(*p);
            if h >= band_lo && h <= band_hi && point_in_polygon(&spec.road.polygon, p.x, p.y) {
                on_road_points[obj] += 1;
            }
        }
    }

    let objects: Vec<GtObject> = objects
        .into_iter()
        .enumerate()
        .map(|(i, (kind, bbox))| GtObject {
            kind,
            bbox,
            stats: GtObjectStats {
                lidar_points: lidar_points[i],
                on_road_points: on_road_points[i],
                pixel_area: pixel_area[i],
            },
        })
        .collect();

    Ok(SceneOutput {
        cloud: PointCloud::new(points),
        mask,
        camera,
        truth: GroundTruth {
            scene_id: spec.name.clone(),
            scenario_tag: spec.scenario_tag.clone(),
            road_polygon: spec.road.polygon.clone(),
            plane,
            objects,
            point_labels: labels,
        },
    })
}

// ── scenario suite ─────────────────────────────────────────────────────

fn car(x: f64, y: f64, yaw: f64) -> KnownObject {
    KnownObject {
        shape: ObjectShape::Cuboid {
            dims: [4.5, 1.9, 1.5],
        },
        position: Point3::new(x, y, 0.0),
        yaw,
        class_label: "car".into(),
    }
}

fn boxy_anomaly(dims: [f64; 3], x: f64, y: f64) -> AnomalyObject {
    AnomalyObject {
        shape: ObjectShape::Cuboid { dims },
        position: Point3::new(x, y, 0.0),
        yaw: 0.0,
    }
}

/// The eight qualitative scenario classes, reproduced as synthetic scenes.
///
/// (a) only known objects; (b) known objects plus an on-road anomaly;
/// (c) an off-road anomaly near the road edge; (d) a lidar-visible anomaly
/// too small in the image for a 2D box; (e) an overhanging canopy above the
/// height band; (f) a row of small obstacles that merges into one cluster;
/// (g) a tall off-road object adjacent to the road; (h) a large box with
/// car-like proportions.
pub fn scenario_suite() -> Vec<SceneSpec> {
    let base = SceneSpec::default();
    let scene = |name: &str, tag: char, seed: u64| SceneSpec {
        name: name.into(),
        scenario_tag: Some(tag.to_string()),
        rng_seed: seed,
        ..base.clone()
    };

    let mut suite = Vec::new();

    let mut a = scene("a_all_known", 'a', 1001);
    a.known_objects = alloc::vec![car(18.0, -2.0, 0.35), car(25.0, 3.0, -0.25)];
    suite.push(a);

    let mut b = scene("b_road_anomaly", 'b', 1002);
    b.known_objects = alloc::vec![car(18.0, -2.5, 0.35), car(30.0, 3.0, -0.3)];
    b.anomalies = alloc::vec![boxy_anomaly([1.8, 1.2, 1.4], 12.0, 0.5)];
    suite.push(b);

    let mut c = scene("c_offroad_anomaly", 'c', 1003);
    c.known_objects = alloc::vec![car(20.0, -2.0, 0.3)];
    c.anomalies = alloc::vec![boxy_anomaly([0.8, 0.8, 1.6], 15.0, 9.5)];
    suite.push(c);

    let mut d = scene("d_camera_invisible", 'd', 1004);
    d.known_objects = alloc::vec![car(16.0, -3.0, 0.35)];
    d.anomalies = alloc::vec![boxy_anomaly([1.0, 1.0, 1.2], 24.0, 1.0)];
    suite.push(d);

    let mut e = scene("e_overhang", 'e', 1005);
    e.known_objects = alloc::vec![car(20.0, -2.0, 0.3)];
    e.anomalies = alloc::vec![AnomalyObject {
        shape: ObjectShape::Cuboid {
            dims: [4.0, 6.0, 1.0],
        },
        position: Point3::new(28.0, 0.0, 4.5),
        yaw: 0.0,
    }];
    suite.push(e);

    let mut f = scene("f_under_clustering", 'f', 1006);
    f.known_objects = alloc::vec![car(28.0, -3.0, 0.3)];
    f.anomalies = alloc::vec![AnomalyObject {
        shape: ObjectShape::Composite(
            (0..5)
                .map(|i| PrimitivePlacement {
                    offset: Point3::new(0.0, (i as f64 - 2.0) * 0.8, 0.0),
                    primitive: Primitive::Cylinder {
                        radius: 0.15,
                        height: 0.7,
                    },
                })
                .collect(),
        ),
        position: Point3::new(15.0, 0.0, 0.0),
        yaw: 0.0,
    }];
    suite.push(f);

    let mut g = scene("g_offroad_adjacent", 'g', 1007);
    g.known_objects = alloc::vec![car(25.0, 2.0, -0.3)];
    g.anomalies = alloc::vec![AnomalyObject {
        shape: ObjectShape::Cylinder {
            radius: 0.2,
            height: 4.0,
        },
        position: Point3::new(18.0, 8.5, 0.0),
        yaw: 0.0,
    }];
    suite.push(g);

    let mut h = scene("h_carlike_anomaly", 'h', 1008);
    h.known_objects = alloc::vec![car(30.0, -3.0, 0.3)];
    h.anomalies = alloc::vec![AnomalyObject {
        shape: ObjectShape::Cuboid {
            dims: [4.2, 1.8, 1.5],
        },
        position: Point3::new(22.0, 0.0, 0.0),
        // Seen at an angle so the cluster hull spans the true extent.
        yaw: 0.5,
    }];
    suite.push(h);

    suite
}

/// Deterministic parameter-sweep scenes for degradation studies: two or
/// three yawed cars in the outer lanes, an anomaly in the center lane on
/// every other scene. All objects sit close enough that their clusters stay
/// classifiable in the image.
pub fn variation_suite(count: usize) -> Vec<SceneSpec> {
    (0..count)
        .map(|i| {
            let mut spec = SceneSpec {
                name: alloc::format!("v{i:02}"),
                scenario_tag: Some("variation".into()),
                rng_seed: 2000 + i as u64,
                ..SceneSpec::default()
            };
            let sway = (i % 6) as f64 * 2.5;
            spec.known_objects = alloc::vec![
                car(12.0 + sway, -3.5, 0.35),
                car(17.0 + ((i * 3) % 8) as f64 * 1.5, 3.5, -0.3),
            ];
            if i % 3 == 0 {
                spec.known_objects.push(car(26.0 + (i % 4) as f64, -3.5, 0.3));
            }
            if i % 2 == 0 {
                // Yawed so the cluster hull spans the true footprint.
                spec.anomalies = alloc::vec![AnomalyObject {
                    shape: ObjectShape::Cuboid {
                        dims: [1.5 + (i % 3) as f64 * 0.2, 1.2, 1.3],
                    },
                    position: Point3::new(11.0 + (i % 5) as f64 * 3.0, 0.0, 0.0),
                    yaw: 0.45,
                }];
            }
            spec
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn road_only_scene_labels() {
        let spec = SceneSpec {
            name: "road_only".into(),
            ..Default::default()
        };
        let out = generate(&spec).unwrap();
        assert!(!out.cloud.is_empty());
        assert_eq!(out.cloud.len(), out.truth.point_labels.len());
        assert!(out
            .truth
            .point_labels
            .iter()
            .all(|&l| l == LABEL_ROAD || l == LABEL_BACKGROUND));
        assert!(out.truth.objects.is_empty());
        assert!(out.mask.count_road() > 0);
    }

    #[test]
    fn deterministic_per_seed() {
        let mut spec = SceneSpec::default();
        spec.known_objects.push(car(15.0, 0.0, 0.3));
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.cloud.points, b.cloud.points);
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.mask, b.mask);
        spec.rng_seed += 1;
        let c = generate(&spec).unwrap();
        // Different dropout pattern.
        assert_ne!(a.cloud.points, c.cloud.points);
    }

    #[test]
    fn object_below_plane_rejected() {
        let mut spec = SceneSpec::default();
        spec.anomalies.push(AnomalyObject {
            shape: ObjectShape::Cuboid {
                dims: [1.0, 1.0, 1.0],
            },
            position: Point3::new(10.0, 0.0, -0.5),
            yaw: 0.0,
        });
        assert!(matches!(generate(&spec), Err(SynthError::InvalidPose(_))));
    }

    #[test]
    fn suite_has_eight_tagged_scenarios() {
        let suite = scenario_suite();
        assert_eq!(suite.len(), 8);
        let tags: Vec<String> = suite
            .iter()
            .map(|s| s.scenario_tag.clone().unwrap())
            .collect();
        assert_eq!(tags, ["a", "b", "c", "d", "e", "f", "g", "h"]);
    }

    #[test]
    fn chain_spacing_in_scenario_f() {
        let suite = scenario_suite();
        let f = &suite[5];
        let ObjectShape::Composite(parts) = &f.anomalies[0].shape else {
            panic!("scenario f must be a composite row");
        };
        for w in parts.windows(2) {
            let gap = w[1].offset.sub(w[0].offset).norm();
            assert!(gap <= 1.0, "adjacent parts must merge under epsilon=1");
        }
    }

    #[test]
    fn polygon_membership() {
        let poly = RoadSpec::default().polygon;
        assert!(point_in_polygon(&poly, 30.0, 0.0));
        assert!(!point_in_polygon(&poly, 30.0, 8.0));
        assert!(!point_in_polygon(&poly, 1.0, 0.0));
    }
}
