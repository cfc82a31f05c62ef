//! Calibrated pinhole camera, road-mask lifting, and box projections.
//!
//! Conventions: the camera looks along +z of its own frame, +x right,
//! +y down. Integer pixel coordinates address pixel centers, so projecting
//! and rounding to the nearest integer lands on the pixel a ray through that
//! center would sample.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cluster::Cluster;
use crate::error::GeometryError;
use crate::float::use_float_ext;
use crate::pointcloud::{IndexSet, Point3, PointCloud};

use_float_ext!();

/// Pixel-space result of projecting a 3D point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelProjection {
    pub u: f64,
    pub v: f64,
    /// Camera-frame z, meters.
    pub depth: f64,
}

/// Intrinsics plus a rigid transform taking lidar-frame points into the
/// camera frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedCamera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Row-major rotation, lidar frame -> camera frame.
    pub rotation: [[f64; 3]; 3],
    pub translation: Point3,
    pub width: u32,
    pub height: u32,
}

impl CalibratedCamera {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        rotation: [[f64; 3]; 3],
        translation: Point3,
        width: u32,
        height: u32,
    ) -> Result<Self, GeometryError> {
        let cam = Self {
            fx,
            fy,
            cx,
            cy,
            rotation,
            translation,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(GeometryError::InvalidConfig("focal lengths must be > 0"));
        }
        if self.width < 1 || self.height < 1 {
            return Err(GeometryError::InvalidConfig("image dims must be >= 1"));
        }
        if !self.cx.is_finite() || !self.cy.is_finite() || !self.translation.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        // R^T R = I within 1e-9.
        let r = &self.rotation;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot - expect).abs() > 1e-9 {
                    return Err(GeometryError::InvalidConfig("rotation is not orthonormal"));
                }
            }
        }
        Ok(())
    }

    fn to_camera_frame(&self, p: Point3) -> Point3 {
        let r = &self.rotation;
        Point3::new(
            r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z + self.translation.x,
            r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z + self.translation.y,
            r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z + self.translation.z,
        )
    }

    fn rotate_back(&self, c: Point3) -> Point3 {
        let r = &self.rotation;
        Point3::new(
            r[0][0] * c.x + r[1][0] * c.y + r[2][0] * c.z,
            r[0][1] * c.x + r[1][1] * c.y + r[2][1] * c.z,
            r[0][2] * c.x + r[1][2] * c.y + r[2][2] * c.z,
        )
    }

    /// Pinhole projection. `None` for points at or behind the camera plane;
    /// coordinates outside the image bounds are returned as-is (callers
    /// clip).
    pub fn project(&self, p: Point3) -> Option<PixelProjection> {
        let c = self.to_camera_frame(p);
        if c.z <= 0.0 {
            return None;
        }
        Some(PixelProjection {
            u: self.fx * c.x / c.z + self.cx,
            v: self.fy * c.y / c.z + self.cy,
            depth: c.z,
        })
    }

    /// Inverse of [`CalibratedCamera::project`] for a known depth.
    pub fn back_project(&self, u: f64, v: f64, depth: f64) -> Point3 {
        let c = Point3::new(
            (u - self.cx) / self.fx * depth,
            (v - self.cy) / self.fy * depth,
            depth,
        );
        self.rotate_back(c.sub(self.translation))
    }

    /// Camera center in the lidar frame.
    pub fn center(&self) -> Point3 {
        self.rotate_back(self.translation.scale(-1.0))
    }

    /// World-space ray through pixel-center coordinates (u, v).
    pub fn pixel_ray(&self, u: f64, v: f64) -> (Point3, Point3) {
        let dir_cam = Point3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0);
        let dir = self.rotate_back(dir_cam);
        (self.center(), dir)
    }
}

/// Binary road mask aligned with a camera image (true = road).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoadMask {
    pub width: u32,
    pub height: u32,
    bits: Vec<bool>,
}

impl RoadMask {
    pub fn new_filled(width: u32, height: u32, value: bool) -> Self {
        Self {
            width,
            height,
            bits: alloc::vec![value; (width as usize) * (height as usize)],
        }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self, GeometryError> {
        if bits.len() != (width as usize) * (height as usize) {
            return Err(GeometryError::InvalidConfig(
                "mask bitmap length must equal width * height",
            ));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = value;
    }

    /// Bounds-checked lookup with signed pixel coordinates.
    pub fn is_road(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64
            && self.get(x as u32, y as u32)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_road(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Axis-aligned image rectangle, inclusive-exclusive, tied back to the
/// cluster it was projected from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box2D {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    /// Index of the source cluster in the scene's proposal list.
    pub source_cluster: usize,
}

impl Box2D {
    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    /// Overlap area with another box.
    pub fn intersection_area(&self, other: &Box2D) -> f64 {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }
}

/// 7-DoF lidar-space box: center, (length, width, height), yaw about +z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3D {
    pub center: Point3,
    /// (length, width, height) along the box frame x, y, z.
    pub dims: [f64; 3],
    pub yaw: f64,
}

impl Box3D {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.dims[0] > 0.0 && self.dims[1] > 0.0 && self.dims[2] > 0.0) {
            return Err(GeometryError::InvalidConfig("box dims must be > 0"));
        }
        if !(self.yaw > -core::f64::consts::PI - 1e-12 && self.yaw <= core::f64::consts::PI + 1e-12)
        {
            return Err(GeometryError::InvalidConfig("yaw must be in (-pi, pi]"));
        }
        if !self.center.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        Ok(())
    }

    /// The eight corners, yaw applied about the center.
    pub fn corners(&self) -> [Point3; 8] {
        let (hl, hw, hh) = (self.dims[0] / 2.0, self.dims[1] / 2.0, self.dims[2] / 2.0);
        let (s, c) = (self.yaw.sin(), self.yaw.cos());
        let mut out = [Point3::ZERO; 8];
        let mut k = 0;
        for &dx in &[-hl, hl] {
            for &dy in &[-hw, hw] {
                for &dz in &[-hh, hh] {
                    out[k] = Point3::new(
                        self.center.x + c * dx - s * dy,
                        self.center.y + s * dx + c * dy,
                        self.center.z + dz,
                    );
                    k += 1;
                }
            }
        }
        out
    }

    /// Boundary-inclusive membership test (with a 1e-9 m tolerance so that
    /// points computed to lie exactly on a face stay inside).
    pub fn contains_point(&self, p: Point3) -> bool {
        let d = p.sub(self.center);
        let (s, c) = (self.yaw.sin(), self.yaw.cos());
        let local_x = c * d.x + s * d.y;
        let local_y = -s * d.x + c * d.y;
        let tol = 1e-9;
        local_x.abs() <= self.dims[0] / 2.0 + tol
            && local_y.abs() <= self.dims[1] / 2.0 + tol
            && d.z.abs() <= self.dims[2] / 2.0 + tol
    }

    /// Axis-aligned hull as (min, max) corners.
    pub fn aabb(&self) -> (Point3, Point3) {
        let corners = self.corners();
        let mut min = corners[0];
        let mut max = corners[0];
        for c in &corners[1..] {
            min = Point3::new(min.x.min(c.x), min.y.min(c.y), min.z.min(c.z));
            max = Point3::new(max.x.max(c.x), max.y.max(c.y), max.z.max(c.z));
        }
        (min, max)
    }
}

/// Select the subset points whose projection lands on a road pixel.
///
/// A lidar point is a road point iff it projects (nearest-integer rounding)
/// onto an in-bounds pixel where the mask is true. Behind-camera and
/// out-of-image points are excluded.
pub fn lift_road_mask(
    cam: &CalibratedCamera,
    mask: &RoadMask,
    cloud: &PointCloud,
    subset: &IndexSet,
) -> IndexSet {
    subset
        .iter()
        .filter(|&i| {
            cam.project(cloud.points[i]).is_some_and(|p| {
                mask.is_road(p.u.round() as i64, p.v.round() as i64)
            })
        })
        .collect()
}

/// Project a 3D box to the image as the axis-aligned rectangle over its
/// visible corners.
///
/// Returns `None` when fewer than 2 corners have positive depth, when the
/// clip against the image bounds is empty, or when the clipped area falls
/// below `min_box_area` (px²).
pub fn box3d_to_box2d(
    cam: &CalibratedCamera,
    bbox: &Box3D,
    min_box_area: f64,
    source_cluster: usize,
) -> Option<Box2D> {
    let mut visible = 0;
    let (mut u_min, mut v_min) = (f64::MAX, f64::MAX);
    let (mut u_max, mut v_max) = (f64::MIN, f64::MIN);
    for corner in bbox.corners() {
        if let Some(p) = cam.project(corner) {
            visible += 1;
            u_min = u_min.min(p.u);
            v_min = v_min.min(p.v);
            u_max = u_max.max(p.u);
            v_max = v_max.max(p.v);
        }
    }
    if visible < 2 {
        return None;
    }
    let b = Box2D {
        x_min: u_min.max(0.0),
        y_min: v_min.max(0.0),
        x_max: u_max.min(cam.width as f64),
        y_max: v_max.min(cam.height as f64),
        source_cluster,
    };
    if b.x_min >= b.x_max || b.y_min >= b.y_max || b.area() < min_box_area {
        return None;
    }
    Some(b)
}

/// Tight axis-aligned box around the cluster members, padded 0.1 m per side.
pub fn cluster_to_box3d(cloud: &PointCloud, cluster: &Cluster) -> Result<Box3D, GeometryError> {
    const PADDING: f64 = 0.1;
    if cluster.members.is_empty() {
        return Err(GeometryError::EmptyCluster);
    }
    cluster.members.check_bounds(cloud.len())?;
    let mut min = cloud.points[cluster.members.as_slice()[0]];
    let mut max = min;
    for i in cluster.members.iter() {
        let p = cloud.points[i];
        min = Point3::new(min.x.min(p.x), min.y.min(p.y), min.z.min(p.z));
        max = Point3::new(max.x.max(p.x), max.y.max(p.y), max.z.max(p.z));
    }
    Ok(Box3D {
        center: min.add(max).scale(0.5),
        dims: [
            max.x - min.x + 2.0 * PADDING,
            max.y - min.y + 2.0 * PADDING,
            max.z - min.z + 2.0 * PADDING,
        ],
        yaw: 0.0,
    })
}
