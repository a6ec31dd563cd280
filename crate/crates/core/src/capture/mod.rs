//! The forward camera: pinhole projection of object centroids, capture
//! records, and top-down raster snapshots.
//!
//! Camera frame: forward is the agent's +X after yaw, pitch and roll; image
//! `u` grows to the camera's right (world -Y at zero yaw) and `v` grows
//! downward (world -Z at zero roll).

mod snapshot;

use serde::{Deserialize, Serialize};

use crate::scene::{ObjectKind, Pose, Scene, Vec3, WaterProperties};

pub use snapshot::{encode_ppm, kind_color, render_topdown, SnapshotError, SnapshotSettings};

/// Points closer than this along the optical axis are not projected.
pub const NEAR_PLANE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraIntrinsics {
    pub horizontal_fov: f64,
    pub width: u32,
    pub height: u32,
    /// Camera position in the agent's body frame.
    pub mount: Vec3,
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        Self {
            horizontal_fov: 90.0,
            width: 640,
            height: 480,
            mount: Vec3::new(0.2, 0.0, 0.0),
        }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let fov = self.horizontal_fov;
        if !(fov > 0.0 && fov < 180.0) {
            return Err((
                "horizontal_fov",
                format!("must be strictly between 0 and 180, got {fov}"),
            ));
        }
        if self.width == 0 {
            return Err(("width", "must be at least 1".into()));
        }
        if self.height == 0 {
            return Err(("height", "must be at least 1".into()));
        }
        if !self.mount.is_finite() {
            return Err(("mount", "must be finite".into()));
        }
        Ok(())
    }

    /// Focal length in pixels.
    pub fn focal_length(&self) -> f64 {
        (f64::from(self.width) / 2.0) / (self.horizontal_fov.to_radians() / 2.0).tan()
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (f64::from(self.width) / 2.0, f64::from(self.height) / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
}

/// World pose of the camera for an agent at `agent`.
pub fn camera_pose(agent: &Pose, intrinsics: &CameraIntrinsics) -> Pose {
    let r = agent.orientation.rotation();
    Pose::new(
        agent.position + r.mul_vec(intrinsics.mount),
        agent.orientation,
    )
}

/// Projects `p` into the image of a camera at `camera`. `None` when the point
/// is within the near plane, behind the camera or outside the image.
pub fn project(p: Vec3, camera: &Pose, intrinsics: &CameraIntrinsics) -> Option<Projection> {
    let r = camera.orientation.rotation();
    let d = p - camera.position;
    let depth = d.dot(r.column(0));
    if depth.is_nan() || depth <= NEAR_PLANE {
        return None;
    }
    let f = intrinsics.focal_length();
    let (cx, cy) = intrinsics.principal_point();
    let u = cx - f * d.dot(r.column(1)) / depth;
    let v = cy - f * d.dot(r.column(2)) / depth;
    let inside = (0.0..=f64::from(intrinsics.width)).contains(&u)
        && (0.0..=f64::from(intrinsics.height)).contains(&v);
    inside.then_some(Projection { u, v, depth })
}

/// Inverse of [`project`] for a known depth.
pub fn unproject(proj: &Projection, camera: &Pose, intrinsics: &CameraIntrinsics) -> Vec3 {
    let r = camera.orientation.rotation();
    let f = intrinsics.focal_length();
    let (cx, cy) = intrinsics.principal_point();
    let left = (cx - proj.u) * proj.depth / f;
    let up = (cy - proj.v) * proj.depth / f;
    camera.position + r.column(0) * proj.depth + r.column(1) * left + r.column(2) * up
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureEntry {
    pub id: u64,
    pub kind: ObjectKind,
    pub u: f64,
    pub v: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureRecord {
    pub frame: u64,
    pub camera: Pose,
    /// Visible objects, nearest first.
    pub entries: Vec<CaptureEntry>,
    pub water: WaterProperties,
}

/// Projects every object centroid from the agent's camera. Visibility is
/// centroid-based; nothing occludes anything.
pub fn capture(scene: &Scene, frame: u64, intrinsics: &CameraIntrinsics) -> CaptureRecord {
    let camera = camera_pose(scene.agent(), intrinsics);
    let mut entries: Vec<_> = scene
        .objects()
        .filter_map(|o| {
            project(o.pose.position, &camera, intrinsics).map(|p| CaptureEntry {
                id: o.id,
                kind: o.kind,
                u: p.u,
                v: p.v,
                depth: p.depth,
            })
        })
        .collect();
    entries.sort_by(|a, b| a.depth.total_cmp(&b.depth).then(a.id.cmp(&b.id)));
    CaptureRecord {
        frame,
        camera,
        entries,
        water: *scene.water(),
    }
}
