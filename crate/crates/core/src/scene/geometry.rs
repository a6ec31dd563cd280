//! Vectors, Euler orientations and rigid poses in the world frame.
//!
//! The world frame is right-handed with +Z up. Orientation angles are in
//! degrees and compose intrinsically yaw (about Z), then pitch (about the new
//! Y), then roll (about the newest X), i.e. `R = Rz(yaw) * Ry(pitch) * Rx(roll)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point or displacement in meters. Serialized as `[x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Distance from the Z axis.
    pub fn xy_norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Linear interpolation; `t == 0` returns `self` and `t == 1` returns
    /// `other` exactly.
    pub fn lerp(self, other: Vec3, t: f64) -> Vec3 {
        if t >= 1.0 {
            return other;
        }
        Vec3::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
            self.z + (other.z - self.z) * t,
        )
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(v: [f64; 3]) -> Self {
        Vec3::new(v[0], v[1], v[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Rotation axis addressed by `set_yaw` / `set_pitch` / `set_roll`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Yaw,
    Pitch,
    Roll,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Yaw => "yaw",
            Axis::Pitch => "pitch",
            Axis::Roll => "roll",
        }
    }
}

/// Euler angles in degrees. Values are stored as given (not wrapped).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Orientation {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl Orientation {
    pub const ZERO: Orientation = Orientation::new(0.0, 0.0, 0.0);

    pub const fn new(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self { yaw, pitch, roll }
    }

    pub fn is_finite(&self) -> bool {
        self.yaw.is_finite() && self.pitch.is_finite() && self.roll.is_finite()
    }

    pub fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Yaw => self.yaw,
            Axis::Pitch => self.pitch,
            Axis::Roll => self.roll,
        }
    }

    pub fn set(&mut self, axis: Axis, degrees: f64) {
        match axis {
            Axis::Yaw => self.yaw = degrees,
            Axis::Pitch => self.pitch = degrees,
            Axis::Roll => self.roll = degrees,
        }
    }

    /// Angle-wise equality modulo 360 degrees within `tol`.
    pub fn equivalent(&self, other: &Orientation, tol: f64) -> bool {
        [Axis::Yaw, Axis::Pitch, Axis::Roll]
            .into_iter()
            .all(|a| shortest_arc(self.get(a), other.get(a)).abs() <= tol)
    }

    /// Rotation matrix `Rz(yaw) * Ry(pitch) * Rx(roll)`.
    pub fn rotation(&self) -> Mat3 {
        let (sy, cy) = self.yaw.to_radians().sin_cos();
        let (sp, cp) = self.pitch.to_radians().sin_cos();
        let (sr, cr) = self.roll.to_radians().sin_cos();
        let rz = Mat3([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]]);
        let ry = Mat3([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]]);
        let rx = Mat3([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]]);
        rz.mul_mat(&ry).mul_mat(&rx)
    }

    /// Body +X axis expressed in the world frame.
    pub fn heading(&self) -> Vec3 {
        self.rotation().column(0)
    }
}

impl From<[f64; 3]> for Orientation {
    fn from(v: [f64; 3]) -> Self {
        Orientation::new(v[0], v[1], v[2])
    }
}

impl From<Orientation> for [f64; 3] {
    fn from(o: Orientation) -> Self {
        [o.yaw, o.pitch, o.roll]
    }
}

/// Signed difference `to - from` wrapped into `(-180, 180]`.
///
/// An exact half turn resolves to `+180`.
pub fn shortest_arc(from: f64, to: f64) -> f64 {
    let delta = (to - from).rem_euclid(360.0);
    if delta > 180.0 {
        delta - 360.0
    } else {
        delta
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub fn mul_mat(&self, rhs: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Mat3(out)
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn column(&self, j: usize) -> Vec3 {
        Vec3::new(self.0[0][j], self.0[1][j], self.0[2][j])
    }
}

/// Position plus orientation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: Orientation,
}

impl Pose {
    pub fn new(position: Vec3, orientation: Orientation) -> Self {
        Self {
            position,
            orientation,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite() && self.orientation.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_arc_wraps_and_breaks_ties_positive() {
        assert_eq!(shortest_arc(350.0, 10.0), 20.0);
        assert_eq!(shortest_arc(10.0, 350.0), -20.0);
        assert_eq!(shortest_arc(0.0, 180.0), 180.0);
        assert_eq!(shortest_arc(180.0, 0.0), 180.0);
        assert_eq!(shortest_arc(0.0, 720.0), 0.0);
    }

    #[test]
    fn heading_follows_yaw_counterclockwise() {
        let h = Orientation::new(90.0, 0.0, 0.0).heading();
        assert!((h - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        let full = Orientation::new(360.0, 0.0, 0.0).heading();
        assert!((full - Orientation::ZERO.heading()).norm() < 1e-12);
    }

    #[test]
    fn positive_pitch_tips_the_nose_down() {
        let h = Orientation::new(0.0, 90.0, 0.0).heading();
        assert!((h - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn lerp_endpoints_are_exact() {
        let a = Vec3::new(0.1, 0.2, 0.3);
        let b = Vec3::new(15.0, 25.0, 0.0);
        assert_eq!(a.lerp(b, 0.0), a);
        assert_eq!(a.lerp(b, 1.0), b);
    }
}
