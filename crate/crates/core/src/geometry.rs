//! Three-component vectors for positions and per-step motion inputs.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that an axis is unit length.
const UNIT_TOLERANCE: f64 = 1e-9;

/// A point or displacement in meters (or meters per step for motion inputs).
///
/// Serialized as a three-element JSON array `[x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const X: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Unit vector in the direction of `self`.
    pub fn unit(self) -> Result<Vec3> {
        ensure_finite(self)?;
        let n = self.norm();
        if n > 0.0 {
            Ok(self * (1.0 / n))
        } else {
            Err(Error::DegenerateDirection)
        }
    }

    /// Unit vector, or zero when `self` has zero length.
    pub fn unit_or_zero(self) -> Vec3 {
        self.unit().unwrap_or(Vec3::ZERO)
    }

    /// Cosine of the angle between two vectors; `None` if either is zero.
    pub fn cos_angle(self, other: Vec3) -> Option<f64> {
        let denom = self.norm() * other.norm();
        if denom > 0.0 {
            Some((self.dot(other) / denom).clamp(-1.0, 1.0))
        } else {
            None
        }
    }

    /// Rescale to at most `max_norm`, keeping direction.
    pub fn clamp_norm(self, max_norm: f64) -> Vec3 {
        let n = self.norm();
        if n > max_norm && n > 0.0 {
            self * (max_norm / n)
        } else {
            self
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

pub(crate) fn ensure_finite(v: Vec3) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("vector component"))
    }
}

/// Rotate `v` by `angle` radians about the unit vector `axis` (Rodrigues' formula).
pub fn rotate_about_axis(v: Vec3, axis: Vec3, angle: f64) -> Result<Vec3> {
    ensure_finite(v)?;
    ensure_finite(axis)?;
    if !angle.is_finite() {
        return Err(Error::NonFinite("rotation angle"));
    }
    if (axis.norm() - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnitAxis(axis.norm()));
    }
    let (s, c) = angle.sin_cos();
    Ok(v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c)))
}

/// Some unit vector orthogonal to `v` (which must be nonzero).
pub fn any_orthogonal(v: Vec3) -> Result<Vec3> {
    let u = v.unit()?;
    // cross with the least-aligned frame axis
    let pick = if u.x.abs() <= u.y.abs() && u.x.abs() <= u.z.abs() {
        Vec3::X
    } else if u.y.abs() <= u.z.abs() {
        Vec3::Y
    } else {
        Vec3::Z
    };
    u.cross(pick).unit()
}
