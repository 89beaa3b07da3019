//! Cartesian and spherical geometry.
//!
//! Angles use geographic coordinates: azimuth is measured counterclockwise
//! from the +x axis, elevation upwards from the horizontal plane.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

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

    /// Unit vector in the same direction. Fails for the zero vector.
    pub fn normalized(self) -> Result<Vec3> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cannot normalize vector {self:?}"
            )));
        }
        Ok(self * (1.0 / n))
    }

    /// Rotation about the z axis by `angle` radians.
    pub fn rotate_z(self, angle: f64) -> Vec3 {
        let (s, c) = angle.sin_cos();
        Vec3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
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

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// Direction in geographic spherical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalAngle {
    azimuth: f64,
    elevation: f64,
}

impl SphericalAngle {
    /// Azimuth is wrapped into (−π, π]; elevation outside [−π/2, π/2] is
    /// rejected.
    pub fn new(azimuth: f64, elevation: f64) -> Result<Self> {
        if !azimuth.is_finite() || !elevation.is_finite() {
            return Err(Error::InvalidAngle(format!(
                "non-finite angle ({azimuth}, {elevation})"
            )));
        }
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&elevation) {
            return Err(Error::InvalidAngle(format!(
                "elevation {elevation} outside [-pi/2, pi/2]"
            )));
        }
        Ok(SphericalAngle {
            azimuth: wrap_angle(azimuth),
            elevation,
        })
    }

    /// Like [`SphericalAngle::new`] but clamps elevation into range.
    pub fn clamped(azimuth: f64, elevation: f64) -> Self {
        SphericalAngle {
            azimuth: wrap_angle(azimuth),
            elevation: elevation.clamp(-FRAC_PI_2, FRAC_PI_2),
        }
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn elevation(&self) -> f64 {
        self.elevation
    }

    /// Unit vector pointing towards this direction.
    pub fn unit_vector(&self) -> Vec3 {
        let (sa, ca) = self.azimuth.sin_cos();
        let (se, ce) = self.elevation.sin_cos();
        Vec3::new(ce * ca, ce * sa, se)
    }
}

/// Direction of `to` as seen from `from`.
pub fn bearing(from: Vec3, to: Vec3) -> Result<SphericalAngle> {
    let d = to - from;
    let horizontal = d.x.hypot(d.y);
    if horizontal == 0.0 && d.z == 0.0 {
        return Err(Error::DegenerateBearing);
    }
    Ok(SphericalAngle {
        azimuth: wrap_angle(d.y.atan2(d.x)),
        elevation: d.z.atan2(horizontal),
    })
}

/// Local spherical unit vectors `(e_theta, e_phi, e_r)`.
///
/// `e_theta` points towards increasing elevation, so
/// `e_theta × e_phi = −e_r`.
pub fn spherical_basis(angle: SphericalAngle) -> (Vec3, Vec3, Vec3) {
    let (sa, ca) = angle.azimuth.sin_cos();
    let (se, ce) = angle.elevation.sin_cos();
    let e_r = Vec3::new(ce * ca, ce * sa, se);
    let e_phi = Vec3::new(-sa, ca, 0.0);
    let e_theta = Vec3::new(-se * ca, -se * sa, ce);
    (e_theta, e_phi, e_r)
}

/// Straight-line sampled trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Track {
    start: Vec3,
    direction: Vec3,
    step: f64,
    count: usize,
}

impl Track {
    pub fn new(start: Vec3, direction: Vec3, step: f64, count: usize) -> Result<Self> {
        if !start.is_finite() {
            return Err(Error::InvalidParameter("track start is not finite".into()));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "track step must be positive, got {step}"
            )));
        }
        if count == 0 {
            return Err(Error::InvalidParameter(
                "track count must be positive".into(),
            ));
        }
        Ok(Track {
            start,
            direction: direction.normalized()?,
            step,
            count,
        })
    }

    pub fn start(&self) -> Vec3 {
        self.start
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn position(&self, i: usize) -> Vec3 {
        self.start + self.direction * (i as f64 * self.step)
    }

    pub fn positions(&self) -> Vec<Vec3> {
        (0..self.count).map(|i| self.position(i)).collect()
    }
}
