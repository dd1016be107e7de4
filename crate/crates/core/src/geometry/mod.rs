//! Ground plane, image-to-BEV homography and its horizon linearization.
//!
//! BEV convention: `x` to the camera's right, `y` away from the camera, origin
//! at the camera's ground foot. With egomotion the coordinates become
//! world-fixed by adding the cumulative camera translation.

mod calibrate;
mod egomotion;
mod homography;
mod linearize;
mod plane;

use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub use calibrate::{calibrate, ray_plane_hit, Calibration, Intrinsics};
pub use egomotion::{estimate_egomotion, estimate_egomotion_with, EgomotionEstimator, EgomotionTrack};
pub use homography::{estimate_homography, Homography, HomographyFit};
pub use linearize::{bev_to_px, linearize, px_to_bev, ColumnThreshold, LinearizedHomography, Linearization};
pub use plane::{align_to_xy, fit_ground_plane, GroundFrame, GroundPlane};

/// A 3D point in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub(crate) fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub(crate) fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Self::from_array(a)
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        p.to_array()
    }
}

/// Image position in pixels: `u` to the right, `v` down, origin top-left.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct PixelPoint {
    pub u: f64,
    pub v: f64,
}

impl PixelPoint {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }
}

impl From<[f64; 2]> for PixelPoint {
    fn from(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

impl From<PixelPoint> for [f64; 2] {
    fn from(p: PixelPoint) -> Self {
        [p.u, p.v]
    }
}

/// Ground-plane position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct BevPoint {
    pub x: f64,
    pub y: f64,
}

impl BevPoint {
    pub const ZERO: BevPoint = BevPoint { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: BevPoint) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn distance(self, other: BevPoint) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise rotation by `radians`.
    pub fn rotated(self, radians: f64) -> BevPoint {
        let (s, c) = (libm::sin(radians), libm::cos(radians));
        BevPoint::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl From<[f64; 2]> for BevPoint {
    fn from(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

impl From<BevPoint> for [f64; 2] {
    fn from(p: BevPoint) -> Self {
        [p.x, p.y]
    }
}

impl Add for BevPoint {
    type Output = BevPoint;
    fn add(self, o: BevPoint) -> BevPoint {
        BevPoint::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for BevPoint {
    fn add_assign(&mut self, o: BevPoint) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for BevPoint {
    type Output = BevPoint;
    fn sub(self, o: BevPoint) -> BevPoint {
        BevPoint::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for BevPoint {
    type Output = BevPoint;
    fn neg(self) -> BevPoint {
        BevPoint::new(-self.x, -self.y)
    }
}

impl Mul<f64> for BevPoint {
    type Output = BevPoint;
    fn mul(self, s: f64) -> BevPoint {
        BevPoint::new(self.x * s, self.y * s)
    }
}
