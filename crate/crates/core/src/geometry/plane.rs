use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BevPoint, Point3};
use crate::linalg::{self, Mat3};
use crate::{Error, Result};

/// Plane `normal · p = offset` with a unit normal whose z-component is positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundPlane {
    pub normal: [f64; 3],
    pub offset: f64,
}

impl GroundPlane {
    /// Builds a plane from any non-zero normal, normalizing and orienting it.
    pub fn new(normal: [f64; 3], offset: f64) -> Result<Self> {
        let n = linalg::norm3(normal);
        if !(n > 0.0) || !n.is_finite() || !offset.is_finite() {
            return Err(Error::DegenerateInput("plane normal must be finite and non-zero"));
        }
        let mut unit = [normal[0] / n, normal[1] / n, normal[2] / n];
        let mut offset = offset / n;
        if orientation_sign(unit) < 0.0 {
            unit = [-unit[0], -unit[1], -unit[2]];
            offset = -offset;
        }
        Ok(Self { normal: unit, offset })
    }

    /// Signed distance of `p` from the plane.
    pub fn signed_distance(&self, p: Point3) -> f64 {
        linalg::dot3(self.normal, p.to_array()) - self.offset
    }

    /// Angle between two plane normals in radians.
    pub fn angle_to(&self, other: &GroundPlane) -> f64 {
        let c = linalg::dot3(self.normal, other.normal).clamp(-1.0, 1.0);
        let s = linalg::norm3(linalg::cross3(self.normal, other.normal));
        libm::atan2(s, c)
    }
}

// Positive z wins; a horizontal normal falls back to the first non-zero axis.
fn orientation_sign(n: [f64; 3]) -> f64 {
    if n[2] != 0.0 {
        n[2].signum()
    } else if n[1] != 0.0 {
        n[1].signum()
    } else {
        n[0].signum()
    }
}

/// Robust plane fit: seeded RANSAC over point triples, then total least
/// squares over the consensus set, repeated until the inlier set settles.
pub fn fit_ground_plane(points: &[Point3], inlier_tol: f64, max_iterations: usize, seed: u64) -> Result<GroundPlane> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput("plane fit needs at least 3 points"));
    }
    if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite())) {
        return Err(Error::DegenerateInput("non-finite point"));
    }
    if is_collinear(points) {
        return Err(Error::DegenerateInput("points are collinear"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, GroundPlane)> = None;
    for _ in 0..max_iterations.max(1) {
        let i = rng.random_range(0..points.len());
        let j = rng.random_range(0..points.len());
        let k = rng.random_range(0..points.len());
        if i == j || j == k || i == k {
            continue;
        }
        let (a, b, c) = (points[i].to_array(), points[j].to_array(), points[k].to_array());
        let n = linalg::cross3(sub3(b, a), sub3(c, a));
        let Ok(plane) = GroundPlane::new(n, linalg::dot3(n, a)) else {
            continue;
        };
        let count = points.iter().filter(|p| plane.signed_distance(**p).abs() <= inlier_tol).count();
        if best.is_none_or(|(c, _)| count > c) {
            best = Some((count, plane));
        }
    }

    // Every sampled triple may have been degenerate; fall back to all points.
    let mut plane = match best {
        Some((count, plane)) if count >= 3 => plane,
        _ => total_least_squares(points)?,
    };
    let mut inliers: Vec<usize> = Vec::new();
    for _ in 0..8 {
        let next: Vec<usize> =
            (0..points.len()).filter(|&i| plane.signed_distance(points[i]).abs() <= inlier_tol).collect();
        if next.len() < 3 || next == inliers {
            break;
        }
        let subset: Vec<Point3> = next.iter().map(|&i| points[i]).collect();
        if is_collinear(&subset) {
            break;
        }
        plane = total_least_squares(&subset)?;
        inliers = next;
    }
    Ok(plane)
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn centroid(points: &[Point3]) -> [f64; 3] {
    let n = points.len() as f64;
    let mut c = [0.0; 3];
    for p in points {
        c[0] += p.x;
        c[1] += p.y;
        c[2] += p.z;
    }
    [c[0] / n, c[1] / n, c[2] / n]
}

fn centered_svd(points: &[Point3]) -> ([f64; 3], crate::linalg::Svd) {
    let c = centroid(points);
    let data: Vec<f64> = points.iter().flat_map(|p| [p.x - c[0], p.y - c[1], p.z - c[2]]).collect();
    (c, linalg::svd(&data, points.len(), 3))
}

fn is_collinear(points: &[Point3]) -> bool {
    let (_, s) = centered_svd(points);
    s.values[1] <= 1e-9 * s.values[0].max(1.0)
}

fn total_least_squares(points: &[Point3]) -> Result<GroundPlane> {
    let (c, s) = centered_svd(points);
    let v = &s.vectors[2];
    let n = [v[0], v[1], v[2]];
    GroundPlane::new(n, linalg::dot3(n, c))
}

/// Rotation taking the plane normal onto `+z`, applied to `points`.
///
/// The rotation is the minimal one (about `normal × z`); after it every point
/// of the plane has `z = offset`, and BEV coordinates follow by dropping `z`.
pub fn align_to_xy(plane: &GroundPlane, points: &[Point3]) -> (Mat3, Vec<Point3>) {
    let rotation = rotation_to_z(plane.normal);
    let aligned = points.iter().map(|p| Point3::from_array(linalg::mat_vec(&rotation, p.to_array()))).collect();
    (rotation, aligned)
}

fn rotation_to_z(n: [f64; 3]) -> Mat3 {
    let z = [0.0, 0.0, 1.0];
    let axis = linalg::cross3(n, z);
    let s2 = linalg::dot3(axis, axis);
    let c = linalg::dot3(n, z);
    if s2 <= 1e-30 {
        return linalg::IDENTITY;
    }
    // Rodrigues: R = I + [a]x + [a]x^2 (1 - c) / s^2
    let k = [[0.0, -axis[2], axis[1]], [axis[2], 0.0, -axis[0]], [-axis[1], axis[0], 0.0]];
    let k2 = linalg::mat_mul(&k, &k);
    let f = (1.0 - c) / s2;
    let mut r = linalg::IDENTITY;
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] += k[i][j] + k2[i][j] * f;
        }
    }
    r
}

/// Metric ground frame attached to a fitted plane in camera coordinates.
///
/// Camera coordinates are `x` right, `y` down, `z` forward. The frame's origin
/// is the camera's foot on the plane, its `y` axis the camera's forward
/// direction projected onto the plane and its `x` axis the camera's right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundFrame {
    pub plane: GroundPlane,
    pub rotation: Mat3,
    origin: [f64; 2],
    x_axis: [f64; 2],
    y_axis: [f64; 2],
}

impl GroundFrame {
    pub fn from_camera_plane(plane: GroundPlane) -> Result<Self> {
        let rotation = rotation_to_z(plane.normal);
        let n = plane.normal;
        let project = |d: [f64; 3]| {
            let k = linalg::dot3(d, n);
            [d[0] - k * n[0], d[1] - k * n[1], d[2] - k * n[2]]
        };
        let forward = project([0.0, 0.0, 1.0]);
        let fwd_norm = linalg::norm3(forward);
        if fwd_norm < 1e-9 {
            return Err(Error::DegenerateInput("camera looks straight along the plane normal"));
        }
        let forward = forward.map(|x| x / fwd_norm);
        let right = project([1.0, 0.0, 0.0]);
        let k = linalg::dot3(right, forward);
        let right = [right[0] - k * forward[0], right[1] - k * forward[1], right[2] - k * forward[2]];
        let right_norm = linalg::norm3(right);
        let right = right.map(|x| x / right_norm);

        let foot = n.map(|x| x * plane.offset);
        let to_xy = |d: [f64; 3]| {
            let r = linalg::mat_vec(&rotation, d);
            [r[0], r[1]]
        };
        Ok(Self { plane, rotation, origin: to_xy(foot), x_axis: to_xy(right), y_axis: to_xy(forward) })
    }

    /// Aligns `p` to the XY plane, drops `z` and expresses the result in the
    /// camera-foot frame.
    pub fn to_bev(&self, p: Point3) -> BevPoint {
        let r = linalg::mat_vec(&self.rotation, p.to_array());
        let d = [r[0] - self.origin[0], r[1] - self.origin[1]];
        BevPoint::new(
            d[0] * self.x_axis[0] + d[1] * self.x_axis[1],
            d[0] * self.y_axis[0] + d[1] * self.y_axis[1],
        )
    }
}
