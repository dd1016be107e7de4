use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{estimate_homography, fit_ground_plane, BevPoint, GroundFrame, GroundPlane, HomographyFit, PixelPoint, Point3};
use crate::{Error, Result};

/// Pinhole intrinsics without distortion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub focal: f64,
    pub center: PixelPoint,
}

impl Intrinsics {
    pub fn project(&self, p: Point3) -> Option<PixelPoint> {
        (p.z > 1e-9).then(|| PixelPoint::new(self.center.u + self.focal * p.x / p.z, self.center.v + self.focal * p.y / p.z))
    }

    /// Camera-frame ray through a pixel, with unit depth.
    pub fn ray(&self, p: PixelPoint) -> Point3 {
        Point3::new((p.u - self.center.u) / self.focal, (p.v - self.center.v) / self.focal, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub plane: GroundPlane,
    pub fit: HomographyFit,
    /// Points within the inlier tolerance of the plane.
    pub inliers: usize,
}

/// Where a pixel's ray meets a camera-frame plane.
pub fn ray_plane_hit(intr: &Intrinsics, plane: &GroundPlane, p: PixelPoint) -> Option<Point3> {
    let d = intr.ray(p);
    let along = plane.normal[0] * d.x + plane.normal[1] * d.y + plane.normal[2] * d.z;
    if along.abs() < 1e-12 {
        return None;
    }
    let t = plane.offset / along;
    (t > 0.0).then(|| Point3::new(d.x * t, d.y * t, d.z * t))
}

/// Image-to-BEV homography from a camera-frame point cloud.
///
/// Fits the ground plane, keeps the points near it, and pairs the pixel of
/// each kept point with the BEV position of its ray's hit on the fitted
/// plane.
pub fn calibrate(points: &[Point3], intr: &Intrinsics, inlier_tol: f64, iterations: usize, seed: u64) -> Result<Calibration> {
    let plane = fit_ground_plane(points, inlier_tol, iterations, seed)?;
    let frame = GroundFrame::from_camera_plane(plane)?;
    let pairs: Vec<(PixelPoint, BevPoint)> = points
        .iter()
        .filter(|p| plane.signed_distance(**p).abs() <= inlier_tol)
        .filter_map(|p| {
            let px = intr.project(*p)?;
            let hit = ray_plane_hit(intr, &plane, px)?;
            Some((px, frame.to_bev(hit)))
        })
        .collect();
    if pairs.len() < 4 {
        return Err(Error::DegenerateInput("too few ground points for a homography"));
    }
    let fit = estimate_homography(&pairs)?;
    Ok(Calibration { plane, fit, inliers: pairs.len() })
}
