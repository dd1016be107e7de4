use serde::{Deserialize, Serialize};

use crate::geometry::{BevPoint, GroundPlane, Homography, Intrinsics, PixelPoint, Point3};
use crate::{Error, Result};

/// Pinhole camera above a flat ground, looking along BEV `+y` and tilted
/// down; principal point at the image center, no distortion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSpec {
    /// Meters above the ground.
    pub height: f64,
    /// Downward pitch, degrees.
    pub tilt: f64,
    /// Focal length, pixels.
    pub focal: f64,
    pub image_width: u32,
    pub image_height: u32,
}

/// Smallest camera depth at which a point still projects.
const MIN_DEPTH: f64 = 1e-6;

impl CameraSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.height > 0.0
            && self.tilt > 0.0
            && self.tilt < 90.0
            && self.focal > 0.0
            && self.image_width > 0
            && self.image_height > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidScenario(alloc::format!("invalid camera {self:?}")))
        }
    }

    fn trig(&self) -> (f64, f64) {
        let t = self.tilt.to_radians();
        (libm::sin(t), libm::cos(t))
    }

    pub fn center(&self) -> PixelPoint {
        PixelPoint::new(0.5 * self.image_width as f64, 0.5 * self.image_height as f64)
    }

    pub fn intrinsics(&self) -> Intrinsics {
        Intrinsics { focal: self.focal, center: self.center() }
    }

    /// Camera-frame coordinates (`x` right, `y` down, `z` forward) of a
    /// camera-local point with `z` up.
    pub fn to_camera(&self, p: Point3) -> Point3 {
        let (s, c) = self.trig();
        let dz = p.z - self.height;
        Point3::new(p.x, -p.y * s - dz * c, p.y * c - dz * s)
    }

    /// Inverse of [`CameraSpec::to_camera`].
    pub fn from_camera(&self, q: Point3) -> Point3 {
        let (s, c) = self.trig();
        Point3::new(q.x, -q.y * s + q.z * c, self.height - q.y * c - q.z * s)
    }

    /// Pixel of a camera-local point; `None` behind the camera.
    pub fn project(&self, p: Point3) -> Option<PixelPoint> {
        self.project_camera(self.to_camera(p))
    }

    pub fn project_camera(&self, q: Point3) -> Option<PixelPoint> {
        if q.z <= MIN_DEPTH {
            return None;
        }
        let c = self.center();
        Some(PixelPoint::new(c.u + self.focal * q.x / q.z, c.v + self.focal * q.y / q.z))
    }

    pub fn depth(&self, p: Point3) -> f64 {
        self.to_camera(p).z
    }

    /// Unnormalized viewing ray of a pixel in camera coordinates.
    pub fn ray(&self, p: PixelPoint) -> Point3 {
        let c = self.center();
        Point3::new((p.u - c.u) / self.focal, (p.v - c.v) / self.focal, 1.0)
    }

    /// Ground plane in camera coordinates.
    pub fn ground_plane(&self) -> GroundPlane {
        let (s, c) = self.trig();
        GroundPlane::new([0.0, c, s], self.height).expect("unit normal")
    }

    /// Where the pixel's ray meets the ground, as camera-frame point and
    /// camera-local BEV position.
    pub fn ground_hit(&self, p: PixelPoint) -> Option<(Point3, BevPoint)> {
        let d = self.ray(p);
        let n = self.ground_plane().normal;
        let along = d.x * n[0] + d.y * n[1] + d.z * n[2];
        if along <= 1e-12 {
            return None;
        }
        let t = self.height / along;
        let q = Point3::new(d.x * t, d.y * t, d.z * t);
        let local = self.from_camera(q);
        Some((q, BevPoint::new(local.x, local.y)))
    }

    /// Exact pixel to camera-local BEV homography.
    pub fn homography(&self) -> Homography {
        let (s, c) = self.trig();
        let (f, h) = (self.focal, self.height);
        let PixelPoint { u: cx, v: cy } = self.center();
        // Ground to pixel, then inverted.
        let m = [[f, cx * c, cx * h * s], [0.0, -f * s + cy * c, f * h * c + cy * h * s], [0.0, c, h * s]];
        Homography::new(m).expect("camera above the ground").inverse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam() -> CameraSpec {
        CameraSpec { height: 6.0, tilt: 30.0, focal: 1000.0, image_width: 1280, image_height: 720 }
    }

    #[test]
    fn homography_matches_projection() {
        let c = cam();
        let h = c.homography();
        for (x, y) in [(0.0, 5.0), (3.0, 12.0), (-7.0, 30.0)] {
            let px = c.project(Point3::new(x, y, 0.0)).unwrap();
            let back = h.map(px).unwrap();
            assert!(back.distance(BevPoint::new(x, y)) < 1e-9, "{back:?}");
            let (_, hit) = c.ground_hit(px).unwrap();
            assert!(hit.distance(BevPoint::new(x, y)) < 1e-9);
        }
    }

    #[test]
    fn camera_frame_roundtrip() {
        let c = cam();
        let p = Point3::new(1.0, 2.0, 3.0);
        let q = c.from_camera(c.to_camera(p));
        assert!((q.x - p.x).abs() < 1e-12 && (q.y - p.y).abs() < 1e-12 && (q.z - p.z).abs() < 1e-12);
        // Points on the ground satisfy the camera-frame plane equation.
        let g = c.to_camera(Point3::new(2.0, 9.0, 0.0));
        assert!((c.ground_plane().signed_distance(g)).abs() < 1e-12);
        assert!(c.project(Point3::new(0.0, -20.0, 0.0)).is_none());
    }
}
