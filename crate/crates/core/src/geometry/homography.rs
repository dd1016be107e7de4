use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{BevPoint, PixelPoint};
use crate::linalg::{self, Mat3};
use crate::{Error, Result};

/// Projective map from image pixels to BEV meters: `x ∝ H · (u, v, 1)`.
///
/// Stored normalized so that `h33 = 1`, or with unit Frobenius norm when
/// `h33` vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Homography {
    m: Mat3,
}

impl Homography {
    pub const IDENTITY: Homography = Homography { m: linalg::IDENTITY };

    pub fn new(m: Mat3) -> Result<Self> {
        if m.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateInput("homography entries must be finite"));
        }
        let scale = if m[2][2].abs() > 1e-12 {
            m[2][2]
        } else {
            libm::sqrt(m.iter().flatten().map(|x| x * x).sum::<f64>())
        };
        if scale == 0.0 {
            return Err(Error::DegenerateInput("zero homography"));
        }
        let m = m.map(|row| row.map(|x| x / scale));
        if linalg::det(&m).abs() <= 1e-12 {
            return Err(Error::DegenerateInput("homography is singular"));
        }
        Ok(Self { m })
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    pub fn inverse(&self) -> Homography {
        // Invertibility was checked on construction.
        let inv = linalg::inverse(&self.m).expect("homography invertible");
        let scale = if inv[2][2].abs() > 1e-12 {
            inv[2][2]
        } else {
            libm::sqrt(inv.iter().flatten().map(|x| x * x).sum::<f64>())
        };
        Homography { m: inv.map(|row| row.map(|x| x / scale)) }
    }

    /// Homogeneous image of `(u, v, 1)`.
    pub fn apply_homogeneous(&self, u: f64, v: f64) -> [f64; 3] {
        linalg::mat_vec(&self.m, [u, v, 1.0])
    }

    /// Exact projective map; `None` on the horizon line.
    pub fn map(&self, p: PixelPoint) -> Option<BevPoint> {
        let [x, y, w] = self.apply_homogeneous(p.u, p.v);
        (w != 0.0).then(|| BevPoint::new(x / w, y / w))
    }

    /// Exact inverse projective map; `None` when the point maps to infinity.
    pub fn map_inverse(&self, x: BevPoint) -> Option<PixelPoint> {
        let inv = linalg::inverse(&self.m)?;
        let [u, v, w] = linalg::mat_vec(&inv, [x.x, x.y, 1.0]);
        (w != 0.0).then(|| PixelPoint::new(u / w, v / w))
    }

    /// Whether the bottom row is `(0, 0, h33)`.
    pub fn is_affine(&self) -> bool {
        let scale = self.m.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
        self.m[2][0].abs() <= 1e-14 * scale && self.m[2][1].abs() <= 1e-14 * scale
    }
}

/// Result of a DLT fit: the homography and its reprojection RMSE in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomographyFit {
    pub homography: Homography,
    pub rmse: f64,
}

/// Isotropic normalization: centroid to the origin, mean distance `sqrt(2)`.
fn normalizer(points: &[[f64; 2]]) -> Mat3 {
    let n = points.len() as f64;
    let (cx, cy) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p[0] / n, b + p[1] / n));
    let mean_dist = points.iter().map(|p| libm::hypot(p[0] - cx, p[1] - cy)).sum::<f64>() / n;
    let s = if mean_dist > 0.0 { core::f64::consts::SQRT_2 / mean_dist } else { 1.0 };
    [[s, 0.0, -s * cx], [0.0, s, -s * cy], [0.0, 0.0, 1.0]]
}

fn transform(t: &Mat3, p: [f64; 2]) -> [f64; 2] {
    let q = linalg::mat_vec(t, [p[0], p[1], 1.0]);
    [q[0] / q[2], q[1] / q[2]]
}

/// Direct linear transform with normalization of both point sets.
///
/// Minimizes the algebraic error; the smallest right singular vector of the
/// stacked constraint matrix gives the normalized homography.
pub fn estimate_homography(correspondences: &[(PixelPoint, BevPoint)]) -> Result<HomographyFit> {
    if correspondences.len() < 4 {
        return Err(Error::DegenerateInput("homography needs at least 4 correspondences"));
    }
    let px: Vec<[f64; 2]> = correspondences.iter().map(|(p, _)| [p.u, p.v]).collect();
    let bev: Vec<[f64; 2]> = correspondences.iter().map(|(_, b)| [b.x, b.y]).collect();
    if px.iter().chain(&bev).flatten().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateInput("non-finite correspondence"));
    }
    let tp = normalizer(&px);
    let tb = normalizer(&bev);

    let rows = (2 * correspondences.len()).max(9);
    let mut a = alloc::vec![0.0; rows * 9];
    for (i, (p, b)) in px.iter().zip(&bev).enumerate() {
        let [u, v] = transform(&tp, *p);
        let [x, y] = transform(&tb, *b);
        a[(2 * i) * 9..(2 * i + 1) * 9].copy_from_slice(&[u, v, 1.0, 0.0, 0.0, 0.0, -x * u, -x * v, -x]);
        a[(2 * i + 1) * 9..(2 * i + 2) * 9].copy_from_slice(&[0.0, 0.0, 0.0, u, v, 1.0, -y * u, -y * v, -y]);
    }
    let svd = linalg::svd(&a, rows, 9);
    if svd.values[7] <= 1e-9 * svd.values[0] {
        return Err(Error::DegenerateInput("correspondences do not determine a unique homography"));
    }
    let h = &svd.vectors[8];
    let hn = [[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], h[8]]];
    let tb_inv = linalg::inverse(&tb).ok_or(Error::DegenerateInput("degenerate BEV points"))?;
    let m = linalg::mat_mul(&tb_inv, &linalg::mat_mul(&hn, &tp));
    let homography = Homography::new(m)?;

    let mut sq = 0.0;
    for (p, b) in correspondences {
        let err = match homography.map(*p) {
            Some(q) => q.distance(*b),
            None => f64::INFINITY,
        };
        sq += err * err;
    }
    let rmse = libm::sqrt(sq / correspondences.len() as f64);
    Ok(HomographyFit { homography, rmse })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perspective() -> Homography {
        Homography::new([[0.02, 0.001, -10.0], [0.0005, -0.05, 40.0], [0.0, 0.002, 1.0]]).unwrap()
    }

    #[test]
    fn identity_from_corners() {
        let corners = [(0.0, 0.0), (100.0, 0.0), (100.0, 50.0), (0.0, 50.0)];
        let c: Vec<_> = corners.iter().map(|&(u, v)| (PixelPoint::new(u, v), BevPoint::new(u, v))).collect();
        let fit = estimate_homography(&c).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((fit.homography.matrix()[i][j] - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn recovers_known_homography() {
        let truth = perspective();
        let mut c = Vec::new();
        for i in 0..20 {
            for j in 0..10 {
                let p = PixelPoint::new(40.0 + i as f64 * 50.0, 200.0 + j as f64 * 40.0);
                c.push((p, truth.map(p).unwrap()));
            }
        }
        let fit = estimate_homography(&c).unwrap();
        assert!(fit.rmse < 1e-8, "rmse {}", fit.rmse);
        for i in 0..3 {
            for j in 0..3 {
                let (a, b) = (fit.homography.matrix()[i][j], truth.matrix()[i][j]);
                assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{i}{j}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn collinear_triple_rejected() {
        let c = [
            (PixelPoint::new(0.0, 0.0), BevPoint::new(0.0, 0.0)),
            (PixelPoint::new(1.0, 1.0), BevPoint::new(1.0, 1.0)),
            (PixelPoint::new(2.0, 2.0), BevPoint::new(2.0, 2.0)),
            (PixelPoint::new(0.0, 5.0), BevPoint::new(0.0, 5.0)),
        ];
        assert!(matches!(estimate_homography(&c), Err(Error::DegenerateInput(_))));
        assert!(matches!(estimate_homography(&c[..3]), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn inverse_is_inverse() {
        let h = perspective();
        let p = PixelPoint::new(321.0, 456.0);
        let back = h.map_inverse(h.map(p).unwrap()).unwrap();
        assert!((back.u - p.u).abs() < 1e-9 && (back.v - p.v).abs() < 1e-9);
        let m = crate::linalg::mat_mul(h.matrix(), h.inverse().matrix());
        assert!((m[0][0] / m[2][2] - 1.0).abs() < 1e-12 && (m[0][1] / m[2][2]).abs() < 1e-12);
    }

    #[test]
    fn singular_rejected() {
        assert!(Homography::new([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]]).is_err());
    }
}
