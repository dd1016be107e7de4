use alloc::vec::Vec;

use super::{BevPoint, EgomotionTrack, Homography, PixelPoint};
use crate::linalg::{self, Mat3};
use crate::{Error, Frame, Result};

/// How the image-to-BEV map behaves near the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Linearization {
    /// Bottom row `(0, 0, h33)`: no horizon, nothing to linearize.
    Affine,
    /// Horizon crosses the columns; each column is linearized above its
    /// threshold row.
    Perspective,
    /// Horizon parallel to the columns (`h32 = 0`, `h31 != 0`); the column
    /// rule has no threshold, so the exact map is kept.
    VerticalHorizon,
}

/// Linearization threshold of one pixel column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnThreshold {
    /// Threshold row `v_T(u)`; rows above it (smaller `v`) use the tangent.
    pub v_threshold: f64,
    /// BEV position at the threshold row.
    pub value: BevPoint,
    /// Derivative of the BEV position with respect to `v` at the threshold.
    pub tangent: BevPoint,
}

/// Image-to-BEV map whose far field is replaced, column by column, by the
/// first-order extension at the row where one pixel step covers exactly
/// `max_spacing` meters.
///
/// Along one image column the projective map traces a straight BEV line whose
/// speed `|d BEV / dv|` falls monotonically away from the horizon. Below the
/// threshold row the exact map is used and a one-row step never exceeds
/// `max_spacing`; above it the map continues linearly at exactly that speed,
/// so the piecewise map is C1 along each column and invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedHomography {
    base: Homography,
    inverse: Mat3,
    image_width: u32,
    image_height: u32,
    max_spacing: f64,
    mode: Linearization,
    columns: Vec<ColumnThreshold>,
    horizon_inside_footprint: bool,
}

impl LinearizedHomography {
    /// Linearizes `h` for an image of `image_width x image_height` pixels.
    pub fn new(h: Homography, image_width: u32, image_height: u32, max_spacing: f64) -> Result<Self> {
        if !(max_spacing > 0.0) || !max_spacing.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!("max_spacing must be positive, got {max_spacing}")));
        }
        let m = h.matrix();
        let mode = if h.is_affine() {
            Linearization::Affine
        } else if m[2][1].abs() <= 1e-14 * m[2][0].abs() {
            Linearization::VerticalHorizon
        } else {
            Linearization::Perspective
        };
        let inverse = linalg::inverse(m).ok_or(Error::DegenerateInput("homography is singular"))?;
        let mut lh = Self {
            base: h,
            inverse,
            image_width,
            image_height,
            max_spacing,
            mode,
            columns: Vec::new(),
            horizon_inside_footprint: mode == Linearization::VerticalHorizon,
        };
        lh.columns = (0..image_width).map(|u| lh.threshold_at(u as f64)).collect();
        if mode == Linearization::Perspective {
            lh.horizon_inside_footprint = lh.columns.iter().any(|c| c.v_threshold >= image_height as f64);
        }
        Ok(lh)
    }

    pub fn base(&self) -> &Homography {
        &self.base
    }

    pub fn image_width(&self) -> u32 {
        self.image_width
    }

    pub fn image_height(&self) -> u32 {
        self.image_height
    }

    pub fn max_spacing(&self) -> f64 {
        self.max_spacing
    }

    pub fn mode(&self) -> Linearization {
        self.mode
    }

    /// Whether linearization changes anything at all.
    pub fn is_linearized(&self) -> bool {
        self.mode == Linearization::Perspective
    }

    /// Set when some image column lies entirely inside the linearized band
    /// or when the horizon runs parallel to the columns.
    pub fn horizon_inside_footprint(&self) -> bool {
        self.horizon_inside_footprint
    }

    /// Cached thresholds for integer columns `0..image_width`.
    pub fn columns(&self) -> &[ColumnThreshold] {
        &self.columns
    }

    /// Row where the exact map's denominator vanishes in column `u`.
    pub fn horizon_row(&self, u: f64) -> Option<f64> {
        let m = self.base.matrix();
        (m[2][1] != 0.0).then(|| -(m[2][0] * u + m[2][2]) / m[2][1])
    }

    /// Threshold data for any (possibly fractional) column.
    pub fn threshold_at(&self, u: f64) -> ColumnThreshold {
        let m = self.base.matrix();
        match self.mode {
            Linearization::Affine | Linearization::VerticalHorizon => {
                let c = m[2][0] * u + m[2][2];
                let value = BevPoint::new((m[0][0] * u + m[0][2]) / c, (m[1][0] * u + m[1][2]) / c);
                ColumnThreshold { v_threshold: 0.0, value, tangent: BevPoint::new(m[0][1] / c, m[1][1] / c) }
            }
            Linearization::Perspective => {
                let col = Column::new(m, u);
                let d_t = col.sign * libm::sqrt(col.k.norm() / self.max_spacing);
                let v_t = (d_t - col.c) / col.e;
                let value = BevPoint::new((col.ax + col.bx * v_t) / d_t, (col.ay + col.by * v_t) / d_t);
                ColumnThreshold { v_threshold: v_t, value, tangent: col.k * (1.0 / (d_t * d_t)) }
            }
        }
    }

    /// Piecewise map from pixels to camera-relative BEV.
    pub fn to_bev(&self, p: PixelPoint) -> BevPoint {
        let m = self.base.matrix();
        if self.mode != Linearization::Perspective {
            let [x, y, w] = self.base.apply_homogeneous(p.u, p.v);
            return BevPoint::new(x / w, y / w);
        }
        let col = Column::new(m, p.u);
        let d = col.c + col.e * p.v;
        let d_t = libm::sqrt(col.k.norm() / self.max_spacing);
        if col.sign * d >= d_t {
            BevPoint::new((col.ax + col.bx * p.v) / d, (col.ay + col.by * p.v) / d)
        } else {
            let t = self.threshold_at(p.u);
            t.value + t.tangent * (p.v - t.v_threshold)
        }
    }

    /// Inverse of [`to_bev`](Self::to_bev).
    ///
    /// The column is recovered from the exact inverse: every column maps onto
    /// one BEV line, and the linear piece continues along that same line.
    pub fn to_pixel(&self, x: BevPoint) -> Result<PixelPoint> {
        let out_of_domain = Error::OutOfDomain { x: x.x, y: x.y };
        let [pu, pv, pw] = linalg::mat_vec(&self.inverse, [x.x, x.y, 1.0]);
        if pw.abs() <= 1e-300 || !(pu / pw).is_finite() {
            return Err(out_of_domain);
        }
        let (u, v_exact) = (pu / pw, pv / pw);
        if self.mode != Linearization::Perspective {
            return Ok(PixelPoint::new(u, v_exact));
        }
        let col = Column::new(self.base.matrix(), u);
        let d = col.c + col.e * v_exact;
        let d_t = libm::sqrt(col.k.norm() / self.max_spacing);
        if v_exact.is_finite() && col.sign * d >= d_t {
            return Ok(PixelPoint::new(u, v_exact));
        }
        let t = self.threshold_at(u);
        let step = (x - t.value).dot(t.tangent) / t.tangent.dot(t.tangent);
        if step <= 0.0 {
            Ok(PixelPoint::new(u, t.v_threshold + step))
        } else {
            Err(out_of_domain)
        }
    }
}

/// Coefficients of the projective map restricted to column `u`:
/// `BEV(v) = (a + b v) / (c + e v)` per coordinate.
struct Column {
    ax: f64,
    bx: f64,
    ay: f64,
    by: f64,
    c: f64,
    e: f64,
    /// `(b c - a e)` per coordinate; `dBEV/dv = k / d^2`.
    k: BevPoint,
    /// Sign of the denominator on the ground side (below the horizon).
    sign: f64,
}

impl Column {
    fn new(m: &Mat3, u: f64) -> Self {
        let (ax, bx) = (m[0][0] * u + m[0][2], m[0][1]);
        let (ay, by) = (m[1][0] * u + m[1][2], m[1][1]);
        let (c, e) = (m[2][0] * u + m[2][2], m[2][1]);
        let k = BevPoint::new(bx * c - ax * e, by * c - ay * e);
        Self { ax, bx, ay, by, c, e, k, sign: e.signum() }
    }
}

/// Linearize `h` for the given image size; see [`LinearizedHomography`].
pub fn linearize(h: Homography, image_width: u32, image_height: u32, max_spacing: f64) -> Result<LinearizedHomography> {
    LinearizedHomography::new(h, image_width, image_height, max_spacing)
}

/// Pixel to BEV, adding the cumulative camera translation when `ego` is given.
pub fn px_to_bev(lh: &LinearizedHomography, p: PixelPoint, ego: Option<&EgomotionTrack>, frame: Frame) -> BevPoint {
    let local = lh.to_bev(p);
    match ego {
        Some(track) => local + track.offset(frame),
        None => local,
    }
}

/// BEV to pixel, removing the cumulative camera translation when `ego` is given.
///
/// Results above the image top (negative `v`) are returned as-is.
pub fn bev_to_px(
    lh: &LinearizedHomography,
    x: BevPoint,
    ego: Option<&EgomotionTrack>,
    frame: Frame,
) -> Result<PixelPoint> {
    let local = match ego {
        Some(track) => x - track.offset(frame),
        None => x,
    };
    lh.to_pixel(local)
}
