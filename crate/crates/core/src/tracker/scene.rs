use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{BevPoint, EgomotionTrack, LinearizedHomography, PixelPoint};
use crate::{Error, Frame, Result};

/// Occupancy grid of ground that the camera can see, in camera-local BEV
/// coordinates. Cell `(c, r)` covers
/// `[origin.x + c·cell, origin.x + (c+1)·cell) × [origin.y + r·cell, ...)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundMask {
    pub origin: BevPoint,
    pub cell: f64,
    pub cols: usize,
    pub rows: usize,
    /// Row-major occupancy.
    pub cells: Vec<bool>,
}

impl GroundMask {
    /// Builds a mask over `[min, max]` from a predicate on cell centers.
    pub fn from_fn(min: BevPoint, max: BevPoint, cell: f64, mut occupied: impl FnMut(BevPoint) -> bool) -> Result<Self> {
        if !(cell > 0.0) || !(max.x > min.x && max.y > min.y) {
            return Err(Error::InvalidConfig("ground mask needs a positive cell size and a non-empty extent".into()));
        }
        let cols = libm::ceil((max.x - min.x) / cell) as usize;
        let rows = libm::ceil((max.y - min.y) / cell) as usize;
        let mut cells = Vec::with_capacity(cols * rows);
        for r in 0..rows {
            for c in 0..cols {
                let center = BevPoint::new(min.x + (c as f64 + 0.5) * cell, min.y + (r as f64 + 0.5) * cell);
                cells.push(occupied(center));
            }
        }
        if !cells.iter().any(|&b| b) {
            return Err(Error::InvalidConfig("ground mask is empty".into()));
        }
        Ok(Self { origin: min, cell, cols, rows, cells })
    }

    /// Every cell inside `extent` whose center projects into the image.
    pub fn from_footprint(lh: &LinearizedHomography, min: BevPoint, max: BevPoint, cell: f64) -> Result<Self> {
        let (w, h) = (lh.image_width() as f64, lh.image_height() as f64);
        Self::from_fn(min, max, cell, |p| match lh.to_pixel(p) {
            Ok(PixelPoint { u, v }) => (0.0..w).contains(&u) && (0.0..h).contains(&v),
            Err(_) => false,
        })
    }

    pub fn contains(&self, p: BevPoint) -> bool {
        let c = libm::floor((p.x - self.origin.x) / self.cell);
        let r = libm::floor((p.y - self.origin.y) / self.cell);
        if !(c >= 0.0 && r >= 0.0 && (c as usize) < self.cols && (r as usize) < self.rows) {
            return false;
        }
        self.cells[r as usize * self.cols + c as usize]
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }
}

/// Everything the tracker knows about the scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneModel {
    pub mask: GroundMask,
    pub lh: LinearizedHomography,
    pub fps: f64,
    pub ego: Option<EgomotionTrack>,
}

impl SceneModel {
    pub fn new(mask: GroundMask, lh: LinearizedHomography, fps: f64, ego: Option<EgomotionTrack>) -> Result<Self> {
        if !(fps > 0.0) {
            return Err(Error::InvalidConfig("fps must be positive".into()));
        }
        Ok(Self { mask, lh, fps, ego })
    }

    /// Whether a world-frame BEV point lies on visible ground at `frame`.
    pub fn on_ground(&self, world: BevPoint, frame: Frame) -> bool {
        let local = match &self.ego {
            Some(e) => world - e.offset(frame),
            None => world,
        };
        self.mask.contains(local)
    }

    pub fn frames(&self, seconds: f64) -> u32 {
        libm::round(seconds * self.fps) as u32
    }
}
