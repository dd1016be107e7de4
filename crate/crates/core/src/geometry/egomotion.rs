use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{BevPoint, LinearizedHomography, PixelPoint};
use crate::{Error, Frame, Result};

/// Cumulative camera translation per frame, zero at the first frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgomotionTrack {
    pub first_frame: Frame,
    pub offsets: Vec<BevPoint>,
}

impl EgomotionTrack {
    /// Static camera over `frames` frames.
    pub fn stationary(first_frame: Frame, frames: usize) -> Self {
        Self { first_frame, offsets: alloc::vec![BevPoint::ZERO; frames.max(1)] }
    }

    /// Accumulates per-frame translations; `deltas[i]` moves the camera from
    /// frame `first_frame + i` to the next one.
    pub fn from_deltas(first_frame: Frame, deltas: &[BevPoint]) -> Self {
        let mut offsets = Vec::with_capacity(deltas.len() + 1);
        let mut acc = BevPoint::ZERO;
        offsets.push(acc);
        for d in deltas {
            acc += *d;
            offsets.push(acc);
        }
        Self { first_frame, offsets }
    }

    /// Offset at `frame`; frames outside the track clamp to its ends.
    pub fn offset(&self, frame: Frame) -> BevPoint {
        let idx = frame.saturating_sub(self.first_frame) as usize;
        self.offsets.get(idx).or(self.offsets.last()).copied().unwrap_or(BevPoint::ZERO)
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum EgomotionEstimator {
    #[default]
    Mean,
    /// Per-axis mean after dropping `fraction` of the samples at each end.
    TrimmedMean { fraction: f64 },
}

/// Camera translation between two frames from matched ground pixels.
///
/// Each pair is lifted to BEV with its frame's homography; the camera moved
/// by the negated mean displacement. Rotation is not estimated.
pub fn estimate_egomotion(
    prev_pts: &[PixelPoint],
    cur_pts: &[PixelPoint],
    h_prev: &LinearizedHomography,
    h_cur: &LinearizedHomography,
) -> Result<BevPoint> {
    estimate_egomotion_with(prev_pts, cur_pts, h_prev, h_cur, EgomotionEstimator::Mean)
}

pub fn estimate_egomotion_with(
    prev_pts: &[PixelPoint],
    cur_pts: &[PixelPoint],
    h_prev: &LinearizedHomography,
    h_cur: &LinearizedHomography,
    estimator: EgomotionEstimator,
) -> Result<BevPoint> {
    if prev_pts.is_empty() || prev_pts.len() != cur_pts.len() {
        return Err(Error::DegenerateInput("egomotion needs equally many point pairs, at least one"));
    }
    let (mut dx, mut dy): (Vec<f64>, Vec<f64>) = prev_pts
        .iter()
        .zip(cur_pts)
        .map(|(p, c)| {
            let d = h_cur.to_bev(*c) - h_prev.to_bev(*p);
            (d.x, d.y)
        })
        .unzip();
    let mean = match estimator {
        EgomotionEstimator::Mean => BevPoint::new(mean(&dx), mean(&dy)),
        EgomotionEstimator::TrimmedMean { fraction } => {
            BevPoint::new(trimmed_mean(&mut dx, fraction), trimmed_mean(&mut dy, fraction))
        }
    };
    Ok(-mean)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn trimmed_mean(xs: &mut [f64], fraction: f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let cut = ((xs.len() as f64) * fraction.clamp(0.0, 0.49)) as usize;
    mean(&xs[cut..xs.len() - cut])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Homography;

    #[test]
    fn identical_points_give_zero() {
        let lh = LinearizedHomography::new(Homography::IDENTITY, 10, 10, 0.2).unwrap();
        let pts = [PixelPoint::new(1.0, 2.0), PixelPoint::new(3.0, 4.0)];
        assert_eq!(estimate_egomotion(&pts, &pts, &lh, &lh).unwrap(), BevPoint::ZERO);
    }

    #[test]
    fn empty_rejected() {
        let lh = LinearizedHomography::new(Homography::IDENTITY, 10, 10, 0.2).unwrap();
        assert!(estimate_egomotion(&[], &[], &lh, &lh).is_err());
    }

    #[test]
    fn trimmed_mean_ignores_outlier() {
        let lh = LinearizedHomography::new(Homography::IDENTITY, 10, 10, 0.2).unwrap();
        let prev: Vec<_> = (0..10).map(|i| PixelPoint::new(i as f64, 0.0)).collect();
        let mut cur: Vec<_> = prev.iter().map(|p| PixelPoint::new(p.u - 1.0, p.v)).collect();
        cur[3].u += 100.0;
        let t = estimate_egomotion_with(&prev, &cur, &lh, &lh, EgomotionEstimator::TrimmedMean { fraction: 0.2 })
            .unwrap();
        assert_eq!(t, BevPoint::new(1.0, 0.0));
    }

    #[test]
    fn offsets_accumulate() {
        let track = EgomotionTrack::from_deltas(1, &[BevPoint::new(0.5, 0.0), BevPoint::new(0.5, 0.25)]);
        assert_eq!(track.offset(1), BevPoint::ZERO);
        assert_eq!(track.offset(3), BevPoint::new(1.0, 0.25));
        assert_eq!(track.offset(30), BevPoint::new(1.0, 0.25));
    }
}
