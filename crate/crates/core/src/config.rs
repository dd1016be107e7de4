//! Run configuration shared by the tracker, the forecaster and evaluation.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::eval::EvalConfig;
use crate::forecast::{MotionModelSpec, PreprocessConfig};
use crate::tracker::{MatchThresholds, TrackerConfig};
use crate::Result;

/// Every tunable of a run. Missing keys take their defaults; unknown keys
/// are rejected when deserializing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub thresholds: MatchThresholds,
    pub motion: MotionModelSpec,
    /// Observation window, in grid steps.
    pub obs_len: usize,
    /// Prediction length for standalone forecast dumps, in grid steps.
    pub pred_len: usize,
    /// Grid step, seconds.
    pub dt: f64,
    /// Ground mask cell size, meters.
    pub ground_cell: f64,
    /// Largest BEV distance between vertically adjacent pixels, meters.
    pub max_spacing: f64,
    pub seed: u64,
    /// IoU needed by the frame-to-frame association of active tracks.
    pub base_iou: f64,
    /// Disable to run the plain IoU tracker.
    pub forecasting: bool,
    /// How long the plain tracker keeps a lost track for IoU re-matching, seconds.
    pub baseline_patience: f64,
    pub evaluation: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            thresholds: MatchThresholds::default(),
            motion: MotionModelSpec::default(),
            obs_len: 8,
            pred_len: 12,
            dt: 0.4,
            ground_cell: 0.25,
            max_spacing: 0.2,
            seed: 0,
            base_iou: 0.5,
            forecasting: true,
            baseline_patience: 1.0,
            evaluation: EvalConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(crate::Error::InvalidConfig(msg.into()));
        self.thresholds.validate()?;
        self.motion.validate()?;
        self.evaluation.validate()?;
        if self.obs_len == 0 || self.pred_len == 0 {
            return bad("obs_len and pred_len must be at least 1");
        }
        if !(self.dt > 0.0 && self.ground_cell > 0.0 && self.max_spacing > 0.0) {
            return bad("dt, ground_cell and max_spacing must be positive");
        }
        if !(0.0..=1.0).contains(&self.base_iou) || self.baseline_patience < 0.0 {
            return bad("base_iou must lie in [0, 1] and baseline_patience must be non-negative");
        }
        Ok(())
    }

    pub fn preprocess(&self, fps: f64) -> PreprocessConfig {
        PreprocessConfig { obs_len: self.obs_len, dt: self.dt, fps, kalman: self.motion.kalman_params() }
    }

    pub fn tracker(&self) -> TrackerConfig {
        TrackerConfig {
            thresholds: self.thresholds,
            motion: self.motion.clone(),
            obs_len: self.obs_len,
            dt: self.dt,
            base_iou: self.base_iou,
            forecasting: self.forecasting,
            baseline_patience: self.baseline_patience,
        }
    }

    /// ID recall bucket edges, seconds.
    pub fn buckets(&self) -> &Vec<f64> {
        &self.evaluation.buckets
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.thresholds.tau_l2, 2.5);
        assert_eq!(c.thresholds.tau_app, 0.8);
        assert_eq!(c.thresholds.tau_iou, 0.2);
        assert_eq!(c.thresholds.tau_max, 6.0);
        assert_eq!(c.thresholds.tau_vis, 1.0);
        assert_eq!(c.thresholds.occlusion_iou, 0.25);
        assert_eq!((c.obs_len, c.pred_len, c.dt), (8, 12, 0.4));
    }
}
