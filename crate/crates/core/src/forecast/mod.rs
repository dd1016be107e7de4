//! Fixed-grid observation building and k-branch trajectory forecasts.

mod kalman;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use kalman::KalmanParams;

use crate::bbox::PixelBox;
use crate::geometry::{bev_to_px, BevPoint, EgomotionTrack, LinearizedHomography};
use crate::{Error, Frame, Result};

/// Observation window handed to a motion model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedTrajectory {
    /// Smoothed positions on the `dt` grid, oldest first, ending at `last_frame`.
    pub points: Vec<BevPoint>,
    pub dt: f64,
    pub fps: f64,
    pub last_frame: Frame,
    /// Leading points that were back-extrapolated rather than observed.
    pub extrapolated_prefix: usize,
    /// Smoothed velocity at the last point, meters per second.
    pub velocity: BevPoint,
}

impl ObservedTrajectory {
    pub fn last(&self) -> BevPoint {
        *self.points.last().expect("observation is never empty")
    }
}

/// Preprocessing knobs: window length, grid step and smoother noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessConfig {
    pub obs_len: usize,
    pub dt: f64,
    pub fps: f64,
    pub kalman: KalmanParams,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { obs_len: 8, dt: 0.4, fps: 30.0, kalman: KalmanParams { process_noise: 0.01, obs_noise: 0.0625 } }
    }
}

/// Resamples a BEV track history onto the `dt` grid ending at its last
/// observation, smooths it with a constant-velocity Kalman smoother, and
/// back-extrapolates linearly when fewer than `obs_len` grid points exist.
pub fn preprocess(history: &[(Frame, BevPoint)], cfg: &PreprocessConfig) -> Result<ObservedTrajectory> {
    let Some(&(last_frame, _)) = history.last() else {
        return Err(Error::DegenerateInput("empty track history"));
    };
    if history.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::DegenerateInput("history frames must be strictly increasing"));
    }
    if !(cfg.dt > 0.0 && cfg.fps > 0.0) || cfg.obs_len == 0 {
        return Err(Error::InvalidConfig("preprocessing needs dt > 0, fps > 0 and obs_len >= 1".into()));
    }
    let times: Vec<f64> = history.iter().map(|(f, _)| *f as f64 / cfg.fps).collect();
    let (t_first, t_last) = (times[0], times[times.len() - 1]);
    let available = libm::floor((t_last - t_first) / cfg.dt + 1e-9) as usize + 1;
    let m = available.min(cfg.obs_len);

    let mut grid = Vec::with_capacity(m);
    let mut seg = 0;
    for j in 0..m {
        let t = t_last - (m - 1 - j) as f64 * cfg.dt;
        while seg + 1 < times.len() - 1 && times[seg + 1] < t {
            seg += 1;
        }
        grid.push(interpolate(history, &times, seg, t));
    }

    let dt = cfg.dt;
    let (v0, v0_var) = if m >= 2 {
        ((grid[1] - grid[0]) * (1.0 / dt), 2.0 * cfg.kalman.obs_noise / (dt * dt))
    } else if history.len() >= 2 {
        let span = t_last - t_first;
        ((history[history.len() - 1].1 - history[0].1) * (1.0 / span), 2.0 * cfg.kalman.obs_noise / (span * span))
    } else {
        (BevPoint::ZERO, 100.0)
    };
    let xs: Vec<f64> = grid.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = grid.iter().map(|p| p.y).collect();
    let sx = kalman::smooth_axis(&xs, dt, cfg.kalman, v0.x, v0_var);
    let sy = kalman::smooth_axis(&ys, dt, cfg.kalman, v0.y, v0_var);

    let prefix = cfg.obs_len - m;
    let first = BevPoint::new(sx[0][0], sy[0][0]);
    let first_vel = BevPoint::new(sx[0][1], sy[0][1]);
    let mut points = Vec::with_capacity(cfg.obs_len);
    for j in 0..prefix {
        points.push(first - first_vel * ((prefix - j) as f64 * dt));
    }
    points.extend(sx.iter().zip(&sy).map(|(x, y)| BevPoint::new(x[0], y[0])));
    let velocity = BevPoint::new(sx[m - 1][1], sy[m - 1][1]);
    Ok(ObservedTrajectory { points, dt, fps: cfg.fps, last_frame, extrapolated_prefix: prefix, velocity })
}

fn interpolate(history: &[(Frame, BevPoint)], times: &[f64], seg: usize, t: f64) -> BevPoint {
    if history.len() == 1 {
        return history[0].1;
    }
    let (t0, t1) = (times[seg], times[seg + 1]);
    let (p0, p1) = (history[seg].1, history[seg + 1].1);
    if t >= t1 {
        return p1;
    }
    if t <= t0 {
        return p0;
    }
    let a = (t - t0) / (t1 - t0);
    p0 + (p1 - p0) * a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    /// Object stays where it was last seen.
    Static,
    /// Constant velocity from the smoothed state.
    KalmanCv,
    /// Constant speed along `k` headings fanned around the smoothed velocity.
    Fan,
}

/// Motion model selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotionModelSpec {
    pub kind: MotionKind,
    pub k: usize,
    /// Heading offsets in degrees, counter-clockwise; `fan` only.
    pub fan_angles: Vec<f64>,
    /// Smoother acceleration variance, (m/s^2)^2.
    pub process_noise: f64,
    /// Smoother observation variance, m^2.
    pub obs_noise: f64,
}

impl Default for MotionModelSpec {
    fn default() -> Self {
        Self::fan(alloc::vec![-30.0, 0.0, 30.0])
    }
}

impl MotionModelSpec {
    pub fn static_model() -> Self {
        Self { kind: MotionKind::Static, k: 1, fan_angles: Vec::new(), process_noise: 0.01, obs_noise: 0.0625 }
    }

    pub fn kalman_cv() -> Self {
        Self { kind: MotionKind::KalmanCv, ..Self::static_model() }
    }

    pub fn fan(angles: Vec<f64>) -> Self {
        Self { kind: MotionKind::Fan, k: angles.len(), fan_angles: angles, ..Self::static_model() }
    }

    /// Symmetric fan of `k` headings spread over `[-spread, spread]` degrees.
    pub fn symmetric_fan(k: usize, spread: f64) -> Self {
        let angles = if k <= 1 {
            alloc::vec![0.0]
        } else {
            (0..k).map(|i| -spread + 2.0 * spread * i as f64 / (k - 1) as f64).collect()
        };
        Self::fan(angles)
    }

    pub fn kalman_params(&self) -> KalmanParams {
        KalmanParams { process_noise: self.process_noise, obs_noise: self.obs_noise }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.k == 0 {
            return bad("motion model needs k >= 1");
        }
        match self.kind {
            MotionKind::Static | MotionKind::KalmanCv if self.k != 1 => {
                return bad("static and kalman_cv models produce exactly one branch")
            }
            MotionKind::Fan if self.fan_angles.len() != self.k => return bad("fan needs k == fan_angles.len()"),
            _ => {}
        }
        if !(self.process_noise > 0.0 && self.obs_noise > 0.0) {
            return bad("kalman variances must be positive");
        }
        Ok(())
    }
}

/// One hypothesized future of a lost track, one point per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastBranch {
    pub points: Vec<BevPoint>,
    pub frames: Vec<Frame>,
    pub alive: bool,
    /// Consecutive frames in which this branch should have been visible.
    pub visible_streak: u32,
}

/// A set of forecast branches sharing one cursor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub branches: Vec<ForecastBranch>,
    /// Number of steps consumed; the current point of a branch is
    /// `points[cursor - 1]`.
    pub cursor: usize,
    /// Last observed frame; branch point `i` belongs to frame
    /// `created_frame + i + 1`.
    pub created_frame: Frame,
}

impl Forecast {
    pub fn k(&self) -> usize {
        self.branches.len()
    }

    pub fn is_dead(&self) -> bool {
        self.branches.iter().all(|b| !b.alive)
    }

    pub fn alive_count(&self) -> usize {
        self.branches.iter().filter(|b| b.alive).count()
    }

    /// Frame of the current cursor position, if any step has been taken.
    pub fn current_frame(&self) -> Option<Frame> {
        (self.cursor > 0).then(|| self.created_frame + self.cursor as Frame)
    }

    /// Current point of every alive branch.
    pub fn current(&self) -> Vec<(usize, BevPoint)> {
        if self.cursor == 0 {
            return Vec::new();
        }
        self.branches
            .iter()
            .enumerate()
            .filter(|(_, b)| b.alive)
            .filter_map(|(i, b)| b.points.get(self.cursor - 1).map(|p| (i, *p)))
            .collect()
    }

    /// Moves the cursor one step and returns the new current points.
    pub fn advance(&mut self) -> Result<Vec<(usize, BevPoint)>> {
        if self.is_dead() {
            return Err(Error::DeadForecast);
        }
        self.cursor += 1;
        for b in &mut self.branches {
            if self.cursor > b.points.len() {
                b.alive = false;
            }
        }
        if self.is_dead() {
            return Err(Error::DeadForecast);
        }
        Ok(self.current())
    }

    /// Advances until the cursor sits on `frame`.
    pub fn advance_to(&mut self, frame: Frame) -> Result<Vec<(usize, BevPoint)>> {
        if frame <= self.created_frame {
            return Ok(Vec::new());
        }
        let target = (frame - self.created_frame) as usize;
        while self.cursor < target {
            self.advance()?;
        }
        Ok(self.current())
    }

    pub fn kill_branch(&mut self, branch: usize) {
        if let Some(b) = self.branches.get_mut(branch) {
            b.alive = false;
        }
    }

    /// Point of `branch` at `frame`, regardless of the cursor.
    pub fn point_at(&self, branch: usize, frame: Frame) -> Option<BevPoint> {
        let b = self.branches.get(branch)?;
        let idx = frame.checked_sub(self.created_frame + 1)? as usize;
        b.points.get(idx).copied()
    }
}

/// Produces a `horizon_steps`-frame forecast starting after `obs.last_frame`.
pub fn forecast(model: &MotionModelSpec, obs: &ObservedTrajectory, horizon_steps: usize) -> Result<Forecast> {
    model.validate()?;
    if horizon_steps == 0 {
        return Err(Error::InvalidConfig("forecast horizon must be at least one step".into()));
    }
    let last = obs.last();
    let velocities: Vec<BevPoint> = match model.kind {
        MotionKind::Static => alloc::vec![BevPoint::ZERO],
        MotionKind::KalmanCv => alloc::vec![obs.velocity],
        MotionKind::Fan => model.fan_angles.iter().map(|deg| obs.velocity.rotated(deg.to_radians())).collect(),
    };
    let frames: Vec<Frame> = (1..=horizon_steps).map(|i| obs.last_frame + i as Frame).collect();
    let branches = velocities
        .into_iter()
        .map(|v| ForecastBranch {
            points: (1..=horizon_steps).map(|i| last + v * (i as f64 / obs.fps)).collect(),
            frames: frames.clone(),
            alive: true,
            visible_streak: 0,
        })
        .collect();
    Ok(Forecast { branches, cursor: 0, created_frame: obs.last_frame })
}

/// Moves `last_box` so that its bottom-center sits on the image of
/// `predicted`; width and height are kept.
pub fn predicted_box(
    last_box: &PixelBox,
    predicted: BevPoint,
    lh: &LinearizedHomography,
    ego: Option<&EgomotionTrack>,
    frame: Frame,
) -> Result<PixelBox> {
    let p = bev_to_px(lh, predicted, ego, frame)?;
    Ok(last_box.with_bottom_center(p))
}
