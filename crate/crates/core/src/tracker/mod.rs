//! Track lifecycle: active and inactive sets, forecast pruning and
//! re-association of inactive tracks with new detections.

mod cost;
mod relink;
mod scene;

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use cost::{build_cost_matrix, pair_score, prune_forecasts, CostMatrix};
pub use relink::{relink, TrackObservation};
pub use scene::{GroundMask, SceneModel};

use crate::assignment::assign;
use crate::bbox::PixelBox;
use crate::forecast::{forecast, preprocess, Forecast, MotionModelSpec, PreprocessConfig};
use crate::geometry::{px_to_bev, BevPoint};
use crate::{Error, Frame, Result};

/// Gates and lifetimes of inactive-track matching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatchThresholds {
    /// BEV distance below which the geometric bonus is positive, meters.
    pub tau_l2: f64,
    /// Minimum cosine similarity of appearance descriptors.
    pub tau_app: f64,
    /// Minimum IoU of the predicted box with the detection; 0 disables the gate.
    pub tau_iou: f64,
    /// Forecast lifetime, seconds.
    pub tau_max: f64,
    /// How long a branch may stay visible without being matched, seconds.
    pub tau_vis: f64,
    /// IoU with a nearer detection above which a branch counts as occluded.
    pub occlusion_iou: f64,
}

impl Default for MatchThresholds {
    fn default() -> Self {
        Self { tau_l2: 2.5, tau_app: 0.8, tau_iou: 0.2, tau_max: 6.0, tau_vis: 1.0, occlusion_iou: 0.25 }
    }
}

impl MatchThresholds {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tau_l2 >= 0.0
            && (-1.0..=1.0).contains(&self.tau_app)
            && (0.0..=1.0).contains(&self.tau_iou)
            && self.tau_vis > 0.0
            && self.tau_max > self.tau_vis
            && self.occlusion_iou > 0.0
            && self.occlusion_iou <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(alloc::format!("thresholds out of range: {self:?}")))
        }
    }
}

/// One detection. An empty appearance vector means "unknown" and passes the
/// appearance gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub frame: Frame,
    pub bbox: PixelBox,
    pub appearance: Vec<f64>,
    /// World-frame ground position; filled in by the tracker.
    pub bev: BevPoint,
}

impl Detection {
    pub fn new(frame: Frame, bbox: PixelBox, appearance: Vec<f64>) -> Self {
        Self { frame, bbox, appearance, bev: BevPoint::ZERO }
    }
}

/// Cosine similarity of unit descriptors; 1 when either is unknown.
pub fn appearance_similarity(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 1.0;
    }
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrackState {
    Active,
    /// Lost and carried by a forecast. `since` is the last observed frame.
    Inactive { since: Frame, forecast: Forecast },
    /// Lost without a forecast (plain IoU tracker).
    Lost { since: Frame },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u32,
    /// Recent detections, oldest first.
    pub history: Vec<Detection>,
    pub state: TrackState,
    pub last_appearance: Vec<f64>,
}

impl Track {
    pub fn last(&self) -> &Detection {
        self.history.last().expect("tracks are created from a detection")
    }

    pub fn is_active(&self) -> bool {
        matches!(self.state, TrackState::Active)
    }

    pub fn forecast(&self) -> Option<&Forecast> {
        match &self.state {
            TrackState::Inactive { forecast, .. } => Some(forecast),
            _ => None,
        }
    }

    pub fn bev_history(&self) -> Vec<(Frame, BevPoint)> {
        self.history.iter().map(|d| (d.frame, d.bev)).collect()
    }

    fn observe(&mut self, det: Detection, keep_frames: u32) {
        if !det.appearance.is_empty() {
            self.last_appearance = det.appearance.clone();
        }
        let cutoff = det.frame.saturating_sub(keep_frames);
        self.history.push(det);
        let stale = self.history.iter().take_while(|d| d.frame < cutoff).count();
        self.history.drain(..stale);
        self.state = TrackState::Active;
    }
}

/// Tracker settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    pub thresholds: MatchThresholds,
    pub motion: MotionModelSpec,
    pub obs_len: usize,
    pub dt: f64,
    pub base_iou: f64,
    pub forecasting: bool,
    pub baseline_patience: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        crate::RunConfig::default().tracker()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventReason {
    New,
    Continued,
    Lost,
    Resumed,
    Pruned,
    Expired,
}

/// One association log record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackEvent {
    pub frame: Frame,
    pub track_id: u32,
    pub detection_index: Option<usize>,
    pub score: Option<f64>,
    pub branch_id: Option<usize>,
    pub reason: EventReason,
}

/// A confirmed box of a track at one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackOutput {
    pub frame: Frame,
    pub id: u32,
    pub bbox: PixelBox,
    pub bev: BevPoint,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepResult {
    pub outputs: Vec<TrackOutput>,
    pub events: Vec<TrackEvent>,
}

/// Single-sequence tracker.
#[derive(Debug, Clone)]
pub struct TrackerState {
    config: TrackerConfig,
    tracks: Vec<Track>,
    next_id: u32,
    last_frame: Option<Frame>,
}

impl TrackerState {
    pub fn new(config: TrackerConfig) -> Result<Self> {
        config.thresholds.validate()?;
        config.motion.validate()?;
        if config.obs_len == 0 || !(config.dt > 0.0) {
            return Err(Error::InvalidConfig("obs_len must be >= 1 and dt > 0".into()));
        }
        Ok(Self { config, tracks: Vec::new(), next_id: 1, last_frame: None })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    /// Live tracks in creation order.
    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Id the next new track will get; ids are never reused.
    pub fn next_id(&self) -> u32 {
        self.next_id
    }

    /// Processes the detections of `frame`.
    pub fn step(&mut self, scene: &SceneModel, mut detections: Vec<Detection>, frame: Frame) -> Result<StepResult> {
        if let Some(previous) = self.last_frame {
            if frame <= previous {
                return Err(Error::NonMonotonicFrame { previous, got: frame });
            }
        }
        self.last_frame = Some(frame);
        for d in &mut detections {
            d.frame = frame;
            d.bev = px_to_bev(&scene.lh, d.bbox.bottom_center(), scene.ego.as_ref(), frame);
        }
        let cfg = self.config.clone();
        let th = cfg.thresholds;
        let keep_frames = libm::ceil(cfg.obs_len as f64 * cfg.dt * scene.fps) as u32 + 1;
        let mut out = StepResult::default();
        let mut taken = vec![false; detections.len()];
        let mut matched: Vec<(usize, usize)> = Vec::new();

        // Frame-to-frame association of active tracks.
        let mut candidates = Vec::new();
        for (ti, t) in self.tracks.iter().enumerate().filter(|(_, t)| t.is_active()) {
            for (j, d) in detections.iter().enumerate() {
                let iou = t.last().bbox.iou(&d.bbox);
                if iou >= cfg.base_iou && iou > 0.0 {
                    candidates.push((iou, ti, j));
                }
            }
        }
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut track_used = vec![false; self.tracks.len()];
        for (iou, ti, j) in candidates {
            if track_used[ti] || taken[j] {
                continue;
            }
            track_used[ti] = true;
            taken[j] = true;
            matched.push((ti, j));
            out.events.push(event(frame, self.tracks[ti].id, Some(j), Some(iou), None, EventReason::Continued));
        }

        // Unmatched active tracks are lost.
        for (ti, t) in self.tracks.iter_mut().enumerate() {
            if t.is_active() && !track_used[ti] {
                lose(t, &cfg, scene)?;
                out.events.push(event(frame, t.id, None, None, None, EventReason::Lost));
            }
        }

        // Move forecasts along, prune what should have been seen, expire.
        let expired: Vec<bool> =
            self.tracks.iter_mut().map(|t| age(t, &cfg, scene, &detections, frame, &mut out.events)).collect();

        // Re-associate inactive tracks with the remaining detections.
        let free: Vec<usize> = (0..detections.len()).filter(|&j| !taken[j]).collect();
        let inactive: Vec<usize> = (0..self.tracks.len())
            .filter(|&ti| !expired[ti] && matches!(self.tracks[ti].state, TrackState::Inactive { .. }))
            .collect();
        if !free.is_empty() && !inactive.is_empty() {
            let dets: Vec<Detection> = free.iter().map(|&j| detections[j].clone()).collect();
            let rows: Vec<&Track> = inactive.iter().map(|&ti| &self.tracks[ti]).collect();
            let cm = build_cost_matrix(&rows, &dets, &th, scene);
            for (r, c) in assign(&cm.scores) {
                let (ti, j) = (inactive[r], free[c]);
                taken[j] = true;
                track_used[ti] = true;
                matched.push((ti, j));
                let score = cm.scores.get(r, c);
                out.events.push(event(frame, self.tracks[ti].id, Some(j), Some(score), cm.best_branch(r, c), EventReason::Resumed));
            }
        }

        // Plain tracker: IoU with the last box of lost tracks.
        let mut candidates = Vec::new();
        for (ti, t) in self.tracks.iter().enumerate() {
            if expired[ti] || !matches!(t.state, TrackState::Lost { .. }) {
                continue;
            }
            for (j, d) in detections.iter().enumerate().filter(|(j, _)| !taken[*j]) {
                let iou = t.last().bbox.iou(&d.bbox);
                if iou >= cfg.base_iou && iou > 0.0 {
                    candidates.push((iou, ti, j));
                }
            }
        }
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        for (iou, ti, j) in candidates {
            if track_used[ti] || taken[j] {
                continue;
            }
            track_used[ti] = true;
            taken[j] = true;
            matched.push((ti, j));
            out.events.push(event(frame, self.tracks[ti].id, Some(j), Some(iou), None, EventReason::Resumed));
        }

        for &(ti, j) in &matched {
            self.tracks[ti].observe(detections[j].clone(), keep_frames);
        }
        let first_new = self.tracks.len();
        for (j, d) in detections.iter().enumerate().filter(|(j, _)| !taken[*j]) {
            let id = self.next_id;
            self.next_id += 1;
            self.tracks.push(Track {
                id,
                history: vec![d.clone()],
                state: TrackState::Active,
                last_appearance: d.appearance.clone(),
            });
            out.events.push(event(frame, id, Some(j), None, None, EventReason::New));
        }

        let mut emitted: Vec<usize> = matched.iter().map(|m| m.0).chain(first_new..self.tracks.len()).collect();
        emitted.sort_unstable();
        for ti in emitted {
            let t = &self.tracks[ti];
            let d = t.last();
            out.outputs.push(TrackOutput { frame, id: t.id, bbox: d.bbox, bev: d.bev });
        }
        out.outputs.sort_by_key(|o| o.id);
        let mut keep = expired.into_iter();
        self.tracks.retain(|_| !keep.next().unwrap_or(false));
        Ok(out)
    }
}

/// Moves an active track to the lost state, with a forecast when enabled.
fn lose(t: &mut Track, cfg: &TrackerConfig, scene: &SceneModel) -> Result<()> {
    let since = t.last().frame;
    t.state = if cfg.forecasting {
        let pre = PreprocessConfig { obs_len: cfg.obs_len, dt: cfg.dt, fps: scene.fps, kalman: cfg.motion.kalman_params() };
        let obs = preprocess(&t.bev_history(), &pre)?;
        let horizon = scene.frames(cfg.thresholds.tau_max).max(1) as usize;
        TrackState::Inactive { since, forecast: forecast(&cfg.motion, &obs, horizon)? }
    } else {
        TrackState::Lost { since }
    };
    Ok(())
}

/// Advances and prunes the forecast of a lost track; returns whether the
/// track has expired.
fn age(t: &mut Track, cfg: &TrackerConfig, scene: &SceneModel, detections: &[Detection], frame: Frame, events: &mut Vec<TrackEvent>) -> bool {
    let th = &cfg.thresholds;
    let mut expire = match &mut t.state {
        TrackState::Active => false,
        TrackState::Lost { since } => frame - *since > scene.frames(cfg.baseline_patience),
        TrackState::Inactive { since, forecast } => {
            frame - *since > scene.frames(th.tau_max) || forecast.advance_to(frame).is_err()
        }
    };
    if !expire && t.forecast().is_some() {
        for b in prune_forecasts(t, scene, detections, frame, th) {
            events.push(event(frame, t.id, None, None, Some(b), EventReason::Pruned));
        }
        expire = t.forecast().is_some_and(Forecast::is_dead);
    }
    if expire {
        events.push(event(frame, t.id, None, None, None, EventReason::Expired));
    }
    expire
}

fn event(frame: Frame, track_id: u32, det: Option<usize>, score: Option<f64>, branch: Option<usize>, reason: EventReason) -> TrackEvent {
    TrackEvent { frame, track_id, detection_index: det, score, branch_id: branch, reason }
}

/// Runs a whole sequence. Frames without detections may be omitted.
pub fn run_sequence(
    config: TrackerConfig,
    scene: &SceneModel,
    frames: impl IntoIterator<Item = (Frame, Vec<Detection>)>,
) -> Result<(Vec<TrackOutput>, Vec<TrackEvent>)> {
    let mut state = TrackerState::new(config)?;
    let mut frames: Vec<(Frame, Vec<Detection>)> = frames.into_iter().collect();
    frames.sort_by_key(|f| f.0);
    let (Some(first), Some(last)) = (frames.first().map(|f| f.0), frames.last().map(|f| f.0)) else {
        return Ok((Vec::new(), Vec::new()));
    };
    let mut by_frame = frames.into_iter().peekable();
    let (mut outputs, mut events) = (Vec::new(), Vec::new());
    for frame in first..=last {
        let dets = match by_frame.peek() {
            Some((f, _)) if *f == frame => by_frame.next().map(|(_, d)| d).unwrap_or_default(),
            Some((f, _)) if *f < frame => return Err(Error::NonMonotonicFrame { previous: frame, got: *f }),
            _ => Vec::new(),
        };
        let r = state.step(scene, dets, frame)?;
        outputs.extend(r.outputs);
        events.extend(r.events);
    }
    Ok((outputs, events))
}
